/*
 * Copyright 2026 The Sentinel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Object definition files: `define <kind>{ ... }` blocks with one
// `key value` attribute per line, `use`-based template inheritance and
// `register 0` templates.

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sentinel/timeutil.hpp"
#include "sentinel/types.hpp"

namespace sentinel::objconf {

struct SourceLocation {
  std::string file;
  int line = 0;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;  // stable machine-readable category, e.g. "unknown-parent"
  std::string message;
  SourceLocation where;

  std::string str() const;
};

std::size_t count_code(std::span<const Diagnostic> diags, std::string_view code);

struct RawObjectBlock {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> attributes;
  SourceLocation location;

  const std::string* find(std::string_view key) const;

  // Location is provenance, not content.
  bool operator==(const RawObjectBlock& o) const { return kind == o.kind && attributes == o.attributes; }
};

struct ParseResult {
  std::vector<RawObjectBlock> blocks;
  std::vector<Diagnostic> diagnostics;
};

/// Never throws on malformed input; bad regions become diagnostics.
ParseResult parse_objects(std::string_view text, std::string_view source = "<input>");

bool is_known_kind(std::string_view kind);

/// Subset of the option letters allowed for an object kind, kept in canonical order.
class NotificationOptions {
 public:
  static constexpr std::string_view kServiceLetters = "wucr";
  static constexpr std::string_view kHostLetters = "dur";

  NotificationOptions() = default;
  static NotificationOptions all(std::string_view allowed) { return NotificationOptions(std::string(allowed)); }
  static NotificationOptions none() { return NotificationOptions(); }

  /// "w,u,c,r" style list; "n" means none. Sets `bad` to the first unknown letter.
  static std::optional<NotificationOptions> parse(std::string_view text, std::string_view allowed,
                                                  std::string* bad = nullptr);

  bool has(char letter) const { return letters_.find(letter) != std::string::npos; }
  bool empty() const { return letters_.empty(); }
  const std::string& letters() const { return letters_; }
  NotificationOptions with(char letter, std::string_view allowed) const;
  std::string str() const;  // "w,u,c,r" or "n"

  bool operator==(const NotificationOptions&) const = default;

 private:
  explicit NotificationOptions(std::string letters) : letters_(std::move(letters)) {}
  std::string letters_;
};

/// `name!arg1!arg2` command reference.
struct CommandRef {
  std::string name;
  std::vector<std::string> args;

  static CommandRef parse(std::string_view text);
  bool empty() const { return name.empty(); }
  std::string str() const;
  bool operator==(const CommandRef&) const = default;
};

using ExtraAttributes = std::vector<std::pair<std::string, std::string>>;

struct ServiceDef {
  std::optional<std::string> name;
  std::string service_description;
  std::string host_name;
  bool is_volatile = false;
  bool active_checks_enabled = true;
  bool passive_checks_enabled = true;
  std::string check_period;
  int max_check_attempts = 0;
  int normal_check_interval = 5;
  int retry_check_interval = 1;
  int notification_interval = 30;  // 0 = never renotify
  std::string notification_period = "24x7";
  NotificationOptions notification_options = NotificationOptions::all(NotificationOptions::kServiceLetters);
  CommandRef check_command;
  std::vector<std::string> contact_groups;
  bool register_object = true;
  ExtraAttributes extra;

  bool operator==(const ServiceDef&) const = default;
};

struct HostDef {
  std::optional<std::string> name;
  std::string host_name;
  std::string alias;
  std::string address;
  std::vector<std::string> parents;
  CommandRef check_command;  // empty: host is assumed up
  bool active_checks_enabled = true;
  bool passive_checks_enabled = true;
  std::string check_period = "24x7";
  int max_check_attempts = 3;
  int normal_check_interval = 5;
  int retry_check_interval = 1;
  int notification_interval = 30;
  std::string notification_period = "24x7";
  NotificationOptions notification_options = NotificationOptions::all(NotificationOptions::kHostLetters);
  std::vector<std::string> contact_groups;
  bool register_object = true;
  ExtraAttributes extra;

  bool operator==(const HostDef&) const = default;
};

struct HostGroupDef {
  std::optional<std::string> name;
  std::string hostgroup_name;
  std::string alias;
  std::vector<std::string> contact_groups;
  std::vector<std::string> members;
  ExtraAttributes extra;

  bool operator==(const HostGroupDef&) const = default;
};

/// Half-open [start, end) in minutes of the day.
struct MinuteRange {
  int start = 0;
  int end = 0;
  bool operator==(const MinuteRange&) const = default;
};

struct TimePeriodDef {
  std::string period_name;
  std::string alias;
  std::array<std::vector<MinuteRange>, 7> ranges;  // index 0 = Sunday, as tm_wday
  ExtraAttributes extra;

  static TimePeriodDef always(std::string name = "24x7");
  bool contains(TimePoint t, const TimeZone& zone) const;
  bool operator==(const TimePeriodDef&) const = default;
};

struct CommandDef {
  std::string command_name;
  std::string command_line;
  ExtraAttributes extra;
  bool operator==(const CommandDef&) const = default;
};

/// One delivery route of a contact group. `period` overrides the object's
/// notification period for this channel only (operator calendar hours).
struct Channel {
  std::string command;
  std::optional<std::string> period;
  bool operator==(const Channel&) const = default;
};

struct ContactGroupDef {
  std::string contactgroup_name;
  std::string alias;
  std::vector<Channel> channels;
  ExtraAttributes extra;
  bool operator==(const ContactGroupDef&) const = default;
};

struct ResolvedConfig {
  std::map<std::string, HostDef> hosts;
  std::map<ObjectKey, ServiceDef> services;
  std::map<std::string, HostGroupDef> hostgroups;
  std::map<std::string, ContactGroupDef> contactgroups;
  std::map<std::string, TimePeriodDef> timeperiods;
  std::map<std::string, CommandDef> commands;
  std::vector<RawObjectBlock> unknown_blocks;

  const HostDef* find_host(std::string_view host) const;
  const ServiceDef* find_service(const ObjectKey& key) const;
  std::vector<std::string> hostgroups_of(std::string_view host) const;

  bool operator==(const ResolvedConfig&) const = default;
};

struct ResolveResult {
  ResolvedConfig config;
  std::vector<Diagnostic> diagnostics;
  std::map<std::string, std::vector<std::string>> templates;  // kind -> template names
};

ResolveResult resolve_templates(std::span<const RawObjectBlock> blocks);

/// Cross-reference and structural checks; empty iff deployable.
std::vector<Diagnostic> validate(const ResolvedConfig& config);

/// Canonical text form: every registered object with all resolved attributes spelled out.
std::string print_config(const ResolvedConfig& config);

/// Parse + resolve + validate over several files, diagnostics concatenated.
struct LoadResult {
  ResolvedConfig config;
  std::vector<Diagnostic> diagnostics;
};
LoadResult load_files(std::span<const std::filesystem::path> files);
LoadResult load_text(std::string_view text, std::string_view source = "<input>");

/// Macros available when expanding a check command line.
struct MacroContext {
  std::string plugin_dir;
};

/// Expands the object's check_command into argv. Empty when the object has no command
/// or the command is undefined.
std::vector<std::string> build_check_argv(const ResolvedConfig& config, const ObjectKey& key,
                                          const MacroContext& macros);

// ---- asset inventory ----

enum class HostClass { NetworkDevice, FarmPC, Printer, WorkgroupServer, Mail, WebServer, AFSServer };

std::string_view to_string(HostClass c);
std::optional<HostClass> parse_host_class(std::string_view s);

struct AssetRecord {
  std::string hostname;
  std::string address;
  HostClass host_class = HostClass::FarmPC;
  std::string owner_contact_group;
};

class AssetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PolicyService {
  std::string description;
  std::string command;  // command reference, `name!args`
};

/// Host class -> checks. Every host gets the host check; classes add services.
struct MonitoringPolicy {
  std::string host_check_command = "check-host-alive";
  std::map<HostClass, std::vector<PolicyService>> services;
  std::map<std::string, std::string> commands;  // command_name -> command_line

  /// Network Device/Farm PC: ping only; Printer: external printer plugin;
  /// Workgroup Server: load, disk, process; Mail: POP and IMAP ports;
  /// WEB Server: HTTP; AFS Server: external service plugin.
  static MonitoringPolicy defaults();
};

/// CSV with header `hostname,address,host_class,contact_group`.
std::vector<AssetRecord> parse_assets_csv(std::string_view text);

/// Deterministic (sorted by hostname). Throws AssetError on duplicate hostnames.
std::string generate_from_assets(std::span<const AssetRecord> assets,
                                 const MonitoringPolicy& policy = MonitoringPolicy::defaults());

}  // namespace sentinel::objconf
