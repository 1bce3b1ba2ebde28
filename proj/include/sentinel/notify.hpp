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

#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sentinel/audit.hpp"
#include "sentinel/objconf.hpp"
#include "sentinel/statemachine.hpp"
#include "sentinel/timeutil.hpp"

namespace sentinel::notify {

struct NotificationPolicy {
  objconf::NotificationOptions options;
  int notification_interval = 0;  // interval units; 0 = never renotify
  std::string notification_period = "24x7";
  std::vector<std::string> contact_groups;
  bool is_host = false;

  static NotificationPolicy from(const objconf::ServiceDef& def);
  static NotificationPolicy from(const objconf::HostDef& def);
};

/// Contact groups for an object: its own, else (services) those of its host,
/// else those of the host's hostgroups.
std::vector<std::string> effective_contact_groups(const objconf::ResolvedConfig& config, const ObjectKey& key);

struct Decision {
  bool notify = false;
  std::string reason;  // first failing gate; empty when notify is true
};

using PeriodTable = std::map<std::string, objconf::TimePeriodDef>;

/// Gates in order: option letter, period, acknowledgement (RECOVERY exempt),
/// downtime, renotify interval (RENOTIFY_ELIGIBLE only).
Decision should_notify(const state::StateEvent& event, const NotificationPolicy& policy,
                       const state::MonitorState& state, const PeriodTable& periods, TimePoint now,
                       Seconds interval_length = Seconds{60}, const TimeZone& zone = TimeZone::local(),
                       AuditLog* audit = nullptr);

bool in_period(const objconf::TimePeriodDef& period, TimePoint at, const TimeZone& zone = TimeZone::local());

/// Option letter an event needs ('r' for RECOVERY), or 0 for events that never notify.
char option_letter(const state::StateEvent& event);

struct NotificationMessage {
  std::string notification_type;  // PROBLEM or RECOVERY
  std::optional<std::string> service_description;
  std::string host_alias;
  std::string address;
  std::string state;
  TimePoint at{};
  std::string additional_info;
  std::vector<std::string> recipients;
};

/// Builds the message for a PROBLEM, RECOVERY or RENOTIFY_ELIGIBLE event.
NotificationMessage make_message(const state::StateEvent& event, const objconf::ResolvedConfig& config,
                                 std::vector<std::string> recipients);

std::string render_message(const NotificationMessage& msg, const std::string& engine_name,
                           const std::string& version, const TimeZone& zone = TimeZone::local());

/// Substitutes $NOTIFICATIONTYPE$ $SERVICEDESC$ $HOSTALIAS$ $HOSTADDRESS$
/// $SERVICESTATE$ $DATETIME$ $OUTPUT$, each shell-quoted.
std::string expand_channel_command(const std::string& command_line, const NotificationMessage& msg,
                                   const TimeZone& zone = TimeZone::local());

struct DispatchRecord {
  std::string group;
  std::string channel;
  bool ok = false;
  int exit_code = -1;
  int attempts = 0;
  TimePoint at{};
  std::string error;
};

/// "<ISO8601> <recipient-group> <channel> <status>"
std::string format_dispatch_line(const DispatchRecord& r);

struct DispatchOptions {
  std::string engine_name = "Sentinel";
  std::string version = "1.0";
  TimeZone zone = TimeZone::local();
  std::chrono::milliseconds timeout{30000};
};

/// Runs one channel command via /bin/sh with the rendered message on stdin.
/// A failed attempt is retried once. Never throws.
DispatchRecord dispatch(const NotificationMessage& msg, const std::string& group, const std::string& channel,
                        const std::string& command_line, const DispatchOptions& options = {});

/// Bounded worker pool for dispatches; records land in the log in completion order.
class DispatchPool {
 public:
  struct Job {
    NotificationMessage msg;
    std::string group;
    std::string channel;
    std::string command_line;
  };

  DispatchPool(DispatchOptions options, std::size_t workers, LineLog* log = nullptr, AuditLog* audit = nullptr);
  ~DispatchPool();
  DispatchPool(const DispatchPool&) = delete;
  DispatchPool& operator=(const DispatchPool&) = delete;

  void submit(Job job);
  /// Blocks until every submitted job has finished.
  void drain();
  std::vector<DispatchRecord> records() const;

 private:
  void run();

  DispatchOptions options_;
  LineLog* log_;
  AuditLog* audit_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::deque<Job> queue_;
  std::size_t busy_ = 0;
  bool stopping_ = false;
  std::vector<DispatchRecord> records_;
  std::vector<std::thread> threads_;
};

}  // namespace sentinel::notify
