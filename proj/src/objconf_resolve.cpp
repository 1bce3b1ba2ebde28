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

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "sentinel/objconf.hpp"
#include "sentinel/strutil.hpp"

namespace sentinel::objconf {

// ---- small value types ----

std::optional<NotificationOptions> NotificationOptions::parse(std::string_view text, std::string_view allowed,
                                                              std::string* bad) {
  auto items = split_list(text);
  if (items.size() == 1 && items[0] == "n") return none();
  std::string letters;
  for (const auto& item : items) {
    if (item.size() != 1 || allowed.find(item[0]) == std::string_view::npos) {
      if (bad) *bad = item;
      return std::nullopt;
    }
  }
  for (char c : allowed) {
    if (std::any_of(items.begin(), items.end(), [c](const std::string& s) { return s[0] == c; })) letters += c;
  }
  return NotificationOptions(std::move(letters));
}

NotificationOptions NotificationOptions::with(char letter, std::string_view allowed) const {
  std::string letters;
  for (char c : allowed) {
    if (c == letter || has(c)) letters += c;
  }
  return NotificationOptions(std::move(letters));
}

std::string NotificationOptions::str() const {
  if (letters_.empty()) return "n";
  std::string out;
  for (char c : letters_) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

CommandRef CommandRef::parse(std::string_view text) {
  CommandRef ref;
  auto parts = split_fields(trim(text), '!');
  ref.name = std::string(trim(parts[0]));
  for (std::size_t i = 1; i < parts.size(); ++i) ref.args.emplace_back(parts[i]);
  return ref;
}

std::string CommandRef::str() const {
  std::string out = name;
  for (const auto& a : args) {
    out += '!';
    out += a;
  }
  return out;
}

TimePeriodDef TimePeriodDef::always(std::string name) {
  TimePeriodDef p;
  p.period_name = std::move(name);
  p.alias = "24 Hours A Day, 7 Days A Week";
  for (auto& day : p.ranges) day.push_back({0, 1440});
  return p;
}

bool TimePeriodDef::contains(TimePoint t, const TimeZone& zone) const {
  auto local = zone.breakdown(t);
  int minute = local.tm.tm_hour * 60 + local.tm.tm_min;
  for (const auto& r : ranges[static_cast<std::size_t>(local.tm.tm_wday)]) {
    if (minute >= r.start && minute < r.end) return true;
  }
  return false;
}

const HostDef* ResolvedConfig::find_host(std::string_view host) const {
  auto it = hosts.find(std::string(host));
  return it == hosts.end() ? nullptr : &it->second;
}

const ServiceDef* ResolvedConfig::find_service(const ObjectKey& key) const {
  auto it = services.find(key);
  return it == services.end() ? nullptr : &it->second;
}

std::vector<std::string> ResolvedConfig::hostgroups_of(std::string_view host) const {
  std::vector<std::string> out;
  for (const auto& [name, group] : hostgroups) {
    if (std::find(group.members.begin(), group.members.end(), host) != group.members.end()) out.push_back(name);
  }
  return out;
}

namespace {

constexpr std::string_view kWeekdays[7] = {"sunday", "monday", "tuesday", "wednesday",
                                           "thursday", "friday", "saturday"};

const std::set<std::string, std::less<>>& known_keys(std::string_view kind) {
  static const std::map<std::string, std::set<std::string, std::less<>>, std::less<>> keys = {
      {"service",
       {"name", "use", "register", "service_description", "host_name", "is_volatile", "active_checks_enabled",
        "passive_checks_enabled", "check_period", "max_check_attempts", "normal_check_interval",
        "retry_check_interval", "notification_interval", "notification_period", "notification_options",
        "check_command", "contact_groups"}},
      {"host",
       {"name", "use", "register", "host_name", "alias", "address", "parents", "check_command",
        "active_checks_enabled", "passive_checks_enabled", "check_period", "max_check_attempts",
        "normal_check_interval", "retry_check_interval", "notification_interval", "notification_period",
        "notification_options", "contact_groups"}},
      {"hostgroup", {"name", "use", "register", "hostgroup_name", "alias", "contact_groups", "members"}},
      {"timeperiod",
       {"name", "use", "register", "timeperiod_name", "alias", "sunday", "monday", "tuesday", "wednesday",
        "thursday", "friday", "saturday"}},
      {"command", {"name", "use", "register", "command_name", "command_line"}},
      {"contactgroup", {"name", "use", "register", "contactgroup_name", "alias", "members", "channels"}},
  };
  static const std::set<std::string, std::less<>> empty;
  auto it = keys.find(kind);
  return it == keys.end() ? empty : it->second;
}

// Keys that belong to the block itself and are never inherited.
bool is_local_only(std::string_view key) { return key == "name" || key == "use" || key == "register"; }

using AttrMap = std::map<std::string, std::string, std::less<>>;

class Reader {
 public:
  Reader(const AttrMap& attrs, std::string what, SourceLocation where, std::vector<Diagnostic>& diags)
      : attrs_(attrs), what_(std::move(what)), where_(std::move(where)), diags_(diags) {}

  bool ok() const { return ok_; }

  const std::string* raw(std::string_view key) const {
    auto it = attrs_.find(key);
    return it == attrs_.end() ? nullptr : &it->second;
  }

  std::string text(std::string_view key, std::string fallback = {}) const {
    auto* v = raw(key);
    return v ? *v : fallback;
  }

  std::optional<std::string> optional_text(std::string_view key) const {
    auto* v = raw(key);
    return v ? std::optional<std::string>(*v) : std::nullopt;
  }

  bool boolean(std::string_view key, bool fallback) {
    auto* v = raw(key);
    if (!v) return fallback;
    if (*v == "1") return true;
    if (*v == "0") return false;
    error("bad-boolean", std::string(key) + " must be 0 or 1, got '" + *v + "'");
    return fallback;
  }

  int integer(std::string_view key, int fallback, int minimum) {
    auto* v = raw(key);
    if (!v) return fallback;
    auto n = parse_int(*v);
    if (!n || *n < minimum || *n > 1'000'000'000) {
      error("bad-integer", std::string(key) + " must be an integer >= " + std::to_string(minimum) + ", got '" +
                               *v + "'");
      return fallback;
    }
    return static_cast<int>(*n);
  }

  std::vector<std::string> list(std::string_view key) const {
    auto* v = raw(key);
    return v ? split_list(*v) : std::vector<std::string>{};
  }

  NotificationOptions options(std::string_view key, std::string_view allowed) {
    auto* v = raw(key);
    if (!v) return NotificationOptions::all(allowed);
    std::string bad;
    auto opts = NotificationOptions::parse(*v, allowed, &bad);
    if (!opts) {
      error("bad-notification-option", "unknown notification option '" + bad + "' in " + std::string(key));
      return NotificationOptions::all(allowed);
    }
    return *opts;
  }

  void require(std::string_view key) {
    auto* v = raw(key);
    if (!v || v->empty()) error("missing-attribute", "missing required attribute '" + std::string(key) + "'");
  }

  ExtraAttributes extra(std::string_view kind) const {
    ExtraAttributes out;
    const auto& known = known_keys(kind);
    for (const auto& [k, v] : attrs_) {
      if (!known.count(k)) out.emplace_back(k, v);
    }
    return out;
  }

  void error(std::string code, std::string message) {
    ok_ = false;
    diags_.push_back({Severity::Error, std::move(code), what_ + ": " + message, where_});
  }

 private:
  const AttrMap& attrs_;
  std::string what_;
  SourceLocation where_;
  std::vector<Diagnostic>& diags_;
  bool ok_ = true;
};

std::optional<int> parse_clock(std::string_view s) {
  auto colon = s.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto h = parse_int(s.substr(0, colon));
  auto m = parse_int(s.substr(colon + 1));
  if (!h || !m || *h < 0 || *h > 24 || *m < 0 || *m > 59) return std::nullopt;
  int minutes = static_cast<int>(*h * 60 + *m);
  if (minutes > 1440) return std::nullopt;
  return minutes;
}

std::string format_clock(int minutes) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
  return buf;
}

std::optional<std::vector<MinuteRange>> parse_day_ranges(std::string_view text, std::string* why) {
  std::vector<MinuteRange> out;
  for (const auto& item : split_list(text)) {
    auto dash = item.find('-');
    if (dash == std::string::npos) {
      *why = "range '" + item + "' is not HH:MM-HH:MM";
      return std::nullopt;
    }
    auto a = parse_clock(trim(std::string_view(item).substr(0, dash)));
    auto b = parse_clock(trim(std::string_view(item).substr(dash + 1)));
    if (!a || !b || *a >= *b) {
      *why = "range '" + item + "' must satisfy 00:00 <= start < end <= 24:00";
      return std::nullopt;
    }
    out.push_back({*a, *b});
  }
  std::sort(out.begin(), out.end(), [](auto& x, auto& y) { return x.start < y.start; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].start < out[i - 1].end) {
      *why = "ranges overlap";
      return std::nullopt;
    }
  }
  return out;
}

std::vector<Channel> parse_channels(std::string_view text) {
  std::vector<Channel> out;
  for (const auto& item : split_list(text)) {
    auto colon = item.find(':');
    Channel ch;
    ch.command = std::string(trim(std::string_view(item).substr(0, colon)));
    if (colon != std::string::npos) ch.period = std::string(trim(std::string_view(item).substr(colon + 1)));
    out.push_back(std::move(ch));
  }
  return out;
}

std::string format_channels(const std::vector<Channel>& channels) {
  std::vector<std::string> parts;
  for (const auto& c : channels) parts.push_back(c.period ? c.command + ":" + *c.period : c.command);
  return join(parts, ",");
}

struct Resolver {
  std::span<const RawObjectBlock> blocks;
  ResolveResult result;
  std::map<std::string, std::map<std::string, const RawObjectBlock*>, std::less<>> templates;

  void diag(Severity sev, std::string code, std::string message, const SourceLocation& where) {
    result.diagnostics.push_back({sev, std::move(code), std::move(message), where});
  }

  void index_templates() {
    for (const auto& b : blocks) {
      auto* name = b.find("name");
      if (!name) continue;
      auto& by_name = templates[b.kind];
      if (by_name.count(*name)) {
        diag(Severity::Error, "duplicate-template", b.kind + " template '" + *name + "' defined twice, first wins",
             b.location);
        continue;
      }
      by_name[*name] = &b;
      result.templates[b.kind].push_back(*name);
    }
    for (auto& [kind, names] : result.templates) std::sort(names.begin(), names.end());
  }

  // Local-first then nearest template. nullopt when the chain is broken.
  std::optional<AttrMap> merge_chain(const RawObjectBlock& block, const std::string& what) {
    std::vector<const RawObjectBlock*> chain{&block};
    std::vector<std::string> names;
    if (auto* n = block.find("name")) names.push_back(*n);
    const RawObjectBlock* cur = &block;
    while (auto* use = cur->find("use")) {
      if (use->find(',') != std::string::npos) {
        diag(Severity::Error, "multiple-inheritance", what + ": 'use " + *use + "' names several templates",
             block.location);
        return std::nullopt;
      }
      auto kind_it = templates.find(block.kind);
      const RawObjectBlock* next = nullptr;
      if (kind_it != templates.end()) {
        auto it = kind_it->second.find(*use);
        if (it != kind_it->second.end()) next = it->second;
      }
      if (!next) {
        diag(Severity::Error, "unknown-template", what + ": uses unknown " + block.kind + " template '" + *use + "'",
             block.location);
        return std::nullopt;
      }
      if (std::find(chain.begin(), chain.end(), next) != chain.end()) {
        names.push_back(*use);
        diag(Severity::Error, "template-cycle", what + ": template cycle " + join(names, " -> "), block.location);
        return std::nullopt;
      }
      names.push_back(*use);
      chain.push_back(next);
      cur = next;
    }
    AttrMap merged;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      bool local = *it == &block;
      for (const auto& [k, v] : (*it)->attributes) {
        if (!local && is_local_only(k)) continue;
        merged[k] = v;
      }
    }
    return merged;
  }

  static std::string describe(const RawObjectBlock& b) {
    for (auto key : {"service_description", "host_name", "hostgroup_name", "timeperiod_name", "command_name",
                     "contactgroup_name", "name"}) {
      if (auto* v = b.find(key)) {
        if (b.kind == "service" && std::string_view(key) == "service_description") {
          if (auto* h = b.find("host_name")) return "service '" + *h + "/" + *v + "'";
        }
        return b.kind + " '" + *v + "'";
      }
    }
    return b.kind + " block";
  }

  void warn_unknown_keys(const RawObjectBlock& b) {
    const auto& known = known_keys(b.kind);
    for (const auto& [k, v] : b.attributes) {
      if (!known.count(k)) {
        diag(Severity::Warning, "unknown-attribute", describe(b) + ": unknown attribute '" + k + "' preserved",
             b.location);
      }
    }
  }

  void build_service(const AttrMap& attrs, const RawObjectBlock& b, const std::string& what) {
    Reader r(attrs, what, b.location, result.diagnostics);
    for (auto key : {"service_description", "host_name", "check_command", "check_period", "max_check_attempts"})
      r.require(key);
    ServiceDef s;
    s.name = r.optional_text("name");
    s.service_description = r.text("service_description");
    s.host_name = r.text("host_name");
    s.is_volatile = r.boolean("is_volatile", false);
    s.active_checks_enabled = r.boolean("active_checks_enabled", true);
    s.passive_checks_enabled = r.boolean("passive_checks_enabled", true);
    s.check_period = r.text("check_period");
    s.max_check_attempts = r.integer("max_check_attempts", 0, 1);
    s.normal_check_interval = r.integer("normal_check_interval", 5, 1);
    s.retry_check_interval = r.integer("retry_check_interval", 1, 1);
    s.notification_interval = r.integer("notification_interval", 30, 0);
    s.notification_period = r.text("notification_period", "24x7");
    s.notification_options = r.options("notification_options", NotificationOptions::kServiceLetters);
    s.check_command = CommandRef::parse(r.text("check_command"));
    s.contact_groups = r.list("contact_groups");
    s.extra = r.extra("service");
    if (!r.ok()) return;
    ObjectKey key{s.host_name, s.service_description};
    if (result.config.services.count(key)) {
      diag(Severity::Error, "duplicate-service", what + ": duplicate (host, service_description), first wins",
           b.location);
      return;
    }
    result.config.services.emplace(std::move(key), std::move(s));
  }

  void build_host(const AttrMap& attrs, const RawObjectBlock& b, const std::string& what) {
    Reader r(attrs, what, b.location, result.diagnostics);
    r.require("host_name");
    HostDef h;
    h.name = r.optional_text("name");
    h.host_name = r.text("host_name");
    h.alias = r.text("alias", h.host_name);
    h.address = r.text("address");
    h.parents = r.list("parents");
    h.check_command = CommandRef::parse(r.text("check_command"));
    h.active_checks_enabled = r.boolean("active_checks_enabled", true);
    h.passive_checks_enabled = r.boolean("passive_checks_enabled", true);
    h.check_period = r.text("check_period", "24x7");
    h.max_check_attempts = r.integer("max_check_attempts", 3, 1);
    h.normal_check_interval = r.integer("normal_check_interval", 5, 1);
    h.retry_check_interval = r.integer("retry_check_interval", 1, 1);
    h.notification_interval = r.integer("notification_interval", 30, 0);
    h.notification_period = r.text("notification_period", "24x7");
    h.notification_options = r.options("notification_options", NotificationOptions::kHostLetters);
    h.contact_groups = r.list("contact_groups");
    h.extra = r.extra("host");
    if (!r.ok()) return;
    if (result.config.hosts.count(h.host_name)) {
      diag(Severity::Error, "duplicate-host", what + ": duplicate host_name, first wins", b.location);
      return;
    }
    result.config.hosts.emplace(h.host_name, std::move(h));
  }

  void build_hostgroup(const AttrMap& attrs, const RawObjectBlock& b, const std::string& what) {
    Reader r(attrs, what, b.location, result.diagnostics);
    r.require("hostgroup_name");
    HostGroupDef g;
    g.name = r.optional_text("name");
    g.hostgroup_name = r.text("hostgroup_name");
    g.alias = r.text("alias", g.hostgroup_name);
    g.contact_groups = r.list("contact_groups");
    g.members = r.list("members");
    g.extra = r.extra("hostgroup");
    if (!r.ok()) return;
    if (!result.config.hostgroups.emplace(g.hostgroup_name, g).second)
      diag(Severity::Error, "duplicate-hostgroup", what + ": duplicate hostgroup_name, first wins", b.location);
  }

  void build_timeperiod(const AttrMap& attrs, const RawObjectBlock& b, const std::string& what) {
    Reader r(attrs, what, b.location, result.diagnostics);
    r.require("timeperiod_name");
    TimePeriodDef p;
    p.period_name = r.text("timeperiod_name");
    p.alias = r.text("alias", p.period_name);
    for (int d = 0; d < 7; ++d) {
      auto* v = r.raw(kWeekdays[d]);
      if (!v) continue;
      std::string why;
      auto ranges = parse_day_ranges(*v, &why);
      if (!ranges) {
        r.error("bad-timerange", std::string(kWeekdays[d]) + ": " + why);
        continue;
      }
      p.ranges[d] = std::move(*ranges);
    }
    p.extra = r.extra("timeperiod");
    if (!r.ok()) return;
    if (!result.config.timeperiods.emplace(p.period_name, p).second)
      diag(Severity::Error, "duplicate-timeperiod", what + ": duplicate timeperiod_name, first wins", b.location);
  }

  void build_command(const AttrMap& attrs, const RawObjectBlock& b, const std::string& what) {
    Reader r(attrs, what, b.location, result.diagnostics);
    r.require("command_name");
    r.require("command_line");
    CommandDef c{r.text("command_name"), r.text("command_line"), r.extra("command")};
    if (!r.ok()) return;
    if (!result.config.commands.emplace(c.command_name, c).second)
      diag(Severity::Error, "duplicate-command", what + ": duplicate command_name, first wins", b.location);
  }

  void build_contactgroup(const AttrMap& attrs, const RawObjectBlock& b, const std::string& what) {
    Reader r(attrs, what, b.location, result.diagnostics);
    r.require("contactgroup_name");
    ContactGroupDef g;
    g.contactgroup_name = r.text("contactgroup_name");
    g.alias = r.text("alias", g.contactgroup_name);
    g.channels = parse_channels(r.text("channels"));
    g.extra = r.extra("contactgroup");
    if (!r.ok()) return;
    if (!result.config.contactgroups.emplace(g.contactgroup_name, g).second)
      diag(Severity::Error, "duplicate-contactgroup", what + ": duplicate contactgroup_name, first wins",
           b.location);
  }

  void run() {
    index_templates();
    for (const auto& b : blocks) {
      if (!is_known_kind(b.kind)) {
        result.config.unknown_blocks.push_back(b);
        continue;
      }
      warn_unknown_keys(b);
      auto what = describe(b);
      bool registered = true;
      if (auto* reg = b.find("register")) {
        if (*reg == "0") registered = false;
        else if (*reg != "1")
          diag(Severity::Error, "bad-boolean", what + ": register must be 0 or 1", b.location);
      }
      if (!registered) continue;
      auto merged = merge_chain(b, what);
      if (!merged) continue;
      if (b.kind == "service") build_service(*merged, b, what);
      else if (b.kind == "host") build_host(*merged, b, what);
      else if (b.kind == "hostgroup") build_hostgroup(*merged, b, what);
      else if (b.kind == "timeperiod") build_timeperiod(*merged, b, what);
      else if (b.kind == "command") build_command(*merged, b, what);
      else if (b.kind == "contactgroup") build_contactgroup(*merged, b, what);
    }
    result.config.timeperiods.emplace("24x7", TimePeriodDef::always());
  }
};

}  // namespace

ResolveResult resolve_templates(std::span<const RawObjectBlock> blocks) {
  Resolver r{blocks, {}, {}};
  r.run();
  return std::move(r.result);
}

// ---- validation ----

std::vector<Diagnostic> validate(const ResolvedConfig& config) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string code, std::string message) {
    out.push_back({Severity::Error, std::move(code), std::move(message), {}});
  };
  auto check_period = [&](const std::string& owner, const std::string& period) {
    if (!config.timeperiods.count(period)) error("unknown-period", owner + ": unknown time period '" + period + "'");
  };
  auto check_command = [&](const std::string& owner, const CommandRef& cmd) {
    if (!cmd.empty() && !config.commands.count(cmd.name))
      error("unknown-command", owner + ": unknown command '" + cmd.name + "'");
  };
  auto check_groups = [&](const std::string& owner, const std::vector<std::string>& groups) {
    for (const auto& g : groups) {
      if (!config.contactgroups.count(g)) error("unknown-contactgroup", owner + ": unknown contact group '" + g + "'");
    }
  };

  for (const auto& b : config.unknown_blocks) {
    out.push_back({Severity::Error, "unknown-kind", "unknown object kind '" + b.kind + "'", b.location});
  }

  for (const auto& [name, h] : config.hosts) {
    std::string owner = "host '" + name + "'";
    if (h.address.empty()) error("missing-address", owner + ": registered host has no address");
    for (const auto& p : h.parents) {
      if (p == name) error("self-parent", owner + ": lists itself as parent");
      else if (!config.hosts.count(p)) error("unknown-parent", owner + ": unknown parent '" + p + "'");
    }
    check_command(owner, h.check_command);
    check_period(owner, h.check_period);
    check_period(owner, h.notification_period);
    check_groups(owner, h.contact_groups);
  }

  // Parent cycles, iterative three-colour DFS over known hosts.
  {
    enum Colour { White, Grey, Black };
    std::map<std::string, Colour> colour;
    std::set<std::string> reported;
    std::vector<std::string> path;
    std::function<void(const std::string&)> visit = [&](const std::string& host) {
      colour[host] = Grey;
      path.push_back(host);
      for (const auto& p : config.hosts.at(host).parents) {
        if (p == host || !config.hosts.count(p)) continue;
        if (colour[p] == Grey) {
          auto start = std::find(path.begin(), path.end(), p);
          std::vector<std::string> cycle(start, path.end());
          cycle.push_back(p);
          auto key = *std::min_element(cycle.begin(), cycle.end() - 1);
          if (reported.insert(key).second)
            error("parent-cycle", "parents form a cycle: " + join(cycle, " -> "));
        } else if (colour[p] == White) {
          visit(p);
        }
      }
      path.pop_back();
      colour[host] = Black;
    };
    for (const auto& [name, h] : config.hosts) colour.emplace(name, White);
    for (const auto& [name, h] : config.hosts) {
      if (colour[name] == White) visit(name);
    }
  }

  for (const auto& [key, s] : config.services) {
    std::string owner = "service '" + key.str() + "'";
    if (!config.hosts.count(s.host_name)) error("unknown-host", owner + ": unknown host '" + s.host_name + "'");
    check_command(owner, s.check_command);
    check_period(owner, s.check_period);
    check_period(owner, s.notification_period);
    check_groups(owner, s.contact_groups);
  }

  for (const auto& [name, g] : config.hostgroups) {
    std::string owner = "hostgroup '" + name + "'";
    if (g.members.empty()) error("empty-hostgroup", owner + ": no members");
    for (const auto& m : g.members) {
      if (!config.hosts.count(m)) error("unknown-member", owner + ": unknown member '" + m + "'");
    }
    check_groups(owner, g.contact_groups);
  }

  for (const auto& [name, g] : config.contactgroups) {
    std::string owner = "contactgroup '" + name + "'";
    for (const auto& ch : g.channels) {
      if (!config.commands.count(ch.command))
        error("unknown-command", owner + ": unknown channel command '" + ch.command + "'");
      if (ch.period) check_period(owner, *ch.period);
    }
  }
  return out;
}

// ---- canonical printing ----

namespace {

class BlockWriter {
 public:
  BlockWriter(std::ostringstream& os, std::string_view kind) : os_(os) { os_ << "define " << kind << "{\n"; }
  ~BlockWriter() { os_ << "}\n\n"; }

  void put(std::string_view key, std::string_view value) {
    if (value.empty()) return;
    os_ << "    " << key;
    for (std::size_t i = key.size(); i < 24; ++i) os_ << ' ';
    os_ << ' ' << value << '\n';
  }
  void put(std::string_view key, int value) { put(key, std::to_string(value)); }
  void put_bool(std::string_view key, bool value) { put(key, value ? "1" : "0"); }
  void put_extra(const ExtraAttributes& extra) {
    for (const auto& [k, v] : extra) put(k, v);
  }

 private:
  std::ostringstream& os_;
};

}  // namespace

std::string print_config(const ResolvedConfig& config) {
  std::ostringstream os;
  for (const auto& [name, p] : config.timeperiods) {
    BlockWriter w(os, "timeperiod");
    w.put("timeperiod_name", p.period_name);
    w.put("alias", p.alias);
    for (int d = 0; d < 7; ++d) {
      std::vector<std::string> parts;
      for (const auto& r : p.ranges[d]) parts.push_back(format_clock(r.start) + "-" + format_clock(r.end));
      w.put(kWeekdays[d], join(parts, ","));
    }
    w.put_extra(p.extra);
  }
  for (const auto& [name, c] : config.commands) {
    BlockWriter w(os, "command");
    w.put("command_name", c.command_name);
    w.put("command_line", c.command_line);
    w.put_extra(c.extra);
  }
  for (const auto& [name, g] : config.contactgroups) {
    BlockWriter w(os, "contactgroup");
    w.put("contactgroup_name", g.contactgroup_name);
    w.put("alias", g.alias);
    w.put("channels", format_channels(g.channels));
    w.put_extra(g.extra);
  }
  for (const auto& [name, h] : config.hosts) {
    BlockWriter w(os, "host");
    if (h.name) w.put("name", *h.name);
    w.put("host_name", h.host_name);
    w.put("alias", h.alias);
    w.put("address", h.address);
    w.put("parents", join(h.parents, ","));
    w.put("check_command", h.check_command.str());
    w.put_bool("active_checks_enabled", h.active_checks_enabled);
    w.put_bool("passive_checks_enabled", h.passive_checks_enabled);
    w.put("check_period", h.check_period);
    w.put("max_check_attempts", h.max_check_attempts);
    w.put("normal_check_interval", h.normal_check_interval);
    w.put("retry_check_interval", h.retry_check_interval);
    w.put("notification_interval", h.notification_interval);
    w.put("notification_period", h.notification_period);
    w.put("notification_options", h.notification_options.str());
    w.put("contact_groups", join(h.contact_groups, ","));
    w.put_extra(h.extra);
  }
  for (const auto& [name, g] : config.hostgroups) {
    BlockWriter w(os, "hostgroup");
    if (g.name) w.put("name", *g.name);
    w.put("hostgroup_name", g.hostgroup_name);
    w.put("alias", g.alias);
    w.put("contact_groups", join(g.contact_groups, ","));
    w.put("members", join(g.members, ","));
    w.put_extra(g.extra);
  }
  for (const auto& [key, s] : config.services) {
    BlockWriter w(os, "service");
    if (s.name) w.put("name", *s.name);
    w.put("service_description", s.service_description);
    w.put("host_name", s.host_name);
    w.put_bool("is_volatile", s.is_volatile);
    w.put_bool("active_checks_enabled", s.active_checks_enabled);
    w.put_bool("passive_checks_enabled", s.passive_checks_enabled);
    w.put("check_period", s.check_period);
    w.put("max_check_attempts", s.max_check_attempts);
    w.put("normal_check_interval", s.normal_check_interval);
    w.put("retry_check_interval", s.retry_check_interval);
    w.put("notification_interval", s.notification_interval);
    w.put("notification_period", s.notification_period);
    w.put("notification_options", s.notification_options.str());
    w.put("check_command", s.check_command.str());
    w.put("contact_groups", join(s.contact_groups, ","));
    w.put_extra(s.extra);
  }
  for (const auto& b : config.unknown_blocks) {
    BlockWriter w(os, b.kind);
    for (const auto& [k, v] : b.attributes) w.put(k, v);
  }
  return os.str();
}

// ---- loading ----

namespace {

LoadResult finish_load(std::vector<RawObjectBlock> blocks, std::vector<Diagnostic> diags) {
  auto resolved = resolve_templates(blocks);
  diags.insert(diags.end(), resolved.diagnostics.begin(), resolved.diagnostics.end());
  auto v = validate(resolved.config);
  diags.insert(diags.end(), v.begin(), v.end());
  return {std::move(resolved.config), std::move(diags)};
}

}  // namespace

LoadResult load_text(std::string_view text, std::string_view source) {
  auto parsed = parse_objects(text, source);
  return finish_load(std::move(parsed.blocks), std::move(parsed.diagnostics));
}

LoadResult load_files(std::span<const std::filesystem::path> files) {
  std::vector<RawObjectBlock> blocks;
  std::vector<Diagnostic> diags;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) {
      diags.push_back({Severity::Error, "unreadable-file", "cannot read file", {f.string(), 0}});
      continue;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    auto parsed = parse_objects(ss.str(), f.string());
    std::move(parsed.blocks.begin(), parsed.blocks.end(), std::back_inserter(blocks));
    std::move(parsed.diagnostics.begin(), parsed.diagnostics.end(), std::back_inserter(diags));
  }
  return finish_load(std::move(blocks), std::move(diags));
}

// ---- macro expansion ----

std::vector<std::string> build_check_argv(const ResolvedConfig& config, const ObjectKey& key,
                                          const MacroContext& macros) {
  const HostDef* host = config.find_host(key.host);
  if (!host) return {};
  const CommandRef* ref = &host->check_command;
  if (!key.is_host()) {
    const ServiceDef* svc = config.find_service(key);
    if (!svc) return {};
    ref = &svc->check_command;
  }
  if (ref->empty()) return {};
  auto cmd = config.commands.find(ref->name);
  if (cmd == config.commands.end()) return {};

  auto lookup = [&](std::string_view name) -> std::optional<std::string> {
    if (name == "HOSTNAME") return host->host_name;
    if (name == "HOSTALIAS") return host->alias;
    if (name == "HOSTADDRESS") return host->address;
    if (name == "SERVICEDESC") return key.service;
    if (name == "PLUGINDIR" || name == "USER1") return macros.plugin_dir;
    if (starts_with(name, "ARG")) {
      auto n = parse_int(name.substr(3));
      if (n && *n >= 1) {
        auto idx = static_cast<std::size_t>(*n - 1);
        return idx < ref->args.size() ? ref->args[idx] : std::string{};
      }
    }
    return std::nullopt;
  };

  std::vector<std::string> argv;
  for (const auto& token : split_command_line(cmd->second.command_line)) {
    std::string out;
    std::size_t i = 0;
    while (i < token.size()) {
      if (token[i] != '$') {
        out += token[i++];
        continue;
      }
      auto close = token.find('$', i + 1);
      if (close == std::string::npos) {
        out += token.substr(i);
        break;
      }
      auto name = std::string_view(token).substr(i + 1, close - i - 1);
      if (name.empty()) {
        out += '$';
      } else if (auto v = lookup(name)) {
        out += *v;
      } else {
        out += token.substr(i, close - i + 1);
      }
      i = close + 1;
    }
    argv.push_back(std::move(out));
  }
  return argv;
}

}  // namespace sentinel::objconf
