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

#include "sentinel/statemachine.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "sentinel/strutil.hpp"
#include "sentinel/timeutil.hpp"

namespace sentinel::state {

std::string_view to_string(StateType t) { return t == StateType::Hard ? "HARD" : "SOFT"; }

std::optional<StateType> parse_state_type(std::string_view s) {
  if (iequals(s, "HARD")) return StateType::Hard;
  if (iequals(s, "SOFT")) return StateType::Soft;
  return std::nullopt;
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Problem: return "PROBLEM";
    case EventKind::Recovery: return "RECOVERY";
    case EventKind::StateLog: return "STATE_LOG";
    case EventKind::RenotifyEligible: return "RENOTIFY_ELIGIBLE";
  }
  return "?";
}

std::string format_event_line(const StateEvent& e) {
  std::string line = format_iso8601(e.at);
  line += ' ';
  line += e.target.str();
  line += ' ';
  line += to_string(e.kind);
  line += ' ';
  line += to_string(e.status);
  line += ' ';
  line += std::to_string(e.attempt);
  line += ' ';
  line += e.output;
  return line;
}

TransitionRules TransitionRules::from(const objconf::ServiceDef& def) {
  return {std::max(def.max_check_attempts, 1), def.is_volatile, def.passive_checks_enabled};
}

TransitionRules TransitionRules::from(const objconf::HostDef& def) {
  return {std::max(def.max_check_attempts, 1), false, def.passive_checks_enabled};
}

namespace {

StateEvent make_event(EventKind kind, const ObjectKey& key, const MonitorState& s, TimePoint now) {
  return {kind, key, now, s.current_status, s.state_type, s.attempt, s.last_output};
}

void clear_ack(MonitorState& s) {
  s.acknowledged = false;
  s.ack.reset();
}

}  // namespace

Transition apply_observation(const MonitorState& state, const TransitionRules& rules, const ObjectKey& key,
                             const Observation& obs, TimePoint now, AuditLog* audit) {
  Transition t{state, {}, false};
  if (obs.origin == Origin::Passive && !rules.passive_checks_enabled) {
    t.rejected = true;
    if (audit) {
      audit->record("state", "rejected passive result for " + key.str() + " from " +
                                 (obs.source.empty() ? std::string("unknown source") : obs.source) +
                                 ": passive checks disabled");
    }
    return t;
  }

  auto& s = t.state;
  const int max_attempts = std::max(rules.max_check_attempts, 1);
  const bool was_ok = is_ok(state.current_status);
  const bool now_ok = is_ok(obs.status);
  bool problem = false, recovery = false;

  prune_downtimes(s, now);
  s.last_check = now;
  s.last_output = obs.output;
  s.checked = true;

  if (now_ok) {
    if (state.state_type == StateType::Hard && !was_ok) {
      recovery = true;
      s.last_hard_change = now;
      s.last_state_change = now;
      s.last_notification.reset();
      clear_ack(s);
    } else if (!was_ok) {
      s.last_state_change = now;  // soft recovery
    }
    s.current_status = obs.status;
    s.state_type = StateType::Hard;
    s.attempt = 1;
  } else if (was_ok) {
    s.current_status = obs.status;
    s.last_state_change = now;
    if (max_attempts <= 1) {
      s.state_type = StateType::Hard;
      s.attempt = 1;
      s.last_hard_change = now;
      s.last_notification.reset();
      problem = true;
    } else {
      s.state_type = StateType::Soft;
      s.attempt = 1;
    }
  } else if (state.state_type == StateType::Soft) {
    if (obs.status != state.current_status) s.last_state_change = now;
    s.current_status = obs.status;
    if (state.attempt + 1 >= max_attempts) {
      s.state_type = StateType::Hard;
      s.attempt = 1;
      s.last_hard_change = now;
      s.last_notification.reset();
      problem = true;
    } else {
      s.attempt = state.attempt + 1;
    }
  } else {
    // Already HARD non-OK.
    if (obs.status != state.current_status) {
      s.current_status = obs.status;
      s.last_state_change = now;
      s.last_hard_change = now;
      s.last_notification.reset();
      clear_ack(s);
      problem = true;
    } else if (rules.is_volatile) {
      problem = true;
    }
  }

  const bool changed = s.current_status != state.current_status || s.state_type != state.state_type ||
                       s.attempt != state.attempt;
  const bool downtime = in_downtime(s, now);
  if (problem && !downtime) t.events.push_back(make_event(EventKind::Problem, key, s, now));
  if (recovery && !downtime) t.events.push_back(make_event(EventKind::Recovery, key, s, now));
  if (changed) t.events.push_back(make_event(EventKind::StateLog, key, s, now));
  return t;
}

Transition apply_result(const MonitorState& state, const TransitionRules& rules, const ObjectKey& key,
                        const CheckResult& result, TimePoint now, AuditLog* audit) {
  return apply_observation(state, rules, key, {result.status, result.output, result.origin, result.source}, now,
                           audit);
}

Transition apply_host_result(const MonitorState& state, const TransitionRules& rules, const ObjectKey& key,
                             HostStatus status, const CheckResult& result, TimePoint now, AuditLog* audit) {
  return apply_observation(state, rules, key, {status, result.output, result.origin, result.source}, now, audit);
}

std::map<std::string, HostStatus> host_reachability(const std::map<std::string, bool>& passed,
                                                    const std::map<std::string, std::vector<std::string>>& parents,
                                                    AuditLog* audit) {
  std::map<std::string, HostStatus> out;
  std::set<std::string> visiting;
  std::function<HostStatus(const std::string&)> eval = [&](const std::string& host) -> HostStatus {
    if (auto it = out.find(host); it != out.end()) return it->second;
    auto ok = passed.at(host);
    if (ok) return out[host] = HostStatus::Up;
    if (!visiting.insert(host).second) {
      if (audit) audit->record("reachability", "parent cycle through " + host + "; treated as parentless");
      return HostStatus::Down;
    }
    std::vector<std::string> known;
    if (auto p = parents.find(host); p != parents.end()) {
      for (const auto& parent : p->second) {
        if (passed.count(parent)) {
          known.push_back(parent);
        } else if (audit) {
          audit->record("reachability", "host " + host + " references unknown parent " + parent);
        }
      }
    }
    HostStatus result = HostStatus::Down;
    if (!known.empty()) {
      bool any_up = false;
      for (const auto& parent : known) any_up = eval(parent) == HostStatus::Up || any_up;
      result = any_up ? HostStatus::Down : HostStatus::Unreachable;
    }
    visiting.erase(host);
    return out[host] = result;
  };
  for (const auto& [host, ok] : passed) eval(host);
  return out;
}

MonitorState acknowledge(const MonitorState& state, const std::string& who, const std::string& comment,
                         TimePoint now, AuditLog* audit, const ObjectKey* key) {
  if (!state.hard_problem()) throw StateError("not in problem state");
  MonitorState s = state;
  s.acknowledged = true;
  s.ack = Acknowledgement{who, comment, now};
  if (audit) {
    audit->record("ack", (key ? key->str() : std::string("object")) + " acknowledged by " + who + ": " + comment);
  }
  return s;
}

MonitorState add_downtime(const MonitorState& state, Downtime window) {
  if (window.end <= window.start) throw StateError("downtime end must be after start");
  MonitorState s = state;
  s.downtimes.push_back(std::move(window));
  return s;
}

bool in_downtime(const MonitorState& state, TimePoint now) {
  return std::any_of(state.downtimes.begin(), state.downtimes.end(),
                     [&](const Downtime& d) { return d.start <= now && now < d.end; });
}

void prune_downtimes(MonitorState& state, TimePoint now) {
  std::erase_if(state.downtimes, [&](const Downtime& d) { return d.end <= now; });
}

std::optional<StateEvent> renotify_tick(const MonitorState& state, const ObjectKey& key, TimePoint now) {
  if (!state.hard_problem()) return std::nullopt;
  return make_event(EventKind::RenotifyEligible, key, state, now);
}

}  // namespace sentinel::state
