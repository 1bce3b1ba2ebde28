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

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentinel/audit.hpp"
#include "sentinel/objconf.hpp"
#include "sentinel/types.hpp"

namespace sentinel::state {

enum class StateType { Soft, Hard };
std::string_view to_string(StateType t);
std::optional<StateType> parse_state_type(std::string_view s);

struct Downtime {
  TimePoint start{};
  TimePoint end{};
  std::string author;
  std::string comment;
  bool operator==(const Downtime&) const = default;
};

struct Acknowledgement {
  std::string who;
  std::string comment;
  TimePoint at{};
  bool operator==(const Acknowledgement&) const = default;
};

struct MonitorState {
  ObjectStatus current_status = CheckStatus::Ok;
  StateType state_type = StateType::Hard;
  int attempt = 1;
  TimePoint last_check{};
  TimePoint last_state_change{};
  TimePoint last_hard_change{};
  std::optional<TimePoint> last_notification;
  bool acknowledged = false;
  std::optional<Acknowledgement> ack;
  std::vector<Downtime> downtimes;
  std::string last_output;
  bool checked = false;  // at least one result applied

  static MonitorState initial_service() { return {}; }
  static MonitorState initial_host() {
    MonitorState s;
    s.current_status = HostStatus::Up;
    return s;
  }

  bool hard_problem() const { return state_type == StateType::Hard && !is_ok(current_status); }
  bool operator==(const MonitorState&) const = default;
};

enum class EventKind { Problem, Recovery, StateLog, RenotifyEligible };
std::string_view to_string(EventKind k);

struct StateEvent {
  EventKind kind = EventKind::StateLog;
  ObjectKey target;
  TimePoint at{};
  ObjectStatus status = CheckStatus::Ok;
  StateType state_type = StateType::Hard;
  int attempt = 1;
  std::string output;
  bool operator==(const StateEvent&) const = default;
};

/// "<ISO8601> <object> <kind> <status> <attempt> <output>"
std::string format_event_line(const StateEvent& e);

struct TransitionRules {
  int max_check_attempts = 1;
  bool is_volatile = false;
  bool passive_checks_enabled = true;

  static TransitionRules from(const objconf::ServiceDef& def);
  static TransitionRules from(const objconf::HostDef& def);
};

struct Observation {
  ObjectStatus status = CheckStatus::Ok;
  std::string output;
  Origin origin = Origin::Active;
  std::string source;
};

struct Transition {
  MonitorState state;
  std::vector<StateEvent> events;
  bool rejected = false;
};

class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Core soft/hard automaton shared by hosts and services.
Transition apply_observation(const MonitorState& state, const TransitionRules& rules, const ObjectKey& key,
                             const Observation& obs, TimePoint now, AuditLog* audit = nullptr);

/// Service result.
Transition apply_result(const MonitorState& state, const TransitionRules& rules, const ObjectKey& key,
                        const CheckResult& result, TimePoint now, AuditLog* audit = nullptr);

/// Host result; `status` is the outcome of reachability analysis (UP, DOWN or UNREACHABLE).
Transition apply_host_result(const MonitorState& state, const TransitionRules& rules, const ObjectKey& key,
                             HostStatus status, const CheckResult& result, TimePoint now,
                             AuditLog* audit = nullptr);

/// Passing/failing host checks plus the parent graph to UP/DOWN/UNREACHABLE.
/// Parents missing from `passed` are ignored (with an audit record).
std::map<std::string, HostStatus> host_reachability(const std::map<std::string, bool>& passed,
                                                    const std::map<std::string, std::vector<std::string>>& parents,
                                                    AuditLog* audit = nullptr);

/// Throws StateError("not in problem state") unless the object is in a HARD non-OK state.
MonitorState acknowledge(const MonitorState& state, const std::string& who, const std::string& comment,
                         TimePoint now, AuditLog* audit = nullptr, const ObjectKey* key = nullptr);

/// Throws StateError when end <= start.
MonitorState add_downtime(const MonitorState& state, Downtime window);

bool in_downtime(const MonitorState& state, TimePoint now);

/// Drops windows that ended at or before `now`.
void prune_downtimes(MonitorState& state, TimePoint now);

/// A RENOTIFY_ELIGIBLE event whenever the object is in a HARD problem; the
/// interval and the other gates belong to the notification policy.
std::optional<StateEvent> renotify_tick(const MonitorState& state, const ObjectKey& key, TimePoint now);

}  // namespace sentinel::state
