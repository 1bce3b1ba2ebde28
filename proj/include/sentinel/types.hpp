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

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace sentinel {

using Clock = std::chrono::system_clock;
using TimePoint = Clock::time_point;
using Seconds = std::chrono::seconds;

/// Plugin protocol status. Only the code <-> name mapping is normative.
enum class CheckStatus : int { Ok = 0, Warning = 1, Critical = 2, Unknown = 3 };

/// UNREACHABLE is only ever assigned by reachability analysis.
enum class HostStatus : int { Up = 0, Down = 1, Unreachable = 2 };

std::string_view to_string(CheckStatus status);
std::string_view to_string(HostStatus status);

std::optional<CheckStatus> check_status_from_code(int code);
std::optional<CheckStatus> parse_check_status(std::string_view name);
std::optional<HostStatus> parse_host_status(std::string_view name);

/// Maps a plugin exit code onto a status: 0..3 map one to one, anything else is UNKNOWN.
CheckStatus status_from_exit_code(int code);

/// Status of either a service or a host.
using ObjectStatus = std::variant<CheckStatus, HostStatus>;

bool is_ok(const ObjectStatus& status);
std::string_view to_string(const ObjectStatus& status);
std::optional<ObjectStatus> parse_object_status(std::string_view name);

enum class Origin { Active, Passive };
std::string_view to_string(Origin origin);

/// Outcome of one check, active or passive.
struct CheckResult {
  CheckStatus status = CheckStatus::Unknown;
  std::string output;
  TimePoint started_at{};
  TimePoint finished_at{};
  Origin origin = Origin::Active;
  std::string source;
};

/// Identifies a host (empty service) or a service on a host.
struct ObjectKey {
  std::string host;
  std::string service;

  static ObjectKey for_host(std::string host) { return {std::move(host), {}}; }
  static ObjectKey for_service(std::string host, std::string service) {
    return {std::move(host), std::move(service)};
  }

  bool is_host() const { return service.empty(); }
  std::string str() const { return is_host() ? host : host + "/" + service; }

  auto operator<=>(const ObjectKey&) const = default;
  bool operator==(const ObjectKey&) const = default;
};

/// Keeps only the first line of plugin output, trimmed.
std::string first_line(std::string_view text);

}  // namespace sentinel
