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

#include "sentinel/types.hpp"

#include "sentinel/strutil.hpp"

namespace sentinel {

std::string_view to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Ok:
      return "OK";
    case CheckStatus::Warning:
      return "WARNING";
    case CheckStatus::Critical:
      return "CRITICAL";
    case CheckStatus::Unknown:
      return "UNKNOWN";
  }
  return "UNKNOWN";
}

std::string_view to_string(HostStatus status) {
  switch (status) {
    case HostStatus::Up:
      return "UP";
    case HostStatus::Down:
      return "DOWN";
    case HostStatus::Unreachable:
      return "UNREACHABLE";
  }
  return "DOWN";
}

std::optional<CheckStatus> check_status_from_code(int code) {
  if (code < 0 || code > 3) return std::nullopt;
  return static_cast<CheckStatus>(code);
}

CheckStatus status_from_exit_code(int code) {
  return check_status_from_code(code).value_or(CheckStatus::Unknown);
}

std::optional<CheckStatus> parse_check_status(std::string_view name) {
  for (auto s : {CheckStatus::Ok, CheckStatus::Warning, CheckStatus::Critical, CheckStatus::Unknown}) {
    if (iequals(name, to_string(s))) return s;
  }
  return std::nullopt;
}

std::optional<HostStatus> parse_host_status(std::string_view name) {
  for (auto s : {HostStatus::Up, HostStatus::Down, HostStatus::Unreachable}) {
    if (iequals(name, to_string(s))) return s;
  }
  return std::nullopt;
}

bool is_ok(const ObjectStatus& status) {
  if (const auto* c = std::get_if<CheckStatus>(&status)) return *c == CheckStatus::Ok;
  return std::get<HostStatus>(status) == HostStatus::Up;
}

std::string_view to_string(const ObjectStatus& status) {
  return std::visit([](auto s) { return to_string(s); }, status);
}

std::optional<ObjectStatus> parse_object_status(std::string_view name) {
  if (auto c = parse_check_status(name)) return ObjectStatus{*c};
  if (auto h = parse_host_status(name)) return ObjectStatus{*h};
  return std::nullopt;
}

std::string_view to_string(Origin origin) {
  return origin == Origin::Active ? "ACTIVE" : "PASSIVE";
}

std::string first_line(std::string_view text) {
  auto end = text.find_first_of("\r\n");
  return std::string(trim(text.substr(0, end)));
}

}  // namespace sentinel
