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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/objconf.hpp"
#include "sentinel/types.hpp"

namespace sentinel::checkcore {

using Timeout = std::chrono::milliseconds;

inline constexpr Timeout kDefaultTimeout{10000};
inline constexpr std::size_t kMaxOutputLine = 4096;

/// Output for a check killed at its deadline.
std::string timeout_message(Timeout timeout);

/// Runs an external plugin. Exit codes 0..3 map to OK..UNKNOWN; anything else
/// is UNKNOWN prefixed "(invalid exit code N) ". A timeout is CRITICAL.
/// Never throws.
CheckResult execute_plugin(std::span<const std::string> argv, Timeout timeout = kDefaultTimeout);

/// Connects and optionally checks that the first line starts with `expect`.
CheckResult check_tcp(const std::string& address, int port, const std::optional<std::string>& expect,
                      Timeout timeout = kDefaultTimeout);

/// One HTTP/1.1 GET with Connection: close; redirects are not followed.
CheckResult check_http(const std::string& url, Timeout timeout = kDefaultTimeout);

struct PingOptions {
  std::string command = "ping";  // invoked as: <command> -n -c 1 -W <secs> <address>
};

CheckResult check_ping(const std::string& address, Timeout timeout = kDefaultTimeout,
                       const PingOptions& options = {});

/// Members that are not OK count as failed.
CheckResult check_cluster(std::span<const CheckStatus> members, int warn_threshold, int crit_threshold);

struct ScheduleEntry {
  ObjectKey target;
  TimePoint next_due{};
  bool in_retry = false;  // object is in a SOFT non-OK state
};

TimePoint next_check_time(const ScheduleEntry& entry, const objconf::ServiceDef& def, TimePoint last_finished,
                          Seconds interval_length);
TimePoint next_check_time(const ScheduleEntry& entry, const objconf::HostDef& def, TimePoint last_finished,
                          Seconds interval_length);
TimePoint next_check_time(bool in_retry, int normal_interval, int retry_interval, TimePoint last_finished,
                          Seconds interval_length);

/// Parsed http://host[:port]/path
struct HttpUrl {
  std::string host;
  int port = 80;
  std::string path = "/";
  static std::optional<HttpUrl> parse(std::string_view url);
};

/// Runs `sentinel-check` style arguments in-process (argv[0] is the probe name:
/// tcp, http, ping or cluster). Returns nullopt when argv is not a probe invocation.
std::optional<CheckResult> run_builtin_probe(std::span<const std::string> args, Timeout timeout,
                                             const PingOptions& ping = {});

}  // namespace sentinel::checkcore
