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

// Argument handling for the built-in probes (tcp, http, ping, cluster).

#include <CLI11.hpp>

#include "sentinel/checkcore.hpp"
#include "sentinel/strutil.hpp"

namespace sentinel::checkcore {

namespace {

CheckResult usage_error(const std::string& probe, const std::string& message) {
  CheckResult r;
  r.status = CheckStatus::Unknown;
  r.output = probe + ": " + first_line(message);
  r.started_at = r.finished_at = Clock::now();
  r.source = "sentinel-check " + probe;
  return r;
}

Timeout effective_timeout(double seconds, Timeout fallback) {
  if (seconds <= 0) return fallback;
  return Timeout(static_cast<long long>(seconds * 1000.0 + 0.5));
}

}  // namespace

std::optional<CheckResult> run_builtin_probe(std::span<const std::string> args, Timeout timeout,
                                             const PingOptions& ping) {
  if (args.empty()) return std::nullopt;
  const std::string probe = args[0];
  if (probe != "tcp" && probe != "http" && probe != "ping" && probe != "cluster") return std::nullopt;

  CLI::App app("sentinel-check " + probe);
  std::string host, url, expect;
  int port = 0, warn = 0, crit = 0;
  double timeout_secs = 0;
  std::vector<std::string> members;
  app.add_option("-t,--timeout", timeout_secs, "timeout in seconds");

  if (probe == "tcp") {
    app.add_option("-H,--host", host)->required();
    app.add_option("-p,--port", port)->required();
    app.add_option("-e,--expect", expect);
  } else if (probe == "http") {
    app.add_option("-u,--url", url)->required();
  } else if (probe == "ping") {
    app.add_option("-H,--host", host)->required();
  } else {
    app.add_option("-w,--warning", warn)->required();
    app.add_option("-c,--critical", crit)->required();
    app.add_option("members", members, "member states (OK, WARNING, ... or 0..3)")->required();
  }

  std::vector<std::string> rest(args.rbegin(), args.rend() - 1);  // CLI11 consumes from the back
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    return usage_error(probe, e.what());
  }
  auto limit = effective_timeout(timeout_secs, timeout);

  if (probe == "tcp") {
    std::optional<std::string> exp;
    if (app.count("--expect")) exp = expect;
    return check_tcp(host, port, exp, limit);
  }
  if (probe == "http") return check_http(url, limit);
  if (probe == "ping") return check_ping(host, limit, ping);

  std::vector<CheckStatus> states;
  for (const auto& m : members) {
    auto s = parse_check_status(m);
    if (!s) {
      if (auto n = parse_int(m)) s = check_status_from_code(static_cast<int>(*n));
    }
    if (!s) return usage_error(probe, "bad member state '" + m + "'");
    states.push_back(*s);
  }
  return check_cluster(states, warn, crit);
}

}  // namespace sentinel::checkcore
