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

#include "sentinel/checkcore.hpp"

#include <algorithm>
#include <cerrno>
#include <regex>

#include "sentinel/net.hpp"
#include "sentinel/process.hpp"
#include "sentinel/strutil.hpp"
#include "sentinel/timeutil.hpp"

namespace sentinel::checkcore {

namespace {

using SteadyClock = std::chrono::steady_clock;

CheckResult make_result(CheckStatus status, std::string output, TimePoint started, std::string source) {
  CheckResult r;
  r.status = status;
  r.output = first_line(output);
  if (r.output.size() > kMaxOutputLine) r.output.resize(kMaxOutputLine);
  r.started_at = started;
  r.finished_at = std::max(Clock::now(), started);
  r.origin = Origin::Active;
  r.source = std::move(source);
  return r;
}

long whole_seconds(SteadyClock::duration d) {
  return static_cast<long>(std::chrono::duration_cast<std::chrono::seconds>(d).count());
}

}  // namespace

std::string timeout_message(Timeout timeout) {
  return "check timed out after " + format_seconds(static_cast<double>(timeout.count()) / 1000.0) + "s";
}

CheckResult execute_plugin(std::span<const std::string> argv, Timeout timeout) {
  auto started = Clock::now();
  std::string source = argv.empty() ? std::string() : argv[0];
  if (argv.empty() || argv[0].empty()) return make_result(CheckStatus::Unknown, "no plugin command given", started, source);

  ProcessSpec spec;
  spec.argv.assign(argv.begin(), argv.end());
  spec.timeout = timeout;
  auto outcome = run_process(spec);

  switch (outcome.kind) {
    case ProcessOutcome::Kind::SpawnFailed:
      return make_result(CheckStatus::Unknown, "plugin could not be executed: " + outcome.error, started, source);
    case ProcessOutcome::Kind::TimedOut:
      return make_result(CheckStatus::Critical, timeout_message(timeout), started, source);
    case ProcessOutcome::Kind::Signaled:
      return make_result(CheckStatus::Unknown, "plugin killed by signal " + std::to_string(outcome.signal), started,
                         source);
    case ProcessOutcome::Kind::Exited:
      break;
  }
  auto line = first_line(outcome.stdout_data);
  if (auto status = check_status_from_code(outcome.exit_code)) return make_result(*status, line, started, source);
  return make_result(CheckStatus::Unknown, "(invalid exit code " + std::to_string(outcome.exit_code) + ") " + line,
                     started, source);
}

CheckResult check_tcp(const std::string& address, int port, const std::optional<std::string>& expect,
                      Timeout timeout) {
  auto started = Clock::now();
  auto t0 = SteadyClock::now();
  auto deadline = t0 + timeout;
  std::string source = "tcp:" + address + ":" + std::to_string(port);
  if (port < 1 || port > 65535)
    return make_result(CheckStatus::Unknown, "invalid port " + std::to_string(port), started, source);

  auto conn = net::connect_tcp(address, port, deadline);
  switch (conn.status) {
    case net::ConnectStatus::Connected:
      break;
    case net::ConnectStatus::ResolveFailed:
      return make_result(CheckStatus::Unknown, conn.message, started, source);
    case net::ConnectStatus::Refused:
      return make_result(CheckStatus::Critical, "Connection refused by host", started, source);
    case net::ConnectStatus::TimedOut:
      return make_result(CheckStatus::Critical, timeout_message(timeout), started, source);
    case net::ConnectStatus::Failed:
      return make_result(CheckStatus::Critical, "Connection failed: " + conn.message, started, source);
  }

  if (expect) {
    net::LineReader reader(conn.socket.fd(), kMaxOutputLine);
    std::string banner;
    auto st = reader.read_line(banner, deadline);
    if (st == net::LineReader::Status::TimedOut)
      return make_result(CheckStatus::Critical, timeout_message(timeout), started, source);
    if (st != net::LineReader::Status::Line && st != net::LineReader::Status::TooLong)
      return make_result(CheckStatus::Critical, "No data received from host", started, source);
    if (!starts_with(banner, *expect))
      return make_result(CheckStatus::Critical, "Unexpected response from host: " + banner, started, source);
  }
  auto secs = whole_seconds(SteadyClock::now() - t0);
  return make_result(CheckStatus::Ok,
                     "TCP ok - " + std::to_string(secs) + " second response time on port " + std::to_string(port),
                     started, source);
}

std::optional<HttpUrl> HttpUrl::parse(std::string_view url) {
  constexpr std::string_view scheme = "http://";
  if (url.size() <= scheme.size() || !iequals(url.substr(0, scheme.size()), scheme)) return std::nullopt;
  url.remove_prefix(scheme.size());
  auto slash = url.find('/');
  auto authority = url.substr(0, slash);
  HttpUrl out;
  out.path = slash == std::string_view::npos ? "/" : std::string(url.substr(slash));
  if (authority.empty()) return std::nullopt;
  if (authority.front() == '[') {
    auto close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    out.host = std::string(authority.substr(1, close - 1));
    auto rest = authority.substr(close + 1);
    if (!rest.empty()) {
      if (rest.front() != ':') return std::nullopt;
      auto p = parse_int(rest.substr(1));
      if (!p || *p < 1 || *p > 65535) return std::nullopt;
      out.port = static_cast<int>(*p);
    }
  } else {
    auto colon = authority.find(':');
    out.host = std::string(authority.substr(0, colon));
    if (colon != std::string_view::npos) {
      auto p = parse_int(authority.substr(colon + 1));
      if (!p || *p < 1 || *p > 65535) return std::nullopt;
      out.port = static_cast<int>(*p);
    }
  }
  if (out.host.empty() || out.host.find_first_of(" \t@") != std::string::npos) return std::nullopt;
  if (out.path.find_first_of(" \r\n") != std::string::npos) return std::nullopt;
  return out;
}

CheckResult check_http(const std::string& url, Timeout timeout) {
  auto started = Clock::now();
  auto t0 = SteadyClock::now();
  auto deadline = t0 + timeout;
  std::string source = "http:" + url;
  auto parsed = HttpUrl::parse(url);
  if (!parsed) return make_result(CheckStatus::Unknown, "invalid URL '" + url + "'", started, source);

  auto conn = net::connect_tcp(parsed->host, parsed->port, deadline);
  switch (conn.status) {
    case net::ConnectStatus::Connected:
      break;
    case net::ConnectStatus::ResolveFailed:
      return make_result(CheckStatus::Unknown, conn.message, started, source);
    case net::ConnectStatus::Refused:
      return make_result(CheckStatus::Critical, "Connection refused by host", started, source);
    case net::ConnectStatus::TimedOut:
      return make_result(CheckStatus::Critical, timeout_message(timeout), started, source);
    case net::ConnectStatus::Failed:
      return make_result(CheckStatus::Critical, "Connection failed: " + conn.message, started, source);
  }

  std::string host_header = parsed->host.find(':') != std::string::npos ? "[" + parsed->host + "]" : parsed->host;
  if (parsed->port != 80) host_header += ":" + std::to_string(parsed->port);
  std::string request = "GET " + parsed->path + " HTTP/1.1\r\nHost: " + host_header +
                        "\r\nUser-Agent: sentinel-check\r\nAccept: */*\r\nConnection: close\r\n\r\n";
  if (!net::send_all(conn.socket.fd(), request, deadline)) {
    if (SteadyClock::now() >= deadline)
      return make_result(CheckStatus::Critical, timeout_message(timeout), started, source);
    return make_result(CheckStatus::Critical, "Connection closed while sending request", started, source);
  }

  net::LineReader reader(conn.socket.fd(), kMaxOutputLine);
  std::string status_line;
  auto st = reader.read_line(status_line, deadline);
  if (st == net::LineReader::Status::TimedOut)
    return make_result(CheckStatus::Critical, timeout_message(timeout), started, source);
  if (st != net::LineReader::Status::Line)
    return make_result(CheckStatus::Critical, "No data received from host", started, source);

  static const std::regex status_re(R"(^HTTP/\d+\.\d+ (\d{3})(?: .*)?$)");
  std::smatch m;
  if (!std::regex_match(status_line, m, status_re))
    return make_result(CheckStatus::Critical, "Invalid HTTP response received from host: " + status_line, started,
                       source);
  int code = std::stoi(m[1].str());
  auto secs = whole_seconds(SteadyClock::now() - t0);
  if (code >= 200 && code < 400) {
    return make_result(CheckStatus::Ok,
                       "HTTP ok: " + status_line + " - " + std::to_string(secs) + " second response time", started,
                       source);
  }
  return make_result(CheckStatus::Critical, "HTTP CRITICAL: " + status_line, started, source);
}

CheckResult check_ping(const std::string& address, Timeout timeout, const PingOptions& options) {
  auto started = Clock::now();
  std::string source = "ping:" + address;
  auto wait_secs = std::max<long long>(1, std::chrono::duration_cast<std::chrono::seconds>(timeout).count());
  ProcessSpec spec;
  spec.argv = {options.command, "-n", "-c", "1", "-W", std::to_string(wait_secs), address};
  spec.timeout = timeout;
  auto outcome = run_process(spec);
  switch (outcome.kind) {
    case ProcessOutcome::Kind::SpawnFailed:
      if (outcome.spawn_errno == ENOENT)
        return make_result(CheckStatus::Unknown, "ping command not found: " + options.command, started, source);
      return make_result(CheckStatus::Unknown, "cannot run ping command: " + outcome.error, started, source);
    case ProcessOutcome::Kind::TimedOut:
      return make_result(CheckStatus::Critical, timeout_message(timeout), started, source);
    case ProcessOutcome::Kind::Signaled:
      return make_result(CheckStatus::Unknown, "ping killed by signal " + std::to_string(outcome.signal), started,
                         source);
    case ProcessOutcome::Kind::Exited:
      break;
  }
  if (outcome.exit_code != 0)
    return make_result(CheckStatus::Critical, "PING CRITICAL - " + address + " unreachable", started, source);
  static const std::regex rtt_re(R"(time[=<]([0-9.]+) ?ms)");
  std::smatch m;
  if (std::regex_search(outcome.stdout_data, m, rtt_re))
    return make_result(CheckStatus::Ok, "PING OK - " + address + " rta " + m[1].str() + " ms", started, source);
  return make_result(CheckStatus::Ok, "PING OK - " + address + " is alive", started, source);
}

CheckResult check_cluster(std::span<const CheckStatus> members, int warn_threshold, int crit_threshold) {
  auto now = Clock::now();
  if (members.empty()) return make_result(CheckStatus::Unknown, "cluster has no members", now, "cluster");
  auto total = static_cast<int>(members.size());
  // crit above the member count is allowed: CRITICAL is then unreachable.
  if (warn_threshold < 1 || warn_threshold > crit_threshold) {
    return make_result(CheckStatus::Unknown,
                       "invalid cluster thresholds warn=" + std::to_string(warn_threshold) +
                           " crit=" + std::to_string(crit_threshold) + " for " + std::to_string(total) + " members",
                       now, "cluster");
  }
  auto failed = static_cast<int>(
      std::count_if(members.begin(), members.end(), [](CheckStatus s) { return s != CheckStatus::Ok; }));
  CheckStatus status = CheckStatus::Ok;
  if (failed >= crit_threshold) status = CheckStatus::Critical;
  else if (failed >= warn_threshold) status = CheckStatus::Warning;
  return make_result(status,
                     "cluster: " + std::to_string(failed) + "/" + std::to_string(total) + " members failed", now,
                     "cluster");
}

TimePoint next_check_time(bool in_retry, int normal_interval, int retry_interval, TimePoint last_finished,
                          Seconds interval_length) {
  int units = in_retry ? retry_interval : normal_interval;
  auto step = interval_length * std::max(units, 0);
  return last_finished + std::max(step, Seconds{0});
}

TimePoint next_check_time(const ScheduleEntry& entry, const objconf::ServiceDef& def, TimePoint last_finished,
                          Seconds interval_length) {
  return next_check_time(entry.in_retry, def.normal_check_interval, def.retry_check_interval, last_finished,
                         interval_length);
}

TimePoint next_check_time(const ScheduleEntry& entry, const objconf::HostDef& def, TimePoint last_finished,
                          Seconds interval_length) {
  return next_check_time(entry.in_retry, def.normal_check_interval, def.retry_check_interval, last_finished,
                         interval_length);
}

}  // namespace sentinel::checkcore
