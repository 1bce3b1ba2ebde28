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

#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <list>
#include <mutex>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "sentinel/audit.hpp"
#include "sentinel/net.hpp"
#include "sentinel/timeutil.hpp"
#include "sentinel/types.hpp"

namespace sentinel::passive {

enum class ResultKind { Service, Host };

struct PassiveResultLine {
  std::int64_t received_at = 0;
  ResultKind kind = ResultKind::Service;
  std::string host;
  std::string service;  // empty for HOST lines
  int code = 0;         // 0..3 for services, 0 (up) or 1 (down) for hosts
  std::string output;

  ObjectKey key() const {
    return kind == ResultKind::Host ? ObjectKey::for_host(host) : ObjectKey::for_service(host, service);
  }
  bool operator==(const PassiveResultLine&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string reason, const std::string& message)
      : std::runtime_error(message), reason_(std::move(reason)) {}
  /// Short token used in gateway replies ("parse" or "range").
  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
};

/// Empty when the record can be encoded; otherwise why not.
std::optional<std::string> invalid_reason(const PassiveResultLine& r);

/// LF-terminated wire line. Throws std::invalid_argument when the record is invalid.
std::string encode_line(const PassiveResultLine& r);

/// Accepts a line with or without its trailing LF (and an optional CR). Throws ParseError.
PassiveResultLine decode_line(std::string_view line);

/// Producer timestamp within +/- skew of now, else now (with an audit record).
TimePoint trusted_time(std::int64_t epoch, TimePoint now, Seconds skew, AuditLog* audit = nullptr,
                       std::string_view peer = {});

/// Passive result as a CheckResult. Host codes: 0 -> OK (up), 1 -> CRITICAL (down).
CheckResult to_check_result(const PassiveResultLine& r, TimePoint at, std::string source);

// ---- gateway ----

using ResultSink = std::function<void(const ObjectKey&, const CheckResult&)>;

struct GatewayOptions {
  net::Endpoint listen{"127.0.0.1", 0};
  std::optional<std::string> token;
  std::size_t max_line = 8192;
  Seconds skew{15 * 60};
  std::chrono::milliseconds idle_timeout{300000};
};

struct GatewayStats {
  std::uint64_t connections = 0;
  std::uint64_t accepted = 0;  // acknowledged OK and forwarded
  std::uint64_t rejected = 0;  // ERR replies other than auth
  std::uint64_t auth_failures = 0;
};

/// Line-protocol receiver for passive results. One thread per connection;
/// each connection's results reach the sink in the order they were sent.
class Gateway {
 public:
  Gateway(GatewayOptions options, ResultSink sink, AuditLog* audit = nullptr);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  void start();  // throws net::NetError when the address cannot be bound
  void stop();
  int port() const { return port_; }
  GatewayStats stats() const;

 private:
  struct Conn {
    net::Socket sock;
    std::string peer;
    std::thread thread;
    std::atomic<bool> done{false};
  };

  void accept_loop();
  void serve(Conn& conn);
  void reap(bool all);

  GatewayOptions options_;
  ResultSink sink_;
  AuditLog* audit_;
  net::Socket listener_;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  mutable std::mutex mu_;
  std::list<Conn> conns_;
  GatewayStats stats_;
};

/// Producer side of the gateway protocol. Reconnects lazily.
class GatewayClient {
 public:
  GatewayClient(net::Endpoint gateway, std::optional<std::string> token = std::nullopt,
                std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));

  /// The gateway's reply ("OK" or "ERR ..."), or nullopt when the gateway is unreachable.
  std::optional<std::string> submit(const PassiveResultLine& r);
  void close();

 private:
  bool ensure_connected();

  net::Endpoint gateway_;
  std::optional<std::string> token_;
  std::chrono::milliseconds timeout_;
  net::Socket sock_;
  std::optional<net::LineReader> reader_;
};

// ---- log rules ----

struct LogRule {
  CheckStatus state = CheckStatus::Critical;
  std::string service;
  std::string host;     // literal host name, or "$N" for capture group N
  int host_group = -1;  // N when host is a capture reference
  std::string output_template;  // $N / ${N} capture references, $$ for '$'; empty means the whole line
  std::string pattern;
  std::regex re;
};

/// Compiles and validates a rule. Throws ParseError.
LogRule make_rule(CheckStatus state, std::string service, std::string host, std::string pattern,
                  std::string output_template = {});

/// `<state>;<service>;<host-or-$N>;<pattern>`; the pattern may contain ';'.
/// Rules read from files carry no output template. Throws ParseError.
LogRule parse_rule(std::string_view line);

/// Skips blank lines and `#` comments. Throws ParseError naming the line number.
std::vector<LogRule> parse_rules(std::string_view text);

/// Expands capture references; nullopt when a reference is out of range.
std::optional<std::string> expand_template(std::string_view tmpl, const std::smatch& m);

/// First matching rule wins.
std::optional<PassiveResultLine> match_line(const std::vector<LogRule>& rules, std::string_view line,
                                            std::int64_t epoch, AuditLog* audit = nullptr);

// ---- log watcher ----

struct LogWatchOptions {
  std::vector<std::filesystem::path> files;
  std::vector<LogRule> rules;
  std::chrono::milliseconds poll_interval{200};
  std::size_t buffer_limit = 10000;
  bool from_start = false;  // read existing content instead of starting at the end
};

struct LogWatchStats {
  std::uint64_t lines = 0;
  std::uint64_t matches = 0;
  std::uint64_t submitted = 0;
  std::uint64_t dropped = 0;
  std::uint64_t reopens = 0;
  std::size_t buffered = 0;
};

/// Follows files like `tail -F`, matching new lines and submitting results.
/// The submit callback returns false when the result could not be delivered;
/// such results stay buffered (oldest dropped beyond the limit) and are retried.
class LogWatcher {
 public:
  using Submit = std::function<bool(const PassiveResultLine&)>;

  LogWatcher(LogWatchOptions options, Submit submit, AuditLog* audit = nullptr);
  ~LogWatcher();
  LogWatcher(const LogWatcher&) = delete;
  LogWatcher& operator=(const LogWatcher&) = delete;

  void start();
  void stop();
  /// One pass over every file plus a flush attempt; usable without start().
  void poll_once();
  LogWatchStats stats() const;

 private:
  struct Followed {
    std::filesystem::path path;
    int fd = -1;
    std::uint64_t inode = 0;
    std::uint64_t device = 0;
    std::uint64_t offset = 0;
    std::int64_t mtime_ns = 0;  // modification time when last read to the end
    std::string partial;
    bool initial = true;
    bool failing = false;
  };

  void poll_file(Followed& f);
  void close_file(Followed& f);
  void handle_line(const std::string& line);
  void flush();

  LogWatchOptions options_;
  Submit submit_;
  AuditLog* audit_;
  std::vector<Followed> files_;
  std::deque<PassiveResultLine> buffer_;
  mutable std::mutex mu_;
  LogWatchStats stats_;
  std::atomic<bool> stopping_{false};
  std::thread thread_;
};

}  // namespace sentinel::passive
