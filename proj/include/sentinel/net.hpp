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

// Thin POSIX TCP helpers shared by the probes, the gateway and its client.

#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sentinel::net {

using Deadline = std::chrono::steady_clock::time_point;

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& o) noexcept : fd_(o.release()) {}
  Socket& operator=(Socket&& o) noexcept;
  ~Socket() { close(); }

  int fd() const { return fd_; }
  int release();
  void close();
  /// Unblocks readers on other threads without releasing the descriptor.
  void shutdown();
  explicit operator bool() const { return fd_ >= 0; }

 private:
  int fd_ = -1;
};

/// host:port, [v6]:port, or :port (all interfaces).
struct Endpoint {
  std::string host;
  int port = 0;

  static std::optional<Endpoint> parse(std::string_view text);
  std::string str() const;
};

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ConnectStatus { Connected, Refused, TimedOut, ResolveFailed, Failed };

struct ConnectResult {
  ConnectStatus status = ConnectStatus::Failed;
  Socket socket;
  std::string message;
};

ConnectResult connect_tcp(const std::string& host, int port, Deadline deadline);

/// Binds and listens; throws NetError. Port 0 picks an ephemeral port.
Socket listen_tcp(const Endpoint& where, int backlog = 128);
int local_port(const Socket& s);

/// "address:port" of the remote end, or "unknown".
std::string peer_name(const Socket& s);

/// Sends everything or returns false.
bool send_all(int fd, std::string_view data, Deadline deadline);

/// Buffered LF-delimited reader. A trailing CR is stripped.
class LineReader {
 public:
  enum class Status { Line, TooLong, Eof, TimedOut, Error };

  LineReader(int fd, std::size_t max_line) : fd_(fd), max_line_(max_line) {}

  /// TooLong is reported once the line exceeds max_line; the rest of that line is discarded.
  Status read_line(std::string& line, Deadline deadline);

  /// Raw bytes already buffered past the last returned line.
  const std::string& buffered() const { return buf_; }

 private:
  int fd_;
  std::size_t max_line_;
  std::string buf_;
  bool discarding_ = false;
};

}  // namespace sentinel::net
