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

#include <poll.h>
#include <sys/socket.h>

#include "sentinel/passive.hpp"
#include "sentinel/process.hpp"
#include "sentinel/strutil.hpp"

namespace sentinel::passive {

namespace {

using SteadyClock = std::chrono::steady_clock;

bool reply(int fd, std::string_view text) {
  std::string line(text);
  line += '\n';
  return net::send_all(fd, line, SteadyClock::now() + std::chrono::seconds(10));
}

}  // namespace

Gateway::Gateway(GatewayOptions options, ResultSink sink, AuditLog* audit)
    : options_(std::move(options)), sink_(std::move(sink)), audit_(audit) {}

Gateway::~Gateway() { stop(); }

void Gateway::start() {
  ignore_sigpipe();
  listener_ = net::listen_tcp(options_.listen);
  port_ = net::local_port(listener_);
  acceptor_ = std::thread([this] { accept_loop(); });
}

void Gateway::stop() {
  if (stopping_.exchange(true)) return;
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(mu_);
    for (auto& c : conns_) c.sock.shutdown();
  }
  reap(true);
  listener_.close();
}

GatewayStats Gateway::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

void Gateway::reap(bool all) {
  std::list<Conn> finished;
  {
    std::lock_guard lock(mu_);
    for (auto it = conns_.begin(); it != conns_.end();) {
      if (all || it->done) {
        auto next = std::next(it);
        finished.splice(finished.end(), conns_, it);
        it = next;
      } else {
        ++it;
      }
    }
  }
  for (auto& c : finished) {
    if (c.thread.joinable()) c.thread.join();
  }
}

void Gateway::accept_loop() {
  while (!stopping_) {
    pollfd p{listener_.fd(), POLLIN, 0};
    int pr = ::poll(&p, 1, 100);
    reap(false);
    if (pr <= 0) continue;
    int fd = ::accept4(listener_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    std::lock_guard lock(mu_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    auto& conn = conns_.emplace_back();
    conn.sock = net::Socket(fd);
    conn.peer = net::peer_name(conn.sock);
    ++stats_.connections;
    conn.thread = std::thread([this, &conn] {
      serve(conn);
      conn.done = true;
    });
  }
}

void Gateway::serve(Conn& conn) {
  const int fd = conn.sock.fd();
  net::LineReader reader(fd, options_.max_line);
  bool authed = !options_.token.has_value();
  std::string line;
  while (!stopping_) {
    auto st = reader.read_line(line, SteadyClock::now() + options_.idle_timeout);
    if (st == net::LineReader::Status::TooLong) {
      {
        std::lock_guard lock(mu_);
        ++stats_.rejected;
      }
      if (!reply(fd, "ERR too long")) break;
      continue;
    }
    if (st != net::LineReader::Status::Line) break;

    if (starts_with(line, "AUTH ") || line == "AUTH") {
      if (!options_.token || line == "AUTH " + *options_.token) {
        authed = true;
        if (!reply(fd, "OK")) break;
        continue;
      }
    }
    if (!authed) {
      {
        std::lock_guard lock(mu_);
        ++stats_.auth_failures;
      }
      if (audit_) audit_->record("gateway", "authentication failed for " + conn.peer);
      reply(fd, "ERR auth");
      break;
    }

    try {
      auto r = decode_line(line);
      auto at = trusted_time(r.received_at, Clock::now(), options_.skew, audit_, conn.peer);
      if (sink_) sink_(r.key(), to_check_result(r, at, conn.peer));
      {
        std::lock_guard lock(mu_);
        ++stats_.accepted;
      }
      if (!reply(fd, "OK")) break;
    } catch (const ParseError& e) {
      {
        std::lock_guard lock(mu_);
        ++stats_.rejected;
      }
      if (!reply(fd, "ERR " + e.reason())) break;
    }
  }
  conn.sock.shutdown();
}

GatewayClient::GatewayClient(net::Endpoint gateway, std::optional<std::string> token,
                             std::chrono::milliseconds timeout)
    : gateway_(std::move(gateway)), token_(std::move(token)), timeout_(timeout) {
  ignore_sigpipe();
}

void GatewayClient::close() {
  reader_.reset();
  sock_.close();
}

bool GatewayClient::ensure_connected() {
  if (sock_) return true;
  auto deadline = SteadyClock::now() + timeout_;
  auto conn = net::connect_tcp(gateway_.host, gateway_.port, deadline);
  if (conn.status != net::ConnectStatus::Connected) return false;
  sock_ = std::move(conn.socket);
  reader_.emplace(sock_.fd(), 8192);
  if (token_) {
    std::string answer;
    if (!net::send_all(sock_.fd(), "AUTH " + *token_ + "\n", deadline) ||
        reader_->read_line(answer, deadline) != net::LineReader::Status::Line || answer != "OK") {
      close();
      return false;
    }
  }
  return true;
}

std::optional<std::string> GatewayClient::submit(const PassiveResultLine& r) {
  auto line = encode_line(r);
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (!ensure_connected()) return std::nullopt;
    auto deadline = SteadyClock::now() + timeout_;
    std::string answer;
    if (net::send_all(sock_.fd(), line, deadline) &&
        reader_->read_line(answer, deadline) == net::LineReader::Status::Line) {
      if (answer == "ERR auth") close();
      return answer;
    }
    close();  // stale connection; retry once on a fresh one
  }
  return std::nullopt;
}

}  // namespace sentinel::passive
