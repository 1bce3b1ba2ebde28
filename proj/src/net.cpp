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

#include "sentinel/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "sentinel/strutil.hpp"

namespace sentinel::net {

namespace {

int remaining_ms(Deadline deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
  return left.count() < 0 ? 0 : static_cast<int>(left.count());
}

}  // namespace

Socket& Socket::operator=(Socket&& o) noexcept {
  if (this != &o) {
    close();
    fd_ = o.release();
  }
  return *this;
}

int Socket::release() {
  int f = fd_;
  fd_ = -1;
  return f;
}

void Socket::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Socket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

std::optional<Endpoint> Endpoint::parse(std::string_view text) {
  text = trim(text);
  Endpoint ep;
  std::string_view port_part;
  if (!text.empty() && text.front() == '[') {
    auto close = text.find(']');
    if (close == std::string_view::npos || close + 1 >= text.size() || text[close + 1] != ':') return std::nullopt;
    ep.host = std::string(text.substr(1, close - 1));
    port_part = text.substr(close + 2);
  } else {
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos) return std::nullopt;
    ep.host = std::string(text.substr(0, colon));
    port_part = text.substr(colon + 1);
  }
  auto port = parse_int(port_part);
  if (!port || *port < 0 || *port > 65535) return std::nullopt;
  ep.port = static_cast<int>(*port);
  return ep;
}

std::string Endpoint::str() const {
  if (host.find(':') != std::string::npos) return "[" + host + "]:" + std::to_string(port);
  return host + ":" + std::to_string(port);
}

ConnectResult connect_tcp(const std::string& host, int port, Deadline deadline) {
  ConnectResult result;
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  auto service = std::to_string(port);
  int gai = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res);
  if (gai != 0) {
    result.status = ConnectStatus::ResolveFailed;
    result.message = "cannot resolve '" + host + "': " + ::gai_strerror(gai);
    return result;
  }

  result.status = ConnectStatus::Failed;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC | SOCK_NONBLOCK, ai->ai_protocol));
    if (!s) continue;
    int rc = ::connect(s.fd(), ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno == EINPROGRESS) {
      pollfd p{s.fd(), POLLOUT, 0};
      int pr;
      do {
        pr = ::poll(&p, 1, remaining_ms(deadline));
      } while (pr < 0 && errno == EINTR);
      if (pr == 0) {
        result.status = ConnectStatus::TimedOut;
        result.message = "connect timed out";
        break;
      }
      int err = 0;
      socklen_t len = sizeof err;
      ::getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
      rc = err == 0 ? 0 : -1;
      errno = err;
    }
    if (rc == 0) {
      int flags = ::fcntl(s.fd(), F_GETFL);
      ::fcntl(s.fd(), F_SETFL, flags & ~O_NONBLOCK);
      int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      result.status = ConnectStatus::Connected;
      result.socket = std::move(s);
      result.message.clear();
      break;
    }
    if (errno == ECONNREFUSED) {
      result.status = ConnectStatus::Refused;
      result.message = "Connection refused";
    } else if (result.status != ConnectStatus::Refused) {
      result.status = ConnectStatus::Failed;
      result.message = std::strerror(errno);
    }
  }
  ::freeaddrinfo(res);
  return result;
}

Socket listen_tcp(const Endpoint& where, int backlog) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  auto service = std::to_string(where.port);
  const char* node = where.host.empty() || where.host == "*" ? nullptr : where.host.c_str();
  int gai = ::getaddrinfo(node, service.c_str(), &hints, &res);
  if (gai != 0) throw NetError("cannot resolve listen address '" + where.str() + "': " + ::gai_strerror(gai));
  std::string last_error = "no usable address";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
    if (!s) continue;
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(s.fd(), backlog) == 0) {
      ::freeaddrinfo(res);
      return s;
    }
    last_error = std::strerror(errno);
  }
  ::freeaddrinfo(res);
  throw NetError("cannot listen on " + where.str() + ": " + last_error);
}

int local_port(const Socket& s) {
  sockaddr_storage ss{};
  socklen_t len = sizeof ss;
  if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&ss), &len) != 0) return 0;
  if (ss.ss_family == AF_INET) return ntohs(reinterpret_cast<sockaddr_in*>(&ss)->sin_port);
  if (ss.ss_family == AF_INET6) return ntohs(reinterpret_cast<sockaddr_in6*>(&ss)->sin6_port);
  return 0;
}

std::string peer_name(const Socket& s) {
  sockaddr_storage ss{};
  socklen_t len = sizeof ss;
  if (::getpeername(s.fd(), reinterpret_cast<sockaddr*>(&ss), &len) != 0) return "unknown";
  char host[INET6_ADDRSTRLEN] = {};
  if (ss.ss_family == AF_INET) {
    auto* in = reinterpret_cast<sockaddr_in*>(&ss);
    ::inet_ntop(AF_INET, &in->sin_addr, host, sizeof host);
    return std::string(host) + ":" + std::to_string(ntohs(in->sin_port));
  }
  if (ss.ss_family == AF_INET6) {
    auto* in6 = reinterpret_cast<sockaddr_in6*>(&ss);
    ::inet_ntop(AF_INET6, &in6->sin6_addr, host, sizeof host);
    return "[" + std::string(host) + "]:" + std::to_string(ntohs(in6->sin6_port));
  }
  return "unknown";
}

bool send_all(int fd, std::string_view data, Deadline deadline) {
  while (!data.empty()) {
    pollfd p{fd, POLLOUT, 0};
    int pr = ::poll(&p, 1, remaining_ms(deadline));
    if (pr < 0 && errno == EINTR) continue;
    if (pr <= 0) return false;
    auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

LineReader::Status LineReader::read_line(std::string& line, Deadline deadline) {
  while (true) {
    auto nl = buf_.find('\n');
    if (nl != std::string::npos) {
      if (discarding_) {
        buf_.erase(0, nl + 1);
        discarding_ = false;
        continue;
      }
      line.assign(buf_, 0, nl);
      buf_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.size() > max_line_) return Status::TooLong;
      return Status::Line;
    }
    if (discarding_) {
      buf_.clear();
    } else if (buf_.size() > max_line_) {
      buf_.clear();
      discarding_ = true;
      return Status::TooLong;
    }

    pollfd p{fd_, POLLIN, 0};
    int pr = ::poll(&p, 1, remaining_ms(deadline));
    if (pr < 0) {
      if (errno == EINTR) continue;
      return Status::Error;
    }
    if (pr == 0) return Status::TimedOut;
    char chunk[4096];
    auto n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n == 0) {
      if (!buf_.empty() && !discarding_) {
        line = std::move(buf_);
        buf_.clear();
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return Status::Line;
      }
      return Status::Eof;
    }
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      return Status::Error;
    }
    buf_.append(chunk, static_cast<std::size_t>(n));
  }
}

}  // namespace sentinel::net
