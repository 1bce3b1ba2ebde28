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

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "sentinel/passive.hpp"

namespace sentinel::passive {

namespace {
constexpr std::size_t kMaxPartial = 1 << 20;

std::int64_t mtime_ns(const struct stat& st) {
  return static_cast<std::int64_t>(st.st_mtim.tv_sec) * 1000000000 + st.st_mtim.tv_nsec;
}
}  // namespace

LogWatcher::LogWatcher(LogWatchOptions options, Submit submit, AuditLog* audit)
    : options_(std::move(options)), submit_(std::move(submit)), audit_(audit) {
  for (const auto& p : options_.files) {
    Followed f;
    f.path = p;
    files_.push_back(std::move(f));
  }
}

LogWatcher::~LogWatcher() {
  stop();
  for (auto& f : files_) close_file(f);
}

void LogWatcher::start() {
  stopping_ = false;
  thread_ = std::thread([this] {
    while (!stopping_) {
      poll_once();
      auto until = std::chrono::steady_clock::now() + options_.poll_interval;
      while (!stopping_ && std::chrono::steady_clock::now() < until)
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    poll_once();
  });
}

void LogWatcher::stop() {
  stopping_ = true;
  if (thread_.joinable()) thread_.join();
}

LogWatchStats LogWatcher::stats() const {
  std::lock_guard lock(mu_);
  auto s = stats_;
  s.buffered = buffer_.size();
  return s;
}

void LogWatcher::poll_once() {
  for (auto& f : files_) poll_file(f);
  flush();
}

void LogWatcher::close_file(Followed& f) {
  if (f.fd >= 0) ::close(f.fd);
  f.fd = -1;
  f.partial.clear();
}

void LogWatcher::poll_file(Followed& f) {
  struct stat st {};
  if (::stat(f.path.c_str(), &st) != 0) {
    // Between rotate and create; keep draining the old descriptor.
    if (f.fd < 0) {
      if (!f.failing && audit_) audit_->record("logwatch", "cannot open " + f.path.string() + ": " + std::strerror(errno));
      f.failing = true;
      f.initial = false;  // a file that shows up later is read from its start
      return;
    }
  } else {
    bool replaced = f.fd >= 0 && (static_cast<std::uint64_t>(st.st_ino) != f.inode ||
                                  static_cast<std::uint64_t>(st.st_dev) != f.device);
    // Shrunk, or rewritten to a length we already passed (copytruncate then a short write).
    const auto size = static_cast<std::uint64_t>(st.st_size);
    bool truncated = f.fd >= 0 && !replaced &&
                     (size < f.offset || (size == f.offset && mtime_ns(st) > f.mtime_ns));
    if (replaced) {
      // Finish the rotated-away file before switching.
      char buf[65536];
      ssize_t n;
      while ((n = ::read(f.fd, buf, sizeof buf)) > 0) {
        f.partial.append(buf, static_cast<std::size_t>(n));
      }
      std::size_t start = 0;
      for (std::size_t nl; (nl = f.partial.find('\n', start)) != std::string::npos; start = nl + 1)
        handle_line(f.partial.substr(start, nl - start));
      if (start < f.partial.size()) handle_line(f.partial.substr(start));
      close_file(f);
    } else if (truncated) {
      close_file(f);
    }
    if (replaced || truncated) {
      std::lock_guard lock(mu_);
      ++stats_.reopens;
    }
    if (f.fd < 0) {
      int fd = ::open(f.path.c_str(), O_RDONLY | O_CLOEXEC);
      if (fd < 0) {
        if (!f.failing && audit_) audit_->record("logwatch", "cannot open " + f.path.string() + ": " + std::strerror(errno));
        f.failing = true;
        return;
      }
      struct stat fst {};
      ::fstat(fd, &fst);
      f.fd = fd;
      f.inode = static_cast<std::uint64_t>(fst.st_ino);
      f.device = static_cast<std::uint64_t>(fst.st_dev);
      f.offset = 0;
      if (f.initial && !options_.from_start) {
        f.offset = static_cast<std::uint64_t>(::lseek(fd, 0, SEEK_END));
      }
      f.initial = false;
      f.failing = false;
    }
  }

  char buf[65536];
  while (true) {
    ssize_t n = ::read(f.fd, buf, sizeof buf);
    if (n <= 0) break;
    f.offset += static_cast<std::uint64_t>(n);
    f.partial.append(buf, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t nl; (nl = f.partial.find('\n', start)) != std::string::npos; start = nl + 1)
      handle_line(f.partial.substr(start, nl - start));
    f.partial.erase(0, start);
    if (f.partial.size() > kMaxPartial) {
      handle_line(f.partial);
      f.partial.clear();
    }
  }
  struct stat after {};
  if (::fstat(f.fd, &after) == 0 && static_cast<std::uint64_t>(after.st_size) == f.offset) f.mtime_ns = mtime_ns(after);
}

void LogWatcher::handle_line(const std::string& line) {
  auto now = to_epoch_seconds(Clock::now());
  auto r = match_line(options_.rules, line, now, audit_);
  std::lock_guard lock(mu_);
  ++stats_.lines;
  if (!r) return;
  ++stats_.matches;
  buffer_.push_back(std::move(*r));
  while (buffer_.size() > options_.buffer_limit) {
    buffer_.pop_front();
    ++stats_.dropped;
  }
}

void LogWatcher::flush() {
  while (true) {
    PassiveResultLine next;
    {
      std::lock_guard lock(mu_);
      if (buffer_.empty()) return;
      next = buffer_.front();
    }
    if (!submit_ || !submit_(next)) return;
    std::lock_guard lock(mu_);
    if (!buffer_.empty() && buffer_.front() == next) buffer_.pop_front();
    ++stats_.submitted;
  }
}

}  // namespace sentinel::passive
