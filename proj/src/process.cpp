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

#include "sentinel/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>

extern char** environ;

namespace sentinel {

namespace {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(o.release()) {}
  Fd& operator=(Fd&& o) noexcept {
    reset(o.release());
    return *this;
  }
  ~Fd() { reset(); }

  int get() const { return fd_; }
  int release() {
    int f = fd_;
    fd_ = -1;
    return f;
  }
  void reset(int fd = -1) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = fd;
  }
  explicit operator bool() const { return fd_ >= 0; }

 private:
  int fd_ = -1;
};

bool make_pipe(Fd& read_end, Fd& write_end) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) return false;
  read_end.reset(fds[0]);
  write_end.reset(fds[1]);
  return true;
}

}  // namespace

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

ProcessOutcome run_process(const ProcessSpec& spec) {
  using namespace std::chrono;
  ignore_sigpipe();
  ProcessOutcome out;
  auto started = steady_clock::now();
  if (spec.argv.empty() || spec.argv[0].empty()) {
    out.error = "empty command";
    return out;
  }

  Fd in_r, in_w, out_r, out_w;
  if (!make_pipe(in_r, in_w) || !make_pipe(out_r, out_w)) {
    out.error = std::string("pipe: ") + std::strerror(errno);
    return out;
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_r.get(), STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_w.get(), STDOUT_FILENO);
  posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, "/dev/null", O_WRONLY, 0);

  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  sigset_t defaults;
  sigemptyset(&defaults);
  sigaddset(&defaults, SIGPIPE);
  posix_spawnattr_setsigdefault(&attr, &defaults);
  posix_spawnattr_setpgroup(&attr, 0);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGDEF);

  std::vector<char*> argv;
  argv.reserve(spec.argv.size() + 1);
  for (const auto& a : spec.argv) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  pid_t pid = -1;
  int rc = ::posix_spawnp(&pid, argv[0], &actions, &attr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) {
    out.error = spec.argv[0] + ": " + std::strerror(rc);
    out.spawn_errno = rc;
    out.elapsed = steady_clock::now() - started;
    return out;
  }
  in_r.reset();
  out_w.reset();

  ::fcntl(in_w.get(), F_SETFL, O_NONBLOCK);
  std::size_t stdin_written = 0;
  if (spec.stdin_data.empty()) in_w.reset();

  const auto deadline = started + spec.timeout;
  bool timed_out = false;
  char buf[4096];
  while (out_r || in_w) {
    auto now = steady_clock::now();
    if (now >= deadline) {
      timed_out = true;
      break;
    }
    pollfd fds[2];
    int n = 0;
    int out_idx = -1, in_idx = -1;
    if (out_r) {
      out_idx = n;
      fds[n++] = {out_r.get(), POLLIN, 0};
    }
    if (in_w) {
      in_idx = n;
      fds[n++] = {in_w.get(), POLLOUT, 0};
    }
    auto wait_ms = duration_cast<milliseconds>(deadline - now).count() + 1;
    int pr = ::poll(fds, static_cast<nfds_t>(n), static_cast<int>(wait_ms));
    if (pr < 0 && errno != EINTR) break;
    if (pr <= 0) continue;
    if (out_idx >= 0 && fds[out_idx].revents) {
      auto r = ::read(out_r.get(), buf, sizeof buf);
      if (r > 0) {
        if (out.stdout_data.size() < spec.max_output) {
          out.stdout_data.append(buf, std::min<std::size_t>(static_cast<std::size_t>(r),
                                                            spec.max_output - out.stdout_data.size()));
        }
      } else if (r == 0 || (errno != EINTR && errno != EAGAIN)) {
        out_r.reset();
      }
    }
    if (in_idx >= 0 && fds[in_idx].revents) {
      auto w = ::write(in_w.get(), spec.stdin_data.data() + stdin_written, spec.stdin_data.size() - stdin_written);
      if (w > 0) stdin_written += static_cast<std::size_t>(w);
      if (w < 0 && errno != EAGAIN && errno != EINTR) in_w.reset();
      if (stdin_written >= spec.stdin_data.size()) in_w.reset();
    }
  }

  int status = 0;
  if (!timed_out) {
    // Output closed; wait for exit within the remaining budget.
    while (true) {
      pid_t w = ::waitpid(pid, &status, WNOHANG);
      if (w == pid) break;
      if (w < 0 && errno != EINTR) break;
      if (steady_clock::now() >= deadline) {
        timed_out = true;
        break;
      }
      std::this_thread::sleep_for(milliseconds(1));
    }
  }
  if (timed_out) {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    out.kind = ProcessOutcome::Kind::TimedOut;
  } else if (WIFEXITED(status)) {
    out.kind = ProcessOutcome::Kind::Exited;
    out.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    out.kind = ProcessOutcome::Kind::Signaled;
    out.signal = WTERMSIG(status);
  }
  out.elapsed = steady_clock::now() - started;
  return out;
}

}  // namespace sentinel
