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
#include <cstddef>
#include <string>
#include <vector>

namespace sentinel {

struct ProcessSpec {
  std::vector<std::string> argv;  // argv[0] is looked up on PATH when it has no slash
  std::string stdin_data;
  std::chrono::milliseconds timeout{10000};
  std::size_t max_output = 64 * 1024;
};

struct ProcessOutcome {
  enum class Kind { Exited, Signaled, TimedOut, SpawnFailed };

  Kind kind = Kind::SpawnFailed;
  int exit_code = -1;
  int signal = 0;
  std::string stdout_data;
  std::string error;  // spawn failure reason
  int spawn_errno = 0;
  std::chrono::steady_clock::duration elapsed{};
};

/// Runs a child in its own process group, feeding stdin and capturing stdout
/// (stderr is discarded). On timeout the whole group is killed.
ProcessOutcome run_process(const ProcessSpec& spec);

/// Ignores SIGPIPE process-wide; idempotent.
void ignore_sigpipe();

}  // namespace sentinel
