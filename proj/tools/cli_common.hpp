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

// Helpers shared by the command-line tools.

#pragma once

#include <signal.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentinel/objconf.hpp"
#include "sentinel/strutil.hpp"

namespace sentinel::cli {

inline std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// First line of the file, trimmed. Empty tokens are refused.
inline std::optional<std::string> read_token(const std::string& file) {
  if (file.empty()) return std::nullopt;
  auto text = slurp(file);
  auto token = std::string(trim(text.substr(0, text.find('\n'))));
  if (token.empty()) throw std::runtime_error("token file " + file + " is empty");
  return token;
}

/// Loads and validates config files; diagnostics go to stderr. Throws when any is an error.
inline objconf::ResolvedConfig load_config_or_throw(const std::vector<std::string>& files) {
  std::vector<std::filesystem::path> paths(files.begin(), files.end());
  auto r = objconf::load_files(paths);
  int errors = 0;
  for (const auto& d : r.diagnostics) {
    std::cerr << d.str() << "\n";
    errors += d.severity == objconf::Severity::Error;
  }
  if (errors) throw std::runtime_error(std::to_string(errors) + " configuration error(s)");
  return std::move(r.config);
}

/// Blocks SIGINT/SIGTERM in this thread (and threads started later).
inline sigset_t block_stop_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

inline int wait_for_stop_signal(const sigset_t& set) {
  int sig = 0;
  sigwait(&set, &sig);
  return sig;
}

}  // namespace sentinel::cli
