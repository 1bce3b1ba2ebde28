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

#include <cstddef>
#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

/// Append-only line log. Keeps a bounded in-memory tail and optionally
/// mirrors every line to a file. Thread-safe.
class LineLog {
 public:
  LineLog() = default;
  explicit LineLog(const std::filesystem::path& file);

  LineLog(const LineLog&) = delete;
  LineLog& operator=(const LineLog&) = delete;

  void append(std::string line);

  std::vector<std::string> tail() const;
  std::size_t count() const;
  bool contains(std::string_view needle) const;

 private:
  static constexpr std::size_t kTailLimit = 10000;

  mutable std::mutex mutex_;
  std::deque<std::string> tail_;
  std::size_t count_ = 0;
  std::ofstream file_;
};

/// Operator-facing record of rejected input, operator actions and recovered faults.
class AuditLog : public LineLog {
 public:
  using LineLog::LineLog;

  /// Writes "<ISO8601> <subsystem>: <message>".
  void record(std::string_view subsystem, std::string_view message);
};

}  // namespace sentinel
