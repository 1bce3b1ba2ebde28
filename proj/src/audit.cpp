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

#include "sentinel/audit.hpp"

#include <algorithm>

#include "sentinel/timeutil.hpp"

namespace sentinel {

LineLog::LineLog(const std::filesystem::path& file) {
  if (!file.empty()) file_.open(file, std::ios::app);
}

void LineLog::append(std::string line) {
  std::lock_guard lock(mutex_);
  if (file_.is_open()) {
    file_ << line << '\n';
    file_.flush();
  }
  tail_.push_back(std::move(line));
  if (tail_.size() > kTailLimit) tail_.pop_front();
  ++count_;
}

std::vector<std::string> LineLog::tail() const {
  std::lock_guard lock(mutex_);
  return {tail_.begin(), tail_.end()};
}

std::size_t LineLog::count() const {
  std::lock_guard lock(mutex_);
  return count_;
}

bool LineLog::contains(std::string_view needle) const {
  std::lock_guard lock(mutex_);
  return std::any_of(tail_.begin(), tail_.end(),
                     [&](const std::string& l) { return l.find(needle) != std::string::npos; });
}

void AuditLog::record(std::string_view subsystem, std::string_view message) {
  std::string line = format_iso8601(Clock::now());
  line += ' ';
  line += subsystem;
  line += ": ";
  line += message;
  append(std::move(line));
}

}  // namespace sentinel
