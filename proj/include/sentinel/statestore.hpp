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

// Flat-file status and retention stores. Both files are key=value blocks
// separated by blank lines: a header block, one block per object, and an
// "end" marker so a damaged file is detected instead of half-read.

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

#include "sentinel/audit.hpp"
#include "sentinel/objconf.hpp"
#include "sentinel/statemachine.hpp"

namespace sentinel::store {

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using StateMap = std::map<ObjectKey, state::MonitorState>;

struct StatusSnapshot {
  TimePoint generated_at{};
  StateMap entries;  // hosts and services
  bool operator==(const StatusSnapshot&) const = default;
};

std::string serialize_status(const StatusSnapshot& snapshot);
/// Throws StoreError on any malformed or incomplete input.
StatusSnapshot parse_status(std::string_view text);

std::string serialize_retention(const StateMap& states);
StateMap parse_retention(std::string_view text);

/// Steps of an atomic write, reported to the fault hook. A hook that throws
/// or exits simulates a crash at that point.
enum class WriteStage { TempOpened, HalfWritten, Written, BeforeRename, Renamed };
using FaultHook = std::function<void(WriteStage)>;

/// Writes `content` to a temporary file next to `target`, syncs it and renames
/// it into place. Throws StoreError; the previous `target` is untouched on failure.
void write_atomic(const std::filesystem::path& target, std::string_view content, const FaultHook& hook = {});

/// Removes temporary files a crashed writer left next to `target`.
std::size_t remove_stale_temps(const std::filesystem::path& target);

inline constexpr const char* kStatusFile = "status.dat";

/// Owns `<dir>/status.dat`. generated_at never goes backwards across writes,
/// including across restarts that find an earlier file.
class StatusWriter {
 public:
  StatusWriter(std::filesystem::path dir, AuditLog* audit = nullptr);

  /// False when the write failed; the previous file stays in place and the
  /// failure is audited.
  bool write(StatusSnapshot snapshot, const FaultHook& hook = {});
  std::filesystem::path path() const { return dir_ / kStatusFile; }
  TimePoint last_generated() const { return last_; }

 private:
  std::filesystem::path dir_;
  AuditLog* audit_;
  TimePoint last_{};
};

StatusSnapshot read_status(const std::filesystem::path& file);

struct RetentionLoad {
  StateMap states;
  std::size_t dropped = 0;  // entries for objects no longer configured
  bool cold_start = false;  // file missing or unreadable
};

/// Never throws: a missing or corrupt file is a cold start (the latter audited).
RetentionLoad read_retention(const std::filesystem::path& file, const objconf::ResolvedConfig& config,
                             AuditLog* audit = nullptr);
void write_retention(const StateMap& states, const std::filesystem::path& file);

}  // namespace sentinel::store
