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

#include <cstdint>
#include <ctime>
#include <optional>
#include <string>
#include <string_view>

#include "sentinel/types.hpp"

namespace sentinel {

std::int64_t to_epoch_seconds(TimePoint t);
std::int64_t to_epoch_millis(TimePoint t);
TimePoint from_epoch_seconds(std::int64_t s);
TimePoint from_epoch_millis(std::int64_t ms);

/// UTC, second resolution: 2003-03-19T07:35:59Z
std::string format_iso8601(TimePoint t);

/// Broken-down local time plus the zone abbreviation in effect.
struct LocalTime {
  std::tm tm{};
  std::string abbrev;
};

/// Either the process's local zone or a fixed offset with a display name
/// (e.g. MET at +01:00). Fixed zones keep rendering deterministic.
class TimeZone {
 public:
  static TimeZone local();
  static TimeZone utc();
  static TimeZone fixed(std::string abbrev, Seconds offset);

  /// Accepts "local", "UTC", or NAME(+|-)HH[:MM], e.g. "MET+01:00".
  static std::optional<TimeZone> parse(std::string_view spec);

  LocalTime breakdown(TimePoint t) const;
  std::string describe() const;

 private:
  bool local_ = true;
  std::string abbrev_;
  Seconds offset_{0};
};

/// "Www Mmm dd HH:MM:SS ZZZ yyyy", e.g. "Wed Mar 19 08:37:46 MET 2003".
std::string format_ctime_style(TimePoint t, const TimeZone& zone);

/// Compact seconds rendering: 1 -> "1", 1.5 -> "1.5".
std::string format_seconds(double seconds);

}  // namespace sentinel
