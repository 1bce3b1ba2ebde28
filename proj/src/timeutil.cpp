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

#include "sentinel/timeutil.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "sentinel/strutil.hpp"

namespace sentinel {

std::int64_t to_epoch_seconds(TimePoint t) {
  return std::chrono::floor<Seconds>(t.time_since_epoch()).count();
}

std::int64_t to_epoch_millis(TimePoint t) {
  return std::chrono::floor<std::chrono::milliseconds>(t.time_since_epoch()).count();
}

TimePoint from_epoch_seconds(std::int64_t s) { return TimePoint{Seconds{s}}; }

TimePoint from_epoch_millis(std::int64_t ms) { return TimePoint{std::chrono::milliseconds{ms}}; }

std::string format_iso8601(TimePoint t) {
  std::time_t tt = static_cast<std::time_t>(to_epoch_seconds(t));
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

TimeZone TimeZone::local() { return TimeZone{}; }

TimeZone TimeZone::utc() { return fixed("UTC", Seconds{0}); }

TimeZone TimeZone::fixed(std::string abbrev, Seconds offset) {
  TimeZone z;
  z.local_ = false;
  z.abbrev_ = std::move(abbrev);
  z.offset_ = offset;
  return z;
}

std::optional<TimeZone> TimeZone::parse(std::string_view spec) {
  spec = trim(spec);
  if (spec.empty() || iequals(spec, "local")) return local();
  if (iequals(spec, "UTC") || iequals(spec, "GMT")) return fixed(std::string(spec), Seconds{0});
  auto sign_pos = spec.find_first_of("+-");
  if (sign_pos == std::string_view::npos || sign_pos == 0) return std::nullopt;
  auto name = spec.substr(0, sign_pos);
  int sign = spec[sign_pos] == '-' ? -1 : 1;
  auto rest = spec.substr(sign_pos + 1);
  auto colon = rest.find(':');
  auto hours = parse_int(rest.substr(0, colon));
  std::optional<std::int64_t> minutes = 0;
  if (colon != std::string_view::npos) minutes = parse_int(rest.substr(colon + 1));
  if (!hours || !minutes || *hours < 0 || *hours > 14 || *minutes < 0 || *minutes > 59) return std::nullopt;
  return fixed(std::string(name), Seconds{sign * (*hours * 3600 + *minutes * 60)});
}

LocalTime TimeZone::breakdown(TimePoint t) const {
  LocalTime out;
  std::time_t tt = static_cast<std::time_t>(to_epoch_seconds(t));
  if (local_) {
    localtime_r(&tt, &out.tm);
    out.abbrev = out.tm.tm_zone ? out.tm.tm_zone : "";
  } else {
    tt += static_cast<std::time_t>(offset_.count());
    gmtime_r(&tt, &out.tm);
    out.abbrev = abbrev_;
  }
  return out;
}

std::string TimeZone::describe() const {
  if (local_) return "local";
  std::ostringstream os;
  auto off = offset_.count();
  char sign = off < 0 ? '-' : '+';
  off = off < 0 ? -off : off;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%c%02lld:%02lld", sign, static_cast<long long>(off / 3600),
                static_cast<long long>((off % 3600) / 60));
  os << abbrev_ << buf;
  return os.str();
}

std::string format_ctime_style(TimePoint t, const TimeZone& zone) {
  auto lt = zone.breakdown(t);
  char head[32];
  char year[8];
  std::strftime(head, sizeof head, "%a %b %d %H:%M:%S", &lt.tm);
  std::strftime(year, sizeof year, "%Y", &lt.tm);
  std::string out = head;
  out += ' ';
  out += lt.abbrev;
  out += ' ';
  out += year;
  return out;
}

std::string format_seconds(double seconds) {
  if (std::floor(seconds) == seconds) return std::to_string(static_cast<long long>(seconds));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", seconds);
  std::string s = buf;
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace sentinel
