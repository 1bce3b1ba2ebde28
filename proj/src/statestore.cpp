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

#include "sentinel/statestore.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sentinel/strutil.hpp"

namespace sentinel::store {

namespace fs = std::filesystem;
using state::MonitorState;
using state::StateType;

namespace {

constexpr std::string_view kStatusMagic = "sentinel_status";
constexpr std::string_view kRetentionMagic = "sentinel_retention";
constexpr int kFormatVersion = 1;

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i >= s.size()) throw StoreError("dangling escape");
    switch (s[i]) {
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: throw StoreError(std::string("unknown escape \\") + s[i]);
    }
  }
  return out;
}

// Exact, human-readable epoch: "<seconds>.<nanoseconds>".
std::string format_time(TimePoint t) {
  auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t.time_since_epoch()).count();
  std::int64_t sec = ns / 1000000000;
  std::int64_t frac = ns % 1000000000;
  if (frac < 0) {
    frac += 1000000000;
    --sec;
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "%lld.%09lld", static_cast<long long>(sec), static_cast<long long>(frac));
  return buf;
}

TimePoint parse_time(std::string_view s) {
  auto dot = s.find('.');
  if (dot == std::string_view::npos || s.size() - dot - 1 != 9) throw StoreError("bad timestamp '" + std::string(s) + "'");
  auto sec = parse_int(s.substr(0, dot));
  auto frac = parse_int(s.substr(dot + 1));
  if (!sec || !frac || *frac < 0) throw StoreError("bad timestamp '" + std::string(s) + "'");
  std::chrono::nanoseconds ns(*sec * 1000000000 + *frac);
  return TimePoint(std::chrono::duration_cast<Clock::duration>(ns));
}

using Block = std::map<std::string, std::string, std::less<>>;

std::vector<Block> split_blocks(std::string_view text) {
  std::vector<Block> blocks;
  Block current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) throw StoreError("missing final newline");
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) {
      if (!current.empty()) blocks.push_back(std::move(current));
      current.clear();
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos || eq == 0) throw StoreError("malformed line '" + std::string(line.substr(0, 80)) + "'");
    auto [it, fresh] = current.emplace(std::string(line.substr(0, eq)), unescape(line.substr(eq + 1)));
    if (!fresh) throw StoreError("duplicate key '" + it->first + "'");
  }
  if (!current.empty()) blocks.push_back(std::move(current));
  return blocks;
}

const std::string& need(const Block& b, std::string_view key) {
  auto it = b.find(key);
  if (it == b.end()) throw StoreError("missing key '" + std::string(key) + "'");
  return it->second;
}

std::int64_t need_int(const Block& b, std::string_view key) {
  auto v = parse_int(need(b, key));
  if (!v) throw StoreError("bad integer for '" + std::string(key) + "'");
  return *v;
}

bool need_bool(const Block& b, std::string_view key) {
  const auto& v = need(b, key);
  if (v == "1") return true;
  if (v == "0") return false;
  throw StoreError("bad flag for '" + std::string(key) + "'");
}

void put(std::ostringstream& os, std::string_view key, std::string_view value) {
  os << key << '=' << escape(value) << '\n';
}

void write_entry(std::ostringstream& os, const ObjectKey& key, const MonitorState& s) {
  put(os, "type", key.is_host() ? "host" : "service");
  put(os, "host", key.host);
  if (!key.is_host()) put(os, "service", key.service);
  put(os, "status", to_string(s.current_status));
  put(os, "state_type", to_string(s.state_type));
  put(os, "attempt", std::to_string(s.attempt));
  put(os, "checked", s.checked ? "1" : "0");
  put(os, "last_check", format_time(s.last_check));
  put(os, "last_state_change", format_time(s.last_state_change));
  put(os, "last_hard_change", format_time(s.last_hard_change));
  if (s.last_notification) put(os, "last_notification", format_time(*s.last_notification));
  put(os, "acknowledged", s.acknowledged ? "1" : "0");
  if (s.ack) {
    put(os, "ack_who", s.ack->who);
    put(os, "ack_comment", s.ack->comment);
    put(os, "ack_at", format_time(s.ack->at));
  }
  put(os, "downtimes", std::to_string(s.downtimes.size()));
  for (std::size_t i = 0; i < s.downtimes.size(); ++i) {
    const auto& d = s.downtimes[i];
    auto prefix = "downtime." + std::to_string(i) + ".";
    put(os, prefix + "start", format_time(d.start));
    put(os, prefix + "end", format_time(d.end));
    put(os, prefix + "author", d.author);
    put(os, prefix + "comment", d.comment);
  }
  put(os, "last_output", s.last_output);
  os << '\n';
}

std::pair<ObjectKey, MonitorState> read_entry(const Block& b) {
  const auto& type = need(b, "type");
  ObjectKey key;
  MonitorState s;
  if (type == "host") {
    key = ObjectKey::for_host(need(b, "host"));
    auto st = parse_host_status(need(b, "status"));
    if (!st) throw StoreError("bad host status '" + need(b, "status") + "'");
    s.current_status = *st;
  } else if (type == "service") {
    key = ObjectKey::for_service(need(b, "host"), need(b, "service"));
    if (key.service.empty()) throw StoreError("empty service name");
    auto st = parse_check_status(need(b, "status"));
    if (!st) throw StoreError("bad service status '" + need(b, "status") + "'");
    s.current_status = *st;
  } else {
    throw StoreError("unknown entry type '" + type + "'");
  }
  if (key.host.empty()) throw StoreError("empty host name");
  auto stype = state::parse_state_type(need(b, "state_type"));
  if (!stype) throw StoreError("bad state_type");
  s.state_type = *stype;
  s.attempt = static_cast<int>(need_int(b, "attempt"));
  s.checked = need_bool(b, "checked");
  s.last_check = parse_time(need(b, "last_check"));
  s.last_state_change = parse_time(need(b, "last_state_change"));
  s.last_hard_change = parse_time(need(b, "last_hard_change"));
  if (auto it = b.find("last_notification"); it != b.end()) s.last_notification = parse_time(it->second);
  s.acknowledged = need_bool(b, "acknowledged");
  if (b.count("ack_who")) {
    s.ack = state::Acknowledgement{need(b, "ack_who"), need(b, "ack_comment"), parse_time(need(b, "ack_at"))};
  }
  auto n = need_int(b, "downtimes");
  if (n < 0 || n > 100000) throw StoreError("bad downtime count");
  for (std::int64_t i = 0; i < n; ++i) {
    auto prefix = "downtime." + std::to_string(i) + ".";
    s.downtimes.push_back({parse_time(need(b, prefix + "start")), parse_time(need(b, prefix + "end")),
                           need(b, prefix + "author"), need(b, prefix + "comment")});
  }
  s.last_output = need(b, "last_output");
  return {std::move(key), std::move(s)};
}

std::string serialize(std::string_view magic, const TimePoint* generated_at, const StateMap& states) {
  std::ostringstream os;
  put(os, magic, std::to_string(kFormatVersion));
  if (generated_at) put(os, "generated_at", format_time(*generated_at));
  put(os, "entries", std::to_string(states.size()));
  os << '\n';
  for (const auto& [key, s] : states) write_entry(os, key, s);
  put(os, "end", std::to_string(states.size()));
  return os.str();
}

StateMap parse(std::string_view magic, std::string_view text, TimePoint* generated_at) {
  auto blocks = split_blocks(text);
  if (blocks.size() < 2) throw StoreError("truncated file");
  const auto& header = blocks.front();
  if (need_int(header, magic) != kFormatVersion) throw StoreError("unsupported format version");
  if (generated_at) *generated_at = parse_time(need(header, "generated_at"));
  auto expected = need_int(header, "entries");
  const auto& trailer = blocks.back();
  if (trailer.size() != 1 || need_int(trailer, "end") != expected) throw StoreError("missing end marker");
  if (static_cast<std::int64_t>(blocks.size()) - 2 != expected) throw StoreError("entry count mismatch");
  StateMap out;
  for (std::size_t i = 1; i + 1 < blocks.size(); ++i) {
    auto [key, s] = read_entry(blocks[i]);
    if (!out.emplace(key, std::move(s)).second) throw StoreError("duplicate entry for " + key.str());
  }
  return out;
}

std::string temp_prefix(const fs::path& target) { return "." + target.filename().string() + ".tmp."; }

void fsync_dir(const fs::path& dir) {
  int fd = ::open(dir.empty() ? "." : dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

std::string read_whole(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw StoreError("cannot open " + file.string() + ": " + std::strerror(errno));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string serialize_status(const StatusSnapshot& snapshot) {
  return serialize(kStatusMagic, &snapshot.generated_at, snapshot.entries);
}

StatusSnapshot parse_status(std::string_view text) {
  StatusSnapshot s;
  s.entries = parse(kStatusMagic, text, &s.generated_at);
  return s;
}

std::string serialize_retention(const StateMap& states) { return serialize(kRetentionMagic, nullptr, states); }

StateMap parse_retention(std::string_view text) { return parse(kRetentionMagic, text, nullptr); }

void write_atomic(const fs::path& target, std::string_view content, const FaultHook& hook) {
  static std::atomic<unsigned> counter{0};
  auto dir = target.parent_path();
  auto tmp = (dir.empty() ? fs::path(".") : dir) /
             (temp_prefix(target) + std::to_string(::getpid()) + "." + std::to_string(counter++));
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
  if (fd < 0) throw StoreError("cannot create " + tmp.string() + ": " + std::strerror(errno));
  auto stage = [&](WriteStage s) {
    if (hook) hook(s);
  };
  auto write_part = [&](std::string_view part) {
    while (!part.empty()) {
      auto n = ::write(fd, part.data(), part.size());
      if (n < 0) {
        if (errno == EINTR) continue;
        throw StoreError("write to " + tmp.string() + " failed: " + std::strerror(errno));
      }
      part.remove_prefix(static_cast<std::size_t>(n));
    }
  };
  try {
    stage(WriteStage::TempOpened);
    write_part(content.substr(0, content.size() / 2));
    stage(WriteStage::HalfWritten);
    write_part(content.substr(content.size() / 2));
    if (::fsync(fd) != 0) throw StoreError("fsync of " + tmp.string() + " failed: " + std::strerror(errno));
    stage(WriteStage::Written);
    int rc = ::close(fd);
    fd = -1;
    if (rc != 0) throw StoreError("close of " + tmp.string() + " failed: " + std::strerror(errno));
    stage(WriteStage::BeforeRename);
    if (::rename(tmp.c_str(), target.c_str()) != 0)
      throw StoreError("rename to " + target.string() + " failed: " + std::strerror(errno));
  } catch (...) {
    if (fd >= 0) ::close(fd);
    ::unlink(tmp.c_str());
    throw;
  }
  fsync_dir(dir);
  stage(WriteStage::Renamed);
}

std::size_t remove_stale_temps(const fs::path& target) {
  auto dir = target.parent_path().empty() ? fs::path(".") : target.parent_path();
  auto prefix = temp_prefix(target);
  std::size_t removed = 0;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (starts_with(entry.path().filename().string(), prefix) && fs::remove(entry.path(), ec)) ++removed;
  }
  return removed;
}

StatusWriter::StatusWriter(fs::path dir, AuditLog* audit) : dir_(std::move(dir)), audit_(audit) {
  auto n = remove_stale_temps(path());
  if (n && audit_) audit_->record("statestore", "removed " + std::to_string(n) + " stale temporary status files");
  try {
    last_ = read_status(path()).generated_at;
  } catch (const StoreError&) {
    // no usable previous file
  }
}

bool StatusWriter::write(StatusSnapshot snapshot, const FaultHook& hook) {
  if (snapshot.generated_at < last_) snapshot.generated_at = last_;
  try {
    write_atomic(path(), serialize_status(snapshot), hook);
  } catch (const std::exception& e) {
    if (audit_) audit_->record("statestore", std::string("status write failed; previous file kept: ") + e.what());
    return false;
  }
  last_ = snapshot.generated_at;
  return true;
}

StatusSnapshot read_status(const fs::path& file) {
  auto text = read_whole(file);
  try {
    return parse_status(text);
  } catch (const StoreError& e) {
    throw StoreError(file.string() + ": " + e.what());
  }
}

RetentionLoad read_retention(const fs::path& file, const objconf::ResolvedConfig& config, AuditLog* audit) {
  RetentionLoad out;
  std::error_code ec;
  if (!fs::exists(file, ec)) {
    out.cold_start = true;
    return out;
  }
  StateMap all;
  try {
    all = parse_retention(read_whole(file));
  } catch (const StoreError& e) {
    if (audit) audit->record("statestore", "retention file " + file.string() + " unusable (" + e.what() + "); cold start");
    out.cold_start = true;
    return out;
  }
  for (auto& [key, s] : all) {
    bool known = key.is_host() ? config.find_host(key.host) != nullptr : config.find_service(key) != nullptr;
    if (known) {
      out.states.emplace(key, std::move(s));
    } else {
      ++out.dropped;
    }
  }
  if (out.dropped && audit) {
    audit->record("statestore", "dropped " + std::to_string(out.dropped) + " retained entries for unknown objects");
  }
  return out;
}

void write_retention(const StateMap& states, const fs::path& file) {
  write_atomic(file, serialize_retention(states));
}

}  // namespace sentinel::store
