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

#include <algorithm>
#include <stdexcept>

#include "sentinel/passive.hpp"
#include "sentinel/strutil.hpp"

namespace sentinel::passive {

namespace {

constexpr std::string_view kServiceKeyword = "PROCESS_SERVICE_CHECK_RESULT";
constexpr std::string_view kHostKeyword = "PROCESS_HOST_CHECK_RESULT";

bool has_control(std::string_view s) { return s.find_first_of("\t\r\n") != std::string_view::npos; }

bool all_digits(std::string_view s) {
  return !s.empty() && s.size() <= 18 && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string excerpt(std::string_view line) {
  constexpr std::size_t kMax = 120;
  std::string out(line.substr(0, kMax));
  if (line.size() > kMax) out += "...";
  return out;
}

// Highest capture index used by a template, or nullopt when malformed.
std::optional<std::size_t> template_refs(std::string_view t) {
  std::size_t highest = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] != '$') continue;
    if (++i >= t.size()) return std::nullopt;
    if (t[i] == '$') continue;
    std::size_t n = 0;
    if (t[i] == '{') {
      auto close = t.find('}', i);
      if (close == std::string_view::npos || close == i + 1) return std::nullopt;
      for (std::size_t j = i + 1; j < close; ++j) {
        if (t[j] < '0' || t[j] > '9') return std::nullopt;
        n = n * 10 + static_cast<std::size_t>(t[j] - '0');
      }
      i = close;
    } else if (t[i] >= '0' && t[i] <= '9') {
      n = static_cast<std::size_t>(t[i] - '0');
    } else {
      return std::nullopt;
    }
    highest = std::max(highest, n);
  }
  return highest;
}

[[noreturn]] void fail(std::string_view line, const std::string& what, const char* reason = "parse") {
  throw ParseError(reason, what + " in line '" + excerpt(line) + "'");
}

}  // namespace

std::optional<std::string> invalid_reason(const PassiveResultLine& r) {
  if (r.received_at < 0) return "negative timestamp";
  if (r.host.empty()) return "empty host";
  if (has_control(r.host) || r.host.find(';') != std::string::npos) return "bad character in host";
  if (has_control(r.output)) return "bad character in output";
  if (r.kind == ResultKind::Service) {
    if (r.service.empty()) return "empty service";
    if (has_control(r.service) || r.service.find(';') != std::string::npos) return "bad character in service";
    if (r.code < 0 || r.code > 3) return "service code out of range";
  } else {
    if (!r.service.empty()) return "host result with a service";
    if (r.code < 0 || r.code > 1) return "host code out of range";
  }
  return std::nullopt;
}

std::string encode_line(const PassiveResultLine& r) {
  if (auto why = invalid_reason(r)) throw std::invalid_argument("cannot encode passive result: " + *why);
  std::string out = "[" + std::to_string(r.received_at) + "] ";
  if (r.kind == ResultKind::Service) {
    out += kServiceKeyword;
    out += ';' + r.host + ';' + r.service + ';';
  } else {
    out += kHostKeyword;
    out += ';' + r.host + ';';
  }
  out += std::to_string(r.code) + ';' + r.output + '\n';
  return out;
}

PassiveResultLine decode_line(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.find_first_of("\r\n") != std::string_view::npos) fail(line, "embedded line break");
  if (line.empty() || line.front() != '[') fail(line, "missing '[' timestamp");
  auto close = line.find(']');
  if (close == std::string_view::npos) fail(line, "unterminated timestamp");
  auto stamp = line.substr(1, close - 1);
  if (!all_digits(stamp)) fail(line, "bad timestamp");
  if (close + 1 >= line.size() || line[close + 1] != ' ') fail(line, "expected a space after the timestamp");

  PassiveResultLine r;
  r.received_at = *parse_int(stamp);
  const std::string body(line.substr(close + 2));
  auto semi = body.find(';');
  std::string_view keyword = std::string_view(body).substr(0, semi);
  std::vector<std::string_view> fields;
  if (keyword == kServiceKeyword) {
    r.kind = ResultKind::Service;
    if (semi == std::string_view::npos) fail(line, "missing fields");
    fields = split_fields(std::string_view(body).substr(semi + 1), ';', 4);
    if (fields.size() != 4) fail(line, "expected host;service;code;output");
    r.host = std::string(fields[0]);
    r.service = std::string(fields[1]);
    if (!all_digits(fields[2])) fail(line, "bad return code");
    r.code = static_cast<int>(*parse_int(fields[2]));
    r.output = std::string(fields[3]);
  } else if (keyword == kHostKeyword) {
    r.kind = ResultKind::Host;
    if (semi == std::string_view::npos) fail(line, "missing fields");
    fields = split_fields(std::string_view(body).substr(semi + 1), ';', 3);
    if (fields.size() != 3) fail(line, "expected host;code;output");
    r.host = std::string(fields[0]);
    if (!all_digits(fields[1])) fail(line, "bad return code");
    r.code = static_cast<int>(*parse_int(fields[1]));
    r.output = std::string(fields[2]);
  } else {
    fail(line, "unknown command '" + std::string(keyword.substr(0, 64)) + "'");
  }
  if (auto why = invalid_reason(r)) {
    bool range = why->find("out of range") != std::string::npos;
    fail(line, *why, range ? "range" : "parse");
  }
  return r;
}

TimePoint trusted_time(std::int64_t epoch, TimePoint now, Seconds skew, AuditLog* audit, std::string_view peer) {
  auto stamped = from_epoch_seconds(epoch);
  auto diff = stamped > now ? stamped - now : now - stamped;
  if (diff <= skew) return stamped;
  if (audit) {
    audit->record("passive", "timestamp " + std::to_string(epoch) + " from " +
                                 (peer.empty() ? std::string("unknown peer") : std::string(peer)) +
                                 " outside skew window; using receive time");
  }
  return now;
}

CheckResult to_check_result(const PassiveResultLine& r, TimePoint at, std::string source) {
  CheckResult c;
  if (r.kind == ResultKind::Host) {
    c.status = r.code == 0 ? CheckStatus::Ok : CheckStatus::Critical;
  } else {
    c.status = status_from_exit_code(r.code);
  }
  c.output = r.output;
  c.started_at = at;
  c.finished_at = at;
  c.origin = Origin::Passive;
  c.source = std::move(source);
  return c;
}

LogRule make_rule(CheckStatus state, std::string service, std::string host, std::string pattern,
                  std::string output_template) {
  LogRule rule;
  rule.state = state;
  rule.service = std::move(service);
  rule.host = std::move(host);
  rule.pattern = std::move(pattern);
  rule.output_template = std::move(output_template);
  if (rule.service.empty() || rule.service.find_first_of("\t\r\n;") != std::string::npos)
    throw ParseError("parse", "bad service name");
  if (rule.host.empty()) throw ParseError("parse", "empty host");
  if (rule.pattern.empty()) throw ParseError("parse", "empty pattern");
  try {
    rule.re = std::regex(rule.pattern, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw ParseError("parse", "pattern does not compile: " + std::string(e.what()));
  }
  if (rule.host.front() == '$') {
    auto n = parse_int(std::string_view(rule.host).substr(1));
    if (!n || *n < 0) throw ParseError("parse", "bad capture reference '" + rule.host + "'");
    if (static_cast<std::size_t>(*n) > rule.re.mark_count())
      throw ParseError("parse", "capture group " + std::to_string(*n) + " does not exist in pattern");
    rule.host_group = static_cast<int>(*n);
  }
  auto refs = template_refs(rule.output_template);
  if (!refs) throw ParseError("parse", "malformed output template '" + rule.output_template + "'");
  if (*refs > rule.re.mark_count())
    throw ParseError("parse", "output template refers to missing capture group " + std::to_string(*refs));
  return rule;
}

LogRule parse_rule(std::string_view line) {
  auto fields = split_fields(line, ';', 4);
  if (fields.size() != 4) throw ParseError("parse", "rule needs <state>;<service>;<host-or-$N>;<pattern>");
  auto state = parse_check_status(trim(fields[0]));
  if (!state) {
    auto n = parse_int(trim(fields[0]));
    if (n) state = check_status_from_code(static_cast<int>(*n));
  }
  if (!state) throw ParseError("parse", "unknown state '" + std::string(trim(fields[0])) + "'");
  return make_rule(*state, std::string(trim(fields[1])), std::string(trim(fields[2])), std::string(fields[3]));
}

std::vector<LogRule> parse_rules(std::string_view text) {
  std::vector<LogRule> rules;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      rules.push_back(parse_rule(t));
    } catch (const ParseError& e) {
      throw ParseError(e.reason(), "rules line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rules;
}

std::optional<std::string> expand_template(std::string_view t, const std::smatch& m) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] != '$') {
      out += t[i];
      continue;
    }
    if (++i >= t.size()) return std::nullopt;
    if (t[i] == '$') {
      out += '$';
      continue;
    }
    std::size_t n = 0;
    if (t[i] == '{') {
      auto close = t.find('}', i);
      if (close == std::string_view::npos || close == i + 1) return std::nullopt;
      for (std::size_t j = i + 1; j < close; ++j) {
        if (t[j] < '0' || t[j] > '9') return std::nullopt;
        n = n * 10 + static_cast<std::size_t>(t[j] - '0');
      }
      i = close;
    } else if (t[i] >= '0' && t[i] <= '9') {
      n = static_cast<std::size_t>(t[i] - '0');
    } else {
      return std::nullopt;
    }
    if (n >= m.size()) return std::nullopt;
    if (m[n].matched) out += m[n].str();
  }
  return out;
}

std::optional<PassiveResultLine> match_line(const std::vector<LogRule>& rules, std::string_view line,
                                            std::int64_t epoch, AuditLog* audit) {
  std::string text(line);
  if (!text.empty() && text.back() == '\n') text.pop_back();
  if (!text.empty() && text.back() == '\r') text.pop_back();
  for (const auto& rule : rules) {
    std::smatch m;
    if (!std::regex_search(text, m, rule.re)) continue;
    PassiveResultLine r;
    r.received_at = epoch;
    r.kind = ResultKind::Service;
    r.service = rule.service;
    r.code = static_cast<int>(rule.state);
    if (rule.host_group >= 0) {
      auto g = static_cast<std::size_t>(rule.host_group);
      if (g >= m.size() || !m[g].matched || m[g].length() == 0) {
        if (audit) audit->record("logwatch", "rule '" + rule.pattern + "': capture " + rule.host + " is empty; skipped");
        continue;
      }
      r.host = m[g].str();
    } else {
      r.host = rule.host;
    }
    if (rule.output_template.empty()) {
      r.output = text;
    } else if (auto expanded = expand_template(rule.output_template, m)) {
      r.output = *expanded;
    } else {
      if (audit) audit->record("logwatch", "rule '" + rule.pattern + "': output template does not expand; skipped");
      continue;
    }
    std::replace(r.output.begin(), r.output.end(), '\t', ' ');
    std::replace(r.output.begin(), r.output.end(), '\r', ' ');
    if (auto why = invalid_reason(r)) {
      if (audit) audit->record("logwatch", "rule '" + rule.pattern + "' produced an invalid result: " + *why);
      continue;
    }
    return r;
  }
  return std::nullopt;
}

}  // namespace sentinel::passive
