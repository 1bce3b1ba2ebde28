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
#include <cctype>
#include <sstream>

#include "sentinel/objconf.hpp"
#include "sentinel/strutil.hpp"

namespace sentinel::objconf {

std::string Diagnostic::str() const {
  std::ostringstream os;
  if (!where.file.empty()) {
    os << where.file;
    if (where.line > 0) os << ':' << where.line;
    os << ": ";
  }
  os << (severity == Severity::Error ? "error" : "warning") << ": " << message << " [" << code << ']';
  return os.str();
}

std::size_t count_code(std::span<const Diagnostic> diags, std::string_view code) {
  return static_cast<std::size_t>(
      std::count_if(diags.begin(), diags.end(), [&](const Diagnostic& d) { return d.code == code; }));
}

const std::string* RawObjectBlock::find(std::string_view key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return &v;
  }
  return nullptr;
}

bool is_known_kind(std::string_view kind) {
  static constexpr std::string_view kKinds[] = {"service", "host", "hostgroup", "timeperiod", "command",
                                                "contactgroup"};
  return std::find(std::begin(kKinds), std::end(kKinds), kind) != std::end(kKinds);
}

namespace {

bool is_define_line(std::string_view line) {
  if (!starts_with(line, "define")) return false;
  if (line.size() == 6) return true;
  char c = line[6];
  return std::isspace(static_cast<unsigned char>(c)) || c == '{';
}

}  // namespace

ParseResult parse_objects(std::string_view text, std::string_view source) {
  ParseResult out;
  std::optional<RawObjectBlock> current;
  bool skipping = false;  // inside a malformed define, waiting for its '}'

  auto diag = [&](Severity sev, std::string code, std::string msg, int line) {
    out.diagnostics.push_back({sev, std::move(code), std::move(msg), {std::string(source), line}});
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;

    auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;

    if (is_define_line(line)) {
      if (current) {
        diag(Severity::Error, "unterminated-block",
             "block 'define " + current->kind + "' is not closed before the next define", current->location.line);
        current.reset();
      }
      skipping = false;
      auto rest = trim(line.substr(6));
      auto brace = rest.find('{');
      auto kind = trim(rest.substr(0, brace));
      if (brace == std::string_view::npos || kind.empty() ||
          std::any_of(kind.begin(), kind.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
        diag(Severity::Error, "malformed-define", "expected 'define <kind>{'", line_no);
        skipping = true;
        continue;
      }
      auto after = trim(rest.substr(brace + 1));
      RawObjectBlock block{std::string(kind), {}, {std::string(source), line_no}};
      if (after == "}") {
        out.blocks.push_back(std::move(block));
      } else {
        if (!after.empty()) {
          diag(Severity::Error, "malformed-define", "unexpected text after '{'", line_no);
        }
        current = std::move(block);
      }
      continue;
    }

    if (line.front() == '}') {
      if (current) {
        out.blocks.push_back(std::move(*current));
        current.reset();
      } else if (skipping) {
        skipping = false;
      } else {
        diag(Severity::Error, "unexpected-brace", "'}' outside of a block", line_no);
      }
      if (trim(line.substr(1)).size() > 0) {
        diag(Severity::Error, "unexpected-text", "unexpected text after '}'", line_no);
      }
      continue;
    }

    if (!current) {
      if (!skipping) diag(Severity::Error, "unexpected-text", "text outside of a define block", line_no);
      continue;
    }

    auto ws = line.find_first_of(" \t");
    auto key = line.substr(0, ws);
    auto value = ws == std::string_view::npos ? std::string_view{} : trim(line.substr(ws));
    if (value.empty()) {
      diag(Severity::Error, "missing-value", "attribute '" + std::string(key) + "' has no value", line_no);
      continue;
    }
    auto& attrs = current->attributes;
    auto it = std::find_if(attrs.begin(), attrs.end(), [&](const auto& kv) { return kv.first == key; });
    if (it != attrs.end()) {
      diag(Severity::Warning, "duplicate-attribute",
           "attribute '" + std::string(key) + "' repeated, last value wins", line_no);
      it->second = std::string(value);
    } else {
      attrs.emplace_back(std::string(key), std::string(value));
    }
  }

  if (current) {
    diag(Severity::Error, "unterminated-block", "block 'define " + current->kind + "' is never closed",
         current->location.line);
  }
  return out;
}

}  // namespace sentinel::objconf
