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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

std::string_view trim(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool starts_with(std::string_view s, std::string_view prefix);

/// Splits on `sep`, trimming each piece and dropping empty pieces.
std::vector<std::string> split_list(std::string_view s, char sep = ',');

/// Splits on `sep` keeping empty fields, at most `max_fields` pieces (the last takes the rest).
std::vector<std::string_view> split_fields(std::string_view s, char sep, std::size_t max_fields = SIZE_MAX);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::optional<std::int64_t> parse_int(std::string_view s);

/// Whitespace tokenizer honoring single and double quotes and backslash escapes
/// outside single quotes. Used for argv construction without a shell.
std::vector<std::string> split_command_line(std::string_view s);

/// Quotes a value for safe interpolation into a /bin/sh command line.
std::string shell_quote(std::string_view s);

/// Replaces every occurrence of `from` with `to`.
std::string replace_all(std::string s, std::string_view from, std::string_view to);

}  // namespace sentinel
