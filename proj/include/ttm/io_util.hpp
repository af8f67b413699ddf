// Copyright 2026 The ttm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ttm::io {

/// Reads a whole file. Throws IoError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes content to a temp file next to `path` and renames it into place,
/// so no partial artifact is ever visible.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// RFC 4180 quoting: fields containing comma, quote or newline are quoted,
/// embedded quotes doubled.
std::string csv_escape(const std::string& field);

/// Joins one CSV row (no trailing newline).
std::string csv_row(const std::vector<std::string>& fields);

/// Splits one line of RFC 4180 CSV that is known to contain no embedded
/// newlines. Throws IoError on unbalanced quotes.
std::vector<std::string> csv_split(const std::string& line);

/// Full RFC 4180 parse of a CSV document, including newlines inside quoted
/// fields. Trailing empty lines are dropped.
std::vector<std::vector<std::string>> csv_parse(const std::string& content);

/// Shortest decimal representation that round-trips a double.
std::string format_double(double v);

}  // namespace ttm::io
