// Copyright 2026 The textpos Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace textpos {

// In-memory delimited table (RFC 4180 quoting). The first record is the header.
struct DelimitedTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based physical line on which each row starts, for diagnostics.
  std::vector<std::size_t> row_lines;

  // Index of a header column, or -1.
  int column(std::string_view name) const;
};

// Parses delimited text. Quoted fields may contain delimiters, doubled quotes
// and line breaks. Rows shorter than the header are padded with empty fields;
// longer rows raise DataError. A UTF-8 byte-order mark is skipped.
DelimitedTable parse_delimited(std::string_view data, char delimiter = ',');

DelimitedTable read_delimited_file(const std::filesystem::path& path, char delimiter);

// Comma for .csv, tab for .tsv and .tab.
char delimiter_for(const std::filesystem::path& path);

// Writes one record, quoting fields that need it. Terminates with "\n".
void write_delimited_row(std::ostream& out, std::span<const std::string> fields,
                         char delimiter = ',');

std::string read_file(const std::filesystem::path& path);

// Writes atomically enough for our purposes: a temp file then rename.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace textpos
