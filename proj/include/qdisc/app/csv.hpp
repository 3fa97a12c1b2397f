// Copyright 2026 The qdisc Authors
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

namespace qdisc::app {

/// A parsed CSV file: a header row followed by rows of raw cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column, or throws std::invalid_argument.
  std::size_t column_index(const std::string& name) const;
  /// Numeric values of a named column; throws on unparsable cells.
  std::vector<double> numeric_column(const std::string& name) const;
};

/// Accumulates rows and writes them with '\n' line endings. Numbers use the
/// 15-significant-digit form of qdisc::format_number.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& cell(const std::string& text);
  CsvWriter& cell(double value);
  CsvWriter& cell(long long value);
  void end_row();

  std::size_t row_count() const { return rows_; }
  const std::string& text() const { return buffer_; }
  /// Writes the table to `path`, creating parent directories.
  void save(const std::filesystem::path& path) const;

 private:
  std::size_t columns_;
  std::size_t pending_ = 0;
  std::size_t rows_ = 0;
  std::string buffer_;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text, const std::string& source_name);

}  // namespace qdisc::app
