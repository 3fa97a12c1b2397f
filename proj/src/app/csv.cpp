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

#include "qdisc/app/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qdisc/format.hpp"

namespace qdisc::app {

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::invalid_argument("CSV has no column '" + name + "'");
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const std::size_t idx = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string& s = rows[r][idx];
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw std::invalid_argument("column '" + name + "', data row " + std::to_string(r + 1) +
                                  ": '" + s + "' is not a number");
    }
    out.push_back(v);
  }
  return out;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (const auto& h : header) cell(h);
  end_row();
  rows_ = 0;
}

CsvWriter& CsvWriter::cell(const std::string& text) {
  if (text.find_first_of(",\n\"") != std::string::npos) {
    throw std::invalid_argument("CSV cell needs quoting: " + text);
  }
  if (pending_ > 0) buffer_ += ',';
  buffer_ += text;
  ++pending_;
  return *this;
}

CsvWriter& CsvWriter::cell(double value) { return cell(format_number(value)); }

CsvWriter& CsvWriter::cell(long long value) { return cell(std::to_string(value)); }

void CsvWriter::end_row() {
  if (pending_ != columns_) {
    throw std::logic_error("CSV row has " + std::to_string(pending_) + " cells, expected " +
                           std::to_string(columns_));
  }
  buffer_ += '\n';
  pending_ = 0;
  ++rows_;
}

void CsvWriter::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << buffer_;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

CsvTable parse_csv(const std::string& text, const std::string& source_name) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = s.find(',', start);
      cells.push_back(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return cells;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw std::invalid_argument(source_name + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(t.header.size()) + " cells, found " +
                                  std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw std::invalid_argument(source_name + ": empty CSV file");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument(path.string() + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.string());
}

}  // namespace qdisc::app
