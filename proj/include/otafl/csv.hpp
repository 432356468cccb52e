// Copyright 2026 The otafl Authors
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

#ifndef OTAFL_CSV_HPP_
#define OTAFL_CSV_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace otafl {

// Shortest decimal that round-trips to the same double, '.' separator,
// independent of the global locale.
std::string format_number(double value);
std::string format_number(std::int64_t value);

// RFC-4180 table: mandatory header, CRLF line ends, quoting on demand.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> row);
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  // Lexicographic by cell text; used after parallel work to fix row order.
  void sort_rows();

  std::string str() const;
  // Throws IoError naming the path on any failure.
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string csv_escape(std::string_view cell);

}  // namespace otafl

#endif  // OTAFL_CSV_HPP_
