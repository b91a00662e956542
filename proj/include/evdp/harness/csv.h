//
// Copyright 2026 The evdp Authors
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
//

#ifndef EVDP_HARNESS_CSV_H_
#define EVDP_HARNESS_CSV_H_

#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace evdp::harness {

struct CsvColumn {
  std::string name;
  std::string description;
};

// A table written as one '#' comment line documenting every column, then a
// header row, then data rows. Cells are stored already formatted.
class CsvTable {
 public:
  explicit CsvTable(std::vector<CsvColumn> columns)
      : columns_(std::move(columns)) {}

  const std::vector<CsvColumn>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  absl::Status AddRow(std::vector<std::string> row);
  absl::StatusOr<int> ColumnIndex(const std::string& name) const;

  std::string ToString() const;

 private:
  std::vector<CsvColumn> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// Shortest round-trip decimal form, '.' separator, independent of locale.
std::string FormatDouble(double value);
std::string FormatInt(long long value);

absl::Status WriteFile(const std::string& path, const std::string& contents);
absl::StatusOr<std::string> ReadFile(const std::string& path);

// Parses text produced by CsvTable::ToString, or any comma-separated file
// with a header row. '#' lines before the header are read as column docs
// when they follow the "name: description" layout, and skipped otherwise.
absl::StatusOr<CsvTable> ParseCsv(const std::string& text);
absl::StatusOr<CsvTable> ReadCsv(const std::string& path);

// The named column of a CSV file parsed as doubles.
absl::StatusOr<std::vector<double>> ReadNumericColumn(const std::string& path,
                                                      const std::string& name);

absl::StatusOr<double> ParseDouble(const std::string& text);

}  // namespace evdp::harness

#endif  // EVDP_HARNESS_CSV_H_
