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

#include "evdp/harness/csv.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "absl/strings/ascii.h"

namespace evdp::harness {

absl::Status CsvTable::AddRow(std::vector<std::string> row) {
  if (row.size() != columns_.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "row has ", row.size(), " cells, table has ", columns_.size(),
        " columns"));
  }
  rows_.push_back(std::move(row));
  return absl::OkStatus();
}

absl::StatusOr<int> CsvTable::ColumnIndex(const std::string& name) const {
  for (size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return static_cast<int>(i);
  }
  return absl::NotFoundError(absl::StrCat("no column named '", name, "'"));
}

std::string CsvTable::ToString() const {
  std::string out = "# columns: ";
  for (size_t i = 0; i < columns_.size(); ++i) {
    if (i > 0) out += "; ";
    absl::StrAppend(&out, columns_[i].name, " = ", columns_[i].description);
  }
  out += "\n";
  std::vector<std::string> names;
  for (const CsvColumn& c : columns_) names.push_back(c.name);
  absl::StrAppend(&out, absl::StrJoin(names, ","), "\n");
  for (const auto& row : rows_) {
    absl::StrAppend(&out, absl::StrJoin(row, ","), "\n");
  }
  return out;
}

std::string FormatDouble(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

std::string FormatInt(long long value) {
  char buffer[32];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

absl::Status WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << contents;
  out.close();
  if (!out) return absl::UnavailableError(absl::StrCat("failed writing ", path));
  return absl::OkStatus();
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

absl::StatusOr<CsvTable> ParseCsv(const std::string& text) {
  std::vector<std::string> lines =
      absl::StrSplit(text, '\n', absl::SkipEmpty());
  std::string doc;
  size_t i = 0;
  for (; i < lines.size(); ++i) {
    absl::string_view line = absl::StripTrailingAsciiWhitespace(lines[i]);
    if (line.empty()) continue;
    if (line[0] != '#') break;
    if (absl::ConsumePrefix(&line, "# columns: ")) doc = std::string(line);
  }
  if (i == lines.size()) return absl::InvalidArgumentError("CSV has no header");
  std::vector<std::string> names = absl::StrSplit(
      absl::StripTrailingAsciiWhitespace(lines[i]), ',');
  std::vector<CsvColumn> columns;
  for (std::string& name : names) {
    columns.push_back(
        CsvColumn{std::string(absl::StripAsciiWhitespace(name)), ""});
  }
  if (!doc.empty()) {
    for (absl::string_view entry : absl::StrSplit(doc, "; ")) {
      std::pair<std::string, std::string> kv =
          absl::StrSplit(entry, absl::MaxSplits(" = ", 1));
      for (CsvColumn& c : columns) {
        if (c.name == kv.first) c.description = kv.second;
      }
    }
  }
  CsvTable table(std::move(columns));
  for (++i; i < lines.size(); ++i) {
    absl::string_view line = absl::StripTrailingAsciiWhitespace(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells = absl::StrSplit(line, ',');
    for (std::string& cell : cells) {
      cell = std::string(absl::StripAsciiWhitespace(cell));
    }
    absl::Status status = table.AddRow(std::move(cells));
    if (!status.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", i + 1, ": ", status.message()));
    }
  }
  return table;
}

absl::StatusOr<CsvTable> ReadCsv(const std::string& path) {
  auto text = ReadFile(path);
  if (!text.ok()) return text.status();
  auto table = ParseCsv(*text);
  if (!table.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": ", table.status().message()));
  }
  return table;
}

absl::StatusOr<double> ParseDouble(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", text, "' is not a number"));
  }
  return value;
}

absl::StatusOr<std::vector<double>> ReadNumericColumn(const std::string& path,
                                                      const std::string& name) {
  auto table = ReadCsv(path);
  if (!table.ok()) return table.status();
  auto index = table->ColumnIndex(name);
  if (!index.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": ", index.status().message()));
  }
  std::vector<double> values;
  values.reserve(table->rows().size());
  for (size_t r = 0; r < table->rows().size(); ++r) {
    auto v = ParseDouble(table->rows()[r][*index]);
    if (!v.ok()) {
      return absl::InvalidArgumentError(absl::StrCat(
          path, " row ", r + 1, " column ", name, ": ", v.status().message()));
    }
    values.push_back(*v);
  }
  return values;
}

}  // namespace evdp::harness
