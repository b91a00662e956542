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

#ifndef EVDP_HARNESS_SVG_H_
#define EVDP_HARNESS_SVG_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "evdp/harness/csv.h"

namespace evdp::harness {

struct PlotSpec {
  std::string title;
  std::string x_column;
  std::string y_column;
  // Rows with equal values in these columns form one line.
  std::vector<std::string> series_columns;
  bool log_x = false;
};

// Line plot of `table`, one polyline per series, points ordered by x. Rows
// whose x or y cell is not a finite number are skipped. The output depends
// only on the table contents.
absl::StatusOr<std::string> RenderLinePlot(const CsvTable& table,
                                           const PlotSpec& spec);

}  // namespace evdp::harness

#endif  // EVDP_HARNESS_SVG_H_
