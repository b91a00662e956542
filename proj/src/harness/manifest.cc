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

#include "evdp/harness/manifest.h"

#include "absl/strings/str_cat.h"

namespace evdp::harness {

std::string RunManifest::ToText() const {
  std::string out = absl::StrCat("# evdp ", subcommand, " run manifest\n");
  absl::StrAppend(&out, "seed = ", seed, "\n");
  for (const auto& [key, value] : config) {
    absl::StrAppend(&out, key, " = ", value, "\n");
  }
  for (const auto& [key, value] : defaulted) {
    absl::StrAppend(&out, "# default: ", key, " = ", value, "\n");
  }
  for (const std::string& path : outputs) {
    absl::StrAppend(&out, "# output: ", path, "\n");
  }
  return out;
}

}  // namespace evdp::harness
