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

#ifndef EVDP_HARNESS_MANIFEST_H_
#define EVDP_HARNESS_MANIFEST_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace evdp::harness {

// Everything needed to replay a run. Written as flat "key = value" lines, the
// same format the CLI reads with --config, so a manifest can be fed back in.
struct RunManifest {
  std::string subcommand;
  uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;
  // Settings left at their defaults whose presence in a config file would
  // change behavior, such as an explicit mechanism list. Written as comments.
  std::vector<std::pair<std::string, std::string>> defaulted;
  std::vector<std::string> outputs;

  void Set(std::string key, std::string value) {
    config.emplace_back(std::move(key), std::move(value));
  }
  void SetDefaulted(std::string key, std::string value) {
    defaulted.emplace_back(std::move(key), std::move(value));
  }
  std::string ToText() const;
};

}  // namespace evdp::harness

#endif  // EVDP_HARNESS_MANIFEST_H_
