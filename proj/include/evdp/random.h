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

#ifndef EVDP_RANDOM_H_
#define EVDP_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace evdp {

// SplitMix64 finalizer.
uint64_t MixBits(uint64_t x);

// Seed for the substream addressed by `path` under `root`. Each path
// component is folded in as h <- mix(h ^ mix(component + (i+1) * golden)), so
// (root, {rep, cell}) and (root, {cell, rep}) land in unrelated streams and the
// result does not depend on the order substreams are consumed in.
uint64_t DeriveSeed(uint64_t root, std::initializer_list<uint64_t> path);

// A seeded random stream. Draws are a fixed function of (seed, draw index)
// on every platform: the engine is mt19937_64 and all transforms below are
// written out explicitly rather than delegated to <random> distributions.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : engine_(seed) {}

  static RandomStream Derive(uint64_t root,
                             std::initializer_list<uint64_t> path) {
    return RandomStream(DeriveSeed(root, path));
  }

  uint64_t NextU64() { return engine_(); }
  // Uniform on the open interval (0, 1), 53 bits of resolution.
  double Uniform();
  // Box-Muller; consumes two uniforms per call.
  double StandardNormal();
  // Inverse CDF of Laplace(0, 1); consumes one uniform.
  double StandardLaplace();
  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace evdp

#endif  // EVDP_RANDOM_H_
