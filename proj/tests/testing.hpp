// Copyright 2026 The wpmec Authors
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

#include <cstdint>
#include <vector>

#include "wpmec/wpmec.hpp"

namespace wpmec::testing {

// Node parameters of the simulation setup, channels left empty.
inline Instance setup_template(int N, int K, double T = 0.1) {
  Instance inst;
  inst.N = N;
  inst.K = K;
  inst.T = T;
  const int n = K + 1;
  inst.zeta.assign(n, 0.6);
  inst.xi.assign(n, 1e-28);
  inst.C.assign(n, 1e3);
  inst.sigma2.assign(n, 1e-9);
  inst.g.assign(n, cvec::Zero(N));
  inst.h.assign(n, 0.0);
  return inst;
}

inline Geometry setup_geometry(int K) {
  static const double peer[] = {2.0, 3.0, 5.0};
  Geometry g;
  for (int k = 0; k < K; ++k) {
    g.d_et_helper.push_back(5.0);
    g.d_user_helper.push_back(peer[k % 3]);
  }
  return g;
}

inline Instance random_instance(std::uint64_t seed, int N = 4, int K = 3, double T = 0.1) {
  return sample_channels(setup_geometry(K), setup_template(N, K, T), seed);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace wpmec::testing
