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

// Principal branch of the Lambert W function.
//
// The solver needs W evaluated at (q - 1)/e with q >= 0, where q is a
// physically meaningful ratio and q -> 0 is the branch point. Working with
// q directly (lambert_w0_shifted) keeps full relative precision of 1 + W near
// the branch point; lambert_w0 is the usual interface on top of it.

#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "wpmec/errors.hpp"

namespace wpmec {

namespace detail {

// (u - 1) e^u + 1, accurate for small |u|.
inline double shifted_residual_base(double u) {
  if (std::abs(u) < 1e-2) {
    const double u2 = u * u;
    return u2 * (0.5 + u * (1.0 / 3 + u * (1.0 / 8 + u * (1.0 / 30 + u * (1.0 / 144 +
                 u * (1.0 / 840 + u * (1.0 / 5760)))))));
  }
  return u * std::exp(u) - std::expm1(u);
}

inline double lambert_initial_guess(double y, double q) {
  if (q < 0.5) {
    // Puiseux series around the branch point.
    const double p = std::sqrt(2.0 * q);
    return -1.0 + p * (1.0 + p * (-1.0 / 3 + p * (11.0 / 72 + p * (-43.0 / 540 +
                 p * (769.0 / 17280)))));
  }
  if (y < 3.0) {
    const double l = std::log1p(y);
    return l * (1.0 - std::log1p(l) / (2.0 + l));
  }
  const double l1 = std::log(y);
  const double l2 = std::log(l1);
  return l1 - l2 + l2 / l1 + l2 * (l2 - 2.0) / (2.0 * l1 * l1);
}

}  // namespace detail

// 1 + W0((q - 1)/e) for q >= 0: the unique u >= 0 with (u - 1) e^u + 1 = q.
// Keeps full relative precision as q -> 0.
inline double lambert_w0_plus_one(double q) {
  if (std::isnan(q)) throw DomainError("lambert_w0_plus_one: NaN argument");
  if (q < 0.0) throw DomainError("lambert_w0_plus_one: argument below the branch point");
  if (q == 0.0) return 0.0;
  if (std::isinf(q)) return q;
  const double y = (q - 1.0) / std::numbers::e;
  double u = 1.0 + detail::lambert_initial_guess(y, q);
  if (!(u > 0.0)) u = std::sqrt(2.0 * q) * 0.5;
  for (int it = 0; it < 60; ++it) {
    const double eu = std::exp(u);
    const double f = detail::shifted_residual_base(u) - q;
    const double f1 = u * eu;
    const double f2 = (u + 1.0) * eu;
    const double denom = f1 - 0.5 * f * f2 / f1;
    double step = f / (denom != 0.0 ? denom : f1);
    double next = u - step;
    if (!(next > 0.0)) next = 0.5 * u;
    step = u - next;
    u = next;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(u)) break;
  }
  return u;
}

// W0((q - 1)/e) for q >= 0.
inline double lambert_w0_shifted(double q) { return lambert_w0_plus_one(q) - 1.0; }

// Principal branch W0(y) for y >= -1/e. Values up to 1e-15 below the branch
// point are clamped to it.
inline double lambert_w0(double y) {
  constexpr double kBranch = -1.0 / std::numbers::e;
  if (std::isnan(y)) throw DomainError("lambert_w0: NaN argument");
  if (y < kBranch - 1e-15) throw DomainError("lambert_w0: argument below -1/e");
  if (y <= kBranch) return -1.0;
  if (y == 0.0) return 0.0;
  if (std::isinf(y)) return y;
  const double q = std::fma(std::numbers::e, y, 1.0);
  return lambert_w0_shifted(q > 0.0 ? q : 0.0);
}

}  // namespace wpmec
