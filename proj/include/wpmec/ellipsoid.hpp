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

// Central-cut ellipsoid method for nonsmooth convex minimization with
// feasibility cuts.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wpmec/errors.hpp"

namespace wpmec {

// What the oracle reports at a query point: either a feasible point with its
// objective value and a subgradient, or an infeasible point with a cut g such
// that the feasible set lies in {y : g . (y - x) <= 0}.
struct OracleResponse {
  bool feasible = false;
  double value = 0;
  Eigen::VectorXd gradient;

  static OracleResponse objective(double value, Eigen::VectorXd subgradient) {
    return {true, value, std::move(subgradient)};
  }
  static OracleResponse cut(Eigen::VectorXd gradient) { return {false, 0.0, std::move(gradient)}; }
};

struct EllipsoidOptions {
  // Stop once (vol / vol0)^(1/n), the geometric-mean semi-axis ratio, drops
  // below this.
  double vol_tol = 1e-10;
  // 0 means 20000 * n.
  long max_iter = 0;
  // Stop once best - lower_bound <= gap_abs + gap_rel * |best| (off while
  // both are zero). The lower bound f(x) - sqrt(g' P g) is valid while the
  // ellipsoid holds a minimizer.
  double gap_rel = 0.0;
  double gap_abs = 0.0;
  bool record_history = false;
};

enum class EllipsoidStop { kVolume, kGap, kMaxIter };

inline const char* to_string(EllipsoidStop s) {
  switch (s) {
    case EllipsoidStop::kVolume:
      return "volume";
    case EllipsoidStop::kGap:
      return "gap";
    default:
      return "max_iter";
  }
}

struct EllipsoidHistoryEntry {
  long iteration = 0;
  bool feasible = false;
  double value = 0;       // objective at the center (feasible steps only)
  double best = 0;        // best feasible value so far
  double lower_bound = 0;
  double log_volume = 0;  // log(vol / vol0)
  Eigen::VectorXd center;
};

struct EllipsoidResult {
  Eigen::VectorXd best_point;
  double best_value = std::numeric_limits<double>::infinity();
  double lower_bound = -std::numeric_limits<double>::infinity();
  long iterations = 0;
  long feasible_steps = 0;
  double log_volume = 0;
  EllipsoidStop stop = EllipsoidStop::kMaxIter;
  Eigen::VectorXd center;  // final center
  Eigen::MatrixXd shape;  // final shape matrix P, E = {y : (y-x)' P^-1 (y-x) <= 1}
  std::vector<EllipsoidHistoryEntry> history;
};

// log of the volume ratio of consecutive ellipsoids under a central cut.
inline double ellipsoid_log_shrink(int n) {
  if (n == 1) return std::log(0.5);
  const double nn = static_cast<double>(n);
  return 0.5 * (nn * std::log(nn * nn / (nn * nn - 1.0)) + std::log((nn - 1.0) / (nn + 1.0)));
}

// Minimizes a convex function over a convex set described by `oracle`
// (callable as OracleResponse(const Eigen::VectorXd&)), starting from the ball
// of radius `radius0` around `center0`.
template <class Oracle>
EllipsoidResult ellipsoid_minimize(Oracle&& oracle, const Eigen::VectorXd& center0,
                                   double radius0, const EllipsoidOptions& opt = {}) {
  const int n = static_cast<int>(center0.size());
  if (n < 1) throw InputError("ellipsoid_minimize: empty center");
  if (!(radius0 > 0)) throw InputError("ellipsoid_minimize: radius must be > 0");
  const long max_iter = opt.max_iter > 0 ? opt.max_iter : 20000L * n;
  const double log_vol_stop = n * std::log(opt.vol_tol);
  const double shrink = ellipsoid_log_shrink(n);
  const bool gap_stop = opt.gap_rel > 0 || opt.gap_abs > 0;
  const double nn = static_cast<double>(n);

  // The ellipsoid is {x + J u : |u| <= 1}; updating the factor J instead of
  // P = J J' keeps the shape positive definite however elongated it gets.
  Eigen::VectorXd x = center0;
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n) * radius0;
  EllipsoidResult res;
  res.best_point = x;
  const double beta = n == 1 ? 0.0 : 2.0 / (nn + 1.0);
  const double scale = n == 1 ? 0.5 : nn / std::sqrt(nn * nn - 1.0);
  const double axis = 1.0 - std::sqrt(1.0 - beta);

  for (long it = 0; it < max_iter; ++it) {
    OracleResponse r = oracle(static_cast<const Eigen::VectorXd&>(x));
    if (r.gradient.size() != n || !r.gradient.allFinite()) {
      throw NumericError("ellipsoid_minimize: oracle returned an invalid gradient at iteration " +
                         std::to_string(it));
    }
    Eigen::VectorXd u = J.transpose() * r.gradient;
    const double gnorm = u.norm();  // sqrt(g' P g)
    if (r.feasible) {
      ++res.feasible_steps;
      if (r.value < res.best_value) {
        res.best_value = r.value;
        res.best_point = x;
      }
      res.lower_bound = std::max(res.lower_bound, r.value - gnorm);
    }
    if (opt.record_history) {
      res.history.push_back({it, r.feasible, r.value, res.best_value, res.lower_bound,
                             res.log_volume, x});
    }
    res.iterations = it + 1;
    if (gap_stop && r.feasible && res.best_value - res.lower_bound <=
                          opt.gap_abs + opt.gap_rel * std::abs(res.best_value)) {
      res.stop = EllipsoidStop::kGap;
      break;
    }
    if (!(gnorm > 0)) {
      if (r.feasible && r.gradient.squaredNorm() == 0.0) {
        // Zero subgradient: the center is optimal.
        res.lower_bound = r.value;
        res.stop = EllipsoidStop::kGap;
        break;
      }
      throw NumericError("ellipsoid_minimize: shape matrix lost positive definiteness at iteration " +
                         std::to_string(it));
    }
    u /= gnorm;
    const Eigen::VectorXd b = J * u;  // P g / sqrt(g' P g)
    if (n == 1) {
      x -= 0.5 * b;
      J *= 0.5;
    } else {
      x -= b / (nn + 1.0);
      J = scale * (J - axis * b * u.transpose());
    }
    if (!J.allFinite()) {
      throw NumericError("ellipsoid_minimize: shape matrix lost positive definiteness at iteration " +
                         std::to_string(it));
    }
    if (!x.allFinite()) {
      throw NumericError("ellipsoid_minimize: non-finite center at iteration " + std::to_string(it));
    }
    res.log_volume += shrink;
    if (res.log_volume < log_vol_stop) {
      res.stop = EllipsoidStop::kVolume;
      break;
    }
  }
  res.center = x;
  res.shape = J * J.transpose();
  if (!std::isfinite(res.best_value)) {
    throw InfeasibleError("ellipsoid_minimize: no feasible point found in " +
                          std::to_string(res.iterations) + " iterations");
  }
  return res;
}

}  // namespace wpmec
