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

// Helpers shared by the dual searches of the proposed and the equal-time
// schemes.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <type_traits>
#include <vector>

#include "wpmec/barrier.hpp"
#include "wpmec/dual.hpp"
#include "wpmec/ellipsoid.hpp"
#include "wpmec/model.hpp"

namespace wpmec {

struct SolverOptions {
  // Floor on every energy multiplier, in the normalized coordinates of
  // detail::DualScaling.
  double lambda_min = kLambdaMin;
  // The dual value settles long before the dual point does; running the
  // ellipsoid down to 1e-13 per axis pins the multipliers to ~1e-8.
  EllipsoidOptions ellipsoid = {1e-13, 0, 0.0, 0.0, false};
  BarrierOptions barrier;
};

namespace detail {

inline double energy_scale(const Instance& inst, int k) {
  return inst.T * inst.zeta[k] * inst.P_max * inst.g[k].squaredNorm();
}

// Copy of `inst` keeping only the helpers listed in `keep`.
inline Instance sub_instance(const Instance& inst, const std::vector<int>& keep) {
  Instance s = inst;
  s.K = static_cast<int>(keep.size());
  auto pick = [&](const auto& v) {
    std::decay_t<decltype(v)> out{v[0]};
    for (int k : keep) out.push_back(v[k]);
    return out;
  };
  s.zeta = pick(inst.zeta);
  s.xi = pick(inst.xi);
  s.C = pick(inst.C);
  s.sigma2 = pick(inst.sigma2);
  s.g = pick(inst.g);
  s.h = pick(inst.h);
  return s;
}

// Solution of a sub-instance mapped back onto the full helper set.
inline Solution lift_solution(const Instance& inst, const Solution& sub,
                              const std::vector<int>& keep) {
  Solution s = Solution::zero(inst);
  s.Q = sub.Q;
  s.ell(0) = sub.ell(0);
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const int k = keep[j];
    s.ell(k) = sub.ell(static_cast<int>(j) + 1);
    s.t[k] = sub.t[j + 1];
  }
  s.derive_powers(inst);
  return s;
}

// Dual variables in normalized coordinates z:
//   lambda_k = z U / E_k,max,  mu_k = z U / T,  rho = z U / P_max.
// At a dual optimum rho P_max, mu_k T and lambda_k E_k,max are all bounded by
// the optimal value (F <= 0 gives lambda_k E_k,max <= rho P_max), so with U an
// upper bound on the optimum the minimizer lies in the unit cube.
struct DualScaling {
  Eigen::VectorXd factor;  // raw = factor .* z

  static DualScaling proposed(const Instance& inst, double U) {
    DualScaling d;
    d.factor.resize(2 * inst.K + 2);
    for (int k = 0; k <= inst.K; ++k) d.factor(k) = U / energy_scale(inst, k);
    for (int k = 1; k <= inst.K; ++k) d.factor(inst.K + k) = U / inst.T;
    d.factor(2 * inst.K + 1) = U / inst.P_max;
    return d;
  }

  DualPoint to_dual(const Eigen::VectorXd& z, int K) const {
    return DualPoint::from_vector(factor.cwiseProduct(z), K);
  }
};

// Smallest dual value over a one-parameter family of feasible dual points;
// a valid upper bound on the optimum by weak duality.
template <class Eval>
double dual_upper_bound(const Instance& inst, double base, int dim, Eval&& eval) {
  double best = kInf;
  for (int i = 0; i <= 28; ++i) {
    const double a = std::pow(10.0, -4.0 + 0.25 * i);
    DualPoint dp;
    dp.lambda.resize(inst.nodes());
    dp.mu = Eigen::VectorXd::Zero(inst.nodes());
    for (int k = 0; k <= inst.K; ++k) dp.lambda(k) = a * base / energy_scale(inst, k);
    if (dim == 2 * inst.K + 2) {
      for (int k = 1; k <= inst.K; ++k) dp.mu(k) = a * base / inst.T;
    }
    dp.rho = 0;
    const double top = top_eigenpair(psd_matrix_F(dp, inst)).value;
    dp.rho = top * (1.0 + 1e-9);
    best = std::min(best, eval(dp));
  }
  return best;
}

// Safeguarded Newton iteration on grad f = 0 with a central-difference
// Jacobian of the oracle gradient. Only steps that do not raise f are taken.
// Meant for the last digits once a minimizer is localized where f is smooth.
template <class Oracle>
Eigen::VectorXd newton_polish(Oracle&& oracle, Eigen::VectorXd z, int max_steps = 8) {
  const Eigen::Index a = z.size();
  OracleResponse cur = oracle(z);
  if (a == 0 || !cur.feasible) return z;
  for (int step = 0; step < max_steps; ++step) {
    Eigen::MatrixXd J(a, a);
    for (Eigen::Index j = 0; j < a; ++j) {
      const double h = 1e-6 * std::abs(z(j)) + 1e-12;
      Eigen::VectorXd zp = z, zm = z;
      zp(j) += h;
      zm(j) -= h;
      const OracleResponse p = oracle(zp), m = oracle(zm);
      if (!p.feasible || !m.feasible) return z;
      J.col(j) = (p.gradient - m.gradient) / (2.0 * h);
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(0.5 * (J + J.transpose()));
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0).all()) break;
    const Eigen::VectorXd d = -ldlt.solve(cur.gradient);
    bool moved = false;
    double len = 1.0;
    for (int bt = 0; bt < 30 && !moved; ++bt, len *= 0.5) {
      const Eigen::VectorXd zn = z + len * d;
      const OracleResponse rn = oracle(zn);
      if (rn.feasible && rn.value <= cur.value) {
        z = zn;
        cur = rn;
        moved = true;
      }
    }
    if (!moved || 2.0 * len * d.norm() <= 1e-14 * z.norm()) break;
  }
  return z;
}

// Price of time at which helper k breaks even, M_k = 0, found by bisection
// outward from `guess`. Returns a negative value when no bracket exists.
inline double break_even_mu(double lambda0, double lambda_k, const HelperParams& hp,
                            double guess) {
  auto gain = [&](double mu) {
    return helper_gain_coefficient(optimal_rates(lambda0, lambda_k, mu, hp), lambda0, lambda_k,
                                   mu, hp);
  };
  double lo = guess > 0 ? guess : 1e-300, hi = lo;
  for (int it = 0; it < 200 && !(gain(lo) > 0); ++it) lo *= 0.5;
  for (int it = 0; it < 2000 && gain(hi) > 0; ++it) hi *= 2.0;
  if (!(gain(lo) > 0) || gain(hi) > 0) return -1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gain(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

}  // namespace wpmec
