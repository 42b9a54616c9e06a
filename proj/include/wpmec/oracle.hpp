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

// Independent checks of the solver: exhaustive search on one-helper
// instances and the residuals of the optimality conditions.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wpmec/dual.hpp"
#include "wpmec/errors.hpp"
#include "wpmec/model.hpp"
#include "wpmec/primal_recovery.hpp"

namespace wpmec {

struct BruteForceOptions {
  int time_grid = 200;      // fractions per simplex coordinate
  int bits_grid = 400;      // samples of l_1 per time split
  int frontier = 2048;      // beam directions on the energy frontier
  int refine_steps = 80;    // golden-section steps around the best l_1 sample
};

namespace detail {

// Upper-right boundary of the harvested-energy region {(E_0, E_1)} for
// tr(Q) <= P_max. For two receivers it is traced by rank-one beams: the top
// eigenvector of cos(th) zeta_0 g_0 g_0^H + sin(th) zeta_1 g_1 g_1^H for
// th in [0, pi/2]. Time sharing between neighbours is achievable, so linear
// interpolation never overstates the region.
class EnergyFrontier {
 public:
  EnergyFrontier(const Instance& inst, int samples) {
    const double c = inst.T * inst.P_max;
    for (int j = 0; j < samples; ++j) {
      const double th = 0.5 * std::acos(-1.0) * j / (samples - 1);
      const cmat A = std::cos(th) * inst.zeta[0] * inst.g[0] * inst.g[0].adjoint() +
                     std::sin(th) * inst.zeta[1] * inst.g[1] * inst.g[1].adjoint();
      const cvec v = top_eigenpair((0.5 * (A + A.adjoint())).eval()).vector;
      e0_.push_back(c * inst.zeta[0] * std::norm(v.dot(inst.g[0])));
      e1_.push_back(c * inst.zeta[1] * std::norm(v.dot(inst.g[1])));
      beams_.push_back(v);
    }
    // Enforce monotonicity against eigen-solver noise.
    for (std::size_t j = 1; j < e1_.size(); ++j) {
      e1_[j] = std::max(e1_[j], e1_[j - 1]);
    }
    for (std::size_t j = e0_.size() - 1; j-- > 0;) e0_[j] = std::max(e0_[j], e0_[j + 1]);
  }

  double max_e1() const { return e1_.back(); }

  // Largest E_0 reachable while E_1 >= need (-inf if need is unreachable).
  double max_e0(double need) const {
    if (need <= e1_.front()) return e0_.front();
    if (need > e1_.back()) return -kInf;
    const auto it = std::lower_bound(e1_.begin(), e1_.end(), need);
    const std::size_t j = static_cast<std::size_t>(it - e1_.begin());
    if (e1_[j] == e1_[j - 1]) return e0_[j];
    const double w = (need - e1_[j - 1]) / (e1_[j] - e1_[j - 1]);
    return (1 - w) * e0_[j - 1] + w * e0_[j];
  }

  // Covariance achieving max_e0(need) (time share of two neighbouring beams).
  EnergyCovariance covariance(double need, double p_max) const {
    std::size_t j = 0;
    double w = 0;
    if (need > e1_.front()) {
      j = static_cast<std::size_t>(std::lower_bound(e1_.begin(), e1_.end(), need) - e1_.begin());
      w = e1_[j] == e1_[j - 1] ? 1.0 : (need - e1_[j - 1]) / (e1_[j] - e1_[j - 1]);
      --j;
    }
    const cvec& a = beams_[j];
    const cvec& b = beams_[std::min(j + 1, beams_.size() - 1)];
    return EnergyCovariance(p_max * ((1 - w) * a * a.adjoint() + w * b * b.adjoint()));
  }

 private:
  std::vector<double> e0_, e1_;
  std::vector<cvec> beams_;
};

}  // namespace detail

// Exhaustive search for K = 1: a grid over the slot split, and for each
// split a sampled-and-refined search over l_1 with l_0 set by the user's
// leftover energy. The returned point is feasible, so its objective is a
// lower bound on the optimum.
inline Solution brute_force_small(const Instance& inst, const BruteForceOptions& opt = {}) {
  inst.validate();
  if (inst.K != 1) throw InputError("brute_force_small: only K = 1 is supported");
  if (inst.N > 2) throw InputError("brute_force_small: only N <= 2 is supported");
  Solution best = Solution::zero(inst);
  if (inst.P_max == 0.0 || inst.g[0].squaredNorm() == 0.0) return best;

  const detail::EnergyFrontier fr(inst, opt.frontier);
  const double T = inst.T;
  const double c0 = inst.C[0];
  const double local_coeff = T * T / (inst.xi[0] * c0 * c0 * c0);

  auto objective = [&](const std::array<double, 3>& t, double l1) {
    const double need1 = helper_compute_energy(l1, t[1], inst.xi[1], inst.C[1]) +
                         helper_tx_energy(l1, t[2], inst.beta, inst.B, inst.h[1], inst.sigma2[0]);
    const double left = fr.max_e0(need1) -
                        offload_tx_energy(l1, t[0], inst.B, inst.h[1], inst.sigma2[1]);
    if (!(left >= 0)) return -kInf;
    return l1 + std::cbrt(left * local_coeff);
  };

  double best_value = objective({0, 0, 0}, 0.0);
  std::array<double, 3> best_t{0, 0, 0};
  double best_l1 = 0;

  const double l_cap = inst.B * T * 60.0;
  const int G = opt.time_grid;
  for (int a = 1; a < G; ++a) {
    for (int b = 1; b < G; ++b) {
      const double t1 = T * a / G;
      const double t2 = (T - t1) * b / G;
      const std::array<double, 3> t{t1, t2, T - t1 - t2};
      // l_1 values with a nonnegative energy budget form an interval [0, hi].
      double lo = 0, hi = l_cap;
      if (!std::isfinite(objective(t, hi))) {
        for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
          const double mid = 0.5 * (lo + hi);
          (std::isfinite(objective(t, mid)) ? lo : hi) = mid;
        }
        hi = lo;
      }
      if (!(hi > 0)) continue;
      int arg = 0;
      double top = -kInf;
      for (int j = 0; j <= opt.bits_grid; ++j) {
        const double v = objective(t, hi * j / opt.bits_grid);
        if (v > top) {
          top = v;
          arg = j;
        }
      }
      // The objective is concave in l_1 for fixed t; refine the bracket.
      double x0 = hi * std::max(arg - 1, 0) / opt.bits_grid;
      double x3 = hi * std::min(arg + 1, opt.bits_grid) / opt.bits_grid;
      const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
      double x1 = x3 - ratio * (x3 - x0), x2 = x0 + ratio * (x3 - x0);
      double f1 = objective(t, x1), f2 = objective(t, x2);
      for (int it = 0; it < opt.refine_steps; ++it) {
        if (f1 < f2) {
          x0 = x1;
          x1 = x2;
          f1 = f2;
          x2 = x0 + ratio * (x3 - x0);
          f2 = objective(t, x2);
        } else {
          x3 = x2;
          x2 = x1;
          f2 = f1;
          x1 = x3 - ratio * (x3 - x0);
          f1 = objective(t, x1);
        }
      }
      double l1 = hi * arg / opt.bits_grid;
      if (f1 > top) {
        top = f1;
        l1 = x1;
      }
      if (f2 > top) {
        top = f2;
        l1 = x2;
      }
      if (top > best_value) {
        best_value = top;
        best_t = t;
        best_l1 = l1;
      }
    }
  }

  if (best_l1 > 0) {
    const double need1 =
        helper_compute_energy(best_l1, best_t[1], inst.xi[1], inst.C[1]) +
        helper_tx_energy(best_l1, best_t[2], inst.beta, inst.B, inst.h[1], inst.sigma2[0]);
    best.Q = fr.covariance(need1, inst.P_max);
    best.ell(1) = best_l1;
    best.t[1] = best_t;
  } else {
    best.Q = fr.covariance(0.0, inst.P_max);
  }
  tighten_local_bits(inst, best);
  best.derive_powers(inst);
  // Interpolation and cube roots are exact only up to rounding; never
  // report a point the checker rejects.
  for (int it = 0; it < 60 && !check_feasible(inst, best).feasible; ++it) {
    best.ell *= 1.0 - 1e-12 * (1 << std::min(it, 30));
    best.derive_powers(inst);
  }
  return best;
}

// Largest residual of each group of optimality conditions at (sol, dp).
// Every entry is dimensionless: energy-type products are divided by the
// objective scale, stationarity residuals are relative.
struct KktReport {
  double primal = 0;
  double dual = 0;
  double complementary = 0;
  double stationarity = 0;
  std::vector<std::pair<std::string, double>> details;

  double max() const { return std::max({primal, dual, complementary, stationarity}); }
};

inline KktReport kkt_residuals(const Instance& inst, const Solution& sol, const DualPoint& dp,
                               double lambda_min = 0.0) {
  KktReport rep;
  auto note = [&](double& cat, const std::string& name, double v) {
    v = std::isnan(v) ? kInf : std::abs(v);
    rep.details.emplace_back(name, v);
    cat = std::max(cat, v);
  };
  const FeasibilityReport fr = check_feasible(inst, sol, 0.0);
  note(rep.primal, "primal_violation", fr.max_violation());

  const double scale = std::max(1.0, sol.objective());
  const cmat F = psd_matrix_F(dp, inst);
  note(rep.dual, "lambda_max_F", std::max(0.0, top_eigenpair(F).value) * inst.P_max / scale);
  for (int k = 0; k <= inst.K; ++k) {
    const double emax = inst.T * inst.zeta[k] * inst.P_max * inst.g[k].squaredNorm();
    note(rep.dual, "lambda_floor[" + std::to_string(k) + "]",
         std::max(0.0, lambda_min - dp.lambda(k)) * emax / scale);
  }
  for (int k = 1; k <= inst.K; ++k) {
    note(rep.dual, "mu_nonneg[" + std::to_string(k) + "]", std::max(0.0, -dp.mu(k)) * inst.T / scale);
  }
  note(rep.dual, "rho_nonneg", std::max(0.0, -dp.rho) * inst.P_max / scale);

  // Complementary slackness.
  const double e0 = harvested_energy(sol.Q, inst.g[0], inst.zeta[0], inst.T);
  note(rep.complementary, "user_energy", dp.lambda(0) * (e0 - user_energy_use(inst, sol)) / scale);
  for (int k = 1; k <= inst.K; ++k) {
    const std::string idx = "[" + std::to_string(k) + "]";
    const double ek = harvested_energy(sol.Q, inst.g[k], inst.zeta[k], inst.T);
    note(rep.complementary, "helper_energy" + idx,
         dp.lambda(k) * (ek - helper_energy_use(inst, sol, k)) / scale);
    note(rep.complementary, "time_budget" + idx,
         dp.mu(k) * (inst.T - sol.t[k][0] - sol.t[k][1] - sol.t[k][2]) / scale);
  }
  note(rep.complementary, "power_budget", dp.rho * (inst.P_max - sol.Q.trace()) / scale);
  note(rep.complementary, "covariance", (F * sol.Q.matrix()).trace().real() / scale);

  // Stationarity of the Lagrangian in l_0, l_k and t_k.
  const double c0 = inst.C[0];
  if (sol.ell(0) > 0) {
    note(rep.stationarity, "ell[0]",
         1.0 - 3.0 * dp.lambda(0) * inst.xi[0] * c0 * c0 * c0 * sol.ell(0) * sol.ell(0) /
                   (inst.T * inst.T));
  }
  for (int k = 1; k <= inst.K; ++k) {
    const std::string idx = "[" + std::to_string(k) + "]";
    const HelperParams hp = HelperParams::of(inst, k);
    const detail::HelperSubproblem sub(dp.lambda(0), dp.lambda(k), dp.mu(k), hp, inst.T);
    if (sol.ell(k) > 0) {
      double d = 1.0;
      for (int i = 0; i < 3; ++i) d -= sub.slot_marginal(i, sol.ell(k) / sol.t[k][i]);
      note(rep.stationarity, "ell" + idx, d);
      // -d(cost)/dt per slot must equal mu_k.
      const double x1 = sol.ell(k) / sol.t[k][0];
      const double x3 = inst.beta * sol.ell(k) / sol.t[k][2];
      const double x2 = sol.ell(k) / sol.t[k][1];
      auto shannon = [&](double x) {
        const double y = kLn2 * x / inst.B;
        return y * std::exp(y) - std::expm1(y);
      };
      const double c3 = inst.C[k] * inst.C[k] * inst.C[k];
      const double pull[3] = {dp.lambda(0) * inst.sigma2[k] / inst.h[k] * shannon(x1),
                              2.0 * dp.lambda(k) * inst.xi[k] * c3 * x2 * x2 * x2,
                              dp.lambda(k) * inst.sigma2[0] / inst.h[k] * shannon(x3)};
      for (int i = 0; i < 3; ++i) {
        note(rep.stationarity, "t" + idx + "[" + std::to_string(i + 1) + "]",
             (pull[i] - dp.mu(k)) / std::max(pull[i] + dp.mu(k), 1e-300));
      }
    } else {
      const RateTriple r = optimal_rates(dp.lambda(0), dp.lambda(k), dp.mu(k), hp);
      const double M = helper_gain_coefficient(r, dp.lambda(0), dp.lambda(k), dp.mu(k), hp);
      note(rep.stationarity, "ell" + idx, std::isfinite(M) ? std::max(0.0, M) : 0.0);
    }
  }
  return rep;
}

}  // namespace wpmec
