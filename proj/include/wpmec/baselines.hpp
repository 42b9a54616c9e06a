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

// The two benchmark schemes: local computing only, and joint offloading with
// the three slots of every helper fixed to T/3.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "wpmec/barrier.hpp"
#include "wpmec/dual.hpp"
#include "wpmec/dual_search.hpp"
#include "wpmec/ellipsoid.hpp"
#include "wpmec/errors.hpp"
#include "wpmec/model.hpp"
#include "wpmec/primal_recovery.hpp"

namespace wpmec {

// Local computing only, all power beamed to the user.
inline Solution solve_local_only(const Instance& inst) {
  Solution s = Solution::zero(inst);
  if (inst.g[0].squaredNorm() == 0.0 || inst.P_max == 0.0) return s;
  s.Q = EnergyCovariance::beam(inst.g[0], inst.P_max);
  const double e0 = inst.T * inst.zeta[0] * inst.P_max * inst.g[0].squaredNorm();
  const double c0 = inst.C[0];
  s.ell(0) = std::cbrt(e0 * inst.T * inst.T / (inst.xi[0] * c0 * c0 * c0));
  return s;
}


struct EqualTimeReport {
  Solution solution;
  Eigen::VectorXd lambda;  // energy multipliers, raw units
  double rho = 0;
  double dual_value = 0;
  long iterations = 0;
  std::string stop = "none";
  bool repaired = false;  // bits were shrunk to restore feasibility
  double wall_seconds = 0;
};

namespace detail {

// Helper subproblem with t = (T/3, T/3, T/3): strictly concave in l, so its
// maximizer is unique and found by bisection on the derivative.
inline double equal_time_helper_bits(double lambda0, double lambda_k, const HelperParams& hp,
                                     double T) {
  const HelperSubproblem sub(lambda0, lambda_k, 0.0, hp, T);
  const double third = T / 3.0;
  auto slope = [&](double ell) {
    const double x = ell / third;
    return 1.0 - sub.slot_marginal(0, x) - sub.slot_marginal(1, x) - sub.slot_marginal(2, x);
  };
  if (!(slope(0.0) > 0)) return 0.0;
  double lo = 0.0;
  double hi = hp.B * T * 60.0;
  if (slope(hi) >= 0) return hi;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double equal_time_helper_energy(const Instance& inst, int k, double ell) {
  const double third = inst.T / 3.0;
  return helper_compute_energy(ell, third, inst.xi[k], inst.C[k]) +
         helper_tx_energy(ell, third, inst.beta, inst.B, inst.h[k], inst.sigma2[0]);
}

inline double equal_time_offload_energy(const Instance& inst, int k, double ell) {
  return offload_tx_energy(ell, inst.T / 3.0, inst.B, inst.h[k], inst.sigma2[k]);
}

struct EqualTimeEval {
  double value = 0;
  Eigen::VectorXd ell;       // maximizers, index 0 = local
  Eigen::VectorXd subgrad;   // [lambda_0..lambda_K, rho]
};

inline EqualTimeEval eval_equal_time_dual(const Eigen::VectorXd& lambda, double rho,
                                          const Instance& inst) {
  EqualTimeEval ev;
  ev.ell = Eigen::VectorXd::Zero(inst.nodes());
  ev.subgrad = Eigen::VectorXd::Zero(inst.K + 2);
  ev.ell(0) = optimal_local_bits(lambda(0), inst, 0.0);
  const double e_loc = user_compute_energy(ev.ell(0), inst.T, inst.xi[0], inst.C[0]);
  double value = rho * inst.P_max + ev.ell(0) - lambda(0) * e_loc;
  double user = e_loc;
  for (int k = 1; k <= inst.K; ++k) {
    const double ell =
        equal_time_helper_bits(lambda(0), lambda(k), HelperParams::of(inst, k), inst.T);
    ev.ell(k) = ell;
    const double eo = equal_time_offload_energy(inst, k, ell);
    const double eh = equal_time_helper_energy(inst, k, ell);
    value += ell - lambda(0) * eo - lambda(k) * eh;
    user += eo;
    ev.subgrad(k) = -eh;
  }
  ev.subgrad(0) = -user;
  ev.subgrad(inst.K + 1) = inst.P_max;
  ev.value = value;
  return ev;
}

// Covariance maximizing the smallest normalized energy slack for the
// required energies, by the barrier method over the channel span.
inline EnergyCovariance max_min_slack_covariance(const Instance& inst,
                                                 const Eigen::VectorXd& required,
                                                 const BarrierOptions& opt) {
  const cmat U = reduce_subspace(inst.g);
  const int m = static_cast<int>(U.cols());
  const int nb = m * m;
  BarrierProgram prog;
  prog.m = m;
  prog.objective = Eigen::VectorXd::Zero(nb + 1);
  prog.objective(nb) = 1.0;
  const cvec v0 = U.adjoint() * inst.g[0];
  const cmat Y0 = 0.98 * (0.95 * (v0 / v0.norm()) * (v0 / v0.norm()).adjoint() +
                          (0.05 / m) * cmat::Identity(m, m));
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(nb + 1);
  x0.head(nb) = hermitian_to_params(Y0);
  double s0 = kInf;
  for (int k = 0; k <= inst.K; ++k) {
    const double emax = energy_scale(inst, k);
    const Eigen::VectorXd w =
        hermitian_quadratic_coeffs(U.adjoint() * inst.g[k]) * (inst.T * inst.zeta[k] * inst.P_max);
    BarrierConstraint c;
    c.a = Eigen::VectorXd::Zero(nb + 1);
    c.a.head(nb) = -w / emax;
    c.a(nb) = 1.0;
    c.b = -required(k) / emax;
    s0 = std::min(s0, (w.dot(x0.head(nb)) - required(k)) / emax);
    prog.constraints.push_back(c);
  }
  BarrierConstraint tr;
  tr.a = Eigen::VectorXd::Zero(nb + 1);
  tr.a.head(nb) = hermitian_trace_coeffs(m);
  tr.b = 1.0;
  prog.constraints.push_back(tr);
  x0(nb) = s0 - 1.0;
  const BarrierResult res = barrier_maximize(prog, x0, opt);
  return EnergyCovariance(U * (inst.P_max * hermitian_from_params(res.x.head(nb), m)) *
                          U.adjoint());
}

}  // namespace detail

// Equal-time benchmark: t_k = (T/3, T/3, T/3) for every helper and (Q, l)
// optimized through the dual over (lambda, rho).
//
// The Lagrangian is strictly concave in every l_k and l_0, so at the dual
// optimum its maximizers are unique and, by strong duality, equal to the
// primal optimal bits. Q is then chosen to leave the largest normalized
// margin in every energy constraint; a small shrink of the bits absorbs
// any residual infeasibility left by the finite-precision dual.
inline EqualTimeReport solve_equal_time_report(const Instance& inst,
                                               const SolverOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  inst.validate();
  EqualTimeReport rep;
  auto finish = [&]() {
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
  };
  rep.lambda = Eigen::VectorXd::Zero(inst.nodes());
  if (inst.g[0].squaredNorm() == 0.0 || inst.P_max == 0.0) {
    rep.solution = Solution::zero(inst);
    rep.stop = "degenerate";
    return finish();
  }
  std::vector<int> keep;
  for (int k = 1; k <= inst.K; ++k) {
    if (inst.g[k].squaredNorm() > 0.0) keep.push_back(k);
  }
  if (static_cast<int>(keep.size()) < inst.K) {
    EqualTimeReport sub = solve_equal_time_report(detail::sub_instance(inst, keep), opt);
    rep = sub;
    rep.solution = detail::lift_solution(inst, sub.solution, keep);
    rep.lambda = Eigen::VectorXd::Zero(inst.nodes());
    rep.lambda(0) = sub.lambda(0);
    for (std::size_t j = 0; j < keep.size(); ++j) {
      rep.lambda(keep[j]) = sub.lambda(static_cast<int>(j) + 1);
    }
    return finish();
  }

  const int n = inst.K + 2;
  const double base = std::max(1.0, solve_local_only(inst).objective());
  const double U = detail::dual_upper_bound(inst, base, n, [&](const DualPoint& dp) {
    return detail::eval_equal_time_dual(dp.lambda, dp.rho, inst).value;
  });
  Eigen::VectorXd factor(n);
  for (int k = 0; k <= inst.K; ++k) factor(k) = U / detail::energy_scale(inst, k);
  factor(n - 1) = U / inst.P_max;

  auto to_dual = [&](const Eigen::VectorXd& z) {
    DualPoint dp;
    dp.lambda = factor.head(inst.nodes()).cwiseProduct(z.head(inst.nodes()));
    dp.mu = Eigen::VectorXd::Zero(inst.nodes());
    dp.rho = factor(n - 1) * z(n - 1);
    return dp;
  };
  auto oracle = [&](const Eigen::VectorXd& z) -> OracleResponse {
    for (int j = 0; j < n; ++j) {
      const double lo = j < n - 1 ? opt.lambda_min : 0.0;
      if (z(j) < lo || z(j) > 2.0) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
        g(j) = z(j) < lo ? -1.0 : 1.0;
        return OracleResponse::cut(g);
      }
    }
    const DualPoint dp = to_dual(z);
    const TopEigen top = top_eigenpair(psd_matrix_F(dp, inst));
    if (top.value > 0.0) {
      Eigen::VectorXd g(n);
      for (int k = 0; k <= inst.K; ++k) {
        g(k) = inst.T * inst.zeta[k] * std::norm(top.vector.dot(inst.g[k])) * factor(k);
      }
      g(n - 1) = -factor(n - 1);
      return OracleResponse::cut(g);
    }
    const detail::EqualTimeEval ev = detail::eval_equal_time_dual(dp.lambda, dp.rho, inst);
    return OracleResponse::objective(ev.value / U, ev.subgrad.cwiseProduct(factor) / U);
  };

  const EllipsoidResult er =
      ellipsoid_minimize(oracle, Eigen::VectorXd::Constant(n, 0.5), std::sqrt(double(n)),
                         opt.ellipsoid);
  rep.iterations = er.iterations;
  rep.stop = to_string(er.stop);
  const DualPoint dp = to_dual(er.best_point);
  rep.lambda = dp.lambda;
  rep.rho = dp.rho;
  const detail::EqualTimeEval ev = detail::eval_equal_time_dual(dp.lambda, dp.rho, inst);
  rep.dual_value = ev.value;

  Eigen::VectorXd ell = ev.ell;
  Eigen::VectorXd required(inst.nodes());
  required(0) = user_compute_energy(ell(0), inst.T, inst.xi[0], inst.C[0]);
  for (int k = 1; k <= inst.K; ++k) {
    required(0) += detail::equal_time_offload_energy(inst, k, ell(k));
    required(k) = detail::equal_time_helper_energy(inst, k, ell(k));
  }
  const EnergyCovariance Q = detail::max_min_slack_covariance(inst, required, opt.barrier);

  // Repair: shrink each helper's bits to its harvested energy, then all
  // offloads together to the user's, then give l_0 whatever energy is left.
  auto shrink = [](double hi, auto&& fits) {
    if (fits(hi)) return hi;
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (fits(mid) ? lo : hi) = mid;
    }
    return lo;
  };
  for (int k = 1; k <= inst.K; ++k) {
    const double ek = harvested_energy(Q, inst.g[k], inst.zeta[k], inst.T);
    const double fixed = shrink(ell(k), [&](double l) {
      return detail::equal_time_helper_energy(inst, k, l) <= ek;
    });
    rep.repaired = rep.repaired || fixed < ell(k);
    ell(k) = fixed;
  }
  const double e0 = harvested_energy(Q, inst.g[0], inst.zeta[0], inst.T);
  auto offload = [&](double scale) {
    double e = 0;
    for (int k = 1; k <= inst.K; ++k) e += detail::equal_time_offload_energy(inst, k, scale * ell(k));
    return e;
  };
  const double factor_ok = shrink(1.0, [&](double s) { return offload(s) <= e0; });
  if (factor_ok < 1.0) {
    rep.repaired = true;
    ell.tail(inst.K) *= factor_ok;
  }

  Solution s = Solution::zero(inst);
  s.Q = Q;
  for (int k = 1; k <= inst.K; ++k) {
    s.ell(k) = ell(k);
    if (ell(k) > 0) s.t[k] = {inst.T / 3.0, inst.T / 3.0, inst.T / 3.0};
  }
  tighten_local_bits(inst, s);
  s.derive_powers(inst);
  rep.solution = s;
  return finish();
}

inline Solution solve_equal_time(const Instance& inst, const SolverOptions& opt = {}) {
  return solve_equal_time_report(inst, opt).solution;
}

}  // namespace wpmec
