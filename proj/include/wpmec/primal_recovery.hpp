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

// Recovery of the optimal covariance and task partition from the optimal
// dual point. With the per-slot rates fixed at their dual-optimal values
// every remaining constraint is linear in (Q, l_1..l_K), plus the cubic
// local-computing term; the program is solved in the span of the channels.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "wpmec/barrier.hpp"
#include "wpmec/dual.hpp"
#include "wpmec/errors.hpp"
#include "wpmec/model.hpp"

namespace wpmec {

// Orthonormal basis of span{g_0..g_K} by column-pivoted modified Gram-Schmidt.
// Residual columns shorter than 1e-10 * max ||g_k|| are dropped.
inline cmat reduce_subspace(const std::vector<cvec>& channels) {
  if (channels.empty()) throw InputError("reduce_subspace: no channels");
  const Eigen::Index n = channels.front().size();
  double max_norm = 0;
  for (const auto& g : channels) {
    if (g.size() != n) throw InputError("reduce_subspace: channel length mismatch");
    max_norm = std::max(max_norm, g.norm());
  }
  if (max_norm == 0.0) throw InputError("reduce_subspace: all channels are zero");
  const double drop = 1e-10 * max_norm;

  std::vector<cvec> work(channels.begin(), channels.end());
  std::vector<bool> used(work.size(), false);
  std::vector<cvec> basis;
  while (static_cast<Eigen::Index>(basis.size()) < n) {
    std::size_t pivot = work.size();
    double best = drop;
    for (std::size_t j = 0; j < work.size(); ++j) {
      if (!used[j] && work[j].norm() > best) {
        best = work[j].norm();
        pivot = j;
      }
    }
    if (pivot == work.size()) break;
    used[pivot] = true;
    cvec q = work[pivot];
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) q -= b * b.dot(q);
    }
    const double qn = q.norm();
    if (qn <= drop) continue;
    q /= qn;
    basis.push_back(q);
    for (std::size_t j = 0; j < work.size(); ++j) {
      if (!used[j]) work[j] -= q * q.dot(work[j]);
    }
  }
  cmat U(n, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) U.col(static_cast<Eigen::Index>(j)) = basis[j];
  return U;
}

// Data of the recovery program with rates fixed. Bits are measured in units
// of bit_scale and the covariance in units of P_max inside the program.
struct RecoverySdp {
  cmat U;                          // N x m basis
  std::vector<cvec> reduced;       // U^H g_k
  std::vector<int> active;         // helpers with all rates > 0
  std::vector<double> user_cost;   // J per offloaded bit at the user, per active helper
  std::vector<double> helper_cost; // J per bit at the helper (download + compute)
  std::vector<double> time_cost;   // s per bit summed over the three slots
  double local_coeff = 0;          // xi0 C0^3 / T^2
  double bit_scale = 1;

  static RecoverySdp build(const Instance& inst, const std::vector<RateTriple>& rates,
                           double bit_scale) {
    RecoverySdp sdp;
    sdp.U = reduce_subspace(inst.g);
    for (int k = 0; k <= inst.K; ++k) sdp.reduced.push_back(sdp.U.adjoint() * inst.g[k]);
    for (int k = 1; k <= inst.K; ++k) {
      const RateTriple& r = rates[k];
      if (r.any_zero() || inst.g[k].squaredNorm() == 0.0) continue;
      sdp.active.push_back(k);
      sdp.user_cost.push_back(std::expm1(kLn2 * r.r1 / inst.B) * inst.sigma2[k] /
                              (inst.h[k] * r.r1));
      const double c3 = inst.C[k] * inst.C[k] * inst.C[k];
      sdp.helper_cost.push_back(std::expm1(kLn2 * inst.beta * r.r3 / inst.B) * inst.sigma2[0] /
                                    (inst.h[k] * r.r3) +
                                inst.xi[k] * c3 * r.r2 * r.r2);
      sdp.time_cost.push_back(1.0 / r.r1 + 1.0 / r.r2 + 1.0 / r.r3);
    }
    const double c0 = inst.C[0];
    sdp.local_coeff = inst.xi[0] * c0 * c0 * c0 / (inst.T * inst.T);
    sdp.bit_scale = bit_scale > 0 ? bit_scale : 1.0;
    return sdp;
  }

  int m() const { return static_cast<int>(U.cols()); }
};

struct RecoveryResult {
  EnergyCovariance Q;
  Eigen::VectorXd ell;   // index 0 = local bits chosen by the program
  bool ell0_shrunk = false;
  BarrierResult barrier;
};

// Maximizes l_0 + sum_k l_k over Q >= 0 and l >= 0 with the rates fixed:
//   sum_k user_cost_k l_k + xi0 C0^3 l0^3 / T^2 <= T zeta0 tr(Q g0 g0^H)
//   helper_cost_k l_k <= T zeta_k tr(Q g_k g_k^H)
//   l_k * (1/r_k1 + 1/r_k2 + 1/r_k3) <= T
//   tr(Q) <= P_max.
// ell0_opt seeds the local bits and is reported as shrunk when the program
// ends below it.
inline RecoveryResult solve_recovery_sdp(const Instance& inst, const std::vector<RateTriple>& rates,
                                         double ell0_opt, double bit_scale,
                                         const BarrierOptions& opt = {}) {
  if (static_cast<int>(rates.size()) != inst.nodes()) {
    throw InputError("solve_recovery_sdp: one rate triple per node expected");
  }
  const RecoverySdp sdp = RecoverySdp::build(inst, rates, bit_scale);
  const int m = sdp.m();
  const int nb = m * m;
  const int na = static_cast<int>(sdp.active.size());
  const int n = nb + na + 1;
  const int i0 = nb + na;
  const double L = sdp.bit_scale;
  const double P = inst.P_max;
  if (!(P > 0)) throw RecoveryError("solve_recovery_sdp: zero power budget");

  auto energy_coeffs = [&](int k) {
    return Eigen::VectorXd(hermitian_quadratic_coeffs(sdp.reduced[k]) *
                           (inst.T * inst.zeta[k] * P));
  };
  auto emax = [&](int k) { return inst.T * inst.zeta[k] * P * inst.g[k].squaredNorm(); };
  const double e0n = emax(0);
  if (!(e0n > 0)) throw RecoveryError("solve_recovery_sdp: the user harvests no energy");

  BarrierProgram prog;
  prog.m = m;
  prog.objective = Eigen::VectorXd::Zero(n);
  prog.objective.segment(nb, na + 1).setOnes();

  {  // user energy neutrality
    BarrierConstraint c;
    c.a = Eigen::VectorXd::Zero(n);
    c.a.head(nb) = -energy_coeffs(0) / e0n;
    for (int j = 0; j < na; ++j) c.a(nb + j) = sdp.user_cost[j] * L / e0n;
    c.cubic_index = i0;
    c.cubic_coeff = sdp.local_coeff * L * L * L / e0n;
    prog.constraints.push_back(c);
  }
  for (int j = 0; j < na; ++j) {
    const int k = sdp.active[j];
    BarrierConstraint e;
    e.a = Eigen::VectorXd::Zero(n);
    e.a.head(nb) = -energy_coeffs(k) / emax(k);
    e.a(nb + j) = sdp.helper_cost[j] * L / emax(k);
    prog.constraints.push_back(e);

    BarrierConstraint t;
    t.a = Eigen::VectorXd::Zero(n);
    t.a(nb + j) = sdp.time_cost[j] * L / inst.T;
    t.b = 1.0;
    prog.constraints.push_back(t);
  }
  {
    BarrierConstraint tr;
    tr.a = Eigen::VectorXd::Zero(n);
    tr.a.head(nb) = hermitian_trace_coeffs(m);
    tr.b = 1.0;
    prog.constraints.push_back(tr);
  }
  for (int j = nb; j < n; ++j) {
    BarrierConstraint nn;
    nn.a = Eigen::VectorXd::Zero(n);
    nn.a(j) = -1.0;
    prog.constraints.push_back(nn);
  }

  // Strictly feasible start: mostly the user's beam plus a little of every
  // direction, small offloads, and the local bits the remaining energy allows.
  const cvec v0 = sdp.reduced[0] / sdp.reduced[0].norm();
  const double w = 0.05;
  const cmat Y0 = 0.98 * ((1.0 - w) * v0 * v0.adjoint() + (w / m) * cmat::Identity(m, m));
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  x0.head(nb) = hermitian_to_params(Y0);
  const double user_fraction = std::real(sdp.reduced[0].dot(Y0 * sdp.reduced[0])) /
                               inst.g[0].squaredNorm();
  double user_left = user_fraction;  // in units of e0n
  for (int j = 0; j < na; ++j) {
    const int k = sdp.active[j];
    const double helper_fraction =
        std::real(sdp.reduced[k].dot(Y0 * sdp.reduced[k])) / inst.g[k].squaredNorm();
    double y = 0.5 * helper_fraction / (sdp.helper_cost[j] * L / emax(k));
    y = std::min(y, 0.5 / (sdp.time_cost[j] * L / inst.T));
    y = std::min(y, 0.25 * user_fraction / (na * sdp.user_cost[j] * L / e0n));
    x0(nb + j) = y;
    user_left -= sdp.user_cost[j] * L * y / e0n;
  }
  const double cubic = sdp.local_coeff * L * L * L / e0n;
  const double y0_cap = std::cbrt(0.5 * user_left / cubic);
  x0(i0) = std::min(std::max(ell0_opt, 0.0) / L, y0_cap);
  if (!(x0(i0) > 0)) x0(i0) = 0.5 * y0_cap;

  RecoveryResult out;
  out.barrier = barrier_maximize(prog, x0, opt);
  const Eigen::VectorXd& x = out.barrier.x;
  const cmat Y = hermitian_from_params(x.head(nb), m);
  out.Q = EnergyCovariance(sdp.U * (P * Y) * sdp.U.adjoint());
  out.ell = Eigen::VectorXd::Zero(inst.nodes());
  // Offloads at the barrier's resolution are interior-point residue of an
  // idle helper; drop them (they only cost energy).
  for (int j = 0; j < na; ++j) {
    out.ell(sdp.active[j]) = x(nb + j) > 1e-8 ? L * x(nb + j) : 0.0;
  }
  out.ell(0) = std::max(0.0, L * x(i0));
  out.ell0_shrunk = out.ell(0) < ell0_opt * (1.0 - 1e-6);

  return out;
}

// Primal point from the covariance, the task partition and the rates:
// t_ki = l_k / r_ki, zero when helper k is idle.
inline Solution assemble_solution(const Instance& inst, const EnergyCovariance& Q, double ell0,
                                  const Eigen::VectorXd& ell, const std::vector<RateTriple>& rates) {
  Solution s = Solution::zero(inst);
  s.Q = Q;
  s.ell(0) = ell0;
  for (int k = 1; k <= inst.K; ++k) {
    s.ell(k) = ell(k);
    if (ell(k) > 0) {
      for (int i = 0; i < 3; ++i) s.t[k][i] = ell(k) / rates[k][i];
    }
  }
  s.derive_powers(inst);
  return s;
}

// Sets l_0 to the largest value keeping the user's energy constraint
// satisfied, given the offloading energy already committed.
inline void tighten_local_bits(const Instance& inst, Solution& sol) {
  const double harvested = harvested_energy(sol.Q, inst.g[0], inst.zeta[0], inst.T);
  double offload = 0;
  for (int k = 1; k <= inst.K; ++k) {
    offload += offload_tx_energy(sol.ell(k), sol.t[k][0], inst.B, inst.h[k], inst.sigma2[k]);
  }
  const double left = harvested - offload;
  const double c0 = inst.C[0];
  sol.ell(0) = left > 0 ? std::cbrt(left * inst.T * inst.T / (inst.xi[0] * c0 * c0 * c0)) : 0.0;
}

inline double duality_gap(const Solution& sol, double dual_value) {
  return (dual_value - sol.objective()) / std::max(1.0, dual_value);
}

}  // namespace wpmec
