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

// Lagrange dual of the rate maximization problem: evaluation of the dual
// function through its K + 2 independent subproblems, subgradients and
// feasibility cuts for the dual search.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "wpmec/errors.hpp"
#include "wpmec/lambert_w.hpp"
#include "wpmec/model.hpp"

namespace wpmec {

inline constexpr double kLambdaMin = 1e-12;
inline constexpr double kGainTie = 1e-12;

// Multipliers of the energy constraints (lambda, one per node), the time
// budgets (mu, index 0 unused) and the power budget (rho).
struct DualPoint {
  Eigen::VectorXd lambda;
  Eigen::VectorXd mu;
  double rho = 0.0;

  int K() const { return static_cast<int>(lambda.size()) - 1; }
  int dim() const { return 2 * K() + 2; }

  // Flat layout [lambda_0..lambda_K, mu_1..mu_K, rho].
  Eigen::VectorXd to_vector() const {
    const int k = K();
    Eigen::VectorXd v(2 * k + 2);
    v.head(k + 1) = lambda;
    v.segment(k + 1, k) = mu.tail(k);
    v(2 * k + 1) = rho;
    return v;
  }

  static DualPoint from_vector(const Eigen::VectorXd& v, int K) {
    if (v.size() != 2 * K + 2) throw InputError("DualPoint: expected 2K+2 entries");
    DualPoint d;
    d.lambda = v.head(K + 1);
    d.mu = Eigen::VectorXd::Zero(K + 1);
    d.mu.tail(K) = v.segment(K + 1, K);
    d.rho = v(2 * K + 1);
    return d;
  }

  static int lambda_index(int k) { return k; }
  int mu_index(int k) const { return K() + k; }
  int rho_index() const { return 2 * K() + 1; }
};

// Link and CPU parameters of one helper.
struct HelperParams {
  double B = 0;
  double beta = 0;
  double h = 0;
  double sigma2_helper = 0;  // noise at the helper (offloading link)
  double sigma2_user = 0;    // noise at the user (download link)
  double xi = 0;
  double C = 0;

  static HelperParams of(const Instance& inst, int k) {
    return {inst.B, inst.beta, inst.h[k], inst.sigma2[k], inst.sigma2[0], inst.xi[k], inst.C[k]};
  }
};

// Offloading, computing and download rates in input bits per second.
struct RateTriple {
  double r1 = 0;
  double r2 = 0;
  double r3 = 0;

  double operator[](int i) const { return i == 0 ? r1 : (i == 1 ? r2 : r3); }
  double min() const { return std::min({r1, r2, r3}); }
  bool any_zero() const { return r1 <= 0 || r2 <= 0 || r3 <= 0; }
};

// Sum_k lambda_k T zeta_k g_k g_k^H - rho I.
inline cmat psd_matrix_F(const DualPoint& dp, const Instance& inst) {
  if (dp.K() != inst.K || dp.mu.size() != inst.nodes()) {
    throw InputError("psd_matrix_F: dual point does not match the instance");
  }
  cmat F = -dp.rho * cmat::Identity(inst.N, inst.N);
  for (int k = 0; k <= inst.K; ++k) {
    F.noalias() += (dp.lambda(k) * inst.T * inst.zeta[k]) * inst.g[k] * inst.g[k].adjoint();
  }
  return (0.5 * (F + F.adjoint())).eval();
}

struct TopEigen {
  double value = 0;
  cvec vector;
};

inline TopEigen top_eigenpair(const cmat& hermitian) {
  Eigen::SelfAdjointEigenSolver<cmat> es(hermitian);
  if (es.info() != Eigen::Success) throw NumericError("Hermitian eigensolver failed");
  const Eigen::Index last = hermitian.rows() - 1;
  return {es.eigenvalues()(last), es.eigenvectors().col(last)};
}

// Unique maximizer of l0 - lambda0 xi0 C0^3 l0^3 / T^2 over l0 >= 0.
inline double optimal_local_bits(double lambda0, const Instance& inst,
                                 double lambda_min = kLambdaMin) {
  if (!(lambda0 >= lambda_min)) throw InputError("optimal_local_bits: lambda0 below lambda_min");
  const double c3 = inst.C[0] * inst.C[0] * inst.C[0];
  return inst.T / std::sqrt(3.0 * lambda0 * inst.xi[0] * c3);
}

// Per-slot stationary rates of the helper subproblem. Each solves
// d/dt [slot cost(l, t) + mu t] = 0 along the ray l = r t.
inline RateTriple optimal_rates(double lambda0, double lambda_k, double mu_k,
                                const HelperParams& hp) {
  if (!(mu_k >= 0)) throw InputError("optimal_rates: mu must be >= 0");
  if (!(lambda0 > 0) || !(lambda_k > 0)) throw InputError("optimal_rates: lambda must be > 0");
  RateTriple r;
  if (mu_k == 0.0) return r;
  const double q1 = mu_k * hp.h / (lambda0 * hp.sigma2_helper);
  const double q3 = mu_k * hp.h / (lambda_k * hp.sigma2_user);
  r.r1 = hp.B / kLn2 * lambert_w0_plus_one(q1);
  r.r2 = std::cbrt(mu_k / (2.0 * lambda_k * hp.xi)) / hp.C;
  r.r3 = hp.B / (hp.beta * kLn2) * lambert_w0_plus_one(q3);
  return r;
}

// Net Lagrangian gain per offloaded bit when every slot runs at its rate;
// -inf when some rate is zero (the helper cannot be used along a ray).
inline double helper_gain_coefficient(const RateTriple& r, double lambda0, double lambda_k,
                                      double mu_k, const HelperParams& hp) {
  if (r.any_zero()) return -kInf;
  const double c3 = hp.C * hp.C * hp.C;
  const double tx1 = lambda0 * hp.sigma2_helper / (hp.h * r.r1) * std::expm1(kLn2 * r.r1 / hp.B);
  const double tx3 =
      lambda_k * hp.sigma2_user / (hp.h * r.r3) * std::expm1(kLn2 * hp.beta * r.r3 / hp.B);
  const double comp = lambda_k * hp.xi * c3 * r.r2 * r.r2;
  const double time = mu_k / r.r1 + mu_k / r.r2 + mu_k / r.r3;
  return 1.0 - tx1 - time - tx3 - comp;
}

// Linear-program readout at fixed rates: 0 unless the gain is strictly
// positive (|M| <= 1e-12 counts as a tie and maps to 0).
inline double optimal_helper_bits(double M, const RateTriple& r, double T) {
  if (!(M > kGainTie)) return 0.0;
  return r.min() * T;
}

// Maximizer of one helper's subproblem over 0 <= t_i <= T, l >= 0.
struct HelperChoice {
  RateTriple rates;
  double M = -kInf;
  double ell = 0;
  std::array<double, 3> t{0.0, 0.0, 0.0};
  double value = 0;  // subproblem optimum, excluding the constant mu T
};

namespace detail {

// The helper subproblem is jointly concave and positively homogeneous in
// (l, t) apart from the box t <= T. For fixed l every slot is optimal at
// t_i = min(l / r_i, T), so the reduced value V(l) = l - sum_i c_i(l) is
// concave with V' = M on [0, min_i r_i T] and strictly decreasing after.
class HelperSubproblem {
 public:
  HelperSubproblem(double lambda0, double lambda_k, double mu_k, const HelperParams& hp,
                   double T)
      : l0_(lambda0), lk_(lambda_k), mu_(mu_k), hp_(hp), T_(T) {}

  double slot_time(int i, const RateTriple& r, double ell) const {
    if (ell == 0.0) return 0.0;
    return r[i] > 0 ? std::min(ell / r[i], T_) : T_;
  }

  double slot_cost(int i, double ell, double t) const {
    switch (i) {
      case 0:
        return l0_ * offload_tx_energy(ell, t, hp_.B, hp_.h, hp_.sigma2_helper) + mu_ * t;
      case 1:
        return lk_ * helper_compute_energy(ell, t, hp_.xi, hp_.C) + mu_ * t;
      default:
        return lk_ * helper_tx_energy(ell, t, hp_.beta, hp_.B, hp_.h, hp_.sigma2_user) + mu_ * t;
    }
  }

  // Partial derivative of a slot cost in l at bit-over-time ratio x.
  double slot_marginal(int i, double x) const {
    switch (i) {
      case 0:
        return l0_ * hp_.sigma2_helper * kLn2 / (hp_.h * hp_.B) * std::exp2(x / hp_.B);
      case 1:
        return 3.0 * lk_ * hp_.xi * hp_.C * hp_.C * hp_.C * x * x;
      default:
        return lk_ * hp_.sigma2_user * hp_.beta * kLn2 / (hp_.h * hp_.B) *
               std::exp2(hp_.beta * x / hp_.B);
    }
  }

  double slope(const RateTriple& r, double ell) const {
    double s = 1.0;
    for (int i = 0; i < 3; ++i) {
      double x;
      if (r[i] > 0 && ell <= r[i] * T_) {
        x = r[i];
      } else {
        x = ell / T_;
      }
      s -= slot_marginal(i, x);
    }
    return s;
  }

  HelperChoice solve() const {
    HelperChoice out;
    out.rates = optimal_rates(l0_, lk_, mu_, hp_);
    out.M = helper_gain_coefficient(out.rates, l0_, lk_, mu_, hp_);
    const RateTriple& r = out.rates;
    const double lbar = r.any_zero() ? 0.0 : r.min() * T_;
    const double slope0 = r.any_zero() ? slope(r, 0.0) : out.M;
    if (!(slope0 > kGainTie)) return out;

    double lo = lbar;
    double hi = std::max(2.0 * lbar, hp_.B * T_);
    for (int it = 0; it < 2000 && slope(r, hi) > 0; ++it) {
      lo = hi;
      hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (slope(r, mid) > 0 ? lo : hi) = mid;
    }
    out.ell = 0.5 * (lo + hi);
    double v = out.ell;
    for (int i = 0; i < 3; ++i) {
      out.t[i] = slot_time(i, r, out.ell);
      v -= slot_cost(i, out.ell, out.t[i]);
    }
    out.value = v;
    return out;
  }

 private:
  double l0_, lk_, mu_;
  HelperParams hp_;
  double T_;
};

}  // namespace detail

inline HelperChoice solve_helper_subproblem(double lambda0, double lambda_k, double mu_k,
                                            const HelperParams& hp, double T) {
  return detail::HelperSubproblem(lambda0, lambda_k, mu_k, hp, T).solve();
}

struct DualEval {
  double value = 0;
  double ell0 = 0;
  std::vector<HelperChoice> helpers;  // index 0 unused
  EnergyCovariance Q;                 // maximizer of the Q subproblem (zero)
  double lambda_max_F = 0;

  // The Lagrangian maximizer as a (generally infeasible) primal point.
  Solution maximizer(const Instance& inst) const {
    Solution s = Solution::zero(inst);
    s.ell(0) = ell0;
    for (int k = 1; k <= inst.K; ++k) {
      s.ell(k) = helpers[k].ell;
      s.t[k] = helpers[k].t;
    }
    s.Q = Q;
    return s;
  }
};

// Dual function value and all subproblem maximizers. Requires F(dp) <= 0 and
// dp inside the dual box.
inline DualEval eval_dual(const DualPoint& dp, const Instance& inst) {
  const cmat F = psd_matrix_F(dp, inst);
  if ((dp.lambda.array() <= 0).any() || (dp.mu.tail(inst.K).array() < 0).any() || dp.rho < 0) {
    throw PreconditionError("eval_dual: dual point outside the dual box");
  }
  DualEval de;
  de.lambda_max_F = top_eigenpair(F).value;
  double scale = dp.rho;
  for (int k = 0; k <= inst.K; ++k) {
    scale += dp.lambda(k) * inst.T * inst.zeta[k] * inst.g[k].squaredNorm();
  }
  if (de.lambda_max_F > 1e-9 * scale) {
    throw PreconditionError("eval_dual: F(lambda, rho) is not negative semidefinite");
  }
  de.Q = EnergyCovariance::zero(inst.N);
  de.ell0 = optimal_local_bits(dp.lambda(0), inst, 0.0);
  double value = dp.rho * inst.P_max;
  value += de.ell0 - dp.lambda(0) * user_compute_energy(de.ell0, inst.T, inst.xi[0], inst.C[0]);
  de.helpers.resize(inst.nodes());
  for (int k = 1; k <= inst.K; ++k) {
    de.helpers[k] = solve_helper_subproblem(dp.lambda(0), dp.lambda(k), dp.mu(k),
                                            HelperParams::of(inst, k), inst.T);
    value += dp.mu(k) * inst.T + de.helpers[k].value;
  }
  de.value = value;
  return de;
}

// Constraint slacks at the Lagrangian maximizers; a subgradient of the dual
// function in the flat DualPoint layout.
inline Eigen::VectorXd dual_subgradient(const DualEval& de, const DualPoint& dp,
                                        const Instance& inst) {
  const Solution x = de.maximizer(inst);
  Eigen::VectorXd s(dp.dim());
  s(0) = harvested_energy(x.Q, inst.g[0], inst.zeta[0], inst.T) - user_energy_use(inst, x);
  for (int k = 1; k <= inst.K; ++k) {
    s(k) = harvested_energy(x.Q, inst.g[k], inst.zeta[k], inst.T) - helper_energy_use(inst, x, k);
    s(dp.mu_index(k)) = inst.T - (x.t[k][0] + x.t[k][1] + x.t[k][2]);
  }
  s(dp.rho_index()) = inst.P_max - x.Q.trace();
  return s;
}

struct DualCut {
  enum class Kind { kPsd, kBox };
  Kind kind = Kind::kBox;
  int index = -1;            // flat index of the violated box bound, -1 for kPsd
  double violation = 0;      // lambda_max(F) or the bound deficit
  Eigen::VectorXd gradient;  // keep {d : gradient . (d - dp) <= 0}
};

// Cut separating dp from the dual feasible set, if dp is outside it.
// lambda_floor holds one lower bound per lambda_k.
inline std::optional<DualCut> feasibility_cut(const DualPoint& dp, const Instance& inst,
                                              const Eigen::VectorXd& lambda_floor) {
  const int n = dp.dim();
  const TopEigen top = top_eigenpair(psd_matrix_F(dp, inst));
  if (top.value > 0.0) {
    DualCut cut;
    cut.kind = DualCut::Kind::kPsd;
    cut.violation = top.value;
    cut.gradient = Eigen::VectorXd::Zero(n);
    for (int k = 0; k <= inst.K; ++k) {
      cut.gradient(k) = inst.T * inst.zeta[k] * std::norm(top.vector.dot(inst.g[k]));
    }
    cut.gradient(dp.rho_index()) = -1.0;
    return cut;
  }
  auto box = [&](int index, double deficit) {
    DualCut cut;
    cut.kind = DualCut::Kind::kBox;
    cut.index = index;
    cut.violation = deficit;
    cut.gradient = Eigen::VectorXd::Zero(n);
    cut.gradient(index) = -1.0;
    return cut;
  };
  for (int k = 0; k <= inst.K; ++k) {
    if (dp.lambda(k) < lambda_floor(k)) return box(k, lambda_floor(k) - dp.lambda(k));
  }
  for (int k = 1; k <= inst.K; ++k) {
    if (dp.mu(k) < 0) return box(dp.mu_index(k), -dp.mu(k));
  }
  if (dp.rho < 0) return box(dp.rho_index(), -dp.rho);
  return std::nullopt;
}

inline std::optional<DualCut> feasibility_cut(const DualPoint& dp, const Instance& inst,
                                              double lambda_min = kLambdaMin) {
  return feasibility_cut(dp, inst, Eigen::VectorXd::Constant(inst.nodes(), lambda_min));
}

}  // namespace wpmec
