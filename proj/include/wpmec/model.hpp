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

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "wpmec/errors.hpp"

namespace wpmec {

using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kLn2 = std::numbers::ln2;

// Full problem description. Per-node arrays are indexed by node: 0 is the
// user, 1..K are the helpers. h[0] is unused and kept only so that helper
// indices line up with every other array.
struct Instance {
  int N = 1;
  int K = 0;
  double T = 0.1;       // block duration [s]
  double B = 1e6;       // per-helper bandwidth [Hz]
  double beta = 1.0;    // result bits per input bit
  double P_max = 3.0;   // ET power budget [W]
  std::vector<double> zeta;    // EH efficiency, (0, 1]
  std::vector<double> xi;      // switch capacitance
  std::vector<double> C;       // CPU cycles per input bit
  std::vector<double> sigma2;  // receive noise power [W]; sigma2[0] at the user
  std::vector<cvec> g;         // ET -> node channel vectors, length N
  std::vector<double> h;       // user <-> helper power gains

  int nodes() const { return K + 1; }

  // Throws InputError describing the first violated invariant.
  void validate() const {
    auto fail = [](const std::string& what) { throw InputError("instance: " + what); };
    if (N < 1) fail("N must be >= 1");
    if (K < 0) fail("K must be >= 0");
    if (!(T > 0) || !std::isfinite(T)) fail("T must be > 0");
    if (!(B > 0) || !std::isfinite(B)) fail("B must be > 0");
    if (!(beta > 0) || !std::isfinite(beta)) fail("beta must be > 0");
    if (!(P_max >= 0) || !std::isfinite(P_max)) fail("P_max must be >= 0");
    const std::size_t n = static_cast<std::size_t>(K) + 1;
    if (zeta.size() != n || xi.size() != n || C.size() != n || sigma2.size() != n ||
        g.size() != n || h.size() != n) {
      fail("per-node arrays must have K+1 entries");
    }
    for (std::size_t k = 0; k < n; ++k) {
      const std::string idx = "[" + std::to_string(k) + "]";
      if (!(zeta[k] > 0 && zeta[k] <= 1)) fail("zeta" + idx + " must lie in (0, 1]");
      if (!(xi[k] > 0) || !std::isfinite(xi[k])) fail("xi" + idx + " must be > 0");
      if (!(C[k] > 0) || !std::isfinite(C[k])) fail("C" + idx + " must be > 0");
      if (!(sigma2[k] > 0) || !std::isfinite(sigma2[k])) fail("sigma2" + idx + " must be > 0");
      if (g[k].size() != N) fail("g" + idx + " must have length N");
      if (!g[k].allFinite()) fail("g" + idx + " must be finite");
      if (k > 0 && (!(h[k] > 0) || !std::isfinite(h[k]))) fail("h" + idx + " must be > 0");
    }
  }
};

// Transmit energy covariance of the ET. Re-symmetrized on construction.
class EnergyCovariance {
 public:
  EnergyCovariance() = default;
  explicit EnergyCovariance(cmat q) : q_(std::move(q)) {
    if (q_.rows() != q_.cols()) throw InputError("covariance must be square");
    q_ = (0.5 * (q_ + q_.adjoint())).eval();
  }

  static EnergyCovariance zero(int n) { return EnergyCovariance(cmat::Zero(n, n)); }

  // power * v v^H with v = g / ||g||; zero when g vanishes.
  static EnergyCovariance beam(const cvec& g, double power) {
    const double norm = g.norm();
    if (norm == 0.0) return zero(static_cast<int>(g.size()));
    const cvec v = g / norm;
    return EnergyCovariance(power * v * v.adjoint());
  }

  const cmat& matrix() const { return q_; }
  int dim() const { return static_cast<int>(q_.rows()); }
  double trace() const { return q_.trace().real(); }

  Eigen::VectorXd eigenvalues() const {
    if (q_.size() == 0) return {};
    Eigen::SelfAdjointEigenSolver<cmat> es(q_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  double min_eigenvalue() const {
    const Eigen::VectorXd ev = eigenvalues();
    return ev.size() == 0 ? 0.0 : ev(0);
  }

  // Hermitian, PSD up to -1e-10 * trace and trace within the budget.
  bool admissible(double p_max) const {
    const double tr = trace();
    if (min_eigenvalue() < -1e-10 * std::max(tr, 0.0)) return false;
    return tr <= p_max * (1.0 + 1e-9) + 1e-300;
  }

 private:
  cmat q_;
};

// T * zeta * tr(Q g g^H).
inline double harvested_energy(const EnergyCovariance& Q, const cvec& g, double zeta, double T) {
  if (g.size() != Q.dim()) throw InputError("harvested_energy: dimension mismatch");
  if (!(zeta > 0 && zeta <= 1)) throw InputError("harvested_energy: zeta must lie in (0, 1]");
  const std::complex<double> quad = g.dot(Q.matrix() * g);  // g^H Q g
  const double re = quad.real();
  if (std::abs(quad.imag()) > 1e-10 * std::abs(re) + 1e-15) {
    throw NumericError("harvested_energy: covariance is not Hermitian");
  }
  return T * zeta * re;
}

namespace detail {

inline void require_nonneg(double bits, double t, const char* who) {
  if (!(bits >= 0) || !(t >= 0)) throw InputError(std::string(who) + ": negative input");
}

// t * (2^(bits/(t*B)) - 1) with the perspective limits at t = 0.
inline double rate_perspective(double bits, double t, double B) {
  if (t == 0.0) return bits == 0.0 ? 0.0 : kInf;
  return t * std::expm1(kLn2 * bits / (t * B));
}

}  // namespace detail

// User -> helper offloading energy for one helper.
inline double offload_tx_energy(double bits, double t1, double B, double h, double sigma2) {
  detail::require_nonneg(bits, t1, "offload_tx_energy");
  const double base = detail::rate_perspective(bits, t1, B);
  return base == 0.0 ? 0.0 : base * sigma2 / h;
}

// Helper computing energy with a constant CPU frequency over t2.
inline double helper_compute_energy(double bits, double t2, double xi, double C) {
  detail::require_nonneg(bits, t2, "helper_compute_energy");
  if (bits == 0.0) return 0.0;
  if (t2 == 0.0) return kInf;
  const double cycles = C * bits;
  return xi * cycles * cycles * cycles / (t2 * t2);
}

// Helper -> user result download energy.
inline double helper_tx_energy(double bits, double t3, double beta, double B, double h,
                               double sigma2_user) {
  detail::require_nonneg(bits, t3, "helper_tx_energy");
  const double base = detail::rate_perspective(beta * bits, t3, B);
  return base == 0.0 ? 0.0 : base * sigma2_user / h;
}

// User local computing energy over the whole block.
inline double user_compute_energy(double bits0, double T, double xi0, double C0) {
  detail::require_nonneg(bits0, T, "user_compute_energy");
  return helper_compute_energy(bits0, T, xi0, C0);
}

// Transmit power that carries `bits` over `t` seconds (inverse of the
// Shannon rate); 0 for an idle link.
inline double link_power(double bits, double t, double B, double gain, double noise) {
  if (bits == 0.0) return 0.0;
  if (t == 0.0) return kInf;
  return std::expm1(kLn2 * bits / (t * B)) * noise / gain;
}

struct Solution {
  Eigen::VectorXd ell;                  // bits per node, index 0 = local
  std::vector<std::array<double, 3>> t;  // t[k] for helper k; t[0] unused
  EnergyCovariance Q;
  Eigen::VectorXd q;  // user offload power to helper k (index 0 unused)
  Eigen::VectorXd p;  // helper k result power (index 0 unused)

  double objective() const { return ell.sum(); }

  static Solution zero(const Instance& inst) {
    Solution s;
    s.ell = Eigen::VectorXd::Zero(inst.nodes());
    s.t.assign(inst.nodes(), {0.0, 0.0, 0.0});
    s.Q = EnergyCovariance::zero(inst.N);
    s.q = Eigen::VectorXd::Zero(inst.nodes());
    s.p = Eigen::VectorXd::Zero(inst.nodes());
    return s;
  }

  // Fills q and p by inverting the two Shannon-rate equations.
  void derive_powers(const Instance& inst) {
    q = Eigen::VectorXd::Zero(inst.nodes());
    p = Eigen::VectorXd::Zero(inst.nodes());
    for (int k = 1; k <= inst.K; ++k) {
      q(k) = link_power(ell(k), t[k][0], inst.B, inst.h[k], inst.sigma2[k]);
      p(k) = link_power(inst.beta * ell(k), t[k][2], inst.B, inst.h[k], inst.sigma2[0]);
    }
  }
};

// Energy the user spends: offloading to every helper plus local computing.
inline double user_energy_use(const Instance& inst, const Solution& sol) {
  double e = user_compute_energy(sol.ell(0), inst.T, inst.xi[0], inst.C[0]);
  for (int k = 1; k <= inst.K; ++k) {
    e += offload_tx_energy(sol.ell(k), sol.t[k][0], inst.B, inst.h[k], inst.sigma2[k]);
  }
  return e;
}

inline double helper_energy_use(const Instance& inst, const Solution& sol, int k) {
  return helper_compute_energy(sol.ell(k), sol.t[k][1], inst.xi[k], inst.C[k]) +
         helper_tx_energy(sol.ell(k), sol.t[k][2], inst.beta, inst.B, inst.h[k], inst.sigma2[0]);
}

struct ConstraintSlack {
  std::string name;
  double slack = 0.0;
  double scale = 1.0;
  bool ok = true;
};

struct FeasibilityReport {
  std::vector<ConstraintSlack> constraints;
  bool feasible = true;

  // Largest violation relative to each constraint's scale (0 if feasible).
  double max_violation() const {
    double worst = 0.0;
    for (const auto& c : constraints) worst = std::max(worst, -c.slack / c.scale);
    return worst;
  }

  const ConstraintSlack* find(const std::string& name) const {
    for (const auto& c : constraints) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

// Checks every constraint of the rate maximization problem. A constraint with
// slack s passes iff s >= -tol_rel * scale, scale being its right-hand side
// (or 1 when that is zero).
inline FeasibilityReport check_feasible(const Instance& inst, const Solution& sol,
                                        double tol_rel = 1e-9) {
  if (sol.ell.size() != inst.nodes() || static_cast<int>(sol.t.size()) != inst.nodes() ||
      sol.Q.dim() != inst.N) {
    throw InputError("check_feasible: solution shape does not match the instance");
  }
  FeasibilityReport rep;
  auto add = [&](std::string name, double slack, double rhs) {
    ConstraintSlack c;
    c.name = std::move(name);
    c.slack = std::isnan(slack) ? -kInf : slack;
    c.scale = rhs != 0.0 && std::isfinite(rhs) ? std::abs(rhs) : 1.0;
    c.ok = c.slack >= -tol_rel * c.scale;
    rep.feasible = rep.feasible && c.ok;
    rep.constraints.push_back(std::move(c));
  };
  auto safe = [](auto f) {
    try {
      return f();
    } catch (const InputError&) {
      return kInf;
    }
  };

  const double e0 = harvested_energy(sol.Q, inst.g[0], inst.zeta[0], inst.T);
  add("user_energy", e0 - safe([&] { return user_energy_use(inst, sol); }), e0);
  for (int k = 1; k <= inst.K; ++k) {
    const std::string idx = "[" + std::to_string(k) + "]";
    const double ek = harvested_energy(sol.Q, inst.g[k], inst.zeta[k], inst.T);
    add("helper_energy" + idx, ek - safe([&] { return helper_energy_use(inst, sol, k); }), ek);
    add("time_budget" + idx, inst.T - (sol.t[k][0] + sol.t[k][1] + sol.t[k][2]), inst.T);
    for (int i = 0; i < 3; ++i) {
      const double ti = sol.t[k][i];
      add("slot_bounds" + idx + "[" + std::to_string(i + 1) + "]", std::min(ti, inst.T - ti),
          inst.T);
    }
  }
  for (int k = 0; k <= inst.K; ++k) {
    add("bits_nonneg[" + std::to_string(k) + "]", sol.ell(k), 0.0);
  }
  const double tr = sol.Q.trace();
  add("power_budget", inst.P_max - tr, inst.P_max);
  add("covariance_psd", sol.Q.min_eigenvalue(), std::max(tr, 0.0) * 1e-1);
  return rep;
}

}  // namespace wpmec
