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

// Logarithmic-barrier interior-point method for small programs with one
// Hermitian PSD block and scalar inequality constraints:
//
//   maximize    c . x
//   subject to  a_i . x + kappa_i x[j_i]^3 <= b_i     (kappa_i >= 0)
//               Y(x) >= 0 (PSD)
//
// where the first m*m entries of x parametrize the Hermitian m x m block Y:
// x[0..m) is the diagonal, followed by (re, im) pairs of the strict upper
// triangle in row-major order. The cubic term is convex on x[j] >= 0, which
// callers must also impose.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <complex>
#include <string>
#include <vector>

#include "wpmec/errors.hpp"
#include "wpmec/model.hpp"

namespace wpmec {

struct BarrierConstraint {
  Eigen::VectorXd a;
  double b = 0;
  int cubic_index = -1;
  double cubic_coeff = 0;

  double value(const Eigen::VectorXd& x) const {
    double v = a.dot(x);
    if (cubic_index >= 0) v += cubic_coeff * x(cubic_index) * x(cubic_index) * x(cubic_index);
    return v;
  }
};

struct BarrierProgram {
  int m = 1;
  Eigen::VectorXd objective;
  std::vector<BarrierConstraint> constraints;

  int block_size() const { return m * m; }
  int size() const { return static_cast<int>(objective.size()); }
};

struct BarrierOptions {
  double t0 = 1.0;
  double growth = 10.0;     // barrier multiplier per outer stage
  double gap_tol = 1e-10;   // stop at (#constraints + m) / t <= gap_tol
  double alpha = 0.25;      // Armijo fraction
  double beta = 0.5;        // backtracking factor
  int max_newton = 100;     // per outer stage
  double newton_tol = 1e-20;  // stop centering at lambda^2 <= newton_tol
};

struct BarrierResult {
  Eigen::VectorXd x;
  double objective = 0;
  double duality_measure = 0;
  double kkt_residual = 0;  // Newton decrement at the last centering step
  int newton_steps = 0;
  int outer_stages = 0;
  double t = 0;                 // final barrier weight
  Eigen::VectorXd multipliers;  // 1 / (t * slack_i), one per scalar constraint
};

// Coefficient vector w over the block parameters with w . x = u^H Y(x) u.
inline Eigen::VectorXd hermitian_quadratic_coeffs(const cvec& u) {
  const int m = static_cast<int>(u.size());
  Eigen::VectorXd w(m * m);
  int pos = 0;
  for (int i = 0; i < m; ++i) w(pos++) = std::norm(u(i));
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const std::complex<double> z = std::conj(u(i)) * u(j);
      w(pos++) = 2.0 * z.real();
      w(pos++) = -2.0 * z.imag();
    }
  }
  return w;
}

inline Eigen::VectorXd hermitian_trace_coeffs(int m) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m * m);
  w.head(m).setOnes();
  return w;
}

inline cmat hermitian_from_params(const Eigen::VectorXd& x, int m) {
  cmat Y = cmat::Zero(m, m);
  int pos = 0;
  for (int i = 0; i < m; ++i) Y(i, i) = x(pos++);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const std::complex<double> z(x(pos), x(pos + 1));
      pos += 2;
      Y(i, j) = z;
      Y(j, i) = std::conj(z);
    }
  }
  return Y;
}

inline Eigen::VectorXd hermitian_to_params(const cmat& Y) {
  const int m = static_cast<int>(Y.rows());
  Eigen::VectorXd x(m * m);
  int pos = 0;
  for (int i = 0; i < m; ++i) x(pos++) = Y(i, i).real();
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      x(pos++) = Y(i, j).real();
      x(pos++) = Y(i, j).imag();
    }
  }
  return x;
}

namespace detail {

class BarrierSolver {
 public:
  BarrierSolver(const BarrierProgram& prog, const BarrierOptions& opt)
      : prog_(prog), opt_(opt), m_(prog.m), nb_(prog.m * prog.m) {
    basis_.reserve(nb_);
    for (int a = 0; a < nb_; ++a) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(nb_);
      e(a) = 1.0;
      basis_.push_back(hermitian_from_params(e, m_));
    }
  }

  bool in_domain(const Eigen::VectorXd& x) const {
    if (!x.allFinite()) return false;
    for (const auto& c : prog_.constraints) {
      if (!(c.b - c.value(x) > 0)) return false;
    }
    Eigen::LLT<cmat> llt(hermitian_from_params(x.head(nb_), m_));
    return llt.info() == Eigen::Success;
  }

  double merit(const Eigen::VectorXd& x, double t) const {
    double f = -t * prog_.objective.dot(x);
    for (const auto& c : prog_.constraints) f -= std::log(c.b - c.value(x));
    Eigen::LLT<cmat> llt(hermitian_from_params(x.head(nb_), m_));
    const cmat& L = llt.matrixLLT();
    double logdet = 0;
    for (int i = 0; i < m_; ++i) logdet += 2.0 * std::log(L(i, i).real());
    return f - logdet;
  }

  void derivatives(const Eigen::VectorXd& x, double t, Eigen::VectorXd& grad,
                   Eigen::MatrixXd& hess) const {
    const int n = prog_.size();
    grad = -t * prog_.objective;
    hess = Eigen::MatrixXd::Zero(n, n);
    for (const auto& c : prog_.constraints) {
      const double s = c.b - c.value(x);
      Eigen::VectorXd dc = c.a;
      if (c.cubic_index >= 0) {
        const double xj = x(c.cubic_index);
        dc(c.cubic_index) += 3.0 * c.cubic_coeff * xj * xj;
        hess(c.cubic_index, c.cubic_index) += 6.0 * c.cubic_coeff * xj / s;
      }
      grad += dc / s;
      hess.noalias() += dc * dc.transpose() / (s * s);
    }
    const cmat Y = hermitian_from_params(x.head(nb_), m_);
    const cmat W = Y.llt().solve(cmat::Identity(m_, m_));
    std::vector<cmat> WE(nb_);
    for (int a = 0; a < nb_; ++a) {
      WE[a] = W * basis_[a];
      grad(a) -= WE[a].trace().real();
    }
    for (int a = 0; a < nb_; ++a) {
      for (int b = a; b < nb_; ++b) {
        const double v = (WE[a].cwiseProduct(WE[b].transpose())).sum().real();
        hess(a, b) += v;
        if (b != a) hess(b, a) += v;
      }
    }
  }

  BarrierResult run(Eigen::VectorXd x) {
    if (!in_domain(x)) throw RecoveryError("barrier: initial point is not strictly feasible");
    BarrierResult res;
    const double count = static_cast<double>(prog_.constraints.size()) + m_;
    double t = opt_.t0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    for (;;) {
      ++res.outer_stages;
      double decrement = 0;
      double best = std::numeric_limits<double>::infinity();
      int stalled = 0;
      for (int it = 0; it < opt_.max_newton; ++it) {
        derivatives(x, t, grad, hess);
        // Symmetric diagonal scaling: the slacks span many decades near the
        // end, and most of the Hessian's ill-conditioning is in its diagonal.
        const Eigen::VectorXd d = hess.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
        const Eigen::MatrixXd scaled = d.asDiagonal() * hess * d.asDiagonal();
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(scaled);
        const Eigen::VectorXd step = d.cwiseProduct(ldlt.solve(-d.cwiseProduct(grad)));
        if (!step.allFinite()) throw NumericError("barrier: singular Newton system");
        const double lambda2 = -grad.dot(step);
        decrement = std::sqrt(std::max(lambda2, 0.0));
        ++res.newton_steps;
        if (lambda2 <= opt_.newton_tol) break;
        // Rounding sets a floor on the decrement once t is large; Newton
        // only wanders around it from there on.
        if (decrement < 0.5 * best) {
          best = decrement;
          stalled = 0;
        } else if (decrement < 1e-3 && ++stalled >= 4) {
          break;
        }
        // Inside the quadratic region of the self-concordant merit a full
        // step stays feasible and needs no line search, whose merit
        // differences drown in rounding once t is large.
        double s = 1.0;
        if (decrement < 0.25 && in_domain(x + step)) {
          x += step;
          continue;
        }
        while (!in_domain(x + s * step)) {
          s *= opt_.beta;
          if (s < 1e-30) throw NumericError("barrier: line search left the domain");
        }
        const double f0 = merit(x, t);
        const double slope = grad.dot(step);
        while (merit(x + s * step, t) > f0 + opt_.alpha * s * slope) {
          s *= opt_.beta;
          if (s < 1e-20) break;
        }
        if (s < 1e-20) break;  // no further decrease at working precision
        x += s * step;
      }
      res.kkt_residual = decrement;
      if (count / t <= opt_.gap_tol) break;
      t *= opt_.growth;
      if (res.outer_stages > 200) throw NumericError("barrier: outer loop did not terminate");
    }
    res.x = x;
    res.objective = prog_.objective.dot(x);
    res.duality_measure = count / t;
    res.t = t;
    res.multipliers.resize(static_cast<Eigen::Index>(prog_.constraints.size()));
    for (std::size_t i = 0; i < prog_.constraints.size(); ++i) {
      const auto& c = prog_.constraints[i];
      res.multipliers(static_cast<Eigen::Index>(i)) = 1.0 / (t * (c.b - c.value(x)));
    }
    return res;
  }

 private:
  const BarrierProgram& prog_;
  BarrierOptions opt_;
  int m_;
  int nb_;
  std::vector<cmat> basis_;
};

}  // namespace detail

inline BarrierResult barrier_maximize(const BarrierProgram& prog, const Eigen::VectorXd& x0,
                                      const BarrierOptions& opt = {}) {
  if (x0.size() != prog.size() || prog.size() < prog.block_size()) {
    throw InputError("barrier_maximize: size mismatch");
  }
  for (const auto& c : prog.constraints) {
    if (c.a.size() != prog.size()) throw InputError("barrier_maximize: constraint size mismatch");
  }
  return detail::BarrierSolver(prog, opt).run(x0);
}

}  // namespace wpmec
