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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "testing.hpp"
#include "wpmec/cli.hpp"

namespace {

using namespace wpmec;
using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("[%s] %d. %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct EndToEnd {
  double worst_kkt = 0;
  int solves = 0;
  void add(const SolveReport& r) {
    worst_kkt = std::max(worst_kkt, r.kkt.max());
    ++solves;
  }
} kkt;

void gap_criterion() {
  double worst_gap = -kInf, worst_time = 0;
  int infeasible = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Instance inst = testing::random_instance(10'000 + seed);
    const SolveReport r = solve_proposed(inst);
    worst_gap = std::max(worst_gap, r.gap);
    worst_time = std::max(worst_time, r.wall_seconds);
    if (!check_feasible(inst, r.solution, 1e-9).feasible) ++infeasible;
    kkt.add(r);
  }
  report(1, worst_gap <= 1e-4 && worst_time <= 5.0 && infeasible == 0,
         "duality gap on 100 instances",
         fmt("max gap %.3g (<= 1e-4), max time %.3g s (<= 5 s), ", worst_gap, worst_time) +
             std::to_string(infeasible) + " infeasible");
}

void oracle_criterion() {
  Instance tmpl = testing::setup_template(2, 1);
  Geometry geom;
  geom.d_et_helper = {5.0};
  geom.d_user_helper = {2.0};
  double worst_dev = 0, worst_time = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Instance inst = sample_channels(geom, tmpl, seed);
    const SolveReport r = solve_proposed(inst);
    kkt.add(r);
    const auto t0 = Clock::now();
    const double oracle = brute_force_small(inst).objective();
    worst_time = std::max(worst_time, seconds_since(t0));
    worst_dev = std::max(worst_dev, std::abs(r.primal_value - oracle) / oracle);
  }
  report(2, worst_dev <= 1e-3 && worst_time <= 60.0, "brute-force agreement on 20 K=1, N=2 instances",
         fmt("max relative deviation %.3g (<= 1e-3), max oracle time %.3g s (<= 60 s)", worst_dev,
             worst_time));
}

struct Figure {
  std::string file;
  SweepConfig sweep;
  SweepResult result;
};

Figure run_figure(const std::string& name) {
  Config cfg = Config::load(std::string(WPMEC_CONFIG_DIR) + "/" + name);
  const Instance base = instance_from_config(cfg);
  const Geometry geom = geometry_from_config(cfg, base.K);
  const SolverOptions opt = solver_from_config(cfg);
  Figure f{name, sweep_from_config(cfg), {}};
  f.result = run_sweep(f.sweep, base, geom, opt);
  return f;
}

double row_mean(const Figure& f, int v, Scheme s) {
  for (const SweepRow& r : f.result.rows) {
    if (r.value == f.sweep.values[v] && r.scheme == s) return r.mean_bits;
  }
  return std::nan("");
}

void ordering_and_trend_criteria() {
  const auto t0 = Clock::now();
  std::vector<Figure> figs = {run_figure("fig3.ini"), run_figure("fig4.ini"), run_figure("fig5.ini")};
  const double minutes = seconds_since(t0) / 60.0;

  // 3. Ordering on every trial.
  long trials = 0, violations = 0, failed = 0;
  double worst = 0;
  for (const Figure& f : figs) {
    const auto& recs = f.result.records;
    const std::size_t ns = f.sweep.schemes.size();
    for (std::size_t i = 0; i < recs.size(); i += ns) {
      double p = std::nan(""), others = 0;
      for (std::size_t s = 0; s < ns; ++s) {
        const TrialRecord& r = recs[i + s];
        if (!r.ok) {
          ++failed;
          continue;
        }
        if (r.scheme == Scheme::kProposed) {
          p = r.objective;
        } else {
          others = std::max(others, r.objective);
        }
      }
      ++trials;
      if (std::isnan(p)) continue;
      const double v = (others - p) / std::max(p, 1.0);
      worst = std::max(worst, v);
      if (v > 1e-6) ++violations;
    }
  }
  report(3, violations == 0 && failed == 0, "scheme ordering on every sweep trial",
         std::to_string(trials) + " trials, " + std::to_string(violations) + " violations, " +
             std::to_string(failed) + " failed solves, worst relative excess " +
             fmt("%.3g (<= 1e-6); sweeps took %.1f min", worst, minutes));

  // 4. Trends.
  std::string detail;
  bool ok = true;
  int min_trials = 1 << 30;
  for (const Figure& f : figs) {
    for (const SweepRow& r : f.result.rows) min_trials = std::min(min_trials, r.trials);
  }
  ok = ok && min_trials >= 200;
  const Figure& f3 = figs[0];
  for (Scheme s : f3.sweep.schemes) {
    bool inc = true;
    for (std::size_t v = 1; v < f3.sweep.values.size(); ++v) {
      inc = inc && row_mean(f3, v, s) > row_mean(f3, v - 1, s);
    }
    ok = ok && inc;
    detail += std::string(to_string(s)) + (inc ? " increasing in T; " : " NOT increasing in T; ");
  }
  const Figure& f4 = figs[1];
  for (Scheme s : {Scheme::kProposed, Scheme::kEqualTime}) {
    bool dec = true;
    for (std::size_t v = 1; v < f4.sweep.values.size(); ++v) {
      dec = dec && row_mean(f4, v, s) < row_mean(f4, v - 1, s);
    }
    ok = ok && dec;
    detail += std::string(to_string(s)) + (dec ? " decreasing in d_et_helper; " : " NOT decreasing in d_et_helper; ");
  }
  const Figure& f5 = figs[2];
  bool noninc = true;
  for (std::size_t v = 1; v < f5.sweep.values.size(); ++v) {
    const double prev = row_mean(f5, v - 1, Scheme::kProposed) - row_mean(f5, v - 1, Scheme::kLocalOnly);
    const double cur = row_mean(f5, v, Scheme::kProposed) - row_mean(f5, v, Scheme::kLocalOnly);
    noninc = noninc && cur <= prev;
  }
  ok = ok && noninc;
  detail += noninc ? "proposed - local_only gap nonincreasing in d_user_helper"
                   : "proposed - local_only gap NOT nonincreasing in d_user_helper";
  report(4, ok, "trends over the three sweeps",
         detail + "; min trials per point " + std::to_string(min_trials) + " (>= 200)");
}

// Golden-section minimizer of a unimodal function on [a, b] of log-space.
template <class F>
double golden_min(F&& f, double a, double b, int steps) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < steps; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

void closed_form_criterion() {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> e(-2.0, 1.0);
  double worst_rate = 0, worst_l0 = 0;
  int points = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const Instance inst = testing::random_instance(50'000 + rep / 10);
    const int k = 1 + rep % inst.K;
    const double U = solve_local_only(inst).objective();
    const double l0 = std::pow(10.0, e(rng)) * U / detail::energy_scale(inst, 0);
    const double lk = std::pow(10.0, e(rng)) * U / detail::energy_scale(inst, k);
    const double mu = std::pow(10.0, e(rng)) * U / inst.T;
    const HelperParams hp = HelperParams::of(inst, k);
    const RateTriple r = optimal_rates(l0, lk, mu, hp);
    const detail::HelperSubproblem sub(l0, lk, mu, hp, inst.T);
    for (int i = 0; i < 3; ++i) {
      // Best time per bit for slot i: minimize the slot cost of one bit.
      const double ls = golden_min([&](double s) { return sub.slot_cost(i, 1.0, std::exp(s)); },
                                   std::log(1e-15), std::log(1e3), 300);
      worst_rate = std::max(worst_rate, std::abs(r[i] * std::exp(ls) - 1.0));
    }
    ++points;

    // l0: exact comparisons f(c) > f(d) <=> (c - d)(1 - q (c^2 + c d + d^2)) > 0.
    const double q = l0 * inst.xi[0] * 1e9 / (inst.T * inst.T);
    double a = 0, b = 1e3 * optimal_local_bits(l0, inst);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 400; ++it) {
      const double c = b - g * (b - a), d = a + g * (b - a);
      if ((c - d) * (1 - q * (c * c + c * d + d * d)) > 0) {
        b = d;
      } else {
        a = c;
      }
    }
    worst_l0 = std::max(worst_l0, std::abs(optimal_local_bits(l0, inst) / (0.5 * (a + b)) - 1.0));
  }
  report(5, worst_rate <= 1e-6 && worst_l0 <= 1e-8, "closed-form rates and local bits",
         std::to_string(points) +
             fmt(" dual points, max rate deviation %.3g (<= 1e-6), max l0 deviation %.3g (<= 1e-8)",
                 worst_rate, worst_l0));
}

void lambert_criterion() {
  const double branch = -1.0 / std::numbers::e;
  double worst = 0;
  const int n = 10000;
  const double lo = std::log(1e-12), hi = std::log(1e6 - branch);
  for (int i = 0; i < n; ++i) {
    const double y = branch + std::exp(lo + (hi - lo) * i / (n - 1));
    const double w = lambert_w0(y);
    worst = std::max(worst, std::abs(w * std::exp(w) - y) / std::max(1.0, std::abs(y)));
  }
  report(6, worst <= 1e-12, "Lambert W residual on 1e4 points",
         fmt("max scaled residual %.3g (<= 1e-12)", worst));
}

void sdp_criterion() {
  double worst_trace = 0, worst_rank = 0, worst_obj = 0, worst_mrt = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Instance inst = testing::random_instance(70'000 + seed, 4, 0);
    const Solution local = solve_local_only(inst);
    const RecoveryResult rec =
        solve_recovery_sdp(inst, std::vector<RateTriple>(1), local.ell(0), local.ell(0));
    const Eigen::VectorXd ev = rec.Q.eigenvalues();
    worst_trace = std::max(worst_trace, std::abs(rec.Q.trace() / inst.P_max - 1.0));
    worst_rank = std::max(worst_rank, ev.head(ev.size() - 1).cwiseAbs().maxCoeff() / inst.P_max);
    worst_mrt = std::max(worst_mrt, (rec.Q.matrix() - EnergyCovariance::beam(inst.g[0], inst.P_max).matrix()).norm() / inst.P_max);
    const SolveReport r = solve_proposed(inst);
    kkt.add(r);
    worst_obj = std::max(worst_obj, std::abs(r.primal_value / local.objective() - 1.0));
  }
  const bool ok = worst_trace <= 1e-8 && worst_rank <= 1e-8 && worst_mrt <= 1e-8 && worst_obj <= 1e-8;
  report(7, ok, "K=0 recovery is MRT",
         fmt("trace error %.3g, trailing eigenvalues %.3g, distance to MRT %.3g", worst_trace,
             worst_rank, worst_mrt) +
             fmt(", objective vs closed form %.3g (all <= 1e-8)", worst_obj));
}

void kkt_criterion() {
  for (int N = 1; N <= 4; ++N) {
    for (int K = 0; K <= 3; ++K) {
      for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        kkt.add(solve_proposed(testing::random_instance(90'000 + 100 * N + 10 * K + seed, N, K)));
      }
    }
  }
  report(8, kkt.worst_kkt <= 1e-6, "KKT residuals of end-to-end solves",
         std::to_string(kkt.solves) + fmt(" solves, max residual %.3g (<= 1e-6)", kkt.worst_kkt));
}

void determinism_criterion() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "wpmec_acceptance";
  fs::create_directories(dir);
  std::ifstream src(std::string(WPMEC_CONFIG_DIR) + "/fig5.ini");
  std::stringstream ss;
  ss << src.rdbuf();
  std::string text = ss.str();
  text.replace(text.find("trials = 200"), 12, "trials = 12");
  const std::string cfg = (dir / "det.ini").string();
  std::ofstream(cfg) << text;
  auto run = [&](const std::string& out, const char* threads) {
    setenv("WPMEC_THREADS", threads, 1);
    std::ostringstream o, e;
    const int code = cmd_sweep(cfg, (dir / out).string(), o, e);
    unsetenv("WPMEC_THREADS");
    std::ifstream f(dir / out);
    std::stringstream s;
    s << f.rdbuf();
    return code == 0 ? s.str() : std::string();
  };
  const std::string a = run("a.csv", "1"), b = run("b.csv", "1"), c = run("c.csv", "3");
  fs::remove_all(dir);
  report(9, !a.empty() && a == b && a == c, "sweep CSV is byte-identical across runs",
         std::to_string(a.size()) + " bytes; rerun " + (a == b ? "identical" : "differs") +
             ", 3 threads " + (a == c ? "identical" : "differs"));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  gap_criterion();
  oracle_criterion();
  ordering_and_trend_criteria();
  closed_form_criterion();
  lambert_criterion();
  sdp_criterion();
  kkt_criterion();
  determinism_criterion();
  std::printf("%d criteria failed, %.1f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
