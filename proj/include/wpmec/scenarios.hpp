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

// Channel sampling for the simulation geometry and Monte Carlo sweeps over
// block length or distance.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "wpmec/baselines.hpp"
#include "wpmec/errors.hpp"
#include "wpmec/model.hpp"
#include "wpmec/solver.hpp"

namespace wpmec {

struct Geometry {
  double d_et_user = 5.0;
  std::vector<double> d_et_helper;    // one per helper
  std::vector<double> d_user_helper;  // one per helper
  double pathloss_ref = 1e-3;
  double exponent = 3.0;

  // Average power gain at distance d.
  double gain(double d) const { return pathloss_ref * std::pow(d, -exponent); }

  void validate(int K) const {
    auto fail = [](const std::string& what) { throw InputError("geometry: " + what); };
    if (!(d_et_user > 0)) fail("d_et_user must be > 0");
    if (static_cast<int>(d_et_helper.size()) != K) fail("d_et_helper needs one entry per helper");
    if (static_cast<int>(d_user_helper.size()) != K) {
      fail("d_user_helper needs one entry per helper");
    }
    for (double d : d_et_helper) {
      if (!(d > 0)) fail("d_et_helper entries must be > 0");
    }
    for (double d : d_user_helper) {
      if (!(d > 0)) fail("d_user_helper entries must be > 0");
    }
    if (!(pathloss_ref > 0 && pathloss_ref <= 1)) fail("pathloss_ref must lie in (0, 1]");
    if (!(exponent > 0)) fail("exponent must be > 0");
  }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent generator for one link, keyed by (seed, link id).
inline std::mt19937_64 link_stream(std::uint64_t seed, std::uint64_t link) {
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(seed)),
                    static_cast<std::uint32_t>(splitmix64(seed) >> 32),
                    static_cast<std::uint32_t>(splitmix64(link ^ 0x5bd1e995ULL)),
                    static_cast<std::uint32_t>(link)};
  return std::mt19937_64(seq);
}

// Unit-variance circularly symmetric complex Gaussian samples.
inline cvec unit_cn(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  cvec v(n);
  for (int i = 0; i < n; ++i) {
    const double re = nd(rng);
    const double im = nd(rng);
    v(i) = {re, im};
  }
  return v;
}

inline constexpr std::uint64_t kEtLink = 0;       // + node index
inline constexpr std::uint64_t kPeerLink = 1000;  // + helper index

}  // namespace detail

// Rayleigh draws for every link of `tmpl` (N, K and node parameters are kept).
// ET -> node k uses link id k, user <-> helper k uses 1000 + k, so the draws
// of a link depend only on the seed and the link.
inline Instance sample_channels(const Geometry& geom, const Instance& tmpl, std::uint64_t seed) {
  geom.validate(tmpl.K);
  Instance inst = tmpl;
  inst.g.assign(inst.nodes(), cvec());
  inst.h.assign(inst.nodes(), 0.0);
  for (int k = 0; k <= inst.K; ++k) {
    auto rng = detail::link_stream(seed, detail::kEtLink + k);
    const double d = k == 0 ? geom.d_et_user : geom.d_et_helper[k - 1];
    inst.g[k] = std::sqrt(geom.gain(d)) * detail::unit_cn(rng, inst.N);
  }
  for (int k = 1; k <= inst.K; ++k) {
    auto rng = detail::link_stream(seed, detail::kPeerLink + k);
    inst.h[k] = geom.gain(geom.d_user_helper[k - 1]) * std::norm(detail::unit_cn(rng, 1)(0));
  }
  return inst;
}

enum class Scheme { kProposed, kEqualTime, kLocalOnly };
enum class SweepVar { kT, kEtHelperDistance, kUserHelperDistance };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::kProposed:
      return "proposed";
    case Scheme::kEqualTime:
      return "equal_time";
    default:
      return "local_only";
  }
}

inline const char* to_string(SweepVar v) {
  switch (v) {
    case SweepVar::kT:
      return "T";
    case SweepVar::kEtHelperDistance:
      return "d_et_helpers";
    default:
      return "d_user_helpers";
  }
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "proposed") return Scheme::kProposed;
  if (s == "equal_time") return Scheme::kEqualTime;
  if (s == "local_only") return Scheme::kLocalOnly;
  throw InputError("unknown scheme '" + s + "'");
}

inline SweepVar parse_sweep_var(const std::string& s) {
  if (s == "T") return SweepVar::kT;
  if (s == "d_et_helpers") return SweepVar::kEtHelperDistance;
  if (s == "d_user_helpers") return SweepVar::kUserHelperDistance;
  throw InputError("unknown sweep variable '" + s + "'");
}

struct SweepConfig {
  SweepVar variable = SweepVar::kT;
  std::vector<double> values;
  int trials = 1;
  std::uint64_t seed = 1;
  std::vector<Scheme> schemes{Scheme::kProposed, Scheme::kEqualTime, Scheme::kLocalOnly};
  int threads = 0;  // 0: WPMEC_THREADS, else the hardware count

  void validate() const {
    auto fail = [](const std::string& what) { throw InputError("sweep: " + what); };
    if (values.empty()) fail("value list is empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0)) fail("values must be > 0");
      if (i > 0 && !(values[i] > values[i - 1])) fail("values must be ascending");
    }
    if (trials < 1) fail("trials must be >= 1");
    if (schemes.empty()) fail("scheme list is empty");
  }
};

// One (value, trial, scheme) solve. Trials share their channel draws across
// sweep values and schemes.
struct TrialRecord {
  int value_index = 0;
  int trial = 0;
  Scheme scheme = Scheme::kProposed;
  std::uint64_t seed = 0;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();  // nan without a dual bound
  bool ok = false;
  std::string error;  // error class when !ok
};

struct SweepRow {
  double value = 0;
  Scheme scheme = Scheme::kProposed;
  int trials = 0;      // successful trials
  double mean_bits = 0;
  double stderr_bits = 0;
  double mean_gap = std::numeric_limits<double>::quiet_NaN();
  int failures = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;        // (value, scheme) order
  std::vector<TrialRecord> records;  // (value, trial, scheme) order
};

inline std::uint64_t trial_seed(std::uint64_t seed, int trial) {
  return detail::splitmix64(seed ^ detail::splitmix64(static_cast<std::uint64_t>(trial) + 1));
}

inline int sweep_threads(int requested) {
  if (const char* env = std::getenv("WPMEC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Instance and geometry for one sweep value.
inline Instance sweep_instance(const SweepConfig& cfg, double value, const Instance& base,
                               Geometry geom, std::uint64_t seed) {
  Instance tmpl = base;
  switch (cfg.variable) {
    case SweepVar::kT:
      tmpl.T = value;
      break;
    case SweepVar::kEtHelperDistance:
      std::fill(geom.d_et_helper.begin(), geom.d_et_helper.end(), value);
      break;
    case SweepVar::kUserHelperDistance:
      std::fill(geom.d_user_helper.begin(), geom.d_user_helper.end(), value);
      break;
  }
  return sample_channels(geom, tmpl, seed);
}

inline TrialRecord run_scheme(Scheme scheme, const Instance& inst, const SolverOptions& opt) {
  TrialRecord rec;
  rec.scheme = scheme;
  try {
    Solution sol;
    switch (scheme) {
      case Scheme::kProposed: {
        const SolveReport r = solve_proposed(inst, opt);
        sol = r.solution;
        rec.gap = r.gap;
        break;
      }
      case Scheme::kEqualTime: {
        const EqualTimeReport r = solve_equal_time_report(inst, opt);
        sol = r.solution;
        rec.gap = duality_gap(sol, r.dual_value);
        break;
      }
      case Scheme::kLocalOnly:
        sol = solve_local_only(inst);
        break;
    }
    if (!check_feasible(inst, sol).feasible) {
      rec.error = "infeasible";
      return rec;
    }
    rec.objective = sol.objective();
    rec.ok = true;
  } catch (const RecoveryError&) {
    rec.error = "recovery";
  } catch (const InfeasibleError&) {
    rec.error = "infeasible_dual";
  } catch (const NumericError&) {
    rec.error = "numeric";
  } catch (const Error&) {
    rec.error = "error";
  }
  return rec;
}

inline SweepResult run_sweep(const SweepConfig& cfg, const Instance& base, const Geometry& geom,
                             const SolverOptions& opt = {}) {
  cfg.validate();
  geom.validate(base.K);
  const int nv = static_cast<int>(cfg.values.size());
  const int ns = static_cast<int>(cfg.schemes.size());
  const long tasks = static_cast<long>(nv) * cfg.trials;

  SweepResult out;
  out.records.resize(static_cast<std::size_t>(tasks * ns));
  std::atomic<long> next{0};
  auto worker = [&]() {
    for (long task = next++; task < tasks; task = next++) {
      const int v = static_cast<int>(task / cfg.trials);
      const int trial = static_cast<int>(task % cfg.trials);
      const std::uint64_t seed = trial_seed(cfg.seed, trial);
      const Instance inst = sweep_instance(cfg, cfg.values[v], base, geom, seed);
      for (int s = 0; s < ns; ++s) {
        TrialRecord rec = run_scheme(cfg.schemes[s], inst, opt);
        rec.value_index = v;
        rec.trial = trial;
        rec.seed = seed;
        out.records[static_cast<std::size_t>(task * ns + s)] = std::move(rec);
      }
    }
  };
  const int nt = static_cast<int>(std::min<long>(sweep_threads(cfg.threads), tasks));
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (int v = 0; v < nv; ++v) {
    for (int s = 0; s < ns; ++s) {
      SweepRow row;
      row.value = cfg.values[v];
      row.scheme = cfg.schemes[s];
      double sum = 0, sum2 = 0, gap_sum = 0;
      int gaps = 0;
      for (int trial = 0; trial < cfg.trials; ++trial) {
        const TrialRecord& r =
            out.records[static_cast<std::size_t>((static_cast<long>(v) * cfg.trials + trial) * ns + s)];
        if (!r.ok) {
          ++row.failures;
          continue;
        }
        ++row.trials;
        sum += r.objective;
        sum2 += r.objective * r.objective;
        if (!std::isnan(r.gap)) {
          gap_sum += r.gap;
          ++gaps;
        }
      }
      if (row.trials > 0) {
        row.mean_bits = sum / row.trials;
        if (row.trials > 1) {
          const double var = std::max(0.0, (sum2 - row.trials * row.mean_bits * row.mean_bits) /
                                               (row.trials - 1));
          row.stderr_bits = std::sqrt(var / row.trials);
        }
      } else {
        row.mean_bits = std::numeric_limits<double>::quiet_NaN();
      }
      if (gaps > 0) row.mean_gap = gap_sum / gaps;
      out.rows.push_back(row);
    }
  }
  return out;
}

}  // namespace wpmec
