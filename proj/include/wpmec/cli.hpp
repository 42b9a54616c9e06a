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

// The three command-line operations. Each returns a process exit code:
// 0 on success, 2 for configuration problems, 3 for solver failures (and
// failed verifications).

#pragma once

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "wpmec/baselines.hpp"
#include "wpmec/config.hpp"
#include "wpmec/errors.hpp"
#include "wpmec/model.hpp"
#include "wpmec/oracle.hpp"
#include "wpmec/scenarios.hpp"
#include "wpmec/solver.hpp"

namespace wpmec {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

namespace detail {

// Runs `body`, mapping exceptions to exit codes with a diagnostic on `err`.
template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const InputError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const nlohmann::json::exception& e) {
    err << "report error: " << e.what() << "\n";
    return kExitSolver;
  }
}

inline void warn_unused(const Config& cfg, std::ostream& err) {
  for (const auto& k : cfg.unused()) err << "warning: unused config key " << k << "\n";
}

inline nlohmann::json solution_json(const Instance& inst, const Solution& s) {
  nlohmann::json j;
  j["objective_bits"] = s.objective();
  j["ell"] = std::vector<double>(s.ell.data(), s.ell.data() + s.ell.size());
  nlohmann::json t = nlohmann::json::array();
  for (int k = 1; k <= inst.K; ++k) t.push_back({s.t[k][0], s.t[k][1], s.t[k][2]});
  j["t"] = t;
  j["trace_Q"] = s.Q.trace();
  const Eigen::VectorXd ev = s.Q.eigenvalues();
  j["Q_eigenvalues"] = std::vector<double>(ev.data(), ev.data() + ev.size());
  j["feasible"] = check_feasible(inst, s).feasible;
  return j;
}

inline nlohmann::json kkt_json(const KktReport& k) {
  return {{"primal", k.primal},
          {"dual", k.dual},
          {"complementary", k.complementary},
          {"stationarity", k.stationarity}};
}

}  // namespace detail

// Solves one instance and writes a JSON report to `report_path`.
inline int cmd_solve(const std::string& config_path, const std::string& report_path,
                     std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&]() {
    Config cfg = Config::load(config_path);
    Instance inst = instance_from_config(cfg);
    channels_from_config(cfg, inst);
    inst.validate();
    const SolverOptions opt = solver_from_config(cfg);
    const std::vector<Scheme> schemes = schemes_from_config(cfg, "solve");
    detail::warn_unused(cfg, err);

    nlohmann::json report;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : cfg.used()) params[k] = v;
    report["parameters"] = params;
    nlohmann::json res = nlohmann::json::object();
    for (Scheme s : schemes) {
      const auto start = std::chrono::steady_clock::now();
      nlohmann::json j;
      switch (s) {
        case Scheme::kProposed: {
          const SolveReport r = solve_proposed(inst, opt);
          j = detail::solution_json(inst, r.solution);
          j["dual_value"] = r.dual_value;
          j["duality_gap"] = r.gap;
          j["iterations"] = r.iterations;
          j["stop"] = r.stop;
          j["ell0_adjusted"] = r.ell0_adjusted;
          j["kkt"] = detail::kkt_json(r.kkt);
          out << "proposed: " << format_double(r.primal_value) << " bits, gap "
              << format_double(r.gap) << ", kkt " << format_double(r.kkt.max()) << "\n";
          break;
        }
        case Scheme::kEqualTime: {
          const EqualTimeReport r = solve_equal_time_report(inst, opt);
          j = detail::solution_json(inst, r.solution);
          j["dual_value"] = r.dual_value;
          j["duality_gap"] = duality_gap(r.solution, r.dual_value);
          j["iterations"] = r.iterations;
          j["stop"] = r.stop;
          out << "equal_time: " << format_double(r.solution.objective()) << " bits\n";
          break;
        }
        case Scheme::kLocalOnly: {
          const Solution sol = solve_local_only(inst);
          j = detail::solution_json(inst, sol);
          out << "local_only: " << format_double(sol.objective()) << " bits\n";
          break;
        }
      }
      j["wall_seconds"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      res[to_string(s)] = j;
    }
    report["schemes"] = res;
    std::ofstream f(report_path);
    if (!f) throw ConfigError("cannot write report '" + report_path + "'");
    f << report.dump(2) << "\n";
    return kExitOk;
  });
}

// Writes the sweep table as CSV; '#' lines echo every parameter.
inline void write_sweep_csv(std::ostream& os, const Config& cfg, const SweepConfig& sweep,
                            const SweepResult& res) {
  os << "# wpmec sweep\n";
  for (const auto& [k, v] : cfg.used()) os << "# " << k << " = " << v << "\n";
  os << "sweep_var,sweep_value,scheme,trials,mean_bits,stderr_bits,mean_gap,failures\n";
  for (const SweepRow& r : res.rows) {
    os << to_string(sweep.variable) << ',' << format_double(r.value) << ',' << to_string(r.scheme)
       << ',' << r.trials << ',' << format_double(r.mean_bits) << ','
       << format_double(r.stderr_bits) << ',' << format_double(r.mean_gap) << ',' << r.failures
       << '\n';
  }
}

inline int cmd_sweep(const std::string& config_path, const std::string& csv_path,
                     std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&]() {
    Config cfg = Config::load(config_path);
    Instance base = instance_from_config(cfg);
    const Geometry geom = geometry_from_config(cfg, base.K);
    const SolverOptions opt = solver_from_config(cfg);
    const SweepConfig sweep = sweep_from_config(cfg);
    detail::warn_unused(cfg, err);
    // Validate the template with placeholder channels before the long run.
    sample_channels(geom, base, 0).validate();

    const SweepResult res = run_sweep(sweep, base, geom, opt);
    std::ofstream f(csv_path);
    if (!f) throw ConfigError("cannot write CSV '" + csv_path + "'");
    write_sweep_csv(f, cfg, sweep, res);
    int failures = 0;
    for (const auto& r : res.rows) failures += r.failures;
    out << "sweep: " << res.rows.size() << " rows, " << failures << " failed solves\n";
    return kExitOk;
  });
}

// Solver against brute force on one-helper instances, plus the scheme
// ordering and optimality certificates on each.
inline int cmd_verify(const std::string& config_path, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&]() {
    Config cfg = Config::load(config_path);
    const long seeds = cfg.get_int("verify", "seeds", 20);
    if (seeds < 1) throw ConfigError("[verify] seeds must be >= 1");
    const auto first = static_cast<std::uint64_t>(cfg.get_int("verify", "first_seed", 1));
    const double tol = cfg.get_double("verify", "tolerance", 1e-3);
    const double gap_tol = cfg.get_double("verify", "gap_tolerance", 1e-4);
    const double kkt_tol = cfg.get_double("verify", "kkt_tolerance", 1e-6);
    BruteForceOptions bf;
    bf.time_grid = static_cast<int>(cfg.get_int("verify", "time_grid", bf.time_grid));
    bf.bits_grid = static_cast<int>(cfg.get_int("verify", "bits_grid", bf.bits_grid));
    if (bf.time_grid < 2 || bf.bits_grid < 2) throw ConfigError("[verify] grids must be >= 2");

    Instance tmpl = instance_from_config(cfg);
    if (tmpl.K != 1 || tmpl.N > 2) throw ConfigError("[verify] needs K = 1 and N <= 2");
    const Geometry geom = geometry_from_config(cfg, tmpl.K);
    const SolverOptions opt = solver_from_config(cfg);
    detail::warn_unused(cfg, err);

    double worst_dev = 0, worst_gap = 0, worst_kkt = 0, worst_order = 0;
    bool all_ok = true;
    for (long i = 0; i < seeds; ++i) {
      const std::uint64_t seed = first + static_cast<std::uint64_t>(i);
      const Instance inst = sample_channels(geom, tmpl, seed);
      const SolveReport r = solve_proposed(inst, opt);
      const Solution oracle = brute_force_small(inst, bf);
      const double ref = std::max(oracle.objective(), 1.0);
      const double dev = std::abs(r.primal_value - oracle.objective()) / ref;
      const double et = solve_equal_time(inst, opt).objective();
      const double lo = solve_local_only(inst).objective();
      const double order =
          std::max(0.0, std::max(et, lo) - r.primal_value) / std::max(r.primal_value, 1.0);
      const bool ok = dev <= tol && r.gap <= gap_tol && r.kkt.max() <= kkt_tol &&
                      order <= 1e-6 && check_feasible(inst, r.solution).feasible;
      all_ok = all_ok && ok;
      worst_dev = std::max(worst_dev, dev);
      worst_gap = std::max(worst_gap, r.gap);
      worst_kkt = std::max(worst_kkt, r.kkt.max());
      worst_order = std::max(worst_order, order);
      out << "seed " << seed << ": solver " << format_double(r.primal_value) << " oracle "
          << format_double(oracle.objective()) << " dev " << format_double(dev) << " gap "
          << format_double(r.gap) << " kkt " << format_double(r.kkt.max()) << (ok ? "" : "  FAIL")
          << "\n";
    }
    out << "max deviation " << format_double(worst_dev) << ", max gap " << format_double(worst_gap)
        << ", max kkt " << format_double(worst_kkt) << ", max ordering violation "
        << format_double(worst_order) << "\n";
    out << (all_ok ? "verify: PASS" : "verify: FAIL") << "\n";
    return all_ok ? kExitOk : kExitSolver;
  });
}

}  // namespace wpmec
