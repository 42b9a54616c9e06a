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

// Line-based configuration files:
//
//   [section]
//   key = value          # comment
//   list = 1, 2, 3
//
// plus the translation of the sections into instances, geometries, solver
// options and sweeps. Every value that is read, defaulted or not, is kept in
// the order of first use so that outputs can echo the full parameter set.

#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wpmec/dual_search.hpp"
#include "wpmec/errors.hpp"
#include "wpmec/model.hpp"
#include "wpmec/scenarios.hpp"

namespace wpmec {

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Config {
 public:
  static Config parse(std::istream& in) {
    Config cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const std::string where = "line " + std::to_string(lineno);
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) throw ConfigError(where + ": empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
      if (section.empty()) throw ConfigError(where + ": key outside of any [section]");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError(where + ": empty key");
      auto& sec = cfg.values_[section];
      if (sec.count(key)) throw ConfigError(where + ": duplicate key [" + section + "] " + key);
      sec[key] = trim(line.substr(eq + 1));
    }
    return cfg;
  }

  static Config load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    return parse(f);
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto s = values_.find(section);
    return s != values_.end() && s->second.count(key) > 0;
  }

  std::string require(const std::string& section, const std::string& key) {
    if (!has(section, key)) {
      throw ConfigError("missing required key '" + key + "' in [" + section + "]");
    }
    return record(section, key, values_.at(section).at(key));
  }

  std::string get(const std::string& section, const std::string& key, const std::string& def) {
    return record(section, key, has(section, key) ? values_.at(section).at(key) : def);
  }

  double get_double(const std::string& section, const std::string& key, double def) {
    return to_double(section, key, get(section, key, format_double(def)));
  }
  double require_double(const std::string& section, const std::string& key) {
    return to_double(section, key, require(section, key));
  }
  long get_int(const std::string& section, const std::string& key, long def) {
    return to_int(section, key, get(section, key, std::to_string(def)));
  }
  long require_int(const std::string& section, const std::string& key) {
    return to_int(section, key, require(section, key));
  }

  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& def) {
    std::string joined;
    for (std::size_t i = 0; i < def.size(); ++i) joined += (i ? ", " : "") + format_double(def[i]);
    return to_list(section, key, get(section, key, joined));
  }
  std::vector<double> require_list(const std::string& section, const std::string& key) {
    return to_list(section, key, require(section, key));
  }

  std::vector<std::string> get_words(const std::string& section, const std::string& key,
                                     const std::string& def) {
    std::vector<std::string> out;
    for (const auto& w : split(get(section, key, def))) {
      if (!w.empty()) out.push_back(w);
    }
    return out;
  }

  // Per-node parameter: a single value for every node or one per node.
  std::vector<double> get_per_node(const std::string& section, const std::string& key,
                                   double def, int nodes) {
    std::vector<double> v = get_list(section, key, {def});
    if (v.size() == 1) v.assign(static_cast<std::size_t>(nodes), v[0]);
    if (static_cast<int>(v.size()) != nodes) {
      throw ConfigError("[" + section + "] " + key + ": expected 1 or " + std::to_string(nodes) +
                        " values");
    }
    return v;
  }

  // (section.key, value) for every key read so far.
  const std::vector<std::pair<std::string, std::string>>& used() const { return used_; }

  // Keys present in the file but never read (typos, unsupported options).
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [sec, kv] : values_) {
      for (const auto& [k, v] : kv) {
        const std::string name = sec + "." + k;
        bool seen = false;
        for (const auto& u : used_) seen = seen || u.first == name;
        if (!seen) out.push_back(name);
      }
    }
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    if (!s.empty() && s.back() == ',') out.push_back("");
    return out;
  }

  std::string record(const std::string& section, const std::string& key, const std::string& v) {
    const std::string name = section + "." + key;
    for (const auto& u : used_) {
      if (u.first == name) return v;
    }
    used_.emplace_back(name, v);
    return v;
  }

  static double to_double(const std::string& section, const std::string& key,
                          const std::string& text) {
    if (text == "nan") throw ConfigError("[" + section + "] " + key + ": nan is not allowed");
    double v = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
      throw ConfigError("[" + section + "] " + key + ": '" + text + "' is not a number");
    }
    return v;
  }

  static long to_int(const std::string& section, const std::string& key, const std::string& text) {
    long v = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
      throw ConfigError("[" + section + "] " + key + ": '" + text + "' is not an integer");
    }
    return v;
  }

  static std::vector<double> to_list(const std::string& section, const std::string& key,
                                     const std::string& text) {
    std::vector<double> out;
    if (text.empty()) return out;
    for (const auto& item : split(text)) {
      if (item.empty()) throw ConfigError("[" + section + "] " + key + ": empty list entry");
      out.push_back(to_double(section, key, item));
    }
    return out;
  }

  std::map<std::string, std::map<std::string, std::string>> values_;
  std::vector<std::pair<std::string, std::string>> used_;
};

// [instance]: N, K and T are required; node parameters default to the
// simulation setup. Channels are drawn from [geometry] with `seed` unless
// `channels = explicit`, in which case g<k>.re, g<k>.im (N values each) and
// h<k> are read directly.
inline Instance instance_from_config(Config& cfg) {
  Instance inst;
  inst.N = static_cast<int>(cfg.require_int("instance", "N"));
  inst.K = static_cast<int>(cfg.require_int("instance", "K"));
  if (inst.N < 1) throw ConfigError("[instance] N must be >= 1");
  if (inst.K < 0) throw ConfigError("[instance] K must be >= 0");
  inst.T = cfg.require_double("instance", "T");
  inst.B = cfg.get_double("instance", "B", 1e6);
  inst.beta = cfg.get_double("instance", "beta", 1.0);
  inst.P_max = cfg.get_double("instance", "P_max", 3.0);
  const int nodes = inst.nodes();
  inst.zeta = cfg.get_per_node("instance", "zeta", 0.6, nodes);
  inst.xi = cfg.get_per_node("instance", "xi", 1e-28, nodes);
  inst.C = cfg.get_per_node("instance", "C", 1e3, nodes);
  inst.sigma2 = cfg.get_per_node("instance", "sigma2", 1e-9, nodes);
  inst.g.assign(static_cast<std::size_t>(nodes), cvec::Zero(inst.N));
  inst.h.assign(static_cast<std::size_t>(nodes), 0.0);
  return inst;
}

inline Geometry geometry_from_config(Config& cfg, int K) {
  Geometry g;
  g.d_et_user = cfg.get_double("geometry", "d_et_user", 5.0);
  std::vector<double> uh = {2.0, 3.0, 5.0};
  uh.resize(static_cast<std::size_t>(K), 5.0);
  g.d_et_helper = cfg.get_list("geometry", "d_et_helper", std::vector<double>(K, 5.0));
  g.d_user_helper = cfg.get_list("geometry", "d_user_helper", uh);
  g.pathloss_ref = cfg.get_double("geometry", "pathloss_ref", 1e-3);
  g.exponent = cfg.get_double("geometry", "exponent", 3.0);
  try {
    g.validate(K);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  return g;
}

inline void channels_from_config(Config& cfg, Instance& inst) {
  const std::string mode = cfg.get("instance", "channels", "random");
  if (mode == "random") {
    const Geometry geom = geometry_from_config(cfg, inst.K);
    const auto seed = static_cast<std::uint64_t>(cfg.get_int("instance", "seed", 1));
    inst = sample_channels(geom, inst, seed);
    return;
  }
  if (mode != "explicit") throw ConfigError("[instance] channels must be random or explicit");
  for (int k = 0; k <= inst.K; ++k) {
    const std::string p = "g" + std::to_string(k);
    const std::vector<double> re = cfg.require_list("instance", p + ".re");
    const std::vector<double> im =
        cfg.get_list("instance", p + ".im", std::vector<double>(re.size(), 0.0));
    if (static_cast<int>(re.size()) != inst.N || static_cast<int>(im.size()) != inst.N) {
      throw ConfigError("[instance] " + p + ".re/.im need N values");
    }
    for (int i = 0; i < inst.N; ++i) inst.g[k](i) = {re[i], im[i]};
    if (k > 0) inst.h[k] = cfg.require_double("instance", "h" + std::to_string(k));
  }
}

inline SolverOptions solver_from_config(Config& cfg) {
  SolverOptions o;
  o.lambda_min = cfg.get_double("solver", "lambda_min", o.lambda_min);
  o.ellipsoid.vol_tol = cfg.get_double("solver", "vol_tol", o.ellipsoid.vol_tol);
  o.ellipsoid.max_iter = cfg.get_int("solver", "max_iter", o.ellipsoid.max_iter);
  o.ellipsoid.gap_rel = cfg.get_double("solver", "gap_rel", o.ellipsoid.gap_rel);
  o.barrier.gap_tol = cfg.get_double("solver", "barrier_gap_tol", o.barrier.gap_tol);
  if (!(o.lambda_min >= 0)) throw ConfigError("[solver] lambda_min must be >= 0");
  if (!(o.ellipsoid.vol_tol > 0 && o.ellipsoid.vol_tol < 1)) {
    throw ConfigError("[solver] vol_tol must lie in (0, 1)");
  }
  if (o.ellipsoid.max_iter < 0) throw ConfigError("[solver] max_iter must be >= 0");
  if (!(o.barrier.gap_tol > 0)) throw ConfigError("[solver] barrier_gap_tol must be > 0");
  return o;
}

inline std::vector<Scheme> schemes_from_config(Config& cfg, const std::string& section) {
  std::vector<Scheme> out;
  for (const auto& w : cfg.get_words(section, "schemes", "proposed, equal_time, local_only")) {
    try {
      out.push_back(parse_scheme(w));
    } catch (const InputError& e) {
      throw ConfigError("[" + section + "] schemes: " + e.what());
    }
  }
  if (out.empty()) throw ConfigError("[" + section + "] schemes is empty");
  return out;
}

inline SweepConfig sweep_from_config(Config& cfg) {
  SweepConfig s;
  try {
    s.variable = parse_sweep_var(cfg.require("sweep", "variable"));
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    throw ConfigError(std::string("[sweep] ") + e.what());
  }
  s.values = cfg.require_list("sweep", "values");
  s.trials = static_cast<int>(cfg.get_int("sweep", "trials", 100));
  s.seed = static_cast<std::uint64_t>(cfg.get_int("sweep", "seed", 1));
  s.schemes = schemes_from_config(cfg, "sweep");
  s.threads = static_cast<int>(cfg.get_int("sweep", "threads", 0));
  try {
    s.validate();
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  return s;
}

}  // namespace wpmec
