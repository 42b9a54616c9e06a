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

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "wpmec/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Energy beamforming and cooperative offloading solver"};
  app.require_subcommand(1);

  std::string config, output;
  auto* solve = app.add_subcommand("solve", "solve one instance and write a JSON report");
  solve->add_option("config", config, "configuration file")->required();
  solve->add_option("-o,--output", output, "report path")->required();

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep, written as CSV");
  sweep->add_option("config", config, "configuration file")->required();
  sweep->add_option("-o,--output", output, "CSV path")->required();

  auto* verify = app.add_subcommand("verify", "compare against brute force on K = 1");
  verify->add_option("config", config, "configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : wpmec::kExitConfig;
  }
  if (*solve) return wpmec::cmd_solve(config, output, std::cout, std::cerr);
  if (*sweep) return wpmec::cmd_sweep(config, output, std::cout, std::cerr);
  return wpmec::cmd_verify(config, std::cout, std::cerr);
}
