/* Copyright 2026 The osrcnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <exception>
#include <filesystem>
#include <iostream>
#include <vector>

#include "options.hpp"
#include "osrcnn/errors.hpp"

namespace {

using namespace osrcnn;
using namespace osrcnn::cli;

int run_guarded(const Command& cmd) {
  try {
    return cmd.run();
  } catch (const InfeasibleSplitError& e) {
    std::cerr << "osrcnn: infeasible split: " << e.what() << "\n";
    return kInfeasibleSplit;
  } catch (const DimensionError& e) {
    std::cerr << "osrcnn: dimension mismatch: " << e.what() << "\n";
    return kDimension;
  } catch (const SchemaError& e) {
    std::cerr << "osrcnn: " << e.what() << "\n";
    return kSchema;
  } catch (const UnreachableRecallError& e) {
    std::cerr << "osrcnn: " << e.what() << "\n";
    return kUnreachableRecall;
  } catch (const TrainingError& e) {
    std::cerr << "osrcnn: training failed: " << e.what() << "\n";
    return kTrainingDiverged;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "osrcnn: " << e.what() << "\n";
    return kSchema;
  } catch (const std::invalid_argument& e) {
    std::cerr << "osrcnn: invalid configuration: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "osrcnn: " << e.what() << "\n";
    return kSchema;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open-set object detection toolkit: splits, synthetic data, prototype training, "
               "inference and evaluation."};
  app.name("osrcnn");
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value configuration file; flags on the command line win");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Globals g;
  OptionSet global_opts(&app);
  global_opts.add("seed", g.seed, "Seed for every random choice in the run");
  global_opts.add("out-dir", g.out_dir, "Directory for output files");
  app.add_option("--workers", g.workers, "Worker threads for per-image work")
      ->capture_default_str()
      ->check(CLI::Range(1u, 256u));

  const std::vector<Command> commands{
      add_synth(app, g, global_opts), add_build_splits(app, g, global_opts),
      add_train(app, g, global_opts), add_infer(app, g, global_opts),
      add_eval(app, g, global_opts),  add_selftest(app, g, global_opts)};
  for (const auto& c : commands) c.app->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  for (const auto& c : commands) {
    if (c.app->parsed()) return run_guarded(c);
  }
  return kUsage;
}
