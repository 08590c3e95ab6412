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
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "osrcnn/io.hpp"

namespace osrcnn::cli {

// Process exit codes. Anything nonzero is an error.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInfeasibleSplit = 2,
  kSchema = 3,
  kDimension = 4,
  kUnreachableRecall = 5,
  kTrainingDiverged = 6,
  kSelftestFailed = 7,
};

std::string to_text(double v);
std::string to_text(const std::vector<double>& v);

/// Registers options on a CLI11 app and remembers how to print their final
/// values, so every artifact can carry the effective configuration.
class OptionSet {
 public:
  explicit OptionSet(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help) {
    entries_.emplace_back(name, [&var] { return stringify(var); });
    return app_->add_option("--" + name, var, help)->capture_default_str();
  }

  /// Records a value that is not a command-line option.
  void note(const std::string& name, std::function<std::string()> value) {
    entries_.emplace_back(name, std::move(value));
  }

  ConfigEcho echo() const;
  CLI::App* app() const { return app_; }

 private:
  template <class T>
  static std::string stringify(const T& v) {
    if constexpr (std::is_same_v<T, std::string>) {
      return v;
    } else if constexpr (std::is_same_v<T, bool>) {
      return v ? "true" : "false";
    } else if constexpr (std::is_floating_point_v<T>) {
      return to_text(static_cast<double>(v));
    } else if constexpr (std::is_integral_v<T>) {
      return std::to_string(v);
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      return to_text(v);
    } else {
      std::string out;
      for (const auto& x : v) out += (out.empty() ? "" : ",") + std::to_string(x);
      return out;
    }
  }

  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<std::string()>>> entries_;
};

struct Globals {
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string out_dir = ".";
};

struct Command {
  CLI::App* app = nullptr;
  std::function<int()> run;
};

// Each factory registers a subcommand and its options on `root`. The
// returned runner reads the parsed values, so it must run after parsing.
Command add_synth(CLI::App& root, const Globals& g, const OptionSet& global_opts);
Command add_build_splits(CLI::App& root, const Globals& g, const OptionSet& global_opts);
Command add_train(CLI::App& root, const Globals& g, const OptionSet& global_opts);
Command add_infer(CLI::App& root, const Globals& g, const OptionSet& global_opts);
Command add_eval(CLI::App& root, const Globals& g, const OptionSet& global_opts);
Command add_selftest(CLI::App& root, const Globals& g, const OptionSet& global_opts);

/// Concatenates the global and command echoes, prefixed by the command name.
ConfigEcho full_echo(const std::string& command, const OptionSet& global_opts,
                     const OptionSet& local);

/// Creates the output directory and returns it.
std::filesystem::path prepare_out_dir(const Globals& g);

}  // namespace osrcnn::cli
