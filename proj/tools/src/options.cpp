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
#include "options.hpp"

#include <charconv>
#include <filesystem>

#include "osrcnn/errors.hpp"

namespace osrcnn::cli {

std::string to_text(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string to_text(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : ",") + to_text(x);
  return out;
}

ConfigEcho OptionSet::echo() const {
  ConfigEcho out;
  for (const auto& [name, value] : entries_) out.emplace_back(name, value());
  return out;
}

ConfigEcho full_echo(const std::string& command, const OptionSet& global_opts,
                     const OptionSet& local) {
  ConfigEcho out{{"command", command}};
  for (auto& kv : global_opts.echo()) out.push_back(std::move(kv));
  for (auto& kv : local.echo()) out.push_back(std::move(kv));
  return out;
}

std::filesystem::path prepare_out_dir(const Globals& g) {
  const std::filesystem::path dir(g.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw SchemaError(dir.string() + ": cannot create output directory: " + ec.message());
  return dir;
}

}  // namespace osrcnn::cli
