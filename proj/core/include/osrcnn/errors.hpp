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

#include <stdexcept>
#include <string>

namespace osrcnn {

// Each error family maps onto a distinct CLI exit code (see tools/).

/// Malformed input files, dangling references, unsupported versions.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Feature/model/config dimensions that do not line up.
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A requested benchmark setting cannot be built from the available images.
class InfeasibleSplitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The close-set run never reaches the requested recall level.
class UnreachableRecallError : public std::runtime_error {
 public:
  UnreachableRecallError(const std::string& what, double max_recall)
      : std::runtime_error(what), max_recall_(max_recall) {}
  double max_recall() const noexcept { return max_recall_; }

 private:
  double max_recall_;
};

/// Training produced a non-finite loss.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace osrcnn
