// Copyright 2026 The CTSR Authors
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

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctsr/dataset.hpp"
#include "ctsr/library.hpp"
#include "ctsr/model_selection.hpp"
#include "ctsr/sparse_solver.hpp"
#include "ctsr/synthetic.hpp"
#include "ctsr/theta.hpp"

namespace ctsr {

/// Everything one pipeline run needs. Presets fill every field; a config file
/// starts from its preset and overrides the keys it names.
struct RunConfig {
  std::string preset = "custom";
  LibrarySpec library;
  Hyperparams hyper;
  SamplingSpec sampling;
  LhsSpec lhs;
  /// Empty when the ground truth is unknown; metrics are then skipped.
  std::vector<WeightedTerm> truth;
  std::map<std::string, std::vector<double>> constants;
  AssemblyOptions assembly;
  SweepSpec sweep;
  /// Exactly one generator is set for presets; custom runs may rely on `dataset`.
  std::optional<BurgersConfig> burgers;
  std::optional<ManufacturedSpec> manufactured;
  std::string dataset;  ///< stem of an existing dataset; empty means generate
  std::string out_dir;
  /// Published reference candidate counts, shown beside ours in the library report.
  int reference_tensor_count = 0;
  int reference_scalar_count = 0;

  /// Quantities known to the term parser: inputs plus a prescribed left side.
  [[nodiscard]] std::vector<QuantityInfo> quantity_info() const;
  /// Truth with canonical column texts.
  [[nodiscard]] GroundTruth tensor_truth() const;
  /// Manufactured spec with inputs, constants, truth and target order copied in.
  [[nodiscard]] ManufacturedSpec manufactured_spec() const;
  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

std::vector<std::string> preset_names();
/// Throws std::invalid_argument for unknown names.
RunConfig preset_config(const std::string& name);

nlohmann::json to_json(const RunConfig& config);
/// Starts from the preset named by "preset" (default custom) and applies every
/// other key. Unknown keys throw std::invalid_argument.
RunConfig config_from_json(const nlohmann::json& j);

/// Generates the configured dataset (Burgers run or manufactured fields).
GridDataset generate_dataset(const RunConfig& config);

}  // namespace ctsr
