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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctsr/dataset.hpp"
#include "ctsr/invariance.hpp"
#include "ctsr/model_selection.hpp"
#include "ctsr/run_config.hpp"

namespace ctsr {

/// One fitted equation: the tensor equation, or one component in scalar mode.
struct DiscoveredEquation {
  std::string lhs;
  std::vector<std::string> columns;
  SparseSolution<double> solution;
  std::optional<GroundTruth> truth;
  std::optional<double> error_percent;
  std::optional<int> redundant;

  /// "lhs = c1 term1 + c2 term2" with %.6g coefficients; "lhs = 0" when empty.
  [[nodiscard]] std::string text() const;
};

struct DiscoveryResult {
  LibraryMode mode = LibraryMode::kTensor;
  std::size_t library_size = 0;
  std::size_t rows = 0;  ///< per regression
  std::vector<DiscoveredEquation> equations;
  double library_seconds = 0.0;     ///< library construction and assembly
  double regression_seconds = 0.0;  ///< train_stridge over all equations
};

/// Constant channel values keyed by component key, e.g. {"g[1]": -1}.
std::map<std::string, double> constant_channels(const RunConfig& config);

RegressionProblem tensor_problem(const RunConfig& config, const GridDataset& ds);

DiscoveryResult run_discovery(const RunConfig& config, const GridDataset& ds);

nlohmann::json to_json(const DiscoveryResult& result);

struct SweepResult {
  std::vector<ParetoPoint> points;
  std::vector<std::size_t> front;
  std::optional<DtolSuggestion> suggestion;
};

/// Tensor-mode sweep of d_tol over config.sweep.
SweepResult run_sweep(const RunConfig& config, const GridDataset& ds);

struct EquivarianceOptions {
  int rotations = 20;
  int reflections = 20;
  int points = 16;
  bool lattice = true;
  int lattice_points_per_axis = 10;
  std::uint64_t seed = 0;
  double analytic_tol = 1e-8;
  double lattice_tol = 1e-13;
};

struct EquivarianceSummary {
  std::vector<EquivarianceRow> rows;  ///< candidates and the control against every transform
  double max_analytic = 0.0;          ///< worst tensor candidate, analytic fields
  double max_lattice = 0.0;           ///< worst tensor candidate, grid fields
  double control_analytic = 0.0;      ///< worst non-tensor control deviation, analytic fields
  std::string control_name;
  std::size_t candidates = 0;
  [[nodiscard]] bool passed(const EquivarianceOptions& options) const;
};

/// Non-tensor control: q[i] dq[i]/dx[i] without summation, for the first
/// differentiable vector input q.
ProbeTerm non_tensor_control(const RunConfig& config);

/// Analytic field source over the config's inputs (manufactured family).
ManufacturedFields analytic_fields(const RunConfig& config, std::uint64_t seed);

EquivarianceSummary run_equivariance(const RunConfig& config, const EquivarianceOptions& options);

struct BenchRecord {
  std::uint64_t seed = 0;
  LibraryMode mode = LibraryMode::kTensor;
  std::string equation;  ///< lhs of the fitted equation
  double error_percent = 0.0;
  int redundant = 0;
  double library_seconds = 0.0;
  double regression_seconds = 0.0;
};

struct ErrorSummary {
  LibraryMode mode = LibraryMode::kTensor;
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double library_seconds = 0.0;     ///< mean per run
  double regression_seconds = 0.0;  ///< mean per run
};

/// Runs both modes for sampling/split seeds config seed .. seed+seeds-1 on one
/// dataset. Requires ground truth.
std::vector<BenchRecord> run_bench(const RunConfig& config, const GridDataset& ds, int seeds);
/// Quartiles by linear interpolation between order statistics.
std::vector<ErrorSummary> summarize(const std::vector<BenchRecord>& records);

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records);
void write_summary_csv(std::ostream& out, const std::vector<ErrorSummary>& summary);

}  // namespace ctsr
