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

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ctsr/library.hpp"
#include "ctsr/sparse_solver.hpp"
#include "ctsr/theta.hpp"

namespace ctsr {

struct TruthTerm {
  std::string text;  ///< column name (canonical text in tensor mode)
  double coefficient = 0.0;
};

struct GroundTruth {
  std::vector<TruthTerm> terms;
  void validate() const;
};

/// Mean over truth terms of |xi - xi*| / |xi*|, in percent. A truth term
/// absent from the columns or with zero coefficient contributes 100%.
double prediction_error(const Eigen::VectorXd& xi, const std::vector<std::string>& columns, const GroundTruth& truth);

/// Nonzero coefficients whose column is not a truth term.
int redundancy_count(const Eigen::VectorXd& xi, const std::vector<std::string>& columns, const GroundTruth& truth);

/// Scalar-mode truth for one target component: the tensor truth expanded into
/// component products, with constant quantities folded into coefficients.
GroundTruth scalar_truth(const std::vector<WeightedTerm>& tensor_truth, const ScalarLibrary& library, int dim,
                         const std::vector<int>& component, const std::map<std::string, double>& constants = {});

struct ParetoPoint {
  double d_tol = 0.0;
  int sparsity = 0;
  double residual = 0.0;  ///< |lhs - theta xi| on the full problem
  SparseSolution<double> solution;
};

struct SweepSpec {
  double lo = 1e-5;
  double hi = 1e3;
  int points = 60;
  int jobs = 1;
};

std::vector<double> log_grid(double lo, double hi, int points);

/// One train_stridge run per grid value, all with the same split seed.
/// Runs are spread over `jobs` threads; the output order follows the grid.
std::vector<ParetoPoint> sweep_dtol(const RegressionProblem& problem, const Hyperparams& hyper, const SweepSpec& spec);

/// Indices of non-dominated points (minimize sparsity and residual), sorted
/// by sparsity. Among identical (sparsity, residual) pairs the smallest
/// d_tol is kept.
std::vector<std::size_t> pareto_front(const std::vector<ParetoPoint>& points);

/// Front point farthest below the chord between the front extremes in
/// (sparsity, log10 residual), each axis scaled by its extent. When every
/// interior point lies above the chord, the point at the bottom of the
/// steepest log-residual drop per added term. Collinear fronts return the
/// middle element; fewer than 2 points give no suggestion.
std::optional<std::size_t> knee_point(const std::vector<ParetoPoint>& points, const std::vector<std::size_t>& front);

struct DtolSuggestion {
  std::size_t knee = 0;  ///< index into the sweep points
  double d_tol = 0.0;    ///< geometric centre of the plateau
  double plateau_lo = 0.0;
  double plateau_hi = 0.0;
};

/// Knee of the front, widened to the contiguous run of grid values (in d_tol
/// order) whose solutions share the knee's support. The suggestion is the
/// run's geometric centre, so it does not sit on the grid's lower edge when
/// the whole low end reproduces the knee model.
std::optional<DtolSuggestion> suggest_dtol(const std::vector<ParetoPoint>& points, const std::vector<std::size_t>& front);

struct DimensionSplit {
  std::vector<double> axis_errors;  ///< prediction error (%) per free-index value
  double stacked_error = 0.0;
  std::vector<SparseSolution<double>> axis_solutions;
  SparseSolution<double> stacked_solution;
};

/// Regresses each free-component row block separately and the stacked system.
DimensionSplit dimension_split_diagnostic(const RegressionProblem& problem, const Hyperparams& hyper, const GroundTruth& truth);

/// CSV: d_tol, sparsity, residual, is_front, is_knee.
void write_sweep_csv(std::ostream& out, const std::vector<ParetoPoint>& points, const std::vector<std::size_t>& front,
                     std::optional<std::size_t> knee);
/// Scatter of sparsity against log residual, front joined by a dashed line.
void write_sweep_svg(std::ostream& out, const std::vector<ParetoPoint>& points, const std::vector<std::size_t>& front,
                     std::optional<std::size_t> knee, const std::string& title);

}  // namespace ctsr
