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

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ctsr/component.hpp"
#include "ctsr/dataset.hpp"
#include "ctsr/library.hpp"
#include "ctsr/tensor_term.hpp"

namespace ctsr {

/// coefficient * product of channels; repeated channels appear repeatedly.
struct ChannelMonomial {
  double coefficient = 1.0;
  std::vector<ComponentId> channels;
};

/// Einstein expansion of `term` with `fixed` labels pinned to `values` and
/// every other label summed over 0..dim-1. Equal monomials are merged.
/// Passing labels that occur more than once in `fixed` evaluates without
/// summation, which is how non-tensor controls are expressed.
std::vector<ChannelMonomial> expand_term(const CandidateTerm& term, const std::vector<SuffixLabel>& fixed,
                                         const std::vector<int>& values, int dim);

/// coefficient * term, with `fixed` labels pinned to the target indices
/// (default: the term's free suffixes). A fixed label occurring several
/// times is not summed, which builds non-tensor expressions.
struct WeightedTerm {
  double coefficient = 1.0;
  CandidateTerm term;
  std::optional<std::vector<SuffixLabel>> fixed;

  [[nodiscard]] std::vector<SuffixLabel> labels() const { return fixed ? *fixed : term.free_suffixes(); }
};

/// Value of a valid term for one assignment of its free suffixes, in
/// ascending label order.
double evaluate_candidate(const CandidateTerm& term, const std::function<double(const ComponentId&)>& lookup, int dim,
                          const std::vector<int>& free_values);

/// Ordered free-index tuples, first index slowest. With `ordered` false and
/// order 2, only a <= b pairs are kept.
std::vector<std::vector<int>> free_tuples(int dim, int order, bool ordered = true);

struct AssemblyOptions {
  bool ordered_pairs = true;
};

/// Candidate columns expanded into channel monomials once, evaluated per sample.
class ContractionPlan {
 public:
  /// Each term is expanded with its own free suffixes, or with `fixed_labels`
  /// when given (same length as the free tuples).
  static ContractionPlan tensor(const std::vector<CandidateTerm>& terms, std::vector<std::string> names, int dim,
                                int target_order, AssemblyOptions options = {},
                                const std::vector<std::vector<SuffixLabel>>& fixed_labels = {});
  static ContractionPlan scalar(const ScalarLibrary& library);

  [[nodiscard]] const std::vector<ComponentId>& channels() const { return channels_; }
  [[nodiscard]] const std::vector<std::vector<int>>& tuples() const { return tuples_; }
  [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
  [[nodiscard]] std::size_t columns() const { return names_.size(); }

  /// Rows ordered sample-major, then free tuple. Throws std::domain_error
  /// naming the sample and candidate on a non-finite entry.
  [[nodiscard]] Eigen::MatrixXd evaluate(const SampleTable& table) const;

 private:
  struct Term {
    double coefficient;
    std::vector<int> channels;
  };
  std::vector<ComponentId> channels_;
  std::vector<std::vector<int>> tuples_;
  std::vector<std::string> names_;
  std::vector<std::vector<std::vector<Term>>> expansion_;  // [column][tuple]

  int channel_index(const ComponentId& id);
};

struct RowMeta {
  std::size_t sample = 0;
  std::vector<int> free_values;
};

/// Regression system lhs ~ theta * xi.
struct RegressionProblem {
  Eigen::MatrixXd theta;
  Eigen::VectorXd lhs;
  std::vector<std::string> column_names;
  std::vector<RowMeta> row_meta;
  int dim = 0;
  int target_order = 0;

  [[nodiscard]] Eigen::Index rows() const { return theta.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return theta.cols(); }
  [[nodiscard]] RegressionProblem select_rows(const std::vector<Eigen::Index>& rows) const;
  /// Column whose name equals `name`, or -1.
  [[nodiscard]] int column(const std::string& name) const;
};

/// Left side of the regression: the time derivative of a quantity, or a fixed
/// combination of tensor terms with the target's free suffixes.
struct LhsSpec {
  enum class Kind { kTimeDerivative, kPrescribed };
  Kind kind = Kind::kTimeDerivative;
  std::string quantity;
  std::vector<std::pair<double, CandidateTerm>> terms;

  static LhsSpec time_derivative(std::string quantity);
  static LhsSpec prescribed(std::vector<std::pair<double, CandidateTerm>> terms);
  [[nodiscard]] std::string text() const;
};

/// Channels the library columns read, in first-use order.
std::vector<ComponentId> required_channels(const TensorLibrary& library, int dim, int target_order);
std::vector<ComponentId> required_channels(const ScalarLibrary& library);
std::vector<ComponentId> lhs_channels(const LhsSpec& spec, int dim, int target_order);

RegressionProblem assemble_theta(const TensorLibrary& library, const SampleTable& table, int dim, int target_order,
                                 AssemblyOptions options = {});
/// Rows aligned with assemble_theta under the same options. Throws
/// std::invalid_argument when a channel is missing from the table.
Eigen::VectorXd assemble_lhs(const LhsSpec& spec, const SampleTable& table, int dim, int target_order,
                             AssemblyOptions options = {});

/// Scalar-mode system for one component of the target (e.g. {1} for v_t):
/// one row per sample.
RegressionProblem assemble_scalar_problem(const ScalarLibrary& library, const LhsSpec& spec, const SampleTable& table,
                                          int dim, int target_order, const std::vector<int>& component);

/// Convenience: sample the dataset for library and lhs, then assemble both.
RegressionProblem build_tensor_problem(ChannelStore& store, const TensorLibrary& library, const LhsSpec& lhs,
                                       int target_order, const SamplingSpec& sampling, AssemblyOptions options = {});

/// Scalar counterpart: one problem per ordered target component, all sharing
/// one sample table.
std::vector<RegressionProblem> build_scalar_problems(ChannelStore& store, const ScalarLibrary& library, const LhsSpec& lhs,
                                                     int target_order, const SamplingSpec& sampling);

/// CSV: sample, free, lhs, then one column per candidate.
void write_problem_csv(std::ostream& out, const RegressionProblem& problem);

}  // namespace ctsr
