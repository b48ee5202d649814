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

#include "ctsr/theta.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include "ctsr/csv.hpp"

namespace ctsr {

namespace {

ComponentId factor_channel(const TensorFactor& f, const std::vector<int>& value_of) {
  ComponentId id;
  id.quantity = f.shape.base;
  const auto order = static_cast<std::size_t>(f.shape.base_order);
  for (std::size_t s = 0; s < f.slots.size(); ++s) {
    const int v = value_of[static_cast<std::size_t>(f.slots[s].id)];
    (s < order ? id.index : id.axes).push_back(v);
  }
  return id.canonical(f.shape.symmetric_base);
}

std::string tuple_text(const std::vector<int>& t) {
  std::string out;
  for (int v : t) out += axis_letter(v);
  return out;
}

// Table column for a channel; a symmetric pair may have been stored sorted.
int table_column(const SampleTable& table, const ComponentId& id) {
  int c = table.column(id.key());
  if (c < 0 && id.index.size() == 2) {
    auto sorted = id;
    std::sort(sorted.index.begin(), sorted.index.end());
    c = table.column(sorted.key());
  }
  return c;
}

}  // namespace

std::vector<ChannelMonomial> expand_term(const CandidateTerm& term, const std::vector<SuffixLabel>& fixed,
                                         const std::vector<int>& values, int dim) {
  if (fixed.size() != values.size()) throw std::invalid_argument("expand_term: label/value count mismatch");
  if (!term.fully_labelled()) throw std::invalid_argument("expand_term: unlabelled slot in " + to_text(term));
  const auto counts = term.label_counts();
  std::vector<int> value_of(counts.size(), -1);
  for (std::size_t f = 0; f < fixed.size(); ++f) {
    if (fixed[f].id < 0 || static_cast<std::size_t>(fixed[f].id) >= counts.size()) continue;
    if (values[f] < 0 || values[f] >= dim) throw std::invalid_argument("expand_term: free value outside 0..dim-1");
    value_of[static_cast<std::size_t>(fixed[f].id)] = values[f];
  }
  std::vector<std::size_t> summed;
  for (std::size_t id = 0; id < counts.size(); ++id) {
    if (counts[id] > 0 && value_of[id] < 0) summed.push_back(id);
  }

  std::map<std::vector<std::string>, ChannelMonomial> merged;
  std::vector<int> odometer(summed.size(), 0);
  while (true) {
    for (std::size_t s = 0; s < summed.size(); ++s) value_of[summed[s]] = odometer[s];
    ChannelMonomial m;
    for (const auto& f : term.factors) m.channels.push_back(factor_channel(f, value_of));
    std::sort(m.channels.begin(), m.channels.end());
    std::vector<std::string> key;
    for (const auto& c : m.channels) key.push_back(c.key());
    auto [it, inserted] = merged.try_emplace(std::move(key), ChannelMonomial{0.0, m.channels});
    it->second.coefficient += 1.0;

    std::size_t pos = 0;
    while (pos < odometer.size() && ++odometer[pos] == dim) odometer[pos++] = 0;
    if (pos == odometer.size()) break;
  }
  std::vector<ChannelMonomial> out;
  out.reserve(merged.size());
  for (auto& [key, m] : merged) out.push_back(std::move(m));
  return out;
}

double evaluate_candidate(const CandidateTerm& term, const std::function<double(const ComponentId&)>& lookup, int dim,
                          const std::vector<int>& free_values) {
  const auto free = term.free_suffixes();
  if (free.size() != free_values.size()) {
    throw std::invalid_argument("evaluate_candidate: " + std::to_string(free.size()) + " free suffixes, " +
                                std::to_string(free_values.size()) + " values");
  }
  double total = 0.0;
  for (const auto& m : expand_term(term, free, free_values, dim)) {
    double prod = m.coefficient;
    for (const auto& c : m.channels) prod *= lookup(c);
    total += prod;
  }
  return total;
}

std::vector<std::vector<int>> free_tuples(int dim, int order, bool ordered) {
  std::vector<std::vector<int>> out{{}};
  for (int s = 0; s < order; ++s) {
    std::vector<std::vector<int>> next;
    for (const auto& prefix : out) {
      for (int a = 0; a < dim; ++a) {
        if (!ordered && !prefix.empty() && a < prefix.back()) continue;
        auto t = prefix;
        t.push_back(a);
        next.push_back(std::move(t));
      }
    }
    out = std::move(next);
  }
  return out;
}

int ContractionPlan::channel_index(const ComponentId& id) {
  auto it = std::find(channels_.begin(), channels_.end(), id);
  if (it != channels_.end()) return static_cast<int>(it - channels_.begin());
  channels_.push_back(id);
  return static_cast<int>(channels_.size()) - 1;
}

ContractionPlan ContractionPlan::tensor(const std::vector<CandidateTerm>& terms, std::vector<std::string> names, int dim,
                                        int target_order, AssemblyOptions options,
                                        const std::vector<std::vector<SuffixLabel>>& fixed_labels) {
  if (names.size() != terms.size()) throw std::invalid_argument("contraction plan: name count mismatch");
  if (!fixed_labels.empty() && fixed_labels.size() != terms.size()) {
    throw std::invalid_argument("contraction plan: fixed label list count mismatch");
  }
  ContractionPlan plan;
  plan.names_ = std::move(names);
  plan.tuples_ = free_tuples(dim, target_order, options.ordered_pairs);
  plan.expansion_.resize(terms.size());
  for (std::size_t c = 0; c < terms.size(); ++c) {
    const auto fixed = fixed_labels.empty() ? terms[c].free_suffixes() : fixed_labels[c];
    if (static_cast<int>(fixed.size()) != target_order) {
      throw std::invalid_argument("contraction plan: " + to_text(terms[c]) + " has " + std::to_string(fixed.size()) +
                                  " free suffixes, target order is " + std::to_string(target_order));
    }
    for (const auto& tuple : plan.tuples_) {
      std::vector<Term> expanded;
      for (const auto& m : expand_term(terms[c], fixed, tuple, dim)) {
        Term t{m.coefficient, {}};
        for (const auto& ch : m.channels) t.channels.push_back(plan.channel_index(ch));
        expanded.push_back(std::move(t));
      }
      plan.expansion_[c].push_back(std::move(expanded));
    }
  }
  return plan;
}

ContractionPlan ContractionPlan::scalar(const ScalarLibrary& library) {
  ContractionPlan plan;
  plan.tuples_ = {{}};
  for (const auto& e : library.entries) {
    Term t{1.0, {}};
    for (const auto& c : e.monomial) t.channels.push_back(plan.channel_index(c.canonical(false)));
    if (e.derivative) t.channels.push_back(plan.channel_index(e.derivative->canonical(false)));
    plan.names_.push_back(e.text);
    plan.expansion_.push_back({{std::move(t)}});
  }
  return plan;
}

Eigen::MatrixXd ContractionPlan::evaluate(const SampleTable& table) const {
  std::vector<Eigen::Index> col_of(channels_.size());
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    const int col = table_column(table, channels_[c]);
    if (col < 0) throw std::invalid_argument("sample table lacks channel " + channels_[c].key());
    col_of[c] = col;
  }
  const auto n_tuples = static_cast<Eigen::Index>(tuples_.size());
  const auto n_samples = static_cast<Eigen::Index>(table.size());
  Eigen::MatrixXd theta(n_samples * n_tuples, static_cast<Eigen::Index>(names_.size()));
  for (std::size_t col = 0; col < names_.size(); ++col) {
    for (Eigen::Index s = 0; s < n_samples; ++s) {
      for (Eigen::Index t = 0; t < n_tuples; ++t) {
        double total = 0.0;
        for (const auto& term : expansion_[col][static_cast<std::size_t>(t)]) {
          double prod = term.coefficient;
          for (int ch : term.channels) prod *= table.values(s, col_of[static_cast<std::size_t>(ch)]);
          total += prod;
        }
        if (!std::isfinite(total)) {
          throw std::domain_error("non-finite value for candidate '" + names_[col] + "' at sample " + std::to_string(s));
        }
        theta(s * n_tuples + t, static_cast<Eigen::Index>(col)) = total;
      }
    }
  }
  return theta;
}

RegressionProblem RegressionProblem::select_rows(const std::vector<Eigen::Index>& rows) const {
  RegressionProblem out;
  out.theta = theta(rows, Eigen::all);
  out.lhs = lhs(rows);
  out.column_names = column_names;
  out.dim = dim;
  out.target_order = target_order;
  out.row_meta.reserve(rows.size());
  for (auto r : rows) out.row_meta.push_back(row_meta[static_cast<std::size_t>(r)]);
  return out;
}

int RegressionProblem::column(const std::string& name) const {
  auto it = std::find(column_names.begin(), column_names.end(), name);
  return it == column_names.end() ? -1 : static_cast<int>(it - column_names.begin());
}

LhsSpec LhsSpec::time_derivative(std::string quantity) {
  LhsSpec s;
  s.kind = Kind::kTimeDerivative;
  s.quantity = std::move(quantity);
  return s;
}

LhsSpec LhsSpec::prescribed(std::vector<std::pair<double, CandidateTerm>> terms) {
  LhsSpec s;
  s.kind = Kind::kPrescribed;
  s.terms = std::move(terms);
  return s;
}

std::string LhsSpec::text() const {
  if (kind == Kind::kTimeDerivative) return "d" + quantity + "/dt";
  std::string out;
  for (const auto& [coef, term] : terms) {
    if (!out.empty()) out += " + ";
    out += format_double(coef) + " " + to_text(term);
  }
  return out;
}

std::vector<ComponentId> required_channels(const TensorLibrary& library, int dim, int target_order) {
  std::vector<CandidateTerm> terms;
  std::vector<std::string> names;
  for (const auto& e : library.entries) {
    terms.push_back(e.term);
    names.push_back(e.text);
  }
  return ContractionPlan::tensor(terms, names, dim, target_order).channels();
}

std::vector<ComponentId> required_channels(const ScalarLibrary& library) {
  return ContractionPlan::scalar(library).channels();
}

std::vector<ComponentId> lhs_channels(const LhsSpec& spec, int dim, int target_order) {
  std::vector<ComponentId> out;
  if (spec.kind == LhsSpec::Kind::kTimeDerivative) {
    for (const auto& t : free_tuples(dim, target_order)) out.push_back({spec.quantity, t, {}, true});
    return out;
  }
  for (const auto& [coef, term] : spec.terms) {
    const auto free = term.free_suffixes();
    for (const auto& t : free_tuples(dim, target_order)) {
      for (const auto& m : expand_term(term, free, t, dim)) {
        for (const auto& c : m.channels) {
          if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
        }
      }
    }
  }
  return out;
}

RegressionProblem assemble_theta(const TensorLibrary& library, const SampleTable& table, int dim, int target_order,
                                 AssemblyOptions options) {
  std::vector<CandidateTerm> terms;
  std::vector<std::string> names;
  for (const auto& e : library.entries) {
    terms.push_back(e.term);
    names.push_back(e.text);
  }
  const auto plan = ContractionPlan::tensor(terms, names, dim, target_order, options);
  RegressionProblem p;
  p.theta = plan.evaluate(table);
  p.column_names = plan.names();
  p.dim = dim;
  p.target_order = target_order;
  for (std::size_t s = 0; s < table.size(); ++s) {
    for (const auto& t : plan.tuples()) p.row_meta.push_back({s, t});
  }
  p.lhs = Eigen::VectorXd::Zero(p.theta.rows());
  return p;
}

Eigen::VectorXd assemble_lhs(const LhsSpec& spec, const SampleTable& table, int dim, int target_order,
                             AssemblyOptions options) {
  const auto tuples = free_tuples(dim, target_order, options.ordered_pairs);
  const auto n_tuples = static_cast<Eigen::Index>(tuples.size());
  Eigen::VectorXd lhs(static_cast<Eigen::Index>(table.size()) * n_tuples);
  if (spec.kind == LhsSpec::Kind::kTimeDerivative) {
    for (Eigen::Index t = 0; t < n_tuples; ++t) {
      const ComponentId id{spec.quantity, tuples[static_cast<std::size_t>(t)], {}, true};
      const int col = table_column(table, id);
      if (col < 0) throw std::invalid_argument("lhs: sample table lacks channel " + id.key());
      for (Eigen::Index s = 0; s < static_cast<Eigen::Index>(table.size()); ++s) lhs(s * n_tuples + t) = table.values(s, col);
    }
  } else {
    std::vector<CandidateTerm> terms;
    std::vector<std::string> names;
    for (const auto& [coef, term] : spec.terms) {
      terms.push_back(term);
      names.push_back(to_text(term));
    }
    const auto plan = ContractionPlan::tensor(terms, names, dim, target_order, options);
    Eigen::VectorXd coefs(static_cast<Eigen::Index>(spec.terms.size()));
    for (std::size_t k = 0; k < spec.terms.size(); ++k) coefs(static_cast<Eigen::Index>(k)) = spec.terms[k].first;
    lhs = plan.evaluate(table) * coefs;
  }
  for (Eigen::Index r = 0; r < lhs.size(); ++r) {
    if (!std::isfinite(lhs(r))) {
      throw std::domain_error("non-finite left-hand side at sample " + std::to_string(r / std::max<Eigen::Index>(n_tuples, 1)));
    }
  }
  return lhs;
}

RegressionProblem assemble_scalar_problem(const ScalarLibrary& library, const LhsSpec& spec, const SampleTable& table,
                                          int dim, int target_order, const std::vector<int>& component) {
  const auto tuples = free_tuples(dim, target_order);
  auto it = std::find(tuples.begin(), tuples.end(), component);
  if (it == tuples.end()) throw std::invalid_argument("scalar problem: component outside the target's index range");
  const auto which = it - tuples.begin();
  const auto plan = ContractionPlan::scalar(library);
  RegressionProblem p;
  p.theta = plan.evaluate(table);
  p.column_names = plan.names();
  p.dim = dim;
  p.target_order = target_order;
  const Eigen::VectorXd full = assemble_lhs(spec, table, dim, target_order);
  const auto n_tuples = static_cast<Eigen::Index>(tuples.size());
  p.lhs.resize(static_cast<Eigen::Index>(table.size()));
  for (Eigen::Index s = 0; s < p.lhs.size(); ++s) {
    p.lhs(s) = full(s * n_tuples + which);
    p.row_meta.push_back({static_cast<std::size_t>(s), component});
  }
  return p;
}

RegressionProblem build_tensor_problem(ChannelStore& store, const TensorLibrary& library, const LhsSpec& lhs,
                                       int target_order, const SamplingSpec& sampling, AssemblyOptions options) {
  const int dim = store.dataset().spatial_dim;
  auto channels = required_channels(library, dim, target_order);
  for (auto& c : lhs_channels(lhs, dim, target_order)) channels.push_back(std::move(c));
  const auto table = sample_points(store, channels, sampling);
  auto problem = assemble_theta(library, table, dim, target_order, options);
  problem.lhs = assemble_lhs(lhs, table, dim, target_order, options);
  return problem;
}

std::vector<RegressionProblem> build_scalar_problems(ChannelStore& store, const ScalarLibrary& library, const LhsSpec& lhs,
                                                     int target_order, const SamplingSpec& sampling) {
  const int dim = store.dataset().spatial_dim;
  auto channels = required_channels(library);
  for (auto& c : lhs_channels(lhs, dim, target_order)) {
    if (std::find(channels.begin(), channels.end(), c) == channels.end()) channels.push_back(std::move(c));
  }
  const auto table = sample_points(store, channels, sampling);
  std::vector<RegressionProblem> out;
  for (const auto& component : free_tuples(dim, target_order)) {
    out.push_back(assemble_scalar_problem(library, lhs, table, dim, target_order, component));
  }
  return out;
}

void write_problem_csv(std::ostream& out, const RegressionProblem& problem) {
  out << "sample,free,lhs";
  for (const auto& name : problem.column_names) out << ',' << csv_field(name);
  out << '\n';
  for (Eigen::Index r = 0; r < problem.rows(); ++r) {
    const auto& meta = problem.row_meta[static_cast<std::size_t>(r)];
    out << meta.sample << ',' << tuple_text(meta.free_values) << ',' << format_double(problem.lhs(r));
    for (Eigen::Index c = 0; c < problem.cols(); ++c) out << ',' << format_double(problem.theta(r, c));
    out << '\n';
  }
}

}  // namespace ctsr
