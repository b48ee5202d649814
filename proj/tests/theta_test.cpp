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

#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "ctsr/library.hpp"
#include "ctsr/run_config.hpp"
#include "ctsr/synthetic.hpp"
#include "ctsr/theta.hpp"
#include "test_support.hpp"

namespace ctsr {
namespace {

// Naive Einstein evaluator: loops over every value of every label, keeps the
// assignments that agree with the pinned free labels, multiplies factor
// components directly.
double naive_value(const CandidateTerm& term, const std::function<double(const ComponentId&)>& lookup, int dim,
                   const std::vector<int>& free_values) {
  const auto counts = term.label_counts();
  const auto free = term.free_suffixes();
  const std::size_t n = counts.size();
  std::vector<int> value(n, 0);
  double total = 0.0;
  while (true) {
    bool pinned = true;
    for (std::size_t f = 0; f < free.size(); ++f) pinned = pinned && value[static_cast<std::size_t>(free[f].id)] == free_values[f];
    bool unused_zero = true;
    for (std::size_t l = 0; l < n; ++l) unused_zero = unused_zero && (counts[l] > 0 || value[l] == 0);
    if (pinned && unused_zero) {
      double product = 1.0;
      for (const auto& f : term.factors) {
        ComponentId id{f.shape.base, {}, {}, false};
        for (int s = 0; s < f.shape.slot_count(); ++s) {
          const int v = value[static_cast<std::size_t>(f.slots[static_cast<std::size_t>(s)].id)];
          (s < f.shape.base_order ? id.index : id.axes).push_back(v);
        }
        product *= lookup(id);
      }
      total += product;
    }
    std::size_t pos = 0;
    while (pos < n && ++value[pos] == dim) value[pos++] = 0;
    if (pos == n) break;
  }
  return total;
}

GridDataset small_dataset(const std::string& preset, int points, int times) {
  auto spec = preset_config(preset).manufactured_spec();
  spec.points_per_axis = points;
  spec.times = times;
  return manufactured_dataset(spec);
}

TEST(FreeTuples, OrderingAndUnorderedPairs) {
  const auto t = free_tuples(3, 2);
  ASSERT_EQ(t.size(), 9u);
  EXPECT_EQ(t[1], (std::vector<int>{0, 1}));
  EXPECT_EQ(t[3], (std::vector<int>{1, 0}));
  EXPECT_EQ(free_tuples(3, 2, false).size(), 6u);
  EXPECT_EQ(free_tuples(2, 1).size(), 2u);
  ASSERT_EQ(free_tuples(3, 0).size(), 1u);
  EXPECT_TRUE(free_tuples(3, 0)[0].empty());
}

TEST(ExpandTerm, MergesEqualMonomials) {
  const std::vector<QuantityInfo> q{{"u", 1, false}};
  const auto term = parse_term("u[j] u[k] d2u[i]/dx[j]dx[k]", q);
  const auto mono = expand_term(term, term.free_suffixes(), {0}, 2);
  // (0,0), (1,1) and the merged mixed pair with coefficient 2.
  ASSERT_EQ(mono.size(), 3u);
  double total = 0.0;
  for (const auto& m : mono) total += m.coefficient;
  EXPECT_EQ(total, 4.0);
}

TEST(ExpandTerm, PinnedRepeatedLabelIsNotSummed) {
  const std::vector<QuantityInfo> q{{"u", 1, false}};
  const auto term = parse_term("u[i] du[i]/dx[i]", q);
  const auto mono = expand_term(term, {SuffixLabel{0}}, {1}, 3);
  ASSERT_EQ(mono.size(), 1u);
  EXPECT_EQ(mono[0].coefficient, 1.0);
  ASSERT_EQ(mono[0].channels.size(), 2u);
  EXPECT_EQ(mono[0].channels[0].key(), "u[1]");
  EXPECT_EQ(mono[0].channels[1].key(), "u[1]_y");
}

// Property: the contraction evaluator agrees with the naive oracle for every
// candidate of every preset library.
TEST(EvaluateCandidate, AgreesWithNaiveOracle) {
  for (const auto& name : {"burgers2d", "convection2d", "ns3d", "giesekus3d"}) {
    const auto config = preset_config(name);
    const auto lib = build_tensor_library(config.library);
    const int dim = config.library.spatial_dim;
    testing::RandomChannels channels(17, {"tau"});
    const auto lookup = std::cref(channels);
    for (const auto& e : lib.entries) {
      for (const auto& tuple : free_tuples(dim, config.library.target_order)) {
        EXPECT_NEAR(evaluate_candidate(e.term, lookup, dim, tuple), naive_value(e.term, lookup, dim, tuple), 1e-12)
            << name << ": " << e.text;
      }
    }
  }
}

TEST(AssembleTheta, RowsAreSampleMajorAndMatchOracle) {
  const auto config = preset_config("giesekus3d");
  const auto ds = small_dataset("giesekus3d", 5, 1);
  const auto lib = build_tensor_library(config.library);
  const auto channels = required_channels(lib, 3, 2);
  const auto table = sample_points(ds, channels, SamplingSpec{4, 0, 3});
  const auto problem = assemble_theta(lib, table, 3, 2);
  ASSERT_EQ(problem.rows(), 4 * 9);
  ASSERT_EQ(problem.cols(), static_cast<Eigen::Index>(lib.size()));
  const auto tuples = free_tuples(3, 2);
  for (Eigen::Index r = 0; r < problem.rows(); ++r) {
    const auto& meta = problem.row_meta[static_cast<std::size_t>(r)];
    EXPECT_EQ(meta.sample, static_cast<std::size_t>(r / 9));
    EXPECT_EQ(meta.free_values, tuples[static_cast<std::size_t>(r % 9)]);
    auto lookup = [&](const ComponentId& id) {
      const int col = table.column(ds.canonical(id).key());
      EXPECT_GE(col, 0) << id.key();
      return table.values(static_cast<Eigen::Index>(meta.sample), col);
    };
    for (std::size_t c = 0; c < lib.size(); ++c) {
      EXPECT_NEAR(problem.theta(r, static_cast<Eigen::Index>(c)), naive_value(lib.entries[c].term, lookup, 3, meta.free_values),
                  1e-12 * (1.0 + std::abs(problem.theta(r, static_cast<Eigen::Index>(c)))));
    }
  }
  EXPECT_EQ(problem.column_names[0], lib.entries[0].text);
  EXPECT_EQ(problem.column(lib.entries[5].text), 5);
  EXPECT_EQ(problem.column("absent"), -1);
}

TEST(AssembleTheta, UnorderedPairsDropMirroredRows) {
  const auto config = preset_config("giesekus3d");
  const auto ds = small_dataset("giesekus3d", 5, 1);
  const auto lib = build_tensor_library(config.library);
  const auto table = sample_points(ds, required_channels(lib, 3, 2), SamplingSpec{3, 0, 3});
  const auto problem = assemble_theta(lib, table, 3, 2, AssemblyOptions{false});
  EXPECT_EQ(problem.rows(), 3 * 6);
  const auto lhs = assemble_lhs(config.lhs, sample_points(ds, lhs_channels(config.lhs, 3, 2), SamplingSpec{3, 0, 3}), 3, 2,
                                AssemblyOptions{false});
  EXPECT_EQ(lhs.size(), 3 * 6);
}

TEST(AssembleLhs, TimeDerivativeRowsFollowTuples) {
  const auto ds = small_dataset("ns3d", 6, 4);
  const LhsSpec spec = LhsSpec::time_derivative("u");
  const auto channels = lhs_channels(spec, 3, 1);
  ASSERT_EQ(channels.size(), 3u);
  const auto table = sample_points(ds, channels, SamplingSpec{5, 2, 8});
  const auto lhs = assemble_lhs(spec, table, 3, 1);
  ASSERT_EQ(lhs.size(), 30);
  for (Eigen::Index r = 0; r < lhs.size(); ++r) {
    const std::string key = "u[" + std::to_string(r % 3) + "]_t";
    EXPECT_EQ(lhs(r), table.values(r / 3, table.column(key)));
  }
  EXPECT_EQ(spec.text(), "du/dt");
}

TEST(AssembleLhs, MissingChannelIsAnError) {
  const auto ds = small_dataset("ns3d", 6, 4);
  const auto table = sample_points(ds, {ComponentId::parse("p")}, SamplingSpec{5, 2, 8});
  EXPECT_THROW(assemble_lhs(LhsSpec::time_derivative("u"), table, 3, 1), std::invalid_argument);
}

TEST(ContractionPlan, NonFiniteEntryNamesCandidate) {
  auto ds = small_dataset("ns3d", 6, 4);
  auto values = ds.field(ComponentId::parse("p"));
  for (double& v : values) v = std::numeric_limits<double>::infinity();
  ds.set(ComponentId::parse("p"), values);
  const auto lib = build_tensor_library(preset_config("ns3d").library);
  const auto table = sample_points(ds, required_channels(lib, 3, 1), SamplingSpec{2, 1, 0});
  try {
    assemble_theta(lib, table, 3, 1);
    FAIL() << "expected a domain error";
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("p"), std::string::npos) << e.what();
  }
}

TEST(BuildProblems, TensorStacksComponentsAndScalarSplitsThem) {
  const auto config = preset_config("ns3d");
  const auto ds = small_dataset("ns3d", 6, 5);
  ChannelStore store(ds);
  const auto lib = build_tensor_library(config.library);
  const auto tensor = build_tensor_problem(store, lib, config.lhs, 1, SamplingSpec{10, 2, 4});
  EXPECT_EQ(tensor.rows(), 60);
  EXPECT_EQ(tensor.lhs.size(), 60);

  LibrarySpec scalar_spec = config.library;
  scalar_spec.mode = LibraryMode::kScalar;
  const auto scalar_lib = build_scalar_library(scalar_spec);
  const auto scalar = build_scalar_problems(store, scalar_lib, config.lhs, 1, SamplingSpec{10, 2, 4});
  ASSERT_EQ(scalar.size(), 3u);
  for (std::size_t a = 0; a < 3; ++a) {
    EXPECT_EQ(scalar[a].rows(), 20);
    EXPECT_EQ(scalar[a].cols(), 734);
    // Same samples, so each component's lhs is the matching stride of the tensor lhs.
    for (Eigen::Index r = 0; r < 20; ++r) EXPECT_EQ(scalar[a].lhs(r), tensor.lhs(3 * r + static_cast<Eigen::Index>(a)));
  }
}

TEST(RegressionProblem, SelectRowsKeepsMetadata) {
  const auto config = preset_config("ns3d");
  const auto ds = small_dataset("ns3d", 6, 5);
  ChannelStore store(ds);
  const auto problem = build_tensor_problem(store, build_tensor_library(config.library), config.lhs, 1, SamplingSpec{4, 1, 0});
  const auto sub = problem.select_rows({1, 5});
  ASSERT_EQ(sub.rows(), 2);
  EXPECT_EQ(sub.theta.row(1), problem.theta.row(5));
  EXPECT_EQ(sub.lhs(0), problem.lhs(1));
  EXPECT_EQ(sub.row_meta[1].free_values, problem.row_meta[5].free_values);
  EXPECT_EQ(sub.column_names, problem.column_names);

  std::ostringstream csv;
  write_problem_csv(csv, sub);
  const std::string header = csv.str().substr(0, csv.str().find('\n'));
  EXPECT_EQ(header.rfind("sample,free,lhs,", 0), 0u) << header;
}

}  // namespace
}  // namespace ctsr
