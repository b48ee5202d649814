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

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "ctsr/tensor_term.hpp"
#include "test_support.hpp"

namespace ctsr {
namespace {

const FactorShape kU{"u", 1, 0, false};
const FactorShape kDu{"u", 1, 1, false};
const FactorShape kD2u{"u", 1, 2, false};
const FactorShape kP{"p", 0, 0, false};
const FactorShape kTau{"tau", 2, 0, true};
const FactorShape kDtau{"tau", 2, 1, true};

const std::vector<QuantityInfo> kQuantities{{"u", 1, false}, {"p", 0, false}, {"tau", 2, true}};

TermTemplate convection_template() { return {{kU, kDu}}; }

std::set<std::string> canonical_texts(const std::vector<CandidateTerm>& terms, int target_order) {
  std::set<std::string> out;
  for (const auto& t : terms) {
    if (check_validity(t, target_order)) out.insert(to_text(canonicalize(t)));
  }
  return out;
}

// Applies a label map and shuffles factors and symmetric slot groups.
CandidateTerm scramble(const CandidateTerm& term, const std::map<int, int>& relabel, std::mt19937_64& rng) {
  CandidateTerm out = term;
  for (auto& f : out.factors) {
    for (auto& s : f.slots) s.id = relabel.at(s.id);
    for (const auto& group : f.shape.symmetric_slot_groups()) {
      std::vector<SuffixLabel> labels;
      for (int slot : group) labels.push_back(f.slots[static_cast<std::size_t>(slot)]);
      std::shuffle(labels.begin(), labels.end(), rng);
      for (std::size_t k = 0; k < group.size(); ++k) f.slots[static_cast<std::size_t>(group[k])] = labels[k];
    }
  }
  std::shuffle(out.factors.begin(), out.factors.end(), rng);
  return out;
}

TEST(AssignSuffixes, ProducesNToTheNLabellings) {
  const std::vector<TermTemplate> templates{{{kP}}, {{kU}}, {{kU, kU}}, {{kU, kDu}}, {{kU, kU, kDu}}, {{kTau, kDu}}};
  for (const auto& tmpl : templates) {
    const int n = tmpl.slot_count();
    long long expected = 1;
    for (int k = 0; k < n; ++k) expected *= n;
    const auto terms = assign_suffixes(tmpl);
    EXPECT_EQ(static_cast<long long>(terms.size()), expected) << to_text(tmpl);
    std::set<std::string> distinct;
    for (const auto& t : terms) {
      EXPECT_TRUE(t.fully_labelled());
      distinct.insert(to_text(t));
    }
    EXPECT_EQ(distinct.size(), terms.size()) << "labellings must be distinct";
  }
}

TEST(AssignSuffixes, ConstantTemplateHasOneEmptyTerm) {
  const auto terms = assign_suffixes(TermTemplate{});
  ASSERT_EQ(terms.size(), 1u);
  EXPECT_TRUE(terms[0].factors.empty());
}

TEST(ConvectionTemplate, TwentySevenLabellingsThreeCandidates) {
  const auto raw = assign_suffixes(convection_template());
  EXPECT_EQ(raw.size(), 27u);
  const std::set<std::string> expected{"u[i] du[j]/dx[j]", "u[j] du[i]/dx[j]", "u[j] du[j]/dx[i]"};
  EXPECT_EQ(canonical_texts(raw, 1), expected);
}

TEST(Validity, RejectsSuffixUsedThreeTimes) {
  const auto term = parse_term("u[i] du[i]/dx[i]", kQuantities);
  const Validity v = check_validity(term, 1);
  EXPECT_EQ(v.rule, ValidityRule::kSuffixRepeatedTooOften);
  EXPECT_FALSE(v.reason.empty());
  EXPECT_THROW(canonicalize(term), std::invalid_argument);
}

TEST(Validity, RejectsWrongFreeSuffixCount) {
  EXPECT_EQ(check_validity(parse_term("u[i] du[j]/dx[k]", kQuantities), 1).rule, ValidityRule::kWrongFreeSuffixCount);
  EXPECT_EQ(check_validity(parse_term("u[j] du[j]/dx[i]", kQuantities), 0).rule, ValidityRule::kWrongFreeSuffixCount);
  EXPECT_TRUE(check_validity(parse_term("u[j] du[j]/dx[i]", kQuantities), 1).ok());
  EXPECT_TRUE(check_validity(parse_term("u[j] u[j]", kQuantities), 0).ok());
}

TEST(Validity, RejectsUnlabelledSlots) {
  CandidateTerm t;
  t.factors.push_back({kU, {SuffixLabel{}}});
  EXPECT_EQ(check_validity(t, 1).rule, ValidityRule::kUnlabelled);
}

TEST(Canonicalize, FreeSuffixesBecomeLeadingLabels) {
  const auto c = canonicalize(parse_term("u[k] du[m]/dx[k]", kQuantities));
  ASSERT_EQ(c.free_suffixes().size(), 1u);
  EXPECT_EQ(c.free_suffixes()[0].id, 0);
  EXPECT_EQ(to_text(c), "u[j] du[i]/dx[j]");
}

TEST(Canonicalize, SymmetricBaseIndicesCommute) {
  EXPECT_TRUE(equivalent(parse_term("tau[j,i]", kQuantities), parse_term("tau[i,j]", kQuantities)));
  EXPECT_TRUE(equivalent(parse_term("tau[i,k] tau[k,j]", kQuantities), parse_term("tau[k,i] tau[j,k]", kQuantities)));
  EXPECT_FALSE(equivalent(parse_term("tau[i,k] du[j]/dx[k]", kQuantities), parse_term("tau[i,k] du[k]/dx[j]", kQuantities)));
}

TEST(Canonicalize, MixedDerivativeSlotsCommute) {
  EXPECT_TRUE(equivalent(parse_term("d2u[i]/dx[j]dx[k] u[j] u[k]", kQuantities),
                         parse_term("d2u[i]/dx[k]dx[j] u[j] u[k]", kQuantities)));
}

// Property: canonicalization is idempotent and constant on equivalence
// classes generated by factor shuffles, symmetric slot permutations and
// order-preserving relabellings.
TEST(Canonicalize, IdempotentAndInvariantUnderRelabelling) {
  std::mt19937_64 rng(7);
  const std::vector<TermTemplate> templates{{{kU, kDu}}, {{kU, kU, kDu}}, {{kU, kD2u}}, {{kTau, kDu}}, {{kTau, kTau}}, {{kU, kDtau}}};
  for (const auto& tmpl : templates) {
    for (int target : {0, 1, 2}) {
      for (const auto& term : assign_suffixes(tmpl)) {
        if (!check_validity(term, target)) continue;
        const CandidateTerm c = canonicalize(term);
        EXPECT_EQ(canonicalize(c), c);
        // Order-preserving map onto a sparse label set.
        std::map<int, int> relabel;
        std::vector<int> counts = term.label_counts();
        std::vector<int> targets;
        for (std::size_t id = 0; id < counts.size(); ++id) targets.push_back(static_cast<int>(3 * id + 1));
        for (std::size_t id = 0; id < counts.size(); ++id) relabel[static_cast<int>(id)] = targets[id];
        EXPECT_EQ(canonicalize(scramble(term, relabel, rng)), c) << to_text(term);

        // Dummy labels may be permuted arbitrarily among themselves.
        std::vector<int> dummies;
        for (const auto& s : term.repeated_suffixes()) dummies.push_back(s.id);
        std::vector<int> shuffled = dummies;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        std::map<int, int> dummy_map;
        for (std::size_t id = 0; id < counts.size(); ++id) dummy_map[static_cast<int>(id)] = static_cast<int>(id);
        for (std::size_t k = 0; k < dummies.size(); ++k) dummy_map[dummies[k]] = shuffled[k];
        EXPECT_EQ(canonicalize(scramble(term, dummy_map, rng)), c) << to_text(term);
      }
    }
  }
}

// Property: two valid terms are equivalent exactly when they evaluate to the
// same function of the fields (fingerprint oracle, 3D).
TEST(Canonicalize, AgreesWithEvaluationOracle) {
  const std::vector<TermTemplate> templates{{{kU, kDu}}, {{kU, kU, kDu}}, {{kU, kD2u}}, {{kTau, kDu}}, {{kU, kDtau}}};
  for (const auto& tmpl : templates) {
    for (int target : {0, 1, 2}) {
      std::map<std::string, std::vector<long long>> by_text;
      std::map<std::vector<long long>, std::string> by_print;
      for (const auto& term : assign_suffixes(tmpl)) {
        if (!check_validity(term, target)) continue;
        const std::string text = to_text(canonicalize(term));
        const auto print = testing::fingerprint_key(testing::fingerprint(term, 3, {"tau"}));
        auto [it, fresh] = by_text.emplace(text, print);
        if (!fresh) {
          EXPECT_EQ(it->second, print) << text << " vs " << to_text(term);
        }
        auto [jt, fresh_print] = by_print.emplace(print, text);
        if (!fresh_print) {
          EXPECT_EQ(jt->second, text) << "distinct classes with equal values: " << text;
        }
      }
      EXPECT_EQ(by_text.size(), by_print.size()) << to_text(tmpl) << " target " << target;
    }
  }
}

TEST(TermText, RoundTripsThroughParser) {
  for (const auto& tmpl : std::vector<TermTemplate>{{{kU, kD2u}}, {{kTau, kDtau}}, {{kP, kDu}}}) {
    for (const auto& term : assign_suffixes(tmpl)) {
      EXPECT_EQ(parse_term(to_text(term), kQuantities), term);
    }
  }
  EXPECT_EQ(to_text(CandidateTerm{}), "1");
}

TEST(TermText, ParserRejectsMalformedInput) {
  EXPECT_THROW(parse_term("w[i]", kQuantities), std::invalid_argument);
  EXPECT_THROW(parse_term("u[i", kQuantities), std::invalid_argument);
  EXPECT_THROW(parse_term("u[i,j]", kQuantities), std::invalid_argument);
}

TEST(FreeSuffixes, CountsOccurrences) {
  const auto term = parse_term("u[k] du[i]/dx[k] p", kQuantities);
  const auto free = term.free_suffixes();
  const auto rep = term.repeated_suffixes();
  ASSERT_EQ(free.size(), 1u);
  EXPECT_EQ(free[0].name(), "i");
  ASSERT_EQ(rep.size(), 1u);
  EXPECT_EQ(rep[0].name(), "k");
  EXPECT_EQ(term.slot_count(), 3);
}

}  // namespace
}  // namespace ctsr
