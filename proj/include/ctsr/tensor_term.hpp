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

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ctsr {

/// Index label of a Cartesian tensor slot. Label 0 prints as "i", 1 as "j", ...
struct SuffixLabel {
  int id = -1;

  [[nodiscard]] bool assigned() const { return id >= 0; }
  [[nodiscard]] std::string name() const;

  friend auto operator<=>(const SuffixLabel&, const SuffixLabel&) = default;
};

/// Shape of a factor before labels are attached: a quantity, possibly
/// differentiated `deriv_order` times in space.
struct FactorShape {
  std::string base;
  int base_order = 0;
  int deriv_order = 0;
  bool symmetric_base = false;

  [[nodiscard]] int slot_count() const { return base_order + deriv_order; }

  /// Slot-index groups whose labels commute: the two indices of a symmetric
  /// order-2 quantity, and the derivative slots when there are two or more.
  [[nodiscard]] std::vector<std::vector<int>> symmetric_slot_groups() const;

  friend bool operator==(const FactorShape&, const FactorShape&) = default;
};

struct TensorFactor {
  FactorShape shape;
  std::vector<SuffixLabel> slots;

  friend bool operator==(const TensorFactor&, const TensorFactor&) = default;
};

/// Strict weak order used for factor sorting: base name, derivative order,
/// then the slot labels lexicographically.
bool factor_less(const TensorFactor& a, const TensorFactor& b);

/// Product of labelled tensor factors. An empty factor list is the constant 1.
struct CandidateTerm {
  std::vector<TensorFactor> factors;

  [[nodiscard]] int slot_count() const;
  [[nodiscard]] bool fully_labelled() const;

  /// Labels occurring exactly once, in ascending label order.
  [[nodiscard]] std::vector<SuffixLabel> free_suffixes() const;
  /// Labels occurring exactly twice, in ascending label order.
  [[nodiscard]] std::vector<SuffixLabel> repeated_suffixes() const;
  /// Occurrence count per label id (index = label id).
  [[nodiscard]] std::vector<int> label_counts() const;

  friend bool operator==(const CandidateTerm&, const CandidateTerm&) = default;
};

/// Unlabelled product of factor shapes, the output of the combination step.
struct TermTemplate {
  std::vector<FactorShape> factors;

  [[nodiscard]] int slot_count() const;
  friend bool operator==(const TermTemplate&, const TermTemplate&) = default;
};

/// Every labelling of the template's n slots with n distinct labels (n^n terms).
std::vector<CandidateTerm> assign_suffixes(const TermTemplate& tmpl);

enum class ValidityRule { kValid, kSuffixRepeatedTooOften, kWrongFreeSuffixCount, kUnlabelled };

struct Validity {
  ValidityRule rule = ValidityRule::kValid;
  std::string reason;

  [[nodiscard]] bool ok() const { return rule == ValidityRule::kValid; }
  explicit operator bool() const { return ok(); }
};

Validity check_validity(const CandidateTerm& term, int target_order);

/// Unique representative of the term's equivalence class under factor
/// commutation, permutation inside symmetric slot groups and renaming of
/// dummy (repeated) suffixes. Free suffixes are renamed to 0..f-1 keeping
/// their relative order. Throws std::invalid_argument for a term with a
/// label occurring more than twice or with unlabelled slots.
CandidateTerm canonicalize(const CandidateTerm& term);

bool equivalent(const CandidateTerm& a, const CandidateTerm& b);

/// Deterministic text form, e.g. "u[j] du[i]/dx[j]".
std::string to_text(const CandidateTerm& term);
std::string to_text(const TermTemplate& tmpl);

struct QuantityInfo {
  std::string name;
  int order = 0;
  bool symmetric = false;
};

/// Inverse of to_text for labelled terms. Label letters map back to ids
/// ("i" -> 0, ...); the result is not canonicalized. Throws
/// std::invalid_argument on unknown quantities or malformed factors.
CandidateTerm parse_term(std::string_view text, const std::vector<QuantityInfo>& quantities);

}  // namespace ctsr
