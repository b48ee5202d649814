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
#include <optional>
#include <string>
#include <vector>

#include "ctsr/component.hpp"
#include "ctsr/tensor_term.hpp"

namespace ctsr {

/// A physical quantity offered to the library builder.
struct InputTensorSpec {
  std::string name;
  int base_order = 0;
  int max_deriv = 0;  ///< 0, 1 or 2
  bool symmetric_base = false;
  bool include_as_nonderivative = true;
  /// Derivative depths that are not emitted as standalone `1 x derivative`
  /// products. Products with non-derivative factors are kept.
  std::vector<int> excluded_standalone_derivatives;
  /// A constant input (e.g. the gravity direction) is never differentiated and
  /// occupies the single derivative slot of a template instead of a
  /// non-derivative slot; scalar mode skips it.
  bool constant = false;

  [[nodiscard]] FactorShape shape(int deriv_order) const {
    return {name, base_order, deriv_order, symmetric_base};
  }
};

enum class LibraryMode { kTensor, kScalar };

struct LibrarySpec {
  std::vector<InputTensorSpec> inputs;
  int max_product_order = 2;  ///< P
  int target_order = 1;
  LibraryMode mode = LibraryMode::kTensor;
  int spatial_dim = 3;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// Combination step: (0..P non-derivative factors, with repetition) x
/// ({1} + derivative terms + constant inputs). The pure constant comes first.
std::vector<TermTemplate> enumerate_templates(const LibrarySpec& spec);

struct LibraryEntry {
  CandidateTerm term;  ///< canonical
  std::string text;
  int template_id = -1;
};

struct TensorLibrary {
  std::vector<TermTemplate> templates;
  std::vector<LibraryEntry> entries;  ///< sorted by text, unique
  std::size_t raw_assignments = 0;    ///< labellings generated before filtering

  [[nodiscard]] std::size_t size() const { return entries.size(); }
  /// Column of the entry whose canonical text equals `text`, if present.
  [[nodiscard]] std::optional<std::size_t> find(const std::string& text) const;
};

TensorLibrary build_tensor_library(const LibrarySpec& spec);

/// Scalar-mode candidate: a monomial in field components times at most one
/// derivative component. Derivative axes keep their order, so d2v/dydx and
/// d2v/dxdy are different candidates.
struct ScalarCandidate {
  std::vector<ComponentId> monomial;
  std::optional<ComponentId> derivative;
  std::string text;
};

struct ScalarLibrary {
  std::vector<ScalarCandidate> entries;
  [[nodiscard]] std::size_t size() const { return entries.size(); }
};

ScalarLibrary build_scalar_library(const LibrarySpec& spec);

std::string scalar_text(const std::vector<ComponentId>& monomial, const std::optional<ComponentId>& derivative);

/// Report: count line followed by one line per candidate.
void write_library_report(std::ostream& out, const TensorLibrary& library);
void write_library_report(std::ostream& out, const ScalarLibrary& library);
/// CSV: index, canonical text, template id (-1 for scalar candidates).
void write_library_csv(std::ostream& out, const TensorLibrary& library);
void write_library_csv(std::ostream& out, const ScalarLibrary& library);

}  // namespace ctsr
