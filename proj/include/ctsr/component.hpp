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

#include <string>
#include <string_view>
#include <vector>

namespace ctsr {

/// One scalar channel of a physical quantity: a tensor component, optionally
/// differentiated along spatial axes or once in time.
///
/// Key grammar: `name` + `[a]` per tensor index + optional `_` followed by
/// axis letters (x, y, z) + optional `_t` for a time derivative, e.g.
/// `p`, `u[1]`, `tau[0][2]_xz`, `u[0]_t`.
struct ComponentId {
  std::string quantity;
  std::vector<int> index;
  std::vector<int> axes;
  bool time_derivative = false;

  /// Mixed partials commute on smooth fields and under central stencils, so
  /// axes are sorted; the index pair of a symmetric quantity is sorted too.
  [[nodiscard]] ComponentId canonical(bool symmetric_quantity) const;
  [[nodiscard]] std::string key() const;
  [[nodiscard]] ComponentId base() const { return {quantity, index, {}, false}; }

  /// Throws std::invalid_argument on malformed keys.
  static ComponentId parse(std::string_view key);

  friend auto operator<=>(const ComponentId&, const ComponentId&) = default;
};

char axis_letter(int axis);

/// Quantity names must be non-empty identifiers without '[' or '_'.
bool valid_quantity_name(std::string_view name);

}  // namespace ctsr
