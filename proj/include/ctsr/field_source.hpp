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

#include <array>
#include <vector>

#include "ctsr/component.hpp"
#include "ctsr/dataset.hpp"

namespace ctsr {

using Point = std::array<double, 3>;

/// Pointwise access to channels of continuous fields: base components,
/// spatial derivatives (ComponentId::axes) and time derivatives.
class FieldSource {
 public:
  virtual ~FieldSource() = default;
  [[nodiscard]] virtual int spatial_dim() const = 0;
  [[nodiscard]] virtual const std::vector<QuantityDecl>& quantities() const = 0;
  [[nodiscard]] virtual double value(const ComponentId& channel, const Point& x, double t) const = 0;

  /// Tensor order of a quantity; throws std::out_of_range when unknown.
  [[nodiscard]] int order_of(const std::string& quantity) const;
};

}  // namespace ctsr
