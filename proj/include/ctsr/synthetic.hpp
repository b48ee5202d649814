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
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ctsr/dataset.hpp"
#include "ctsr/field_source.hpp"
#include "ctsr/library.hpp"
#include "ctsr/tensor_term.hpp"
#include "ctsr/theta.hpp"

namespace ctsr {

// ---------------------------------------------------------------------------
// Trigonometric field family
// ---------------------------------------------------------------------------

struct TrigMode {
  std::array<int, 3> k{0, 0, 0};
  double a_cos = 0.0;
  double a_sin = 0.0;
  double omega = 0.0;
};

/// f(x, t) = offset + sum_m a_cos cos(k.x + omega t) + a_sin sin(k.x + omega t),
/// 2 pi periodic in every axis.
struct TrigField {
  std::vector<TrigMode> modes;
  double offset = 0.0;

  /// Derivative along `axes` (any order) and `time_order` times in t.
  [[nodiscard]] double value(const Point& x, double t, const std::vector<int>& axes = {}, int time_order = 0) const;
};

struct FieldFamily {
  int n_modes = 12;
  int max_wavenumber = 4;
  double amplitude = 1.0;
  double max_offset = 1.0;
  double max_omega = 1.0;
  /// Amplitude factor applied once per axis along which a mode varies. On an
  /// axis with richness below 1, even-indexed modes do not vary at all.
  std::array<double, 3> richness{1.0, 1.0, 1.0};

  TrigField draw(std::mt19937_64& rng, int dim) const;
};

// ---------------------------------------------------------------------------
// Manufactured solutions
// ---------------------------------------------------------------------------

enum class DerivativeMode { kAnalytic, kStencil };

struct ManufacturedSpec {
  std::string equation = "custom";
  int spatial_dim = 3;
  int points_per_axis = 16;
  int times = 24;  ///< 1 gives a steady dataset
  double dt = 0.05;
  std::vector<InputTensorSpec> inputs;
  std::map<std::string, std::vector<double>> constants;  ///< values of constant inputs, by component
  std::vector<WeightedTerm> truth;
  /// Left side channel: `<quantity>[..]_t` when lhs_time_derivative, else a
  /// declared quantity `<quantity>` of order target_order.
  std::string lhs_quantity = "u";
  bool lhs_time_derivative = true;
  bool lhs_symmetric = false;
  int target_order = 1;
  FieldFamily family;
  DerivativeMode derivative_mode = DerivativeMode::kAnalytic;
  /// Standard deviation of additive Gaussian noise on every stored channel,
  /// left side included. Models a fixed measurement error floor.
  double noise = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Analytic fields of a manufactured spec; the left-side channel is the
/// truth expression evaluated exactly.
class ManufacturedFields : public FieldSource {
 public:
  explicit ManufacturedFields(ManufacturedSpec spec);

  [[nodiscard]] int spatial_dim() const override { return spec_.spatial_dim; }
  [[nodiscard]] const std::vector<QuantityDecl>& quantities() const override { return quantities_; }
  [[nodiscard]] double value(const ComponentId& channel, const Point& x, double t) const override;

  [[nodiscard]] const ManufacturedSpec& spec() const { return spec_; }
  [[nodiscard]] bool is_lhs(const ComponentId& channel) const;
  /// Field of a canonical base component key, or nullptr for constants and the left side.
  [[nodiscard]] const TrigField* field(const std::string& base_key) const;

 private:
  ManufacturedSpec spec_;
  std::vector<QuantityDecl> quantities_;
  std::map<std::string, TrigField> fields_;   // canonical base key -> field
  std::map<std::string, double> constants_;   // canonical base key -> value
};

/// Samples the manufactured fields on [0, 2 pi)^d with periodic boundaries.
/// Analytic mode stores every derivative channel the inputs declare; stencil
/// mode stores base components only. Without noise the left-side channel is exact.
GridDataset manufactured_dataset(const ManufacturedSpec& spec);

// ---------------------------------------------------------------------------
// 2D periodic Burgers solver
// ---------------------------------------------------------------------------

struct BurgersConfig {
  int n = 64;
  double length = 6.283185307179586;
  double epsilon = 0.1;
  double dt = 0.002;
  int steps = 1000;
  int save_every = 10;
  std::uint64_t seed = 0;
  int max_wavenumber = 4;
  int reference_lattice = 256;  ///< lattice on which the initial amplitude is normalized

  void validate() const;
  [[nodiscard]] int snapshots() const { return steps / save_every + 1; }
};

struct BurgersState {
  int n = 0;
  double h = 0.0;
  std::vector<double> u;  ///< x fastest
  std::vector<double> v;
};

/// Initial velocity: each component is 2 w / max|w| + c with w a random
/// trigonometric field (|k|, |l| <= max_wavenumber, normal coefficients)
/// and c uniform in [-2, 2].
BurgersState burgers_initial_state(const BurgersConfig& config);

/// One explicit Euler step with second-order central differences.
void burgers_step(BurgersState& state, double epsilon, double dt);

/// Throws std::invalid_argument when the step violates the stability bound
/// and std::runtime_error naming the step on a non-finite state.
GridDataset burgers2d_simulate(const BurgersConfig& config);

}  // namespace ctsr
