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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ctsr/component.hpp"

namespace ctsr {

/// File could not be opened, read or written.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Boundary { kPeriodic, kClamped };

struct QuantityDecl {
  std::string name;
  int order = 0;
  bool symmetric = false;
};

/// Structured-grid snapshots. Every channel holds times * points values,
/// flat index ((t * nz + z) * ny + y) * nx + x. Unused axes have extent 1.
struct GridDataset {
  int spatial_dim = 2;
  std::array<int, 3> shape{1, 1, 1};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  double dt = 1.0;
  int times = 1;
  std::array<Boundary, 3> boundary{Boundary::kPeriodic, Boundary::kPeriodic, Boundary::kPeriodic};
  std::vector<QuantityDecl> quantities;
  /// Keyed by canonical ComponentId::key(). Besides base components this may
  /// hold exact derivative channels, which take precedence over stencils.
  std::map<std::string, std::vector<double>> fields;
  nlohmann::json metadata = nlohmann::json::object();

  [[nodiscard]] std::size_t points() const {
    return static_cast<std::size_t>(shape[0]) * static_cast<std::size_t>(shape[1]) * static_cast<std::size_t>(shape[2]);
  }
  [[nodiscard]] std::size_t size() const { return points() * static_cast<std::size_t>(times); }
  [[nodiscard]] std::size_t flat(int t, const std::array<int, 3>& p) const {
    return ((static_cast<std::size_t>(t) * static_cast<std::size_t>(shape[2]) + static_cast<std::size_t>(p[2])) *
                static_cast<std::size_t>(shape[1]) +
            static_cast<std::size_t>(p[1])) *
               static_cast<std::size_t>(shape[0]) +
           static_cast<std::size_t>(p[0]);
  }

  [[nodiscard]] const QuantityDecl* quantity(const std::string& name) const;
  /// Sorted axes; sorted index pair for symmetric quantities.
  [[nodiscard]] ComponentId canonical(const ComponentId& id) const;
  [[nodiscard]] bool has(const ComponentId& id) const;
  /// Stored channel; throws std::out_of_range when absent.
  [[nodiscard]] const std::vector<double>& field(const ComponentId& id) const;
  void set(const ComponentId& id, std::vector<double> values);

  /// Adds a quantity declaration and zero-filled base components.
  void declare(const QuantityDecl& q);
  /// All base component ids of a declared quantity (i <= j for symmetric pairs).
  [[nodiscard]] std::vector<ComponentId> components(const QuantityDecl& q) const;

  /// Throws std::invalid_argument on inconsistent metadata or channel sizes.
  void validate() const;
};

/// Second-order central difference along `axes`, applied sequentially; a
/// repeated axis uses the compact three-point stencil. Periodic axes wrap;
/// points whose stencil leaves a clamped axis are NaN. Throws
/// std::invalid_argument naming the axis when it has fewer than 3 points.
std::vector<double> fd_derivative(const GridDataset& ds, const ComponentId& field, const std::vector<int>& axes);

/// Central difference in time at snapshot t (one snapshot of values).
/// Throws std::out_of_range for the first and last snapshot.
std::vector<double> time_derivative(const GridDataset& ds, const ComponentId& field, int t);

/// Resolves channels for a dataset: stored values first, otherwise spatial
/// stencils or the central time difference, computed once over the full grid.
class ChannelStore {
 public:
  explicit ChannelStore(const GridDataset& ds) : ds_(ds) {}
  const std::vector<double>& get(const ComponentId& id);
  [[nodiscard]] const GridDataset& dataset() const { return ds_; }

 private:
  const GridDataset& ds_;
  std::map<std::string, std::vector<double>> computed_;
};

struct SamplingSpec {
  int n_space = 50;
  int n_time = 20;  ///< 0 samples snapshot 0 only (steady data)
  std::uint64_t seed = 0;
};

struct SampleRow {
  std::array<int, 3> point{0, 0, 0};
  int t = 0;
};

struct SampleTable {
  std::vector<SampleRow> rows;
  std::vector<std::string> columns;  ///< canonical channel keys
  Eigen::MatrixXd values;            ///< rows x columns
  std::uint64_t seed = 0;

  /// Column of a channel, or -1.
  [[nodiscard]] int column(const std::string& key) const;
  [[nodiscard]] std::size_t size() const { return rows.size(); }
};

/// n_space spatial points x n_time snapshots, both drawn without replacement.
/// Spatial points keep a one-point margin on clamped axes when any channel
/// needs a stencil; snapshots exclude the first and last. Throws
/// std::invalid_argument when too few candidates exist.
SampleTable sample_points(const GridDataset& ds, const std::vector<ComponentId>& channels, const SamplingSpec& spec);
SampleTable sample_points(ChannelStore& store, const std::vector<ComponentId>& channels, const SamplingSpec& spec);

void write_sample_csv(std::ostream& out, const SampleTable& table);

/// `<stem>.json` header plus `<stem>.bin` little-endian float64 payload.
void save_dataset(const GridDataset& ds, const std::filesystem::path& stem);
GridDataset load_dataset(const std::filesystem::path& stem);

}  // namespace ctsr
