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
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ctsr/dataset.hpp"
#include "ctsr/field_source.hpp"
#include "ctsr/theta.hpp"

namespace ctsr {

struct OrthogonalTransform {
  enum class Kind { kLattice, kGeneral };
  Eigen::MatrixXd matrix;
  Kind kind = Kind::kGeneral;
  std::string label;

  [[nodiscard]] int dim() const { return static_cast<int>(matrix.rows()); }
  [[nodiscard]] double determinant() const { return matrix.determinant(); }
  /// R^T R = I within `tol` and |det| = 1.
  [[nodiscard]] bool orthogonal(double tol = 1e-12) const;

  static OrthogonalTransform identity(int dim);
  /// Haar-distributed rotation (det +1).
  static OrthogonalTransform random_rotation(int dim, std::mt19937_64& rng);
  /// Random rotation composed with a reflection (det -1).
  static OrthogonalTransform random_reflection(int dim, std::mt19937_64& rng);
  /// All signed axis permutations: 8 in 2D, 48 in 3D.
  static std::vector<OrthogonalTransform> lattice_group(int dim);
};

OrthogonalTransform compose(const OrthogonalTransform& second, const OrthogonalTransform& first);

/// Active transformation of a field source: an order-k channel becomes
/// R^{(x)k} T(R^T x), with spatial derivative slots transforming as extra
/// tensor indices.
class TransformedSource : public FieldSource {
 public:
  TransformedSource(const FieldSource& inner, OrthogonalTransform transform);

  [[nodiscard]] int spatial_dim() const override { return inner_.spatial_dim(); }
  [[nodiscard]] const std::vector<QuantityDecl>& quantities() const override { return inner_.quantities(); }
  [[nodiscard]] double value(const ComponentId& channel, const Point& x, double t) const override;

 private:
  const FieldSource& inner_;
  OrthogonalTransform transform_;
};

/// Grid counterpart of TransformedSource for signed permutations on a
/// periodic grid with equal extent and spacing on every axis. Point n maps
/// to R n (mod N); stored derivative channels transform with their axes.
/// Throws std::invalid_argument for other transforms or grids.
GridDataset transform_dataset(const GridDataset& ds, const OrthogonalTransform& transform);

/// Term evaluated with explicit pinned labels; tensor candidates pin their
/// free suffixes.
struct ProbeTerm {
  CandidateTerm term;
  std::vector<SuffixLabel> fixed;
  std::string name;

  static ProbeTerm tensor(const CandidateTerm& term);
};

/// All free-index components of a probe term at one point, ordered as free_tuples.
Eigen::VectorXd evaluate_components(const ProbeTerm& probe, const std::function<double(const ComponentId&)>& lookup, int dim);

/// R^{(x)k} applied to a vector of ordered order-k components.
Eigen::VectorXd rotate_components(const Eigen::VectorXd& components, const Eigen::MatrixXd& r, int order);

/// max over points and components of |f(RT)(Rx) - R f(T)(x)|, divided by
/// max(1, max |f(T)|).
double check_equivariance(const ProbeTerm& probe, const FieldSource& source, const OrthogonalTransform& transform,
                          const std::vector<Point>& points, double t = 0.0);

/// Lattice version on grid data with stencil derivatives. `points` are grid
/// indices of the original dataset.
double check_equivariance(const ProbeTerm& probe, const GridDataset& ds, const OrthogonalTransform& transform,
                          const std::vector<SampleRow>& points);

struct EquationInvariance {
  double residual_original = 0.0;
  double residual_transformed = 0.0;
  double lhs_norm = 0.0;
  /// (residual_transformed - residual_original) / lhs_norm
  [[nodiscard]] double increase() const;
};

/// Residual of sum_c xi_c term_c - lhs over all points and components, before
/// and after transforming the fields, with unchanged coefficients.
EquationInvariance check_equation_invariance(const std::vector<ProbeTerm>& terms, const Eigen::VectorXd& coefficients,
                                             const ComponentId& lhs_channel_template, const FieldSource& source,
                                             const OrthogonalTransform& transform, const std::vector<Point>& points,
                                             double t = 0.0);

std::vector<Point> random_points(int count, int dim, std::mt19937_64& rng);

struct EquivarianceRow {
  std::string candidate;
  std::string transform;
  double deviation = 0.0;
};

/// CSV matrix: candidate rows, one column per transform.
void write_equivariance_csv(std::ostream& out, const std::vector<EquivarianceRow>& rows);

}  // namespace ctsr
