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

#include "ctsr/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "ctsr/csv.hpp"

namespace ctsr {

namespace {

bool is_signed_permutation(const Eigen::MatrixXd& r) {
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    int nonzero = 0;
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      const double v = r(i, j);
      if (v == 0.0) continue;
      if (v != 1.0 && v != -1.0) return false;
      ++nonzero;
    }
    if (nonzero != 1) return false;
  }
  return true;
}

// Image axis and sign of axis a under a signed permutation: R e_b = sign * e_a.
std::pair<int, double> permuted(const Eigen::MatrixXd& r, int a) {
  for (Eigen::Index b = 0; b < r.cols(); ++b) {
    if (r(a, b) != 0.0) return {static_cast<int>(b), r(a, b)};
  }
  throw std::logic_error("not a signed permutation");
}

std::vector<std::vector<ChannelMonomial>> expansions(const ProbeTerm& probe, int dim) {
  std::vector<std::vector<ChannelMonomial>> out;
  for (const auto& tuple : free_tuples(dim, static_cast<int>(probe.fixed.size()))) {
    out.push_back(expand_term(probe.term, probe.fixed, tuple, dim));
  }
  return out;
}

Eigen::VectorXd evaluate_expanded(const std::vector<std::vector<ChannelMonomial>>& expanded,
                                  const std::function<double(const ComponentId&)>& lookup) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(expanded.size()));
  for (std::size_t k = 0; k < expanded.size(); ++k) {
    double total = 0.0;
    for (const auto& m : expanded[k]) {
      double prod = m.coefficient;
      for (const auto& c : m.channels) prod *= lookup(c);
      total += prod;
    }
    out(static_cast<Eigen::Index>(k)) = total;
  }
  return out;
}

Point transform_point(const Eigen::MatrixXd& r, const Point& x) {
  Point y{0.0, 0.0, 0.0};
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.cols(); ++j) y[static_cast<std::size_t>(i)] += r(i, j) * x[static_cast<std::size_t>(j)];
  }
  return y;
}

}  // namespace

bool OrthogonalTransform::orthogonal(double tol) const {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) return false;
  const auto n = matrix.rows();
  if ((matrix.transpose() * matrix - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(std::abs(determinant()) - 1.0) <= tol * 10;
}

OrthogonalTransform OrthogonalTransform::identity(int dim) {
  return {Eigen::MatrixXd::Identity(dim, dim), Kind::kLattice, "identity"};
}

OrthogonalTransform OrthogonalTransform::random_rotation(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(dim, dim);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    if (r(i, i) < 0) q.col(i) *= -1.0;
  }
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return {q, Kind::kGeneral, "rotation"};
}

OrthogonalTransform OrthogonalTransform::random_reflection(int dim, std::mt19937_64& rng) {
  auto t = random_rotation(dim, rng);
  t.matrix.col(0) *= -1.0;
  t.label = "reflection";
  return t;
}

std::vector<OrthogonalTransform> OrthogonalTransform::lattice_group(int dim) {
  std::vector<int> perm(static_cast<std::size_t>(dim));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<OrthogonalTransform> out;
  do {
    for (int signs = 0; signs < (1 << dim); ++signs) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
      std::string label = "perm";
      for (int i = 0; i < dim; ++i) {
        const double s = (signs >> i) & 1 ? -1.0 : 1.0;
        m(i, perm[static_cast<std::size_t>(i)]) = s;
        label += (s < 0 ? "-" : "+") + std::string(1, axis_letter(perm[static_cast<std::size_t>(i)]));
      }
      out.push_back({m, Kind::kLattice, label});
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

OrthogonalTransform compose(const OrthogonalTransform& second, const OrthogonalTransform& first) {
  const bool lattice = first.kind == OrthogonalTransform::Kind::kLattice && second.kind == OrthogonalTransform::Kind::kLattice;
  return {second.matrix * first.matrix, lattice ? OrthogonalTransform::Kind::kLattice : OrthogonalTransform::Kind::kGeneral,
          second.label + "*" + first.label};
}

TransformedSource::TransformedSource(const FieldSource& inner, OrthogonalTransform transform)
    : inner_(inner), transform_(std::move(transform)) {
  if (transform_.dim() != inner_.spatial_dim()) throw std::invalid_argument("transform dimension differs from the field source");
}

double TransformedSource::value(const ComponentId& channel, const Point& x, double t) const {
  const Eigen::MatrixXd& r = transform_.matrix;
  const int dim = spatial_dim();
  const Point y = transform_point(r.transpose(), x);
  // Slots: tensor indices then derivative axes, all transforming with R.
  std::vector<int> out_slots = channel.index;
  out_slots.insert(out_slots.end(), channel.axes.begin(), channel.axes.end());
  const std::size_t order = channel.index.size();
  std::vector<int> in_slots(out_slots.size(), 0);
  double total = 0.0;
  while (true) {
    double weight = 1.0;
    for (std::size_t s = 0; s < out_slots.size() && weight != 0.0; ++s) weight *= r(out_slots[s], in_slots[s]);
    if (weight != 0.0) {
      ComponentId src{channel.quantity, std::vector<int>(in_slots.begin(), in_slots.begin() + static_cast<std::ptrdiff_t>(order)),
                      std::vector<int>(in_slots.begin() + static_cast<std::ptrdiff_t>(order), in_slots.end()),
                      channel.time_derivative};
      total += weight * inner_.value(src, y, t);
    }
    std::size_t pos = 0;
    while (pos < in_slots.size() && ++in_slots[pos] == dim) in_slots[pos++] = 0;
    if (pos == in_slots.size()) break;
  }
  return total;
}

GridDataset transform_dataset(const GridDataset& ds, const OrthogonalTransform& transform) {
  const Eigen::MatrixXd& r = transform.matrix;
  const int dim = ds.spatial_dim;
  if (transform.dim() != dim || !is_signed_permutation(r)) {
    throw std::invalid_argument("grid transforms must be signed permutations of the dataset axes");
  }
  for (int a = 0; a < dim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (ds.boundary[ua] != Boundary::kPeriodic) throw std::invalid_argument("grid transforms need periodic axes");
    if (ds.shape[ua] != ds.shape[0] || ds.spacing[ua] != ds.spacing[0]) {
      throw std::invalid_argument("grid transforms need equal extent and spacing on every axis");
    }
  }
  GridDataset out = ds;
  const int n = ds.shape[0];
  const std::size_t pts = ds.points();
  // Source grid point of every target point: R^T m mod N.
  std::vector<std::size_t> source(pts);
  for (std::size_t p = 0; p < pts; ++p) {
    std::array<int, 3> m{static_cast<int>(p % static_cast<std::size_t>(ds.shape[0])),
                         static_cast<int>((p / static_cast<std::size_t>(ds.shape[0])) % static_cast<std::size_t>(ds.shape[1])),
                         static_cast<int>(p / (static_cast<std::size_t>(ds.shape[0]) * static_cast<std::size_t>(ds.shape[1])))};
    std::array<int, 3> q{0, 0, 0};
    for (int b = 0; b < dim; ++b) {
      int v = 0;
      for (int a = 0; a < dim; ++a) v += static_cast<int>(r(a, b)) * m[static_cast<std::size_t>(a)];
      q[static_cast<std::size_t>(b)] = ((v % n) + n) % n;
    }
    source[p] = ds.flat(0, q);
  }
  for (auto& [key, values] : out.fields) {
    const ComponentId target = ComponentId::parse(key);
    ComponentId src = target;
    double sign = 1.0;
    for (auto* slots : {&src.index, &src.axes}) {
      for (int& a : *slots) {
        const auto [b, s] = permuted(r, a);
        a = b;
        sign *= s;
      }
    }
    const auto& in = ds.field(src);
    for (int t = 0; t < ds.times; ++t) {
      const std::size_t off = static_cast<std::size_t>(t) * pts;
      for (std::size_t p = 0; p < pts; ++p) values[off + p] = sign * in[off + source[p]];
    }
  }
  out.metadata["transform"] = transform.label;
  return out;
}

ProbeTerm ProbeTerm::tensor(const CandidateTerm& term) { return {term, term.free_suffixes(), to_text(term)}; }

Eigen::VectorXd evaluate_components(const ProbeTerm& probe, const std::function<double(const ComponentId&)>& lookup, int dim) {
  return evaluate_expanded(expansions(probe, dim), lookup);
}

Eigen::VectorXd rotate_components(const Eigen::VectorXd& components, const Eigen::MatrixXd& r, int order) {
  const auto dim = r.rows();
  Eigen::VectorXd out = components;
  // Apply R along one tensor slot at a time; slot s has stride dim^(order-1-s).
  for (int s = 0; s < order; ++s) {
    Eigen::Index stride = 1;
    for (int q = s + 1; q < order; ++q) stride *= dim;
    Eigen::VectorXd next = Eigen::VectorXd::Zero(out.size());
    for (Eigen::Index idx = 0; idx < out.size(); ++idx) {
      const Eigen::Index digit = (idx / stride) % dim;
      const Eigen::Index base = idx - digit * stride;
      for (Eigen::Index j = 0; j < dim; ++j) next(idx) += r(digit, j) * out(base + j * stride);
    }
    out = std::move(next);
  }
  return out;
}

double check_equivariance(const ProbeTerm& probe, const FieldSource& source, const OrthogonalTransform& transform,
                          const std::vector<Point>& points, double t) {
  const int dim = source.spatial_dim();
  const auto order = static_cast<int>(probe.fixed.size());
  const auto expanded = expansions(probe, dim);
  const TransformedSource moved(source, transform);
  double max_dev = 0.0;
  double max_val = 1.0;
  for (const auto& x : points) {
    const auto original = evaluate_expanded(expanded, [&](const ComponentId& c) { return source.value(c, x, t); });
    const Point rx = transform_point(transform.matrix, x);
    const auto after = evaluate_expanded(expanded, [&](const ComponentId& c) { return moved.value(c, rx, t); });
    const auto expected = rotate_components(original, transform.matrix, order);
    max_dev = std::max(max_dev, (after - expected).cwiseAbs().maxCoeff());
    max_val = std::max(max_val, original.cwiseAbs().maxCoeff());
  }
  return max_dev / max_val;
}

double check_equivariance(const ProbeTerm& probe, const GridDataset& ds, const OrthogonalTransform& transform,
                          const std::vector<SampleRow>& points) {
  const int dim = ds.spatial_dim;
  const auto order = static_cast<int>(probe.fixed.size());
  const auto expanded = expansions(probe, dim);
  const GridDataset moved = transform_dataset(ds, transform);
  ChannelStore before(ds);
  ChannelStore after(moved);
  const int n = ds.shape[0];
  double max_dev = 0.0;
  double max_val = 1.0;
  for (const auto& row : points) {
    std::array<int, 3> m{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      int v = 0;
      for (int b = 0; b < dim; ++b) v += static_cast<int>(transform.matrix(a, b)) * row.point[static_cast<std::size_t>(b)];
      m[static_cast<std::size_t>(a)] = ((v % n) + n) % n;
    }
    const auto original = evaluate_expanded(expanded, [&](const ComponentId& c) { return before.get(c)[ds.flat(row.t, row.point)]; });
    const auto moved_val = evaluate_expanded(expanded, [&](const ComponentId& c) { return after.get(c)[moved.flat(row.t, m)]; });
    const auto expected = rotate_components(original, transform.matrix, order);
    max_dev = std::max(max_dev, (moved_val - expected).cwiseAbs().maxCoeff());
    max_val = std::max(max_val, original.cwiseAbs().maxCoeff());
  }
  return max_dev / max_val;
}

double EquationInvariance::increase() const {
  return lhs_norm > 0.0 ? (residual_transformed - residual_original) / lhs_norm : residual_transformed - residual_original;
}

EquationInvariance check_equation_invariance(const std::vector<ProbeTerm>& terms, const Eigen::VectorXd& coefficients,
                                             const ComponentId& lhs_channel, const FieldSource& source,
                                             const OrthogonalTransform& transform, const std::vector<Point>& points,
                                             double t) {
  if (static_cast<Eigen::Index>(terms.size()) != coefficients.size()) {
    throw std::invalid_argument("equation invariance: coefficient count mismatch");
  }
  const int dim = source.spatial_dim();
  const int order = source.order_of(lhs_channel.quantity);
  const auto tuples = free_tuples(dim, order);
  std::vector<std::vector<std::vector<ChannelMonomial>>> expanded;
  for (const auto& p : terms) {
    if (static_cast<int>(p.fixed.size()) != order) throw std::invalid_argument("equation invariance: term order mismatch");
    expanded.push_back(expansions(p, dim));
  }
  const TransformedSource moved(source, transform);
  EquationInvariance out;
  double r0 = 0.0;
  double r1 = 0.0;
  double l0 = 0.0;
  auto residual = [&](const FieldSource& src, const Point& x, double& acc, double* lhs_acc) {
    auto lookup = [&](const ComponentId& c) { return src.value(c, x, t); };
    Eigen::VectorXd model = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(tuples.size()));
    for (std::size_t c = 0; c < terms.size(); ++c) {
      if (coefficients(static_cast<Eigen::Index>(c)) == 0.0) continue;
      model += coefficients(static_cast<Eigen::Index>(c)) * evaluate_expanded(expanded[c], lookup);
    }
    for (std::size_t k = 0; k < tuples.size(); ++k) {
      ComponentId id = lhs_channel;
      id.index = tuples[k];
      const double lhs = src.value(id, x, t);
      acc += std::pow(model(static_cast<Eigen::Index>(k)) - lhs, 2);
      if (lhs_acc != nullptr) *lhs_acc += lhs * lhs;
    }
  };
  for (const auto& x : points) {
    residual(source, x, r0, &l0);
    residual(moved, transform_point(transform.matrix, x), r1, nullptr);
  }
  out.residual_original = std::sqrt(r0);
  out.residual_transformed = std::sqrt(r1);
  out.lhs_norm = std::sqrt(l0);
  return out;
}

std::vector<Point> random_points(int count, int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(0.0, 2.0 * M_PI);
  std::vector<Point> out;
  for (int i = 0; i < count; ++i) {
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) p[static_cast<std::size_t>(a)] = coord(rng);
    out.push_back(p);
  }
  return out;
}

void write_equivariance_csv(std::ostream& out, const std::vector<EquivarianceRow>& rows) {
  std::vector<std::string> candidates;
  std::vector<std::string> transforms;
  std::map<std::pair<std::string, std::string>, double> cell;
  for (const auto& r : rows) {
    if (std::find(candidates.begin(), candidates.end(), r.candidate) == candidates.end()) candidates.push_back(r.candidate);
    if (std::find(transforms.begin(), transforms.end(), r.transform) == transforms.end()) transforms.push_back(r.transform);
    cell[{r.candidate, r.transform}] = r.deviation;
  }
  out << "candidate";
  for (const auto& t : transforms) out << ',' << csv_field(t);
  out << '\n';
  for (const auto& c : candidates) {
    out << csv_field(c);
    for (const auto& t : transforms) {
      auto it = cell.find({c, t});
      out << ',' << (it == cell.end() ? std::string() : format_double(it->second));
    }
    out << '\n';
  }
}

}  // namespace ctsr
