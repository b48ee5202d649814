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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ctsr {

enum class TolSchedule {
  kRefine,     ///< improvement lowers the tolerance (/1.5), otherwise it doubles
  kReference,  ///< additive schedule: improvement raises the tolerance
};

struct Hyperparams {
  double lambda = 1e-5;
  double d_tol = 1e-3;
  int n_train = 25;
  int n_stridge = 10;
  double split_ratio = 0.8;
  std::uint64_t seed = 0;
  TolSchedule tol_schedule = TolSchedule::kRefine;
  bool normalize_columns = true;

  void validate() const {
    if (!(lambda >= 0.0)) throw std::invalid_argument("hyperparameters: lambda must be >= 0");
    if (!(d_tol > 0.0)) throw std::invalid_argument("hyperparameters: d_tol must be > 0");
    if (n_train < 1 || n_stridge < 1) throw std::invalid_argument("hyperparameters: n_train and n_stridge must be >= 1");
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw std::invalid_argument("hyperparameters: split_ratio must be in (0, 1)");
  }
};

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
struct SparseSolution {
  VectorX<Scalar> coefficients;
  std::vector<Eigen::Index> support;  ///< indices with nonzero coefficient, ascending
  Scalar test_error = 0;              ///< selection error of the returned solution
  Scalar baseline_error = 0;          ///< selection error of the least-squares start
  Scalar kappa = 0;                   ///< condition number entering the penalty
  Scalar best_tolerance = 0;
  int iterations_run = 0;
  std::vector<std::pair<Scalar, Scalar>> tolerance_trace;  ///< (tolerance, error) per step
};

template <class Scalar>
std::vector<Eigen::Index> support_of(const VectorX<Scalar>& xi) {
  std::vector<Eigen::Index> s;
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    if (xi(i) != Scalar(0)) s.push_back(i);
  }
  return s;
}

/// Minimum-norm least squares; `rank_deficient` reports a numerically singular system.
template <class Scalar>
VectorX<Scalar> least_squares(const MatrixX<Scalar>& theta, const VectorX<Scalar>& lhs, bool* rank_deficient = nullptr) {
  Eigen::CompleteOrthogonalDecomposition<MatrixX<Scalar>> cod(theta);
  if (rank_deficient != nullptr) *rank_deficient = cod.rank() < theta.cols();
  return cod.solve(lhs);
}

/// argmin |theta xi - lhs|^2 + lambda |xi|^2. lambda = 0 falls back to the
/// minimum-norm least-squares solution.
template <class Scalar>
VectorX<Scalar> ridge(const MatrixX<Scalar>& theta, const VectorX<Scalar>& lhs, Scalar lambda, bool* rank_deficient = nullptr) {
  if (theta.cols() == 0) throw std::invalid_argument("ridge: theta has no columns");
  if (theta.rows() != lhs.size()) throw std::invalid_argument("ridge: row count mismatch");
  if (lambda == Scalar(0)) return least_squares<Scalar>(theta, lhs, rank_deficient);
  if (rank_deficient != nullptr) *rank_deficient = false;
  MatrixX<Scalar> gram = theta.transpose() * theta;
  gram.diagonal().array() += lambda;
  return gram.ldlt().solve(theta.transpose() * lhs);
}

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> singular_values(const MatrixX<Scalar>& theta) {
  return Eigen::BDCSVD<MatrixX<Scalar>>(theta).singularValues();
}

/// sigma_max / sigma_min; infinity when sigma_min vanishes at working precision.
template <class Scalar>
Scalar condition_number(const MatrixX<Scalar>& theta) {
  if (theta.size() == 0) throw std::invalid_argument("condition_number: empty matrix");
  const auto s = singular_values<Scalar>(theta);
  const Scalar smax = s(0);
  const Scalar smin = s(s.size() - 1);
  if (smax == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  const Scalar cutoff = smax * std::numeric_limits<Scalar>::epsilon() * static_cast<Scalar>(std::max(theta.rows(), theta.cols()));
  if (smin <= cutoff) return std::numeric_limits<Scalar>::infinity();
  return smax / smin;
}

/// sigma_max over the smallest singular value above the rank cutoff. Equals
/// condition_number for full-rank input and stays finite under exact
/// column dependencies.
template <class Scalar>
Scalar effective_condition_number(const MatrixX<Scalar>& theta) {
  if (theta.size() == 0) throw std::invalid_argument("effective_condition_number: empty matrix");
  const auto s = singular_values<Scalar>(theta);
  const Scalar smax = s(0);
  if (smax == Scalar(0)) return Scalar(1);
  const Scalar cutoff = smax * std::numeric_limits<Scalar>::epsilon() * static_cast<Scalar>(std::max(theta.rows(), theta.cols()));
  Scalar smin = smax;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) smin = s(i);
  }
  return smax / smin;
}

/// |theta xi - lhs|^2 + 1e-3 * kappa * nnz(xi).
template <class Scalar>
Scalar selection_error(const MatrixX<Scalar>& theta_test, const VectorX<Scalar>& lhs_test, const VectorX<Scalar>& xi, Scalar kappa) {
  const Scalar residual = (theta_test * xi - lhs_test).squaredNorm();
  const auto nnz = static_cast<Scalar>((xi.array() != Scalar(0)).count());
  return nnz == Scalar(0) ? residual : residual + Scalar(1e-3) * kappa * nnz;
}

/// Per-call record of a stridge run.
template <class Scalar>
struct StridgeTrace {
  std::vector<std::vector<Eigen::Index>> active_sets;  ///< after each thresholding pass
  VectorX<Scalar> pre_debias;                           ///< coefficients before the refit
  bool debiased = false;
};

namespace detail {

template <class Scalar>
VectorX<Scalar> ridge_on(const MatrixX<Scalar>& gram, const VectorX<Scalar>& rhs, const MatrixX<Scalar>& theta,
                         const VectorX<Scalar>& lhs, const std::vector<Eigen::Index>& active, Scalar lambda) {
  if (lambda == Scalar(0)) return least_squares<Scalar>(theta(Eigen::all, active), lhs);
  MatrixX<Scalar> g = gram(active, active);
  g.diagonal().array() += lambda;
  return g.ldlt().solve(VectorX<Scalar>(rhs(active)));
}

// Sequential thresholding with a precomputed Gram matrix and right side.
template <class Scalar>
VectorX<Scalar> stridge_gram(const MatrixX<Scalar>& gram, const VectorX<Scalar>& rhs, const MatrixX<Scalar>& theta,
                             const VectorX<Scalar>& lhs, Scalar lambda, Scalar tol, int n_stridge, StridgeTrace<Scalar>* trace) {
  const Eigen::Index n = theta.cols();
  std::vector<Eigen::Index> active(static_cast<std::size_t>(n));
  std::iota(active.begin(), active.end(), Eigen::Index{0});
  VectorX<Scalar> xi = VectorX<Scalar>::Zero(n);
  xi(active) = ridge_on<Scalar>(gram, rhs, theta, lhs, active, lambda);

  // Drops |xi| < tol from the active set; returns whether anything was removed.
  auto threshold = [&]() {
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j : active) {
      if (std::abs(xi(j)) < tol) {
        xi(j) = Scalar(0);
      } else {
        kept.push_back(j);
      }
    }
    const bool removed = kept.size() != active.size();
    active = std::move(kept);
    if (trace != nullptr) trace->active_sets.push_back(active);
    return removed;
  };

  bool stable = false;
  for (int it = 0; it < n_stridge; ++it) {
    if (!threshold()) {
      stable = true;
      break;
    }
    if (active.empty()) break;
    xi.setZero();
    xi(active) = ridge_on<Scalar>(gram, rhs, theta, lhs, active, lambda);
  }
  if (!stable && !active.empty()) threshold();
  if (trace != nullptr) trace->pre_debias = xi;
  if (active.empty()) return VectorX<Scalar>::Zero(n);
  if (static_cast<Eigen::Index>(active.size()) < n) {
    xi.setZero();
    xi(active) = least_squares<Scalar>(theta(Eigen::all, active), lhs);
    if (trace != nullptr) trace->debiased = true;
  }
  return xi;
}

}  // namespace detail

/// Ridge solve, hard threshold at `tol`, re-solve on the survivors until the
/// active set stops changing or n_stridge passes ran; the surviving support is
/// refit by unregularized least squares. tol = 0 returns plain ridge.
template <class Scalar>
VectorX<Scalar> stridge(const MatrixX<Scalar>& theta, const VectorX<Scalar>& lhs, Scalar lambda, Scalar tol, int n_stridge,
                        StridgeTrace<Scalar>* trace = nullptr) {
  if (tol < Scalar(0)) throw std::invalid_argument("stridge: tol must be >= 0");
  if (theta.cols() == 0) throw std::invalid_argument("stridge: theta has no columns");
  if (theta.rows() != lhs.size()) throw std::invalid_argument("stridge: row count mismatch");
  const MatrixX<Scalar> gram = theta.transpose() * theta;
  const VectorX<Scalar> rhs = theta.transpose() * lhs;
  return detail::stridge_gram<Scalar>(gram, rhs, theta, lhs, lambda, tol, n_stridge, trace);
}

/// Seeded row split into train/test parts; the permutation is shared by all
/// callers using the same seed and row count.
inline std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_rows(Eigen::Index rows, double train_ratio,
                                                                                std::uint64_t seed) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(rows));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(perm[i - 1], perm[pick(rng)]);
  }
  const auto n_train = static_cast<std::size_t>(std::floor(train_ratio * static_cast<double>(rows)));
  std::vector<Eigen::Index> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<Eigen::Index> test(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

/// Train/test wrapper around stridge that adapts the tolerance by the
/// selection error and returns the best-scoring thresholded solution.
template <class Scalar>
SparseSolution<Scalar> train_stridge(const MatrixX<Scalar>& theta, const VectorX<Scalar>& lhs, const Hyperparams& hyper) {
  hyper.validate();
  if (theta.cols() == 0) throw std::invalid_argument("train_stridge: theta has no columns");
  if (theta.rows() != lhs.size()) throw std::invalid_argument("train_stridge: row count mismatch");
  const auto [train, test] = split_rows(theta.rows(), hyper.split_ratio, hyper.seed);
  if (test.empty() || train.empty()) throw std::invalid_argument("train_stridge: split leaves an empty train or test set");

  const Eigen::Index n = theta.cols();
  MatrixX<Scalar> a_train = theta(train, Eigen::all);
  MatrixX<Scalar> a_test = theta(test, Eigen::all);
  const VectorX<Scalar> y_train = lhs(train);
  const VectorX<Scalar> y_test = lhs(test);

  VectorX<Scalar> scale = VectorX<Scalar>::Ones(n);
  if (hyper.normalize_columns) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar norm = a_train.col(j).norm();
      if (norm > Scalar(0)) scale(j) = Scalar(1) / norm;
    }
    a_train = a_train * scale.asDiagonal();
    a_test = a_test * scale.asDiagonal();
  }

  SparseSolution<Scalar> out;
  out.kappa = effective_condition_number<Scalar>(a_train);
  const MatrixX<Scalar> gram = a_train.transpose() * a_train;
  const VectorX<Scalar> rhs = a_train.transpose() * y_train;
  const VectorX<Scalar> baseline = least_squares<Scalar>(a_train, y_train);
  Scalar incumbent = selection_error<Scalar>(a_test, y_test, baseline, out.kappa);
  out.baseline_error = incumbent;

  const auto lambda = static_cast<Scalar>(hyper.lambda);
  const auto d_tol = static_cast<Scalar>(hyper.d_tol);
  const Scalar cap = Scalar(10) * d_tol * std::pow(Scalar(2), static_cast<Scalar>(hyper.n_train));
  Scalar tol = d_tol;
  Scalar step = d_tol;
  VectorX<Scalar> best;
  Scalar best_error = std::numeric_limits<Scalar>::infinity();
  for (int iter = 0; iter < hyper.n_train; ++iter) {
    const VectorX<Scalar> xi = detail::stridge_gram<Scalar>(gram, rhs, a_train, y_train, lambda, tol, hyper.n_stridge, nullptr);
    const Scalar err = selection_error<Scalar>(a_test, y_test, xi, out.kappa);
    out.tolerance_trace.emplace_back(tol, err);
    ++out.iterations_run;
    if (err < best_error || best.size() == 0) {
      best_error = err;
      best = xi;
      out.best_tolerance = tol;
    }
    if (hyper.tol_schedule == TolSchedule::kRefine) {
      if (err < incumbent) {
        incumbent = err;
        tol = tol / Scalar(1.5);
      } else {
        tol = std::min(tol * Scalar(2), cap);
      }
    } else {
      if (err <= incumbent) {
        incumbent = err;
        tol = tol + step;
      } else {
        tol = std::max(Scalar(0), tol - Scalar(2) * step);
        step = Scalar(2) * step / static_cast<Scalar>(hyper.n_train - iter);
        tol = tol + step;
      }
    }
  }
  out.coefficients = best.cwiseProduct(scale);
  out.support = support_of<Scalar>(out.coefficients);
  out.test_error = best_error;
  return out;
}

}  // namespace ctsr
