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

#include "ctsr/model_selection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "ctsr/csv.hpp"

namespace ctsr {

void GroundTruth::validate() const {
  if (terms.empty()) throw std::invalid_argument("ground truth: no terms");
  for (const auto& t : terms) {
    if (t.coefficient == 0.0) throw std::invalid_argument("ground truth: zero coefficient for " + t.text);
  }
}

double prediction_error(const Eigen::VectorXd& xi, const std::vector<std::string>& columns, const GroundTruth& truth) {
  truth.validate();
  double total = 0.0;
  for (const auto& t : truth.terms) {
    auto it = std::find(columns.begin(), columns.end(), t.text);
    if (it == columns.end()) {
      total += 1.0;
      continue;
    }
    const double found = xi(it - columns.begin());
    total += found == 0.0 ? 1.0 : std::abs(found - t.coefficient) / std::abs(t.coefficient);
  }
  return 100.0 * total / static_cast<double>(truth.terms.size());
}

int redundancy_count(const Eigen::VectorXd& xi, const std::vector<std::string>& columns, const GroundTruth& truth) {
  int count = 0;
  for (Eigen::Index c = 0; c < xi.size(); ++c) {
    if (xi(c) == 0.0) continue;
    const auto& name = columns[static_cast<std::size_t>(c)];
    const bool in_truth =
        std::any_of(truth.terms.begin(), truth.terms.end(), [&](const TruthTerm& t) { return t.text == name; });
    if (!in_truth) ++count;
  }
  return count;
}

GroundTruth scalar_truth(const std::vector<WeightedTerm>& tensor_truth, const ScalarLibrary& library, int dim,
                         const std::vector<int>& component, const std::map<std::string, double>& constants) {
  std::map<std::vector<std::string>, std::string> by_channels;
  for (const auto& e : library.entries) {
    std::vector<std::string> key;
    for (const auto& c : e.monomial) key.push_back(c.canonical(false).key());
    if (e.derivative) key.push_back(e.derivative->canonical(false).key());
    std::sort(key.begin(), key.end());
    by_channels.try_emplace(std::move(key), e.text);
  }
  std::vector<TruthTerm> out;
  for (const auto& w : tensor_truth) {
    for (const auto& m : expand_term(w.term, w.labels(), component, dim)) {
      double coef = w.coefficient * m.coefficient;
      std::vector<std::string> key;
      for (const auto& c : m.channels) {
        if (auto it = constants.find(c.key()); it != constants.end()) {
          coef *= c.axes.empty() ? it->second : 0.0;
        } else {
          key.push_back(c.canonical(false).key());
        }
      }
      if (coef == 0.0) continue;
      std::sort(key.begin(), key.end());
      auto it = by_channels.find(key);
      std::string text;
      if (it != by_channels.end()) {
        text = it->second;
      } else {
        text = "missing:";
        for (const auto& k : key) text += " " + k;
      }
      auto existing = std::find_if(out.begin(), out.end(), [&](const TruthTerm& t) { return t.text == text; });
      if (existing == out.end()) {
        out.push_back({text, coef});
      } else {
        existing->coefficient += coef;
      }
    }
  }
  GroundTruth truth;
  for (auto& t : out) {
    if (t.coefficient != 0.0) truth.terms.push_back(std::move(t));
  }
  return truth;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= lo) || points < 1) throw std::invalid_argument("log grid: need 0 < lo <= hi and points >= 1");
  std::vector<double> out;
  if (points == 1) return {lo};
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < points; ++i) out.push_back(std::pow(10.0, a + (b - a) * i / (points - 1)));
  return out;
}

std::vector<ParetoPoint> sweep_dtol(const RegressionProblem& problem, const Hyperparams& hyper, const SweepSpec& spec) {
  const auto grid = log_grid(spec.lo, spec.hi, spec.points);
  std::vector<ParetoPoint> points(grid.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        Hyperparams h = hyper;
        h.d_tol = grid[i];
        auto sol = train_stridge<double>(problem.theta, problem.lhs, h);
        ParetoPoint& p = points[i];
        p.d_tol = grid[i];
        p.sparsity = static_cast<int>(sol.support.size());
        p.residual = (problem.lhs - problem.theta * sol.coefficients).norm();
        p.solution = std::move(sol);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(spec.jobs, static_cast<int>(grid.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return points;
}

std::vector<std::size_t> pareto_front(const std::vector<ParetoPoint>& points) {
  if (points.empty()) throw std::invalid_argument("pareto front: no points");
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& p = points[a];
    const auto& q = points[b];
    if (p.sparsity != q.sparsity) return p.sparsity < q.sparsity;
    if (p.residual != q.residual) return p.residual < q.residual;
    return p.d_tol < q.d_tol;
  });
  std::vector<std::size_t> front;
  double best = INFINITY;
  for (std::size_t i : order) {
    if (points[i].residual < best) {
      front.push_back(i);
      best = points[i].residual;
    }
  }
  return front;
}

std::optional<std::size_t> knee_point(const std::vector<ParetoPoint>& points, const std::vector<std::size_t>& front) {
  if (front.size() < 2) return std::nullopt;
  double max_res = 0.0;
  for (std::size_t i : front) max_res = std::max(max_res, points[i].residual);
  const double floor = max_res > 0.0 ? max_res * 1e-16 : 1e-300;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i : front) {
    xs.push_back(points[i].sparsity);
    ys.push_back(std::log10(std::max(points[i].residual, floor)));
  }
  const double x_span = std::max(std::abs(xs.back() - xs.front()), 1e-300);
  const double y_span = std::max(std::abs(ys.back() - ys.front()), 1e-300);
  for (auto& x : xs) x /= x_span;
  for (auto& y : ys) y /= y_span;
  const double dx = xs.back() - xs.front();
  const double dy = ys.back() - ys.front();
  const double len = std::hypot(dx, dy);
  // Signed distance to the chord; positive below it, towards low residual.
  // Front points are sorted by sparsity, so dx > 0.
  auto side = [&](std::size_t k) {
    return len > 0.0 ? (dy * (xs[k] - xs.front()) - dx * (ys[k] - ys.front())) / len : 0.0;
  };
  std::size_t best = front.size() / 2;
  double best_dist = 1e-12;
  bool found = false;
  bool concave = false;
  for (std::size_t k = 1; k + 1 < front.size(); ++k) {
    const double d = side(k);
    if (d > best_dist) {
      best_dist = d;
      best = k;
      found = true;
    }
    concave = concave || d < -1e-12;
  }
  if (!found && concave) {
    // Every interior point bulges away from the corner: take the bottom of the
    // steepest log-residual drop per added term.
    double steepest = -INFINITY;
    for (std::size_t k = 1; k < front.size(); ++k) {
      const double slope = (ys[k - 1] - ys[k]) / std::max(xs[k] - xs[k - 1], 1e-300);
      if (slope > steepest) {
        steepest = slope;
        best = k;
      }
    }
  }
  return front[best];
}

std::optional<DtolSuggestion> suggest_dtol(const std::vector<ParetoPoint>& points, const std::vector<std::size_t>& front) {
  const auto knee = knee_point(points, front);
  if (!knee) return std::nullopt;
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a].d_tol < points[b].d_tol; });
  const auto pos = static_cast<std::size_t>(std::find(order.begin(), order.end(), *knee) - order.begin());
  const auto& support = points[*knee].solution.support;
  std::size_t lo = pos;
  std::size_t hi = pos;
  while (lo > 0 && points[order[lo - 1]].solution.support == support) --lo;
  while (hi + 1 < order.size() && points[order[hi + 1]].solution.support == support) ++hi;
  DtolSuggestion out;
  out.knee = *knee;
  out.plateau_lo = points[order[lo]].d_tol;
  out.plateau_hi = points[order[hi]].d_tol;
  out.d_tol = std::sqrt(out.plateau_lo * out.plateau_hi);
  return out;
}

DimensionSplit dimension_split_diagnostic(const RegressionProblem& problem, const Hyperparams& hyper, const GroundTruth& truth) {
  if (problem.target_order != 1) throw std::invalid_argument("dimension split: target order must be 1");
  DimensionSplit out;
  for (int a = 0; a < problem.dim; ++a) {
    std::vector<Eigen::Index> rows;
    for (std::size_t r = 0; r < problem.row_meta.size(); ++r) {
      if (problem.row_meta[r].free_values == std::vector<int>{a}) rows.push_back(static_cast<Eigen::Index>(r));
    }
    const auto block = problem.select_rows(rows);
    auto sol = train_stridge<double>(block.theta, block.lhs, hyper);
    out.axis_errors.push_back(prediction_error(sol.coefficients, problem.column_names, truth));
    out.axis_solutions.push_back(std::move(sol));
  }
  out.stacked_solution = train_stridge<double>(problem.theta, problem.lhs, hyper);
  out.stacked_error = prediction_error(out.stacked_solution.coefficients, problem.column_names, truth);
  return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<ParetoPoint>& points, const std::vector<std::size_t>& front,
                     std::optional<std::size_t> knee) {
  out << "d_tol,sparsity,residual,is_front,is_knee\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const bool on_front = std::find(front.begin(), front.end(), i) != front.end();
    out << format_double(points[i].d_tol) << ',' << points[i].sparsity << ',' << format_double(points[i].residual) << ','
        << (on_front ? 1 : 0) << ',' << (knee && *knee == i ? 1 : 0) << '\n';
  }
}

void write_sweep_svg(std::ostream& out, const std::vector<ParetoPoint>& points, const std::vector<std::size_t>& front,
                     std::optional<std::size_t> knee, const std::string& title) {
  constexpr double kWidth = 640;
  constexpr double kHeight = 420;
  constexpr double kLeft = 70;
  constexpr double kRight = 20;
  constexpr double kTop = 40;
  constexpr double kBottom = 50;
  double max_res = 0.0;
  for (const auto& p : points) max_res = std::max(max_res, p.residual);
  const double floor = max_res > 0.0 ? max_res * 1e-16 : 1e-300;
  auto ly = [&](double r) { return std::log10(std::max(r, floor)); };
  int x_max = 1;
  double y_lo = INFINITY;
  double y_hi = -INFINITY;
  for (const auto& p : points) {
    x_max = std::max(x_max, p.sparsity);
    y_lo = std::min(y_lo, ly(p.residual));
    y_hi = std::max(y_hi, ly(p.residual));
  }
  if (!(y_hi > y_lo)) {
    y_lo -= 1.0;
    y_hi += 1.0;
  }
  auto px = [&](double s) { return kLeft + (kWidth - kLeft - kRight) * s / x_max; };
  auto py = [&](double r) { return kTop + (kHeight - kTop - kBottom) * (y_hi - ly(r)) / (y_hi - y_lo); };
  auto escape = [](const std::string& s) {
    std::string o;
    for (char c : s) {
      if (c == '<') o += "&lt;";
      else if (c == '>') o += "&gt;";
      else if (c == '&') o += "&amp;";
      else o += c;
    }
    return o;
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title) << "</text>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
      << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\" font-size=\"13\">nonzero terms</text>\n";
  out << "<text x=\"18\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << kHeight / 2 << ")\">log10 residual</text>\n";
  for (int s = 0; s <= x_max; s += std::max(1, x_max / 10)) {
    out << "<text x=\"" << px(s) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\" font-size=\"11\">" << s
        << "</text>\n";
  }
  for (int k = static_cast<int>(std::ceil(y_lo)); k <= static_cast<int>(std::floor(y_hi)); ++k) {
    const double y = kTop + (kHeight - kTop - kBottom) * (y_hi - k) / (y_hi - y_lo);
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << k << "</text>\n";
  }
  if (front.size() > 1) {
    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-dasharray=\"6 4\" points=\"";
    for (std::size_t i : front) out << px(points[i].sparsity) << ',' << py(points[i].residual) << ' ';
    out << "\"/>\n";
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const bool on_front = std::find(front.begin(), front.end(), i) != front.end();
    out << "<circle cx=\"" << px(points[i].sparsity) << "\" cy=\"" << py(points[i].residual) << "\" r=\"4\" fill=\""
        << (on_front ? "steelblue" : "lightgray") << "\"><title>d_tol=" << format_double(points[i].d_tol)
        << "</title></circle>\n";
  }
  if (knee) {
    out << "<circle cx=\"" << px(points[*knee].sparsity) << "\" cy=\"" << py(points[*knee].residual)
        << "\" r=\"8\" fill=\"none\" stroke=\"crimson\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << px(points[*knee].sparsity) + 10 << "\" y=\"" << py(points[*knee].residual) - 10
        << "\" font-size=\"12\" fill=\"crimson\">knee d_tol=" << format_double(points[*knee].d_tol) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace ctsr
