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

// Acceptance suite: one PASS/FAIL line per criterion, each with its runtime
// budget. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ctsr/pipeline.hpp"
#include "test_support.hpp"

namespace ctsr {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

bool run_criterion(int id, const std::string& name, double budget_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = elapsed < budget_seconds;
  const bool ok = out.ok && in_time;
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << out.detail << " ["
            << fmt("%.2f", elapsed) << " s, budget " << budget_seconds << " s" << (in_time ? "" : ", over budget") << "]"
            << std::endl;
  return ok;
}

// Largest |xi - xi*| / |xi*| over the truth terms, and whether the support is
// exactly the truth set.
struct Recovery {
  double max_relative = 0.0;
  double mean_percent = 0.0;
  int redundant = 0;
  bool exact_support = false;
};

Recovery assess(const VectorXd& xi, const std::vector<std::string>& columns, const GroundTruth& truth) {
  Recovery r;
  r.mean_percent = prediction_error(xi, columns, truth);
  r.redundant = redundancy_count(xi, columns, truth);
  std::set<std::string> truth_names;
  for (const auto& t : truth.terms) {
    truth_names.insert(t.text);
    const auto it = std::find(columns.begin(), columns.end(), t.text);
    const double value = it == columns.end() ? 0.0 : xi(it - columns.begin());
    r.max_relative = std::max(r.max_relative, std::abs(value - t.coefficient) / std::abs(t.coefficient));
  }
  std::set<std::string> found;
  for (Index j = 0; j < xi.size(); ++j) {
    if (xi(j) != 0.0) found.insert(columns[static_cast<std::size_t>(j)]);
  }
  r.exact_support = found == truth_names;
  return r;
}

std::string describe(const Recovery& r) {
  return "max coefficient error " + fmt("%.4g", 100.0 * r.max_relative) + "%, mean " + fmt("%.4g", r.mean_percent) +
         "%, redundant " + std::to_string(r.redundant) + (r.exact_support ? ", exact support" : ", support differs");
}

BurgersConfig acceptance_burgers() {
  BurgersConfig b = *preset_config("burgers2d").burgers;
  b.n = 64;
  b.epsilon = 0.1;
  b.dt = 0.002;
  b.save_every = 10;  // saved interval 0.02
  b.steps = 990;      // 100 saved snapshots
  return b;
}

Outcome scalar_counts() {
  const char* names[] = {"burgers2d", "convection2d", "ns3d", "giesekus3d"};
  const std::size_t expected[] = {77, 374, 734, 1530};
  bool ok = true;
  std::string detail;
  for (int k = 0; k < 4; ++k) {
    auto spec = preset_config(names[k]).library;
    spec.mode = LibraryMode::kScalar;
    const auto n = build_scalar_library(spec).size();
    ok = ok && n == expected[k];
    detail += std::string(k ? ", " : "") + names[k] + " " + std::to_string(n);
  }
  return {ok, detail};
}

Outcome convection_template() {
  const FactorShape u{"u", 1, 0, false};
  const FactorShape du{"u", 1, 1, false};
  const auto raw = assign_suffixes(TermTemplate{{u, du}});
  std::set<std::string> canonical;
  for (const auto& t : raw) {
    if (check_validity(t, 1)) canonical.insert(to_text(canonicalize(t)));
  }
  const std::set<std::string> expected{"u[i] du[j]/dx[j]", "u[j] du[i]/dx[j]", "u[j] du[j]/dx[i]"};
  std::string list;
  for (const auto& c : canonical) list += (list.empty() ? "" : "; ") + c;
  return {raw.size() == 27 && canonical == expected,
          std::to_string(raw.size()) + " raw assignments, " + std::to_string(canonical.size()) + " canonical {" + list + "}"};
}

Outcome library_completeness() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"burgers2d", "convection2d", "ns3d", "giesekus3d"}) {
    const auto c = preset_config(name);
    const auto lib = build_tensor_library(c.library);
    for (const auto& t : c.tensor_truth().terms) {
      if (!lib.find(t.text)) {
        ok = false;
        detail += std::string("missing ") + name + ": " + t.text + "; ";
      }
    }
    detail += std::string(name) + " " + std::to_string(lib.size()) + " (reference " + std::to_string(c.reference_tensor_count) + "), ";
  }
  auto spec = preset_config("burgers2d").library;
  for (int p = 0; p <= 2; ++p) {
    spec.max_product_order = p;
    const auto lib = build_tensor_library(spec);
    const auto oracle = testing::oracle_classes(spec.inputs, p, spec.target_order, 3);
    const bool equal = testing::library_classes(lib, 3) == oracle && lib.size() == oracle.size();
    ok = ok && equal;
    detail += "oracle P=" + std::to_string(p) + (equal ? " equal" : " DIFFERS") + (p < 2 ? ", " : "");
  }
  return {ok, detail};
}

Outcome burgers_end_to_end(GridDataset& data) {
  auto c = preset_config("burgers2d");
  c.burgers = acceptance_burgers();
  c.sampling = SamplingSpec{50, 20, 0};
  c.hyper.d_tol = 1e-3;
  data = generate_dataset(c);
  const auto result = run_discovery(c, data);
  const auto& eq = result.equations.front();
  const auto r = assess(eq.solution.coefficients, eq.columns, *eq.truth);
  const bool ok = data.times == 100 && r.exact_support && r.redundant == 0 && r.max_relative < 0.05;
  return {ok, eq.text() + "; " + describe(r)};
}

Outcome manufactured_recovery() {
  bool ok = true;
  std::string detail;
  const std::pair<const char*, double> cases[] = {{"convection2d", 0.005}, {"ns3d", 0.005}, {"giesekus3d", 0.01}};
  for (const auto& [name, tol] : cases) {
    const auto c = preset_config(name);
    const auto data = generate_dataset(c);
    const auto problem = tensor_problem(c, data);
    const auto points = sweep_dtol(problem, c.hyper, c.sweep);
    const auto front = pareto_front(points);
    const auto suggestion = suggest_dtol(points, front);
    if (!suggestion) {
      ok = false;
      detail += std::string(name) + ": no knee; ";
      continue;
    }
    Hyperparams h = c.hyper;
    h.d_tol = suggestion->d_tol;
    const auto solution = train_stridge<double>(problem.theta, problem.lhs, h);
    const auto r = assess(solution.coefficients, problem.column_names, c.tensor_truth());
    const bool case_ok = r.exact_support && r.redundant == 0 && r.max_relative < tol;
    ok = ok && case_ok;
    detail += std::string(name) + " d_tol " + fmt("%.3g", h.d_tol) + ": " + describe(r) + "; ";
  }
  return {ok, detail};
}

Outcome equivariance_suite() {
  bool ok = true;
  std::string detail;
  EquivarianceOptions options;  // 20 rotations, 20 reflections, lattice group
  for (const char* name : {"burgers2d", "ns3d"}) {
    const auto s = run_equivariance(preset_config(name), options);
    const bool passed = s.passed(options) && options.rotations >= 20 && options.reflections >= 20;
    ok = ok && passed;
    detail += std::string(name) + ": " + std::to_string(s.candidates) + " candidates, max " + fmt("%.2e", s.max_analytic) +
              " (analytic), " + fmt("%.2e", s.max_lattice) + " (lattice), control " + fmt("%.2e", s.control_analytic) + "; ";
  }
  return {ok, detail};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome dimension_coupling() {
  std::vector<std::vector<double>> axis(3);
  std::vector<double> stacked;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto c = preset_config("ns3d");
    c.library.max_product_order = 1;
    c.manufactured->family.richness = {1.0, 1.0, 0.01};
    c.manufactured->derivative_mode = DerivativeMode::kAnalytic;
    c.manufactured->noise = 0.01;
    c.manufactured->seed = seed;
    c.sampling.seed = seed;
    c.hyper.seed = seed;
    const auto data = generate_dataset(c);
    const auto split = dimension_split_diagnostic(tensor_problem(c, data), c.hyper, c.tensor_truth());
    for (int a = 0; a < 3; ++a) axis[static_cast<std::size_t>(a)].push_back(split.axis_errors[static_cast<std::size_t>(a)]);
    stacked.push_back(split.stacked_error);
  }
  const double mx = median(axis[0]);
  const double my = median(axis[1]);
  const double mz = median(axis[2]);
  const double ms = median(stacked);
  const bool ok = mz > mx && mz > my && ms < std::max({mx, my, mz});
  return {ok, "median error % over 10 seeds: x " + fmt("%.3g", mx) + ", y " + fmt("%.3g", my) + ", z " + fmt("%.3g", mz) +
                  ", stacked " + fmt("%.3g", ms)};
}

MatrixXd gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  }
  return m;
}

Outcome solver_contracts() {
  std::vector<std::string> failed;
  // Orthonormal columns: ridge is Q^T y / (1 + lambda).
  Eigen::HouseholderQR<MatrixXd> qr(gaussian(40, 7, 3));
  const MatrixXd q = qr.householderQ() * MatrixXd::Identity(40, 7);
  const VectorXd y = gaussian(40, 1, 4).col(0);
  for (double lambda : {0.0, 1e-5, 0.3, 2.0}) {
    if ((ridge<double>(q, y, lambda) - q.transpose() * y / (1.0 + lambda)).cwiseAbs().maxCoeff() >= 1e-10) failed.push_back("closed form");
  }
  // Threshold dominance and the least-squares refit over random noisy systems.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const MatrixXd a = gaussian(80, 12, 100 + seed);
    VectorXd truth = VectorXd::Zero(12);
    truth(1) = 1.5;
    truth(4) = -0.2;
    truth(9) = 0.05;
    const VectorXd b = a * truth + 0.05 * gaussian(80, 1, 200 + seed).col(0);
    const double tol = 0.02 + 0.01 * static_cast<double>(seed);
    StridgeTrace<double> trace;
    const VectorXd xi = stridge<double>(a, b, 1e-5, tol, 10, &trace);
    const auto support = support_of<double>(xi);
    for (Index j : support) {
      if (std::abs(trace.pre_debias(j)) < tol) failed.push_back("threshold dominance");
    }
    if (!support.empty() && trace.debiased) {
      const VectorXd ls = a(Eigen::all, support).colPivHouseholderQr().solve(b);
      if ((xi(support) - ls).cwiseAbs().maxCoeff() >= 1e-10) failed.push_back("debias");
    }
  }
  // Exact two-term recovery, and determinism of the train/test wrapper.
  const MatrixXd theta = gaussian(200, 10, 11);
  const VectorXd lhs = 2.0 * theta.col(3) - 0.5 * theta.col(7);
  const auto s1 = train_stridge<double>(theta, lhs, Hyperparams{});
  const auto s2 = train_stridge<double>(theta, lhs, Hyperparams{});
  if (s1.support != std::vector<Index>{3, 7} || std::abs(s1.coefficients(3) - 2.0) >= 1e-10 ||
      std::abs(s1.coefficients(7) + 0.5) >= 1e-10) {
    failed.push_back("two-term recovery");
  }
  if (s1.coefficients != s2.coefficients || s1.tolerance_trace != s2.tolerance_trace) failed.push_back("determinism");
  std::string detail = failed.empty() ? "closed form, threshold dominance, debias, recovery, determinism" : "failed:";
  for (const auto& f : failed) detail += " " + f;
  return {failed.empty(), detail};
}

Outcome runtime_direction() {
  auto c = preset_config("ns3d");
  const auto data = generate_dataset(c);
  c.library.mode = LibraryMode::kTensor;
  const auto tensor = run_discovery(c, data);
  c.library.mode = LibraryMode::kScalar;
  const auto scalar = run_discovery(c, data);
  return {tensor.regression_seconds < scalar.regression_seconds,
          "regression wall time tensor " + fmt("%.4g", tensor.regression_seconds) + " s (" + std::to_string(tensor.library_size) +
              " columns) vs scalar " + fmt("%.4g", scalar.regression_seconds) + " s (" + std::to_string(scalar.library_size) +
              " columns x " + std::to_string(scalar.equations.size()) + " components)"};
}

Outcome pareto_sweep(const GridDataset& data) {
  auto c = preset_config("burgers2d");
  c.burgers = acceptance_burgers();
  c.sampling = SamplingSpec{50, 20, 0};
  const auto sweep = run_sweep(c, data);
  // Brute-force validity: no front point is dominated by any sweep point, and
  // every excluded point is dominated or repeats a front point.
  bool valid = !sweep.front.empty();
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    const auto& p = sweep.points[i];
    bool dominated = false;
    bool repeats = false;
    for (std::size_t j = 0; j < sweep.points.size(); ++j) {
      const auto& q = sweep.points[j];
      dominated = dominated || (q.sparsity <= p.sparsity && q.residual <= p.residual && (q.sparsity < p.sparsity || q.residual < p.residual));
    }
    for (std::size_t f : sweep.front) repeats = repeats || (f != i && sweep.points[f].sparsity == p.sparsity && sweep.points[f].residual == p.residual);
    const bool on_front = std::find(sweep.front.begin(), sweep.front.end(), i) != sweep.front.end();
    valid = valid && (on_front ? !dominated : dominated || repeats);
  }
  if (!sweep.suggestion) return {false, "front valid " + std::string(valid ? "yes" : "no") + "; no knee"};
  const auto& s = *sweep.suggestion;
  const bool in_decade = s.d_tol >= 1e-4 && s.d_tol <= 1e-2;
  return {valid && in_decade, "front " + std::to_string(sweep.front.size()) + " points, valid " + (valid ? "yes" : "no") +
                                  "; knee sparsity " + std::to_string(sweep.points[s.knee].sparsity) + ", plateau [" +
                                  fmt("%.3g", s.plateau_lo) + ", " + fmt("%.3g", s.plateau_hi) + "], suggested d_tol " +
                                  fmt("%.3g", s.d_tol) + (in_decade ? " in" : " outside") + " [1e-4, 1e-2]"};
}

}  // namespace
}  // namespace ctsr

int main() {
  using namespace ctsr;
  GridDataset burgers;
  int failures = 0;
  failures += !run_criterion(1, "scalar library counts", 1, scalar_counts);
  failures += !run_criterion(2, "convection template", 1, convection_template);
  failures += !run_criterion(3, "tensor library completeness", 5, library_completeness);
  failures += !run_criterion(4, "burgers end to end", 60, [&] { return burgers_end_to_end(burgers); });
  failures += !run_criterion(5, "manufactured recovery at the knee", 120, manufactured_recovery);
  failures += !run_criterion(6, "equivariance", 60, equivariance_suite);
  failures += !run_criterion(7, "dimension coupling", 120, dimension_coupling);
  failures += !run_criterion(8, "solver contracts", 10, solver_contracts);
  failures += !run_criterion(9, "runtime direction", 120, runtime_direction);
  failures += !run_criterion(10, "pareto sweep", 120, [&] { return pareto_sweep(burgers); });
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
