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

#include "ctsr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "ctsr/csv.hpp"

namespace ctsr {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string lhs_label(const LhsSpec& lhs, const std::string& free_part) {
  if (lhs.kind == LhsSpec::Kind::kTimeDerivative) return lhs.quantity + free_part + "_t";
  return lhs.text();
}

std::string tensor_lhs_label(const LhsSpec& lhs, int target_order) {
  std::string free;
  if (target_order > 0) {
    free = "[";
    for (int s = 0; s < target_order; ++s) free += (s ? "," : "") + SuffixLabel{s}.name();
    free += "]";
  }
  return lhs_label(lhs, free);
}

std::string component_label(const LhsSpec& lhs, const std::vector<int>& component) {
  std::string free;
  if (!component.empty()) {
    free = "[";
    for (std::size_t s = 0; s < component.size(); ++s) free += (s ? "," : "") + std::to_string(component[s]);
    free += "]";
  }
  if (lhs.kind == LhsSpec::Kind::kTimeDerivative) return lhs.quantity + free + "_t";
  return "(" + lhs.text() + ")" + free;
}

DiscoveredEquation make_equation(std::string lhs, const RegressionProblem& problem, SparseSolution<double> solution,
                                 std::optional<GroundTruth> truth) {
  DiscoveredEquation eq;
  eq.lhs = std::move(lhs);
  eq.columns = problem.column_names;
  eq.solution = std::move(solution);
  if (truth) {
    eq.error_percent = prediction_error(eq.solution.coefficients, eq.columns, *truth);
    eq.redundant = redundancy_count(eq.solution.coefficients, eq.columns, *truth);
  }
  eq.truth = std::move(truth);
  return eq;
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string DiscoveredEquation::text() const {
  std::string out = lhs + " =";
  bool first = true;
  for (auto i : solution.support) {
    const double c = solution.coefficients(i);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", std::abs(c));
    out += first ? (c < 0 ? " -" : " ") : (c < 0 ? " - " : " + ");
    out += buf;
    out += " " + columns[static_cast<std::size_t>(i)];
    first = false;
  }
  if (first) out += " 0";
  return out;
}

std::map<std::string, double> constant_channels(const RunConfig& config) {
  std::map<std::string, double> out;
  GridDataset shape;
  shape.spatial_dim = config.library.spatial_dim;
  for (const auto& in : config.library.inputs) {
    if (!in.constant) continue;
    const auto comps = shape.components({in.name, in.base_order, in.symmetric_base});
    const auto& values = config.constants.at(in.name);
    if (values.size() != comps.size()) throw std::invalid_argument("config: wrong component count for constant " + in.name);
    for (std::size_t c = 0; c < comps.size(); ++c) out[comps[c].key()] = values[c];
  }
  return out;
}

RegressionProblem tensor_problem(const RunConfig& config, const GridDataset& ds) {
  ChannelStore store(ds);
  return build_tensor_problem(store, build_tensor_library(config.library), config.lhs, config.library.target_order,
                              config.sampling, config.assembly);
}

DiscoveryResult run_discovery(const RunConfig& config, const GridDataset& ds) {
  config.validate();
  if (ds.spatial_dim != config.library.spatial_dim) throw std::invalid_argument("dataset dimension differs from the library");
  DiscoveryResult result;
  result.mode = config.library.mode;
  ChannelStore store(ds);
  const int order = config.library.target_order;
  const int dim = config.library.spatial_dim;
  auto t0 = std::chrono::steady_clock::now();
  if (config.library.mode == LibraryMode::kTensor) {
    const auto library = build_tensor_library(config.library);
    const auto problem = build_tensor_problem(store, library, config.lhs, order, config.sampling, config.assembly);
    result.library_seconds = seconds_since(t0);
    result.library_size = library.size();
    result.rows = static_cast<std::size_t>(problem.rows());
    t0 = std::chrono::steady_clock::now();
    auto solution = train_stridge<double>(problem.theta, problem.lhs, config.hyper);
    result.regression_seconds = seconds_since(t0);
    std::optional<GroundTruth> truth;
    if (!config.truth.empty()) truth = config.tensor_truth();
    result.equations.push_back(make_equation(tensor_lhs_label(config.lhs, order), problem, std::move(solution), truth));
    return result;
  }
  const auto library = build_scalar_library(config.library);
  const auto problems = build_scalar_problems(store, library, config.lhs, order, config.sampling);
  result.library_seconds = seconds_since(t0);
  result.library_size = library.size();
  result.rows = problems.empty() ? 0 : static_cast<std::size_t>(problems.front().rows());
  const auto constants = constant_channels(config);
  const auto tuples = free_tuples(dim, order);
  for (std::size_t k = 0; k < problems.size(); ++k) {
    t0 = std::chrono::steady_clock::now();
    auto solution = train_stridge<double>(problems[k].theta, problems[k].lhs, config.hyper);
    result.regression_seconds += seconds_since(t0);
    std::optional<GroundTruth> truth;
    if (!config.truth.empty()) truth = scalar_truth(config.truth, library, dim, tuples[k], constants);
    result.equations.push_back(make_equation(component_label(config.lhs, tuples[k]), problems[k], std::move(solution), truth));
  }
  return result;
}

nlohmann::json to_json(const DiscoveryResult& result) {
  nlohmann::json j;
  j["mode"] = result.mode == LibraryMode::kTensor ? "tensor" : "scalar";
  j["library_size"] = result.library_size;
  j["rows"] = result.rows;
  j["library_seconds"] = result.library_seconds;
  j["regression_seconds"] = result.regression_seconds;
  j["equations"] = nlohmann::json::array();
  for (const auto& eq : result.equations) {
    nlohmann::json e;
    e["lhs"] = eq.lhs;
    e["text"] = eq.text();
    e["terms"] = nlohmann::json::array();
    for (auto i : eq.solution.support) {
      e["terms"].push_back({{"term", eq.columns[static_cast<std::size_t>(i)]}, {"coefficient", eq.solution.coefficients(i)}});
    }
    e["test_error"] = eq.solution.test_error;
    e["baseline_error"] = eq.solution.baseline_error;
    e["kappa"] = eq.solution.kappa;
    e["best_tolerance"] = eq.solution.best_tolerance;
    if (eq.error_percent) e["error_percent"] = *eq.error_percent;
    if (eq.redundant) e["redundant_terms"] = *eq.redundant;
    j["equations"].push_back(e);
  }
  return j;
}

SweepResult run_sweep(const RunConfig& config, const GridDataset& ds) {
  config.validate();
  SweepResult out;
  out.points = sweep_dtol(tensor_problem(config, ds), config.hyper, config.sweep);
  out.front = pareto_front(out.points);
  out.suggestion = suggest_dtol(out.points, out.front);
  return out;
}

bool EquivarianceSummary::passed(const EquivarianceOptions& options) const {
  const bool analytic = max_analytic < options.analytic_tol;
  const bool lattice = !options.lattice || max_lattice < options.lattice_tol;
  const bool control = control_analytic >= 1e3 * std::max(max_analytic, 1e-300);
  return analytic && lattice && control;
}

ProbeTerm non_tensor_control(const RunConfig& config) {
  for (const auto& in : config.library.inputs) {
    if (in.constant || in.base_order != 1 || in.max_deriv < 1) continue;
    const auto q = config.quantity_info();
    ProbeTerm p;
    p.term = parse_term(in.name + "[i] d" + in.name + "[i]/dx[i]", q);
    p.fixed = {SuffixLabel{0}};
    p.name = "control: " + in.name + "[i] d" + in.name + "[i]/dx[i] (no sum)";
    return p;
  }
  throw std::invalid_argument("equivariance: no differentiable vector input for the non-tensor control");
}

ManufacturedFields analytic_fields(const RunConfig& config, std::uint64_t seed) {
  ManufacturedSpec spec = config.manufactured ? config.manufactured_spec() : ManufacturedSpec{};
  spec.spatial_dim = config.library.spatial_dim;
  spec.inputs = config.library.inputs;
  spec.constants = config.constants;
  spec.truth = config.truth;
  spec.target_order = config.library.target_order;
  if (spec.lhs_time_derivative) {
    const bool known = std::any_of(spec.inputs.begin(), spec.inputs.end(), [&](const InputTensorSpec& in) { return in.name == spec.lhs_quantity; });
    if (!known) spec.truth.clear();
    if (!known && !spec.inputs.empty()) spec.lhs_quantity = spec.inputs.front().name;
  }
  spec.seed = seed;
  return ManufacturedFields(spec);
}

EquivarianceSummary run_equivariance(const RunConfig& config, const EquivarianceOptions& options) {
  config.validate();
  const int dim = config.library.spatial_dim;
  const auto library = build_tensor_library(config.library);
  std::vector<ProbeTerm> probes;
  for (const auto& e : library.entries) probes.push_back(ProbeTerm::tensor(e.term));
  const ProbeTerm control = non_tensor_control(config);

  EquivarianceSummary out;
  out.candidates = probes.size();
  out.control_name = control.name;
  std::mt19937_64 rng(options.seed);
  const auto fields = analytic_fields(config, options.seed);
  const auto points = random_points(options.points, dim, rng);
  std::vector<OrthogonalTransform> transforms;
  for (int r = 0; r < options.rotations; ++r) {
    auto t = OrthogonalTransform::random_rotation(dim, rng);
    t.label = "rotation " + std::to_string(r);
    transforms.push_back(std::move(t));
  }
  for (int r = 0; r < options.reflections; ++r) {
    auto t = OrthogonalTransform::random_reflection(dim, rng);
    t.label = "reflection " + std::to_string(r);
    transforms.push_back(std::move(t));
  }
  for (const auto& t : transforms) {
    for (const auto& p : probes) {
      const double dev = check_equivariance(p, fields, t, points);
      out.max_analytic = std::max(out.max_analytic, dev);
      out.rows.push_back({p.name, t.label, dev});
    }
    const double dev = check_equivariance(control, fields, t, points);
    out.control_analytic = std::max(out.control_analytic, dev);
    out.rows.push_back({control.name, t.label, dev});
  }
  if (!options.lattice) return out;

  // Grid fields: the same family sampled on a periodic lattice, derivatives by stencil.
  ManufacturedSpec grid_spec = fields.spec();
  grid_spec.points_per_axis = options.lattice_points_per_axis;
  grid_spec.times = 1;
  grid_spec.derivative_mode = DerivativeMode::kStencil;
  const GridDataset ds = manufactured_dataset(grid_spec);
  std::vector<SampleRow> rows;
  std::uniform_int_distribution<int> index(0, options.lattice_points_per_axis - 1);
  for (int k = 0; k < options.points; ++k) {
    SampleRow row;
    for (int a = 0; a < dim; ++a) row.point[static_cast<std::size_t>(a)] = index(rng);
    rows.push_back(row);
  }
  for (const auto& t : OrthogonalTransform::lattice_group(dim)) {
    for (const auto& p : probes) {
      const double dev = check_equivariance(p, ds, t, rows);
      out.max_lattice = std::max(out.max_lattice, dev);
      out.rows.push_back({p.name, "lattice " + t.label, dev});
    }
  }
  return out;
}

std::vector<BenchRecord> run_bench(const RunConfig& config, const GridDataset& ds, int seeds) {
  if (seeds < 1) throw std::invalid_argument("bench: need at least one seed");
  if (config.truth.empty()) throw std::invalid_argument("bench: the configuration has no ground truth");
  std::vector<BenchRecord> out;
  for (int s = 0; s < seeds; ++s) {
    for (const auto mode : {LibraryMode::kTensor, LibraryMode::kScalar}) {
      RunConfig run = config;
      run.library.mode = mode;
      run.sampling.seed = config.sampling.seed + static_cast<std::uint64_t>(s);
      run.hyper.seed = config.hyper.seed + static_cast<std::uint64_t>(s);
      const auto result = run_discovery(run, ds);
      const auto n = static_cast<double>(result.equations.size());
      for (const auto& eq : result.equations) {
        out.push_back({run.sampling.seed, mode, eq.lhs, eq.error_percent.value_or(0.0), eq.redundant.value_or(0),
                       result.library_seconds / n, result.regression_seconds / n});
      }
    }
  }
  return out;
}

std::vector<ErrorSummary> summarize(const std::vector<BenchRecord>& records) {
  std::vector<ErrorSummary> out;
  for (const auto mode : {LibraryMode::kTensor, LibraryMode::kScalar}) {
    std::vector<double> errors;
    ErrorSummary s;
    s.mode = mode;
    for (const auto& r : records) {
      if (r.mode != mode) continue;
      errors.push_back(r.error_percent);
      s.library_seconds += r.library_seconds;
      s.regression_seconds += r.regression_seconds;
    }
    if (errors.empty()) continue;
    std::sort(errors.begin(), errors.end());
    s.count = errors.size();
    for (double e : errors) s.mean += e;
    s.mean /= static_cast<double>(s.count);
    s.min = errors.front();
    s.max = errors.back();
    s.q1 = quantile(errors, 0.25);
    s.median = quantile(errors, 0.5);
    s.q3 = quantile(errors, 0.75);
    // Timings were split per equation; report them per run.
    std::size_t runs = 0;
    std::uint64_t last_seed = ~std::uint64_t{0};
    for (const auto& r : records) {
      if (r.mode == mode && r.seed != last_seed) {
        ++runs;
        last_seed = r.seed;
      }
    }
    s.library_seconds /= static_cast<double>(runs);
    s.regression_seconds /= static_cast<double>(runs);
    out.push_back(s);
  }
  return out;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << "seed,mode,equation,error_percent,redundant,library_seconds,regression_seconds\n";
  for (const auto& r : records) {
    out << r.seed << ',' << (r.mode == LibraryMode::kTensor ? "tensor" : "scalar") << ',' << csv_field(r.equation) << ','
        << format_double(r.error_percent) << ',' << r.redundant << ',' << format_double(r.library_seconds) << ','
        << format_double(r.regression_seconds) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<ErrorSummary>& summary) {
  out << "mode,count,mean,min,q1,median,q3,max,library_seconds,regression_seconds\n";
  for (const auto& s : summary) {
    out << (s.mode == LibraryMode::kTensor ? "tensor" : "scalar") << ',' << s.count << ',' << format_double(s.mean) << ','
        << format_double(s.min) << ',' << format_double(s.q1) << ',' << format_double(s.median) << ','
        << format_double(s.q3) << ',' << format_double(s.max) << ',' << format_double(s.library_seconds) << ','
        << format_double(s.regression_seconds) << '\n';
  }
}

}  // namespace ctsr
