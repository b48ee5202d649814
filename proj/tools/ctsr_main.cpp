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

// Command-line driver: data generation, library construction, discovery,
// d_tol sweeps, equivariance checks, benchmarks and a quick self-test.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctsr/pipeline.hpp"

namespace fs = std::filesystem;
using namespace ctsr;

namespace {

constexpr int kExitUser = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitSelftest = 3;

struct Options {
  std::string preset = "burgers2d";
  std::string config;
  std::string out;
  std::string dataset;
  std::string mode;
  std::optional<double> dtol;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  int seeds = 20;
  int rotations = 20;
  int reflections = 20;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--preset", o.preset, "burgers2d | convection2d | ns3d | giesekus3d | custom");
  cmd->add_option("--config", o.config, "JSON run configuration (overrides the preset)");
  cmd->add_option("--out", o.out, "output directory (default: $CTSR_OUT_DIR or ./ctsr_out)");
  cmd->add_option("--dataset", o.dataset, "stem of an existing dataset (<stem>.json + <stem>.bin)");
  cmd->add_option("--mode", o.mode, "tensor | scalar");
  cmd->add_option("--dtol", o.dtol, "initial tolerance d_tol");
  cmd->add_option("--seed", o.seed, "seed for generation, sampling and the train/test split");
  cmd->add_option("--jobs", o.jobs, "worker threads for sweeps");
}

RunConfig load_config(const Options& o) {
  RunConfig c;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw IoError("cannot open config " + o.config);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("config " + o.config + " is not valid JSON: " + e.what());
    }
    c = config_from_json(j);
  } else {
    c = preset_config(o.preset);
  }
  if (!o.dataset.empty()) c.dataset = o.dataset;
  if (!o.mode.empty()) {
    if (o.mode != "tensor" && o.mode != "scalar") throw std::invalid_argument("--mode must be tensor or scalar");
    c.library.mode = o.mode == "tensor" ? LibraryMode::kTensor : LibraryMode::kScalar;
  }
  if (o.dtol) c.hyper.d_tol = *o.dtol;
  if (o.seed) {
    c.hyper.seed = *o.seed;
    c.sampling.seed = *o.seed;
    if (c.burgers) c.burgers->seed = *o.seed;
    if (c.manufactured) c.manufactured->seed = *o.seed;
  }
  if (o.jobs) c.sweep.jobs = *o.jobs;
  if (!o.out.empty()) {
    c.out_dir = o.out;
  } else if (c.out_dir.empty()) {
    const char* env = std::getenv("CTSR_OUT_DIR");
    c.out_dir = env != nullptr && *env != '\0' ? env : "ctsr_out";
  }
  c.validate();
  if (!c.dataset.empty() && !fs::exists(c.dataset + ".json")) throw std::invalid_argument("dataset " + c.dataset + ".json does not exist");
  return c;
}

fs::path prepare_out(const RunConfig& c, const std::string& command) {
  const fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  std::ofstream cfg(dir / (command + "_config.json"));
  if (!cfg) throw IoError("cannot write to " + dir.string());
  cfg << to_json(c).dump(2) << '\n';
  return dir;
}

template <class Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  writer(out);
  if (!out) throw IoError("write failed for " + path.string());
}

GridDataset obtain_dataset(const RunConfig& c) {
  if (!c.dataset.empty()) return load_dataset(c.dataset);
  return generate_dataset(c);
}

int cmd_gen_data(const RunConfig& c) {
  const auto dir = prepare_out(c, "gen-data");
  const auto ds = generate_dataset(c);
  save_dataset(ds, dir / "dataset");
  nlohmann::json prov;
  prov["dataset"] = (dir / "dataset").string();
  prov["snapshots"] = ds.times;
  prov["dt"] = ds.dt;
  prov["shape"] = ds.shape;
  prov["metadata"] = ds.metadata;
  prov["config"] = to_json(c);
  write_file(dir / "provenance.json", [&](std::ostream& out) { out << prov.dump(2) << '\n'; });
  std::cout << "dataset " << (dir / "dataset").string() << ": " << ds.times << " snapshot(s), dt " << ds.dt << ", grid";
  for (int a = 0; a < ds.spatial_dim; ++a) std::cout << (a ? "x" : " ") << ds.shape[static_cast<std::size_t>(a)];
  std::cout << '\n';
  return 0;
}

int cmd_build_library(const RunConfig& c) {
  const auto dir = prepare_out(c, "build-library");
  nlohmann::json counts;
  if (c.library.mode == LibraryMode::kTensor) {
    const auto lib = build_tensor_library(c.library);
    write_file(dir / "library_tensor.txt", [&](std::ostream& out) { write_library_report(out, lib); });
    write_file(dir / "library_tensor.csv", [&](std::ostream& out) { write_library_csv(out, lib); });
    counts = {{"mode", "tensor"}, {"count", lib.size()}, {"templates", lib.templates.size()}, {"raw_assignments", lib.raw_assignments}};
    if (c.reference_tensor_count > 0) counts["reference_count"] = c.reference_tensor_count;
    std::cout << "tensor candidates: " << lib.size();
    if (c.reference_tensor_count > 0) std::cout << " (published reference: " << c.reference_tensor_count << ")";
    std::cout << '\n';
  } else {
    const auto lib = build_scalar_library(c.library);
    write_file(dir / "library_scalar.txt", [&](std::ostream& out) { write_library_report(out, lib); });
    write_file(dir / "library_scalar.csv", [&](std::ostream& out) { write_library_csv(out, lib); });
    counts = {{"mode", "scalar"}, {"count", lib.size()}};
    if (c.reference_scalar_count > 0) counts["reference_count"] = c.reference_scalar_count;
    std::cout << "scalar candidates: " << lib.size();
    if (c.reference_scalar_count > 0) std::cout << " (published reference: " << c.reference_scalar_count << ")";
    std::cout << '\n';
  }
  write_file(dir / "library_counts.json", [&](std::ostream& out) { out << counts.dump(2) << '\n'; });
  return 0;
}

int cmd_discover(const RunConfig& c) {
  const auto dir = prepare_out(c, "discover");
  const auto ds = obtain_dataset(c);
  const auto result = run_discovery(c, ds);
  std::cout << (result.mode == LibraryMode::kTensor ? "tensor" : "scalar") << " library: " << result.library_size
            << " candidates, " << result.rows << " rows per regression\n";
  for (const auto& eq : result.equations) {
    std::cout << eq.text() << '\n';
    if (eq.error_percent) std::cout << "  prediction error " << *eq.error_percent << "%, redundant terms " << *eq.redundant << '\n';
  }
  write_file(dir / "discovery.json", [&](std::ostream& out) { out << to_json(result).dump(2) << '\n'; });
  return 0;
}

int cmd_pareto(const RunConfig& c) {
  const auto dir = prepare_out(c, "pareto");
  const auto ds = obtain_dataset(c);
  const auto sweep = run_sweep(c, ds);
  std::optional<std::size_t> knee;
  if (sweep.suggestion) knee = sweep.suggestion->knee;
  write_file(dir / "pareto.csv", [&](std::ostream& out) { write_sweep_csv(out, sweep.points, sweep.front, knee); });
  write_file(dir / "pareto.svg", [&](std::ostream& out) { write_sweep_svg(out, sweep.points, sweep.front, knee, c.preset + " d_tol sweep"); });
  nlohmann::json j;
  j["front"] = nlohmann::json::array();
  for (auto i : sweep.front) {
    j["front"].push_back({{"d_tol", sweep.points[i].d_tol}, {"sparsity", sweep.points[i].sparsity}, {"residual", sweep.points[i].residual}});
  }
  j["knee_rule"] = "maximum normalized chord distance in (sparsity, log10 residual)";
  if (sweep.suggestion) {
    const auto& s = *sweep.suggestion;
    j["suggested_d_tol"] = s.d_tol;
    j["plateau"] = {s.plateau_lo, s.plateau_hi};
    j["knee_sparsity"] = sweep.points[s.knee].sparsity;
    std::cout << "knee: sparsity " << sweep.points[s.knee].sparsity << ", residual " << sweep.points[s.knee].residual
              << ", d_tol plateau [" << s.plateau_lo << ", " << s.plateau_hi << "], suggested d_tol " << s.d_tol << '\n';
  } else {
    std::cout << "no knee: the front has fewer than two points\n";
  }
  write_file(dir / "pareto.json", [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  return 0;
}

int cmd_equiv_check(const RunConfig& c, const Options& o) {
  const auto dir = prepare_out(c, "equiv-check");
  EquivarianceOptions eo;
  eo.rotations = o.rotations;
  eo.reflections = o.reflections;
  eo.seed = c.hyper.seed;
  const auto s = run_equivariance(c, eo);
  write_file(dir / "equivariance.csv", [&](std::ostream& out) { write_equivariance_csv(out, s.rows); });
  const bool ok = s.passed(eo);
  nlohmann::json j = {{"candidates", s.candidates},         {"max_analytic_deviation", s.max_analytic},
                      {"max_lattice_deviation", s.max_lattice}, {"control", s.control_name},
                      {"control_deviation", s.control_analytic}, {"passed", ok}};
  write_file(dir / "equivariance.json", [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  std::cout << s.candidates << " candidates; max deviation " << s.max_analytic << " (rotations/reflections), " << s.max_lattice
            << " (lattice); " << s.control_name << ": " << s.control_analytic << '\n'
            << (ok ? "PASS" : "FAIL") << '\n';
  return 0;
}

int cmd_bench(const RunConfig& c, const Options& o) {
  const auto dir = prepare_out(c, "bench");
  const auto ds = obtain_dataset(c);
  const auto records = run_bench(c, ds, o.seeds);
  const auto summary = summarize(records);
  write_file(dir / "bench_runs.csv", [&](std::ostream& out) { write_bench_csv(out, records); });
  write_file(dir / "bench_summary.csv", [&](std::ostream& out) { write_summary_csv(out, summary); });
  for (const auto& s : summary) {
    std::cout << (s.mode == LibraryMode::kTensor ? "tensor" : "scalar") << ": " << s.count << " equation fits, error % mean "
              << s.mean << ", median " << s.median << " [" << s.q1 << ", " << s.q3 << "]; library " << s.library_seconds
              << " s, regression " << s.regression_seconds << " s per run\n";
  }
  return 0;
}

bool report(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
  return ok;
}

int cmd_selftest() {
  bool ok = true;
  {
    const int expected[] = {77, 374, 734, 1530};
    const char* names[] = {"burgers2d", "convection2d", "ns3d", "giesekus3d"};
    std::string detail;
    bool counts_ok = true;
    for (int k = 0; k < 4; ++k) {
      auto spec = preset_config(names[k]).library;
      spec.mode = LibraryMode::kScalar;
      const auto n = build_scalar_library(spec).size();
      counts_ok = counts_ok && static_cast<int>(n) == expected[k];
      detail += std::to_string(n) + (k < 3 ? " " : "");
    }
    ok &= report("scalar library counts", counts_ok, detail);
  }
  {
    const FactorShape u0{"u", 1, 0, false};
    const FactorShape u1{"u", 1, 1, false};
    const auto raw = assign_suffixes(TermTemplate{{u0, u1}});
    std::set<std::string> unique;
    for (const auto& t : raw) {
      if (check_validity(t, 1)) unique.insert(to_text(canonicalize(t)));
    }
    ok &= report("convection template", raw.size() == 27 && unique.size() == 3,
                 std::to_string(raw.size()) + " assignments, " + std::to_string(unique.size()) + " canonical");
  }
  {
    bool all = true;
    for (const char* name : {"burgers2d", "convection2d", "ns3d", "giesekus3d"}) {
      const auto c = preset_config(name);
      const auto lib = build_tensor_library(c.library);
      for (const auto& t : c.tensor_truth().terms) all = all && lib.find(t.text).has_value();
    }
    ok &= report("true terms present in tensor libraries", all, all ? "all present" : "missing terms");
  }
  {
    auto c = preset_config("burgers2d");
    c.burgers->steps = 1000;
    const auto result = run_discovery(c, generate_dataset(c));
    const auto& eq = result.equations.front();
    ok &= report("burgers discovery", eq.redundant == 0 && eq.error_percent < 5.0, eq.text());
  }
  {
    auto c = preset_config("burgers2d");
    EquivarianceOptions eo;
    eo.rotations = 5;
    eo.reflections = 5;
    const auto s = run_equivariance(c, eo);
    ok &= report("burgers library equivariance", s.passed(eo),
                 "max " + std::to_string(s.max_analytic) + ", control " + std::to_string(s.control_analytic));
  }
  return ok ? 0 : kExitSelftest;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cartesian tensor sparse regression for governing-equation discovery"};
  app.require_subcommand(1);
  Options o;
  auto* gen = app.add_subcommand("gen-data", "generate a dataset");
  auto* lib = app.add_subcommand("build-library", "build and report the candidate library");
  auto* disc = app.add_subcommand("discover", "run sparse regression and print the equation");
  auto* pareto = app.add_subcommand("pareto", "sweep d_tol and extract the Pareto front");
  auto* equiv = app.add_subcommand("equiv-check", "check rotation/reflection equivariance of every candidate");
  auto* bench = app.add_subcommand("bench", "multi-seed error statistics and stage timings for both modes");
  auto* self = app.add_subcommand("selftest", "quick acceptance checks");
  for (auto* cmd : {gen, lib, disc, pareto, equiv, bench}) add_common(cmd, o);
  bench->add_option("--seeds", o.seeds, "number of sampling seeds");
  equiv->add_option("--rotations", o.rotations, "random rotations");
  equiv->add_option("--reflections", o.reflections, "random reflections");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUser;
  }

  try {
    if (self->parsed()) return cmd_selftest();
    const RunConfig config = load_config(o);
    if (gen->parsed()) return cmd_gen_data(config);
    if (lib->parsed()) return cmd_build_library(config);
    if (disc->parsed()) return cmd_discover(config);
    if (pareto->parsed()) return cmd_pareto(config);
    if (equiv->parsed()) return cmd_equiv_check(config, o);
    if (bench->parsed()) return cmd_bench(config, o);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUser;
}
