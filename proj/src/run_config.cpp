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

#include "ctsr/run_config.hpp"

#include <algorithm>
#include <initializer_list>
#include <stdexcept>

namespace ctsr {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& item : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; })) {
      throw std::invalid_argument(where + ": unknown key '" + item.key() + "'");
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

InputTensorSpec input(std::string name, int order, int max_deriv, bool symmetric = false) {
  InputTensorSpec s;
  s.name = std::move(name);
  s.base_order = order;
  s.max_deriv = max_deriv;
  s.symmetric_base = symmetric;
  return s;
}

void set_truth(RunConfig& c, const std::vector<std::pair<double, std::string>>& terms) {
  const auto q = c.quantity_info();
  c.truth.clear();
  for (const auto& [coef, text] : terms) c.truth.push_back({coef, parse_term(text, q), std::nullopt});
}

const char* mode_name(LibraryMode m) { return m == LibraryMode::kTensor ? "tensor" : "scalar"; }
LibraryMode mode_from(const std::string& s) {
  if (s == "tensor") return LibraryMode::kTensor;
  if (s == "scalar") return LibraryMode::kScalar;
  throw std::invalid_argument("config: mode must be tensor or scalar");
}

json input_json(const InputTensorSpec& s) {
  return {{"name", s.name},
          {"order", s.base_order},
          {"max_deriv", s.max_deriv},
          {"symmetric", s.symmetric_base},
          {"nonderivative", s.include_as_nonderivative},
          {"excluded_standalone", s.excluded_standalone_derivatives},
          {"constant", s.constant}};
}

InputTensorSpec input_from(const json& j) {
  check_keys(j, {"name", "order", "max_deriv", "symmetric", "nonderivative", "excluded_standalone", "constant"}, "input");
  InputTensorSpec s;
  s.name = j.at("name").get<std::string>();
  read(j, "order", s.base_order);
  read(j, "max_deriv", s.max_deriv);
  read(j, "symmetric", s.symmetric_base);
  read(j, "nonderivative", s.include_as_nonderivative);
  read(j, "excluded_standalone", s.excluded_standalone_derivatives);
  read(j, "constant", s.constant);
  return s;
}

json family_json(const FieldFamily& f) {
  return {{"n_modes", f.n_modes},     {"max_wavenumber", f.max_wavenumber}, {"amplitude", f.amplitude},
          {"max_offset", f.max_offset}, {"max_omega", f.max_omega},         {"richness", f.richness}};
}

void family_from(const json& j, FieldFamily& f) {
  check_keys(j, {"n_modes", "max_wavenumber", "amplitude", "max_offset", "max_omega", "richness"}, "family");
  read(j, "n_modes", f.n_modes);
  read(j, "max_wavenumber", f.max_wavenumber);
  read(j, "amplitude", f.amplitude);
  read(j, "max_offset", f.max_offset);
  read(j, "max_omega", f.max_omega);
  read(j, "richness", f.richness);
}

}  // namespace

std::vector<QuantityInfo> RunConfig::quantity_info() const {
  std::vector<QuantityInfo> out;
  for (const auto& in : library.inputs) out.push_back({in.name, in.base_order, in.symmetric_base});
  if (manufactured && !manufactured->lhs_time_derivative) {
    out.push_back({manufactured->lhs_quantity, library.target_order, manufactured->lhs_symmetric});
  }
  return out;
}

GroundTruth RunConfig::tensor_truth() const {
  GroundTruth g;
  for (const auto& w : truth) g.terms.push_back({to_text(canonicalize(w.term)), w.coefficient});
  return g;
}

ManufacturedSpec RunConfig::manufactured_spec() const {
  if (!manufactured) throw std::invalid_argument("config: no manufactured generator configured");
  ManufacturedSpec m = *manufactured;
  m.spatial_dim = library.spatial_dim;
  m.inputs = library.inputs;
  m.constants = constants;
  m.truth = truth;
  m.target_order = library.target_order;
  return m;
}

void RunConfig::validate() const {
  library.validate();
  hyper.validate();
  if (sampling.n_space < 1 || sampling.n_time < 0) throw std::invalid_argument("config: bad sampling sizes");
  if (burgers && manufactured) throw std::invalid_argument("config: burgers and manufactured generators are exclusive");
  if (burgers) {
    burgers->validate();
    if (library.spatial_dim != 2) throw std::invalid_argument("config: the burgers generator is two-dimensional");
  }
  if (manufactured) manufactured_spec().validate();
  if (lhs.kind == LhsSpec::Kind::kTimeDerivative && lhs.quantity.empty()) {
    throw std::invalid_argument("config: time-derivative left side needs a quantity");
  }
  for (const auto& in : library.inputs) {
    if (in.constant && !constants.count(in.name)) throw std::invalid_argument("config: constant input " + in.name + " has no values");
  }
  if (sweep.points < 1 || !(sweep.lo > 0.0) || !(sweep.hi >= sweep.lo) || sweep.jobs < 1) {
    throw std::invalid_argument("config: bad sweep range");
  }
}

std::vector<std::string> preset_names() { return {"burgers2d", "convection2d", "ns3d", "giesekus3d", "custom"}; }

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  c.preset = name;
  c.hyper = Hyperparams{};
  c.sampling = SamplingSpec{50, 20, 0};
  c.library.max_product_order = 2;
  c.library.target_order = 1;
  c.lhs = LhsSpec::time_derivative("u");
  if (name == "custom") return c;

  if (name == "burgers2d") {
    c.library.spatial_dim = 2;
    c.library.inputs = {input("u", 1, 2)};
    c.hyper.d_tol = 1e-3;
    BurgersConfig b;
    b.steps = 1990;  // 200 snapshots at 0.02
    c.burgers = b;
    c.reference_tensor_count = 17;
    c.reference_scalar_count = 77;
    set_truth(c, {{-1.0, "u[j] du[i]/dx[j]"}, {0.1, "d2u[i]/dx[j]dx[j]"}});
    return c;
  }

  ManufacturedSpec m;
  m.equation = name;
  if (name == "convection2d") {
    auto g = input("g", 1, 0);
    g.constant = true;
    c.library.spatial_dim = 2;
    c.library.inputs = {input("u", 1, 2), input("p", 0, 2), input("theta", 0, 2), g};
    c.constants["g"] = {0.0, -1.0};
    c.hyper.d_tol = 1e-2;
    m.points_per_axis = 48;
    m.times = 30;
    c.reference_tensor_count = 74;
    c.reference_scalar_count = 374;
    c.manufactured = m;
    set_truth(c, {{-1.0, "u[j] du[i]/dx[j]"},
                  {0.00071, "d2u[i]/dx[j]dx[j]"},
                  {-1.0, "dp/dx[i]"},
                  {-0.71, "theta g[i]"}});
    return c;
  }
  if (name == "ns3d") {
    c.library.spatial_dim = 3;
    c.library.inputs = {input("u", 1, 2), input("p", 0, 2)};
    c.hyper.d_tol = 1e-2;
    m.points_per_axis = 16;
    m.times = 24;
    c.reference_tensor_count = 34;
    c.reference_scalar_count = 734;
    c.manufactured = m;
    set_truth(c, {{-1.0, "u[j] du[i]/dx[j]"}, {0.005, "d2u[i]/dx[j]dx[j]"}, {-1.0, "dp/dx[i]"}});
    return c;
  }
  if (name == "giesekus3d") {
    auto u = input("u", 1, 1);
    u.excluded_standalone_derivatives = {1};
    c.library.spatial_dim = 3;
    c.library.target_order = 2;
    c.library.inputs = {u, input("tau", 2, 1, true)};
    c.hyper.d_tol = 1.2;
    c.sampling = SamplingSpec{1000, 0, 0};
    m.points_per_axis = 20;
    m.times = 1;
    m.lhs_quantity = "lhs";
    m.lhs_time_derivative = false;
    m.lhs_symmetric = true;
    c.manufactured = m;
    c.reference_tensor_count = 115;
    c.reference_scalar_count = 1530;
    const auto q = c.quantity_info();
    c.lhs = LhsSpec::prescribed({{1.0, parse_term("lhs[i,j]", q)}});
    set_truth(c, {{1.0, "tau[i,j]"},
                  {0.008, "dtau[i,j]/dx[k] u[k]"},
                  {-0.008, "tau[i,k] du[j]/dx[k]"},
                  {-0.008, "tau[j,k] du[i]/dx[k]"},
                  {0.93, "tau[i,k] tau[j,k]"}});
    return c;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

nlohmann::json to_json(const RunConfig& c) {
  json j;
  j["preset"] = c.preset;
  json inputs = json::array();
  for (const auto& in : c.library.inputs) inputs.push_back(input_json(in));
  j["library"] = {{"inputs", inputs},
                  {"max_product_order", c.library.max_product_order},
                  {"target_order", c.library.target_order},
                  {"mode", mode_name(c.library.mode)},
                  {"spatial_dim", c.library.spatial_dim}};
  j["hyper"] = {{"lambda", c.hyper.lambda},
                {"d_tol", c.hyper.d_tol},
                {"n_train", c.hyper.n_train},
                {"n_stridge", c.hyper.n_stridge},
                {"split_ratio", c.hyper.split_ratio},
                {"seed", c.hyper.seed},
                {"tol_schedule", c.hyper.tol_schedule == TolSchedule::kRefine ? "refine" : "reference"},
                {"normalize_columns", c.hyper.normalize_columns}};
  j["sampling"] = {{"n_space", c.sampling.n_space}, {"n_time", c.sampling.n_time}, {"seed", c.sampling.seed}};
  if (c.lhs.kind == LhsSpec::Kind::kTimeDerivative) {
    j["lhs"] = {{"kind", "time_derivative"}, {"quantity", c.lhs.quantity}};
  } else {
    json terms = json::array();
    for (const auto& [coef, term] : c.lhs.terms) terms.push_back({{"coefficient", coef}, {"term", to_text(term)}});
    j["lhs"] = {{"kind", "prescribed"}, {"terms", terms}};
  }
  json truth = json::array();
  for (const auto& w : c.truth) truth.push_back({{"coefficient", w.coefficient}, {"term", to_text(w.term)}});
  j["truth"] = truth;
  j["constants"] = c.constants;
  j["ordered_pairs"] = c.assembly.ordered_pairs;
  j["sweep"] = {{"lo", c.sweep.lo}, {"hi", c.sweep.hi}, {"points", c.sweep.points}, {"jobs", c.sweep.jobs}};
  if (c.burgers) {
    const auto& b = *c.burgers;
    j["burgers"] = {{"n", b.n},         {"length", b.length},     {"epsilon", b.epsilon},
                    {"dt", b.dt},       {"steps", b.steps},       {"save_every", b.save_every},
                    {"seed", b.seed},   {"max_wavenumber", b.max_wavenumber}, {"reference_lattice", b.reference_lattice}};
  }
  if (c.manufactured) {
    const auto& m = *c.manufactured;
    j["manufactured"] = {{"equation", m.equation},
                         {"points_per_axis", m.points_per_axis},
                         {"times", m.times},
                         {"dt", m.dt},
                         {"lhs_quantity", m.lhs_quantity},
                         {"lhs_time_derivative", m.lhs_time_derivative},
                         {"lhs_symmetric", m.lhs_symmetric},
                         {"family", family_json(m.family)},
                         {"derivative_mode", m.derivative_mode == DerivativeMode::kAnalytic ? "analytic" : "stencil"},
                         {"noise", m.noise},
                         {"seed", m.seed}};
  }
  j["dataset"] = c.dataset;
  j["out_dir"] = c.out_dir;
  j["reference_tensor_count"] = c.reference_tensor_count;
  j["reference_scalar_count"] = c.reference_scalar_count;
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  check_keys(j, {"preset", "library", "hyper", "sampling", "lhs", "truth", "constants", "ordered_pairs", "sweep", "burgers",
                 "manufactured", "dataset", "out_dir", "reference_tensor_count", "reference_scalar_count"},
             "config");
  RunConfig c = preset_config(j.value("preset", std::string("custom")));
  if (j.contains("library")) {
    const auto& l = j.at("library");
    check_keys(l, {"inputs", "max_product_order", "target_order", "mode", "spatial_dim"}, "library");
    if (l.contains("inputs")) {
      c.library.inputs.clear();
      for (const auto& in : l.at("inputs")) c.library.inputs.push_back(input_from(in));
    }
    read(l, "max_product_order", c.library.max_product_order);
    read(l, "target_order", c.library.target_order);
    read(l, "spatial_dim", c.library.spatial_dim);
    if (l.contains("mode")) c.library.mode = mode_from(l.at("mode").get<std::string>());
  }
  if (j.contains("hyper")) {
    const auto& h = j.at("hyper");
    check_keys(h, {"lambda", "d_tol", "n_train", "n_stridge", "split_ratio", "seed", "tol_schedule", "normalize_columns"}, "hyper");
    read(h, "lambda", c.hyper.lambda);
    read(h, "d_tol", c.hyper.d_tol);
    read(h, "n_train", c.hyper.n_train);
    read(h, "n_stridge", c.hyper.n_stridge);
    read(h, "split_ratio", c.hyper.split_ratio);
    read(h, "seed", c.hyper.seed);
    read(h, "normalize_columns", c.hyper.normalize_columns);
    if (h.contains("tol_schedule")) {
      const auto s = h.at("tol_schedule").get<std::string>();
      if (s != "refine" && s != "reference") throw std::invalid_argument("hyper: tol_schedule must be refine or reference");
      c.hyper.tol_schedule = s == "refine" ? TolSchedule::kRefine : TolSchedule::kReference;
    }
  }
  if (j.contains("sampling")) {
    const auto& s = j.at("sampling");
    check_keys(s, {"n_space", "n_time", "seed"}, "sampling");
    read(s, "n_space", c.sampling.n_space);
    read(s, "n_time", c.sampling.n_time);
    read(s, "seed", c.sampling.seed);
  }
  read(j, "constants", c.constants);
  read(j, "ordered_pairs", c.assembly.ordered_pairs);
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    check_keys(s, {"lo", "hi", "points", "jobs"}, "sweep");
    read(s, "lo", c.sweep.lo);
    read(s, "hi", c.sweep.hi);
    read(s, "points", c.sweep.points);
    read(s, "jobs", c.sweep.jobs);
  }
  if (j.contains("burgers")) {
    const auto& b = j.at("burgers");
    if (b.is_null()) {
      c.burgers.reset();
    } else {
      check_keys(b, {"n", "length", "epsilon", "dt", "steps", "save_every", "seed", "max_wavenumber", "reference_lattice"}, "burgers");
      BurgersConfig cfg = c.burgers.value_or(BurgersConfig{});
      read(b, "n", cfg.n);
      read(b, "length", cfg.length);
      read(b, "epsilon", cfg.epsilon);
      read(b, "dt", cfg.dt);
      read(b, "steps", cfg.steps);
      read(b, "save_every", cfg.save_every);
      read(b, "seed", cfg.seed);
      read(b, "max_wavenumber", cfg.max_wavenumber);
      read(b, "reference_lattice", cfg.reference_lattice);
      c.burgers = cfg;
    }
  }
  if (j.contains("manufactured")) {
    const auto& m = j.at("manufactured");
    if (m.is_null()) {
      c.manufactured.reset();
    } else {
      check_keys(m, {"equation", "points_per_axis", "times", "dt", "lhs_quantity", "lhs_time_derivative", "lhs_symmetric", "family",
                     "derivative_mode", "noise", "seed"},
                 "manufactured");
      ManufacturedSpec spec = c.manufactured.value_or(ManufacturedSpec{});
      read(m, "equation", spec.equation);
      read(m, "points_per_axis", spec.points_per_axis);
      read(m, "times", spec.times);
      read(m, "dt", spec.dt);
      read(m, "lhs_quantity", spec.lhs_quantity);
      read(m, "lhs_time_derivative", spec.lhs_time_derivative);
      read(m, "lhs_symmetric", spec.lhs_symmetric);
      read(m, "seed", spec.seed);
      read(m, "noise", spec.noise);
      if (m.contains("family")) family_from(m.at("family"), spec.family);
      if (m.contains("derivative_mode")) {
        const auto s = m.at("derivative_mode").get<std::string>();
        if (s != "analytic" && s != "stencil") throw std::invalid_argument("manufactured: derivative_mode must be analytic or stencil");
        spec.derivative_mode = s == "analytic" ? DerivativeMode::kAnalytic : DerivativeMode::kStencil;
      }
      c.manufactured = spec;
    }
  }
  // Terms are parsed after the library and generator blocks so new quantities resolve.
  const auto q = c.quantity_info();
  if (j.contains("lhs")) {
    const auto& l = j.at("lhs");
    check_keys(l, {"kind", "quantity", "terms"}, "lhs");
    const auto kind = l.value("kind", std::string("time_derivative"));
    if (kind == "time_derivative") {
      c.lhs = LhsSpec::time_derivative(l.at("quantity").get<std::string>());
    } else if (kind == "prescribed") {
      std::vector<std::pair<double, CandidateTerm>> terms;
      for (const auto& t : l.at("terms")) terms.emplace_back(t.at("coefficient").get<double>(), parse_term(t.at("term").get<std::string>(), q));
      c.lhs = LhsSpec::prescribed(std::move(terms));
    } else {
      throw std::invalid_argument("lhs: kind must be time_derivative or prescribed");
    }
  }
  if (j.contains("truth")) {
    c.truth.clear();
    for (const auto& t : j.at("truth")) {
      check_keys(t, {"coefficient", "term"}, "truth");
      c.truth.push_back({t.at("coefficient").get<double>(), parse_term(t.at("term").get<std::string>(), q), std::nullopt});
    }
  }
  read(j, "dataset", c.dataset);
  read(j, "out_dir", c.out_dir);
  read(j, "reference_tensor_count", c.reference_tensor_count);
  read(j, "reference_scalar_count", c.reference_scalar_count);
  c.validate();
  return c;
}

GridDataset generate_dataset(const RunConfig& config) {
  if (config.burgers) return burgers2d_simulate(*config.burgers);
  if (config.manufactured) return manufactured_dataset(config.manufactured_spec());
  throw std::invalid_argument("config: no generator configured");
}

}  // namespace ctsr
