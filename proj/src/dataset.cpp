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

#include "ctsr/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "ctsr/csv.hpp"

namespace ctsr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string boundary_name(Boundary b) { return b == Boundary::kPeriodic ? "periodic" : "clamped"; }

Boundary parse_boundary(const std::string& s) {
  if (s == "periodic") return Boundary::kPeriodic;
  if (s == "clamped") return Boundary::kClamped;
  throw std::invalid_argument("dataset header: unknown boundary '" + s + "'");
}

// One central-difference pass. `second` selects the compact second-difference stencil.
std::vector<double> central_pass(const GridDataset& ds, const std::vector<double>& f, int axis, bool second) {
  const int n = ds.shape[static_cast<std::size_t>(axis)];
  if (n < 3) {
    throw std::invalid_argument(std::string("finite difference: axis ") + axis_letter(axis) + " has " +
                                std::to_string(n) + " points, need at least 3");
  }
  const bool periodic = ds.boundary[static_cast<std::size_t>(axis)] == Boundary::kPeriodic;
  const double h = ds.spacing[static_cast<std::size_t>(axis)];
  std::size_t stride = 1;
  for (int a = 0; a < axis; ++a) stride *= static_cast<std::size_t>(ds.shape[static_cast<std::size_t>(a)]);
  const std::size_t nn = static_cast<std::size_t>(n);
  std::vector<double> out(f.size());
  const std::size_t lines = f.size() / nn;
  for (std::size_t line = 0; line < lines; ++line) {
    const std::size_t outer = line / stride;
    const std::size_t inner = line % stride;
    const std::size_t base = outer * stride * nn + inner;
    for (std::size_t c = 0; c < nn; ++c) {
      std::size_t lo = c - 1;
      std::size_t hi = c + 1;
      if (c == 0 || c + 1 == nn) {
        if (!periodic) {
          out[base + c * stride] = kNaN;
          continue;
        }
        lo = (c + nn - 1) % nn;
        hi = (c + 1) % nn;
      }
      const double fl = f[base + lo * stride];
      const double fh = f[base + hi * stride];
      out[base + c * stride] = second ? (fh - 2.0 * f[base + c * stride] + fl) / (h * h) : (fh - fl) / (2.0 * h);
    }
  }
  return out;
}

template <class T>
void write_le(std::ofstream& out, const std::vector<T>& values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(T)));
  } else {
    for (T v : values) {
      char bytes[sizeof(T)];
      std::memcpy(bytes, &v, sizeof(T));
      std::reverse(bytes, bytes + sizeof(T));
      out.write(bytes, sizeof(T));
    }
  }
}

void from_le(std::vector<double>& values) {
  if constexpr (std::endian::native != std::endian::little) {
    for (double& v : values) {
      char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      std::reverse(bytes, bytes + sizeof(double));
      std::memcpy(&v, bytes, sizeof(double));
    }
  }
}

std::filesystem::path with_ext(std::filesystem::path stem, const char* ext) {
  if (stem.extension() == ".json" || stem.extension() == ".bin") stem.replace_extension();
  stem += ext;
  return stem;
}

}  // namespace

const QuantityDecl* GridDataset::quantity(const std::string& name) const {
  for (const auto& q : quantities) {
    if (q.name == name) return &q;
  }
  return nullptr;
}

ComponentId GridDataset::canonical(const ComponentId& id) const {
  const auto* q = quantity(id.quantity);
  return id.canonical(q != nullptr && q->symmetric);
}

bool GridDataset::has(const ComponentId& id) const { return fields.count(canonical(id).key()) != 0; }

const std::vector<double>& GridDataset::field(const ComponentId& id) const {
  auto it = fields.find(canonical(id).key());
  if (it == fields.end()) throw std::out_of_range("dataset has no channel " + canonical(id).key());
  return it->second;
}

void GridDataset::set(const ComponentId& id, std::vector<double> values) {
  if (values.size() != size()) {
    throw std::invalid_argument("channel " + id.key() + ": " + std::to_string(values.size()) + " values, expected " +
                                std::to_string(size()));
  }
  fields[canonical(id).key()] = std::move(values);
}

void GridDataset::declare(const QuantityDecl& q) {
  if (quantity(q.name) != nullptr) throw std::invalid_argument("quantity declared twice: " + q.name);
  quantities.push_back(q);
  for (const auto& c : components(q)) fields[c.key()].assign(size(), 0.0);
}

std::vector<ComponentId> GridDataset::components(const QuantityDecl& q) const {
  std::vector<std::vector<int>> idx{{}};
  for (int s = 0; s < q.order; ++s) {
    std::vector<std::vector<int>> next;
    for (const auto& prefix : idx) {
      for (int a = 0; a < spatial_dim; ++a) {
        if (q.symmetric && s == 1 && a < prefix[0]) continue;
        auto v = prefix;
        v.push_back(a);
        next.push_back(std::move(v));
      }
    }
    idx = std::move(next);
  }
  std::vector<ComponentId> out;
  for (auto& i : idx) out.push_back({q.name, std::move(i), {}, false});
  return out;
}

void GridDataset::validate() const {
  if (spatial_dim != 2 && spatial_dim != 3) throw std::invalid_argument("dataset: spatial_dim must be 2 or 3");
  for (int a = 0; a < 3; ++a) {
    if (shape[static_cast<std::size_t>(a)] < 1) throw std::invalid_argument("dataset: non-positive shape");
    if (a >= spatial_dim && shape[static_cast<std::size_t>(a)] != 1) {
      throw std::invalid_argument("dataset: unused axis must have extent 1");
    }
    if (!(spacing[static_cast<std::size_t>(a)] > 0.0)) throw std::invalid_argument("dataset: spacing must be > 0");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("dataset: dt must be > 0");
  if (times < 1) throw std::invalid_argument("dataset: need at least one snapshot");
  for (const auto& [key, values] : fields) {
    if (values.size() != size()) throw std::invalid_argument("dataset: channel " + key + " has wrong size");
  }
}

std::vector<double> fd_derivative(const GridDataset& ds, const ComponentId& field, const std::vector<int>& axes) {
  if (axes.size() > 2) throw std::invalid_argument("finite difference: derivative depth above 2");
  for (int a : axes) {
    if (a < 0 || a >= ds.spatial_dim) throw std::invalid_argument("finite difference: axis outside the dataset");
  }
  const auto& f = ds.field(field.base());
  if (axes.empty()) return f;
  if (axes.size() == 2 && axes[0] == axes[1]) return central_pass(ds, f, axes[0], true);
  auto out = central_pass(ds, f, axes[0], false);
  if (axes.size() == 2) out = central_pass(ds, out, axes[1], false);
  return out;
}

std::vector<double> time_derivative(const GridDataset& ds, const ComponentId& field, int t) {
  if (t < 1 || t > ds.times - 2) {
    throw std::out_of_range("time derivative: snapshot " + std::to_string(t) + " has no central neighbours");
  }
  const auto& f = ds.field(field.base());
  const std::size_t n = ds.points();
  std::vector<double> out(n);
  const std::size_t prev = static_cast<std::size_t>(t - 1) * n;
  const std::size_t next = static_cast<std::size_t>(t + 1) * n;
  for (std::size_t i = 0; i < n; ++i) out[i] = (f[next + i] - f[prev + i]) / (2.0 * ds.dt);
  return out;
}

const std::vector<double>& ChannelStore::get(const ComponentId& raw) {
  const ComponentId id = ds_.canonical(raw);
  const std::string key = id.key();
  if (auto it = ds_.fields.find(key); it != ds_.fields.end()) return it->second;
  if (auto it = computed_.find(key); it != computed_.end()) return it->second;
  std::vector<double> values;
  if (id.time_derivative) {
    if (!id.axes.empty()) throw std::invalid_argument("mixed space-time channels are not supported: " + key);
    values.assign(ds_.size(), kNaN);
    const std::size_t n = ds_.points();
    for (int t = 1; t + 1 < ds_.times; ++t) {
      const auto snap = time_derivative(ds_, id, t);
      std::copy(snap.begin(), snap.end(), values.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(t) * n));
    }
  } else {
    values = fd_derivative(ds_, id, id.axes);
  }
  return computed_.emplace(key, std::move(values)).first->second;
}

int SampleTable::column(const std::string& key) const {
  auto it = std::find(columns.begin(), columns.end(), key);
  return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

SampleTable sample_points(const GridDataset& ds, const std::vector<ComponentId>& channels, const SamplingSpec& spec) {
  ChannelStore store(ds);
  return sample_points(store, channels, spec);
}

SampleTable sample_points(ChannelStore& store, const std::vector<ComponentId>& channels, const SamplingSpec& spec) {
  const GridDataset& ds = store.dataset();
  if (spec.n_space < 1 || spec.n_time < 0) throw std::invalid_argument("sampling: n_space must be >= 1, n_time >= 0");
  bool stencils = false;
  std::vector<std::string> keys;
  std::vector<ComponentId> ids;
  for (const auto& c : channels) {
    const auto id = ds.canonical(c);
    if (!id.axes.empty() && !ds.has(id)) stencils = true;
    const auto key = id.key();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      keys.push_back(key);
      ids.push_back(id);
    }
  }

  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> extent{1, 1, 1};
  for (std::size_t a = 0; a < static_cast<std::size_t>(ds.spatial_dim); ++a) {
    const int margin = (stencils && ds.boundary[a] == Boundary::kClamped) ? 1 : 0;
    lo[a] = margin;
    extent[a] = ds.shape[a] - 2 * margin;
    if (extent[a] < 1) throw std::invalid_argument(std::string("sampling: no interior points on axis ") + axis_letter(static_cast<int>(a)));
  }
  const std::size_t n_interior =
      static_cast<std::size_t>(extent[0]) * static_cast<std::size_t>(extent[1]) * static_cast<std::size_t>(extent[2]);
  if (static_cast<std::size_t>(spec.n_space) > n_interior) {
    throw std::invalid_argument("sampling: requested " + std::to_string(spec.n_space) + " spatial points, only " +
                                std::to_string(n_interior) + " interior points");
  }
  std::vector<int> snapshots;
  if (spec.n_time == 0) {
    snapshots.push_back(0);
  } else {
    const int available = ds.times - 2;
    if (spec.n_time > available) {
      throw std::invalid_argument("sampling: requested " + std::to_string(spec.n_time) + " snapshots, only " +
                                  std::to_string(std::max(available, 0)) + " interior snapshots");
    }
    snapshots.resize(static_cast<std::size_t>(available));
    std::iota(snapshots.begin(), snapshots.end(), 1);
  }

  std::mt19937_64 rng(spec.seed);
  // Partial Fisher-Yates over implicit index ranges.
  auto draw = [&rng](std::size_t population, std::size_t k) {
    std::map<std::size_t, std::size_t> swapped;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, population - 1);
      const std::size_t j = pick(rng);
      const std::size_t vj = swapped.count(j) ? swapped[j] : j;
      const std::size_t vi = swapped.count(i) ? swapped[i] : i;
      swapped[j] = vi;
      out.push_back(vj);
    }
    return out;
  };
  const auto space = draw(n_interior, static_cast<std::size_t>(spec.n_space));
  std::vector<int> times;
  if (spec.n_time == 0) {
    times = snapshots;
  } else {
    for (std::size_t s : draw(snapshots.size(), static_cast<std::size_t>(spec.n_time))) times.push_back(snapshots[s]);
  }

  SampleTable table;
  table.seed = spec.seed;
  table.columns = keys;
  for (int t : times) {
    for (std::size_t s : space) {
      SampleRow row;
      row.t = t;
      std::size_t rest = s;
      for (std::size_t a = 0; a < 3; ++a) {
        row.point[a] = lo[a] + static_cast<int>(rest % static_cast<std::size_t>(extent[a]));
        rest /= static_cast<std::size_t>(extent[a]);
      }
      table.rows.push_back(row);
    }
  }
  table.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t c = 0; c < ids.size(); ++c) {
    const auto& channel = store.get(ids[c]);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          channel[ds.flat(table.rows[r].t, table.rows[r].point)];
    }
  }
  return table;
}

void write_sample_csv(std::ostream& out, const SampleTable& table) {
  out << "sample,t,x,y,z";
  for (const auto& c : table.columns) out << ',' << csv_field(c);
  out << '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    out << r << ',' << row.t << ',' << row.point[0] << ',' << row.point[1] << ',' << row.point[2];
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) out << ',' << format_double(table.values(static_cast<Eigen::Index>(r), c));
    out << '\n';
  }
}

void save_dataset(const GridDataset& ds, const std::filesystem::path& stem) {
  ds.validate();
  nlohmann::json h;
  h["format"] = "ctsr-grid";
  h["version"] = 1;
  h["endianness"] = "little";
  h["dtype"] = "float64";
  h["spatial_dim"] = ds.spatial_dim;
  h["shape"] = std::vector<int>(ds.shape.begin(), ds.shape.begin() + ds.spatial_dim);
  h["spacing"] = std::vector<double>(ds.spacing.begin(), ds.spacing.begin() + ds.spatial_dim);
  std::vector<std::string> bounds;
  for (int a = 0; a < ds.spatial_dim; ++a) bounds.push_back(boundary_name(ds.boundary[static_cast<std::size_t>(a)]));
  h["boundary"] = bounds;
  h["dt"] = ds.dt;
  h["times"] = ds.times;
  h["quantities"] = nlohmann::json::array();
  for (const auto& q : ds.quantities) h["quantities"].push_back({{"name", q.name}, {"order", q.order}, {"symmetric", q.symmetric}});
  h["fields"] = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& [key, values] : ds.fields) {
    h["fields"].push_back({{"key", key}, {"offset", offset}, {"count", values.size()}});
    offset += values.size();
  }
  h["metadata"] = ds.metadata;

  const auto header_path = with_ext(stem, ".json");
  const auto payload_path = with_ext(stem, ".bin");
  if (header_path.has_parent_path()) std::filesystem::create_directories(header_path.parent_path());
  std::ofstream header(header_path);
  if (!header) throw IoError("cannot write " + header_path.string());
  header << h.dump(2) << '\n';
  std::ofstream payload(payload_path, std::ios::binary);
  if (!payload) throw IoError("cannot write " + payload_path.string());
  for (const auto& [key, values] : ds.fields) write_le(payload, values);
  if (!header || !payload) throw IoError("write failed for dataset " + stem.string());
}

GridDataset load_dataset(const std::filesystem::path& stem) {
  const auto header_path = with_ext(stem, ".json");
  const auto payload_path = with_ext(stem, ".bin");
  std::ifstream header(header_path);
  if (!header) throw IoError("cannot open " + header_path.string());
  nlohmann::json h;
  try {
    header >> h;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed dataset header " + header_path.string() + ": " + e.what());
  }

  GridDataset ds;
  try {
    if (h.at("format") != "ctsr-grid") throw std::invalid_argument("not a ctsr-grid header");
    if (h.value("endianness", "little") != "little") throw std::invalid_argument("unsupported endianness");
    ds.spatial_dim = h.at("spatial_dim").get<int>();
    if (ds.spatial_dim != 2 && ds.spatial_dim != 3) throw std::invalid_argument("spatial_dim must be 2 or 3");
    const auto shape = h.at("shape").get<std::vector<int>>();
    const auto spacing = h.at("spacing").get<std::vector<double>>();
    const auto bounds = h.at("boundary").get<std::vector<std::string>>();
    const auto dim = static_cast<std::size_t>(ds.spatial_dim);
    if (shape.size() != dim || spacing.size() != dim || bounds.size() != dim) {
      throw std::invalid_argument("shape/spacing/boundary length differs from spatial_dim");
    }
    for (std::size_t a = 0; a < dim; ++a) {
      ds.shape[a] = shape[a];
      ds.spacing[a] = spacing[a];
      ds.boundary[a] = parse_boundary(bounds[a]);
    }
    ds.dt = h.at("dt").get<double>();
    ds.times = h.at("times").get<int>();
    for (const auto& q : h.at("quantities")) {
      ds.quantities.push_back({q.at("name").get<std::string>(), q.at("order").get<int>(), q.value("symmetric", false)});
    }
    if (h.contains("metadata")) ds.metadata = h["metadata"];
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed dataset header " + header_path.string() + ": " + e.what());
  }
  for (int a = 0; a < ds.spatial_dim; ++a) {
    if (ds.shape[static_cast<std::size_t>(a)] < 1) throw std::invalid_argument("malformed dataset header: bad shape");
  }
  if (ds.times < 1) throw std::invalid_argument("malformed dataset header: bad snapshot count");

  std::ifstream payload(payload_path, std::ios::binary | std::ios::ate);
  if (!payload) throw IoError("cannot open " + payload_path.string());
  const auto bytes = static_cast<std::size_t>(payload.tellg());
  payload.seekg(0);

  std::size_t expected = 0;
  for (const auto& f : h.at("fields")) {
    const auto count = f.at("count").get<std::size_t>();
    const auto offset = f.at("offset").get<std::size_t>();
    if (count != ds.size()) {
      throw std::invalid_argument("dataset size mismatch: field " + f.at("key").get<std::string>() + " has " +
                                  std::to_string(count) + " values, header grid needs " + std::to_string(ds.size()));
    }
    if (offset != expected) throw std::invalid_argument("malformed dataset header: non-contiguous field offsets");
    expected += count;
  }
  if (bytes != expected * sizeof(double)) {
    throw std::invalid_argument("dataset size mismatch: payload has " + std::to_string(bytes) + " bytes, header needs " +
                                std::to_string(expected * sizeof(double)));
  }
  for (const auto& f : h.at("fields")) {
    std::vector<double> values(f.at("count").get<std::size_t>());
    payload.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!payload) throw std::invalid_argument("dataset payload truncated");
    from_le(values);
    ds.fields[ComponentId::parse(f.at("key").get<std::string>()).key()] = std::move(values);
  }
  ds.validate();
  return ds;
}

}  // namespace ctsr
