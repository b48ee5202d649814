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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "ctsr/component.hpp"
#include "ctsr/dataset.hpp"

namespace ctsr {
namespace {

using Fn = std::function<double(double, double, double)>;

// Scalar channel "f" on an nx x ny grid over `times` snapshots.
GridDataset grid(int nx, int ny, double h, int times, double dt, const Fn& f, Boundary bx = Boundary::kPeriodic) {
  GridDataset ds;
  ds.spatial_dim = 2;
  ds.shape = {nx, ny, 1};
  ds.spacing = {h, h, 1.0};
  ds.dt = dt;
  ds.times = times;
  ds.boundary = {bx, Boundary::kPeriodic, Boundary::kPeriodic};
  ds.declare({"f", 0, false});
  std::vector<double> v(ds.size());
  for (int t = 0; t < times; ++t) {
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) v[ds.flat(t, {x, y, 0})] = f(x * h, y * h, t * dt);
    }
  }
  ds.set(ComponentId::parse("f"), v);
  return ds;
}

const ComponentId kF = ComponentId::parse("f");

std::filesystem::path temp_stem(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "ctsr_dataset_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

TEST(ComponentId, KeyGrammarRoundTrips) {
  for (const std::string key : {"p", "u[1]", "tau[0][2]_xz", "u[0]_t", "p_yy"}) {
    EXPECT_EQ(ComponentId::parse(key).key(), key);
  }
  const auto id = ComponentId::parse("tau[2][0]_zx");
  EXPECT_EQ(id.canonical(true).key(), "tau[0][2]_xz");
  EXPECT_EQ(id.canonical(false).key(), "tau[2][0]_xz");
  EXPECT_THROW(ComponentId::parse("u[x]"), std::invalid_argument);
  EXPECT_THROW(ComponentId::parse(""), std::invalid_argument);
  EXPECT_THROW(ComponentId::parse("u_q"), std::invalid_argument);
}

TEST(FiniteDifference, ExactOnLinearAndQuadratic) {
  const auto lin = grid(9, 3, 0.5, 1, 1.0, [](double x, double, double) { return 3.0 * x; }, Boundary::kClamped);
  const auto d = fd_derivative(lin, kF, {0});
  for (int x = 1; x < 8; ++x) EXPECT_NEAR(d[lin.flat(0, {x, 1, 0})], 3.0, 1e-12);
  EXPECT_TRUE(std::isnan(d[lin.flat(0, {0, 1, 0})]));
  EXPECT_TRUE(std::isnan(d[lin.flat(0, {8, 1, 0})]));

  const auto quad = grid(9, 3, 0.25, 1, 1.0, [](double x, double, double) { return x * x; }, Boundary::kClamped);
  const auto d2 = fd_derivative(quad, kF, {0, 0});
  for (int x = 1; x < 8; ++x) EXPECT_NEAR(d2[quad.flat(0, {x, 1, 0})], 2.0, 1e-10);
}

TEST(FiniteDifference, MixedPartialOfBilinearIsExact) {
  const auto ds = grid(8, 8, 0.3, 1, 1.0, [](double x, double y, double) { return x * y + y; }, Boundary::kClamped);
  // y is periodic but x*y is not; check only points away from the y seam.
  const auto d = fd_derivative(ds, kF, {0, 1});
  for (int x = 1; x < 7; ++x) {
    for (int y = 1; y < 7; ++y) EXPECT_NEAR(d[ds.flat(0, {x, y, 0})], 1.0, 1e-12);
  }
}

// sin on a periodic grid: the central stencil gives cos(x)(1 - h^2/6 + O(h^4)),
// so the error ratio between h and h/2 approaches 4.
TEST(FiniteDifference, SecondOrderConvergenceOnPeriodicSine) {
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> errors;
  for (int n : {16, 32, 64}) {
    const double h = two_pi / n;
    const auto ds = grid(n, 3, h, 1, 1.0, [](double x, double, double) { return std::sin(x); });
    const auto d = fd_derivative(ds, kF, {0});
    const auto d2 = fd_derivative(ds, kF, {0, 0});
    double err = 0.0;
    for (int x = 0; x < n; ++x) {
      const double exact = std::cos(x * h);
      err = std::max(err, std::abs(d[ds.flat(0, {x, 1, 0})] - exact));
      EXPECT_NEAR(d[ds.flat(0, {x, 1, 0})], exact * (1.0 - h * h / 6.0), 2.0 * std::pow(h, 4) / 120.0 + 1e-14);
      EXPECT_NEAR(d2[ds.flat(0, {x, 1, 0})], -std::sin(x * h) * (1.0 - h * h / 12.0), std::pow(h, 4) / 180.0 + 1e-12);
    }
    errors.push_back(err);
  }
  for (std::size_t k = 1; k < errors.size(); ++k) EXPECT_NEAR(errors[k - 1] / errors[k], 4.0, 0.05);
}

TEST(FiniteDifference, RejectsShortAxisAndDeepDerivatives) {
  const auto ds = grid(2, 4, 1.0, 1, 1.0, [](double x, double, double) { return x; });
  try {
    fd_derivative(ds, kF, {0});
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("axis x"), std::string::npos) << e.what();
  }
  EXPECT_THROW(fd_derivative(ds, kF, {1, 1, 1}), std::invalid_argument);
  EXPECT_THROW(fd_derivative(ds, kF, {2}), std::invalid_argument);
}

TEST(TimeDerivative, CentralDifference) {
  const auto constant = grid(4, 4, 1.0, 5, 0.1, [](double, double, double) { return 2.5; });
  for (double v : time_derivative(constant, kF, 2)) EXPECT_EQ(v, 0.0);

  const auto linear = grid(4, 4, 1.0, 5, 0.1, [](double, double, double t) { return t; });
  for (double v : time_derivative(linear, kF, 1)) EXPECT_NEAR(v, 1.0, 1e-12);

  const double omega = 3.0;
  for (double dt : {0.02, 0.01}) {
    const auto wave = grid(3, 3, 1.0, 20, dt, [omega](double, double, double t) { return std::sin(omega * t); });
    const int t = 7;
    const double exact = omega * std::cos(omega * t * dt);
    // sin(w(t+dt)) - sin(w(t-dt)) over 2 dt = w cos(wt) sin(w dt)/(w dt).
    const double stencil = exact * std::sin(omega * dt) / (omega * dt);
    EXPECT_NEAR(time_derivative(wave, kF, t)[0], stencil, 1e-10);
    EXPECT_LT(std::abs(stencil - exact), omega * omega * omega * dt * dt / 6.0 + 1e-12);
  }
  EXPECT_THROW(time_derivative(linear, kF, 0), std::out_of_range);
  EXPECT_THROW(time_derivative(linear, kF, 4), std::out_of_range);
}

TEST(ChannelStore, StoredDerivativeTakesPrecedence) {
  auto ds = grid(6, 6, 1.0, 3, 1.0, [](double x, double, double) { return x; });
  ds.set(ComponentId::parse("f_x"), std::vector<double>(ds.size(), 42.0));
  ChannelStore store(ds);
  EXPECT_EQ(store.get(ComponentId::parse("f_x"))[0], 42.0);
  EXPECT_EQ(store.get(ComponentId::parse("f_t")).size(), ds.size());
  EXPECT_THROW(store.get(ComponentId::parse("g")), std::out_of_range);
}

TEST(Sampling, DeterministicDistinctAndInsideMargins) {
  const auto ds = grid(10, 12, 1.0, 8, 1.0, [](double x, double y, double t) { return x + 10 * y + 100 * t; },
                       Boundary::kClamped);
  const std::vector<ComponentId> channels{kF, ComponentId::parse("f_x"), ComponentId::parse("f_t")};
  const SamplingSpec spec{15, 4, 99};
  const auto a = sample_points(ds, channels, spec);
  const auto b = sample_points(ds, channels, spec);
  ASSERT_EQ(a.size(), 60u);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.seed, 99u);

  std::set<std::array<int, 3>> points;
  std::set<int> times;
  for (std::size_t r = 0; r < a.size(); ++r) {
    const auto& row = a.rows[r];
    points.insert(row.point);
    times.insert(row.t);
    EXPECT_GE(row.point[0], 1);
    EXPECT_LE(row.point[0], 8);
    EXPECT_GE(row.t, 1);
    EXPECT_LE(row.t, 6);
    // Table values are the channels at the recorded coordinates.
    EXPECT_EQ(a.values(static_cast<Eigen::Index>(r), a.column("f")), row.point[0] + 10.0 * row.point[1] + 100.0 * row.t);
    EXPECT_NEAR(a.values(static_cast<Eigen::Index>(r), a.column("f_x")), 1.0, 1e-12);
    EXPECT_NEAR(a.values(static_cast<Eigen::Index>(r), a.column("f_t")), 100.0, 1e-9);
  }
  EXPECT_EQ(points.size(), 15u);
  EXPECT_EQ(times.size(), 4u);
  EXPECT_EQ(a.column("nope"), -1);

  const auto c = sample_points(ds, channels, SamplingSpec{15, 4, 100});
  EXPECT_NE(a.values, c.values);
}

TEST(Sampling, SteadyModeUsesSnapshotZero) {
  const auto ds = grid(6, 6, 1.0, 1, 1.0, [](double x, double, double) { return x; });
  const auto table = sample_points(ds, {kF}, SamplingSpec{36, 0, 1});
  for (const auto& row : table.rows) EXPECT_EQ(row.t, 0);
  EXPECT_EQ(table.size(), 36u);
}

TEST(Sampling, RejectsOversizedRequests) {
  const auto ds = grid(5, 5, 1.0, 4, 1.0, [](double x, double, double) { return x; }, Boundary::kClamped);
  EXPECT_THROW(sample_points(ds, {ComponentId::parse("f_x")}, SamplingSpec{16, 1, 0}), std::invalid_argument);
  EXPECT_NO_THROW(sample_points(ds, {ComponentId::parse("f_x")}, SamplingSpec{15, 1, 0}));
  EXPECT_THROW(sample_points(ds, {kF}, SamplingSpec{5, 3, 0}), std::invalid_argument);
}

TEST(Storage, SaveLoadRoundTripIsBitExact) {
  auto ds = grid(7, 5, 0.125, 3, 0.02, [](double x, double y, double t) { return std::sin(x) * std::exp(y) + t / 3.0; });
  ds.declare({"tau", 2, true});
  ds.metadata["origin"] = "unit test";
  const auto stem = temp_stem("roundtrip");
  save_dataset(ds, stem);
  const auto back = load_dataset(stem);
  EXPECT_EQ(back.spatial_dim, ds.spatial_dim);
  EXPECT_EQ(back.shape, ds.shape);
  EXPECT_EQ(back.spacing, ds.spacing);
  EXPECT_EQ(back.dt, ds.dt);
  EXPECT_EQ(back.times, ds.times);
  EXPECT_EQ(back.boundary, ds.boundary);
  EXPECT_EQ(back.fields, ds.fields);
  EXPECT_EQ(back.metadata, ds.metadata);
  ASSERT_NE(back.quantity("tau"), nullptr);
  EXPECT_TRUE(back.quantity("tau")->symmetric);
  EXPECT_EQ(back.components(*back.quantity("tau")).size(), 3u);
}

class CorruptedDataset : public ::testing::Test {
 protected:
  void SetUp() override {
    stem_ = temp_stem("corrupt");
    save_dataset(grid(4, 4, 1.0, 2, 1.0, [](double x, double, double) { return x; }), stem_);
  }
  std::filesystem::path json() const { return std::filesystem::path(stem_.string() + ".json"); }
  std::filesystem::path bin() const { return std::filesystem::path(stem_.string() + ".bin"); }
  std::filesystem::path stem_;
};

TEST_F(CorruptedDataset, MalformedHeader) {
  std::ofstream(json()) << "{ not json";
  EXPECT_THROW(load_dataset(stem_), std::invalid_argument);
}

TEST_F(CorruptedDataset, WrongFormatTag) {
  std::ifstream in(json());
  nlohmann::json h;
  in >> h;
  in.close();
  h["format"] = "other";
  std::ofstream(json()) << h.dump();
  EXPECT_THROW(load_dataset(stem_), std::invalid_argument);
}

TEST_F(CorruptedDataset, ShapeDisagreesWithFieldCount) {
  std::ifstream in(json());
  nlohmann::json h;
  in >> h;
  in.close();
  h["shape"] = {5, 4};
  std::ofstream(json()) << h.dump();
  try {
    load_dataset(stem_);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("size mismatch"), std::string::npos) << e.what();
  }
}

TEST_F(CorruptedDataset, TruncatedPayload) {
  std::filesystem::resize_file(bin(), std::filesystem::file_size(bin()) - 8);
  EXPECT_THROW(load_dataset(stem_), std::invalid_argument);
}

TEST_F(CorruptedDataset, MissingFilesAreIoErrors) {
  std::filesystem::remove(bin());
  EXPECT_THROW(load_dataset(stem_), IoError);
  EXPECT_THROW(load_dataset(temp_stem("never_written")), IoError);
}

TEST(GridDataset, ValidationAndChannelSizes) {
  auto ds = grid(4, 4, 1.0, 2, 1.0, [](double x, double, double) { return x; });
  EXPECT_NO_THROW(ds.validate());
  EXPECT_THROW(ds.set(kF, std::vector<double>(3)), std::invalid_argument);
  EXPECT_THROW(ds.declare({"f", 0, false}), std::invalid_argument);
  ds.dt = 0.0;
  EXPECT_THROW(ds.validate(), std::invalid_argument);
  ds.dt = 1.0;
  ds.shape[2] = 2;
  EXPECT_THROW(ds.validate(), std::invalid_argument);
}

TEST(SampleCsv, HeaderListsChannels) {
  const auto ds = grid(4, 4, 1.0, 3, 1.0, [](double x, double, double) { return x; });
  std::ostringstream out;
  write_sample_csv(out, sample_points(ds, {kF}, SamplingSpec{2, 1, 0}));
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "sample,t,x,y,z,f");
}

}  // namespace
}  // namespace ctsr
