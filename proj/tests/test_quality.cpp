// Copyright 2026 The cffkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "cff/quality.hpp"

using namespace cff;

namespace {

PerturbationDescriptor desc(double e, double fs, double ft) {
  PerturbationDescriptor d;
  d.eccentricity_track = {e};
  d.fs = fs;
  d.ft = ft;
  return d;
}

// Distance-from-gaze helper mirroring how descriptors are built from screen
// positions.
PerturbationDescriptor desc_from_offset(double gx, double gy, double px,
                                        double py, double fs, double ft) {
  return desc(std::hypot(px - gx, py - gy), fs, ft);
}

}  // namespace

TEST_CASE("180 Hz control is always good") {
  const auto& m = CffParameters::full();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ecc(0.0, 80.0);
  std::uniform_real_distribution<double> lfs(std::log(0.006), std::log(30.0));
  std::vector<PerturbationDescriptor> ds;
  for (int i = 0; i < 50; ++i)
    ds.push_back(desc(ecc(rng), std::exp(lfs(rng)), 180.0));
  const VideoVerdict v = predict_visibility(ds, m);
  CHECK(v.good);
  for (const auto& d : v.details) CHECK_FALSE(d.visible);
}

TEST_CASE("slow flicker in the sensitive mid-periphery is bad") {
  const auto& m = CffParameters::full();
  const double threshold = psi(30.0, 1.0, m);
  CHECK(threshold == doctest::Approx(58.125).epsilon(1e-3));
  const VideoVerdict v =
      predict_visibility({desc(30.0, 1.0, 0.75 * threshold)}, m);
  CHECK_FALSE(v.good);
  CHECK(v.details.front().visible);
}

TEST_CASE("beyond the foveal acuity limit nothing flickers") {
  const auto& m = CffParameters::full();
  // At the fovea the fitted threshold surface reaches zero below the acuity
  // limit, so any fs at or past it is invisible at every rate.
  for (double ft : {0.5, 5.0, 60.0, 500.0}) {
    const VideoVerdict v = predict_visibility({desc(0.0, 39.3, ft)}, m);
    CHECK(v.good);
    CHECK(v.details.front().threshold_hz == 0.0);
  }
}

TEST_CASE("raising ft never flips good to bad") {
  const auto& m = CffParameters::full();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ecc(0.0, 70.0);
  std::uniform_real_distribution<double> lfs(std::log(0.006), std::log(4.0));
  std::uniform_real_distribution<double> rate(1.0, 120.0);
  for (int i = 0; i < 300; ++i) {
    PerturbationDescriptor d = desc(ecc(rng), std::exp(lfs(rng)), rate(rng));
    const bool good_before = predict_visibility({d}, m).good;
    if (!good_before) continue;
    d.ft *= 1.0 + 3.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    CHECK(predict_visibility({d}, m).good);
  }
}

TEST_CASE("opposite directions from gaze are equivalent") {
  const auto& m = CffParameters::full();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> pos(-30.0, 30.0);
  std::uniform_real_distribution<double> rate(1.0, 100.0);
  for (int i = 0; i < 200; ++i) {
    const double gx = pos(rng), gy = pos(rng);
    const double dx = pos(rng), dy = pos(rng);
    const double ft = rate(rng);
    const auto a = predict_visibility(
        {desc_from_offset(gx, gy, gx + dx, gy + dy, 0.8, ft)}, m);
    const auto b = predict_visibility(
        {desc_from_offset(gx, gy, gx - dx, gy - dy, 0.8, ft)}, m);
    CHECK(a.good == b.good);
    CHECK(a.details.front().threshold_hz ==
          doctest::Approx(b.details.front().threshold_hz).epsilon(1e-12));
  }
}

TEST_CASE("lowering fs can reveal flicker without changing ft") {
  const auto& m = CffParameters::full();
  // At e = 10 the threshold rises from ~42 Hz at 2 cpd to ~68 Hz at 0.5 cpd,
  // so a 55 Hz modulation crosses from fused to visible.
  CHECK(predict_visibility({desc(10.0, 2.0, 55.0)}, m).good);
  CHECK_FALSE(predict_visibility({desc(10.0, 0.5, 55.0)}, m).good);
}

TEST_CASE("verdict is bad iff any descriptor is visible") {
  const auto& m = CffParameters::full();
  std::vector<PerturbationDescriptor> ds = {
      desc(10.0, 0.5, 180.0), desc(20.0, 1.0, 180.0), desc(30.0, 1.0, 20.0)};
  const VideoVerdict v = predict_visibility(ds, m);
  CHECK_FALSE(v.good);
  CHECK_FALSE(v.details[0].visible);
  CHECK_FALSE(v.details[1].visible);
  CHECK(v.details[2].visible);
}

TEST_CASE("moving gaze uses the most sensitive moment") {
  const auto& m = CffParameters::full();
  PerturbationDescriptor d;
  d.eccentricity_track = {55.0, 30.0, 41.0};  // fixation sweeps nearer
  d.fs = 1.0;
  d.ft = 50.0;
  CHECK(d.effective_eccentricity() == 30.0);
  const VideoVerdict v = predict_visibility({d}, m);
  // psi(30, 1) = 58.1 > 50 while psi(55, 1) = 36.5 < 50: only the closest
  // pass makes it visible.
  CHECK_FALSE(v.good);
}

TEST_CASE("luminance-aware prediction uses the scaled threshold") {
  const auto& m = CffParameters::full();
  const LuminanceScaling lum;
  PerturbationDescriptor d = desc(0.0, 0.57, 45.0);
  d.luminance = 3.0;
  // At 3 cd/m^2 the foveal threshold drops below 45 Hz; at 380 it is above.
  CHECK(predict_visibility({d}, m, &lum).good);
  d.luminance = 380.0;
  CHECK_FALSE(predict_visibility({d}, m, &lum).good);
  // Without scaling supplied the luminance is ignored.
  CHECK_FALSE(predict_visibility({d}, m).good);
}

TEST_CASE("descriptor validation") {
  const auto& m = CffParameters::full();
  CHECK_THROWS_AS(predict_visibility({}, m), std::invalid_argument);
  PerturbationDescriptor bad = desc(10.0, 1.0, 0.0);
  CHECK_THROWS_AS(predict_visibility({bad}, m), std::domain_error);
  bad = desc(-3.0, 1.0, 10.0);
  CHECK_THROWS_AS(predict_visibility({bad}, m), std::domain_error);
}

TEST_CASE("plcc on exact linear relations") {
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<double> y;
  for (double v : x) y.push_back(2.0 * v + 1.0);
  CHECK(plcc(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  for (size_t i = 0; i < y.size(); ++i) y[i] = -x[i];
  CHECK(plcc(x, y) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("plcc hand-computed four-point case") {
  // x = (1,2,3,4), y = (1,2,3,-4): deviations give sum xy = -7,
  // sum xx = 5, sum yy = 29, so r = -7 / sqrt(145).
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  const std::vector<double> y = {1.0, 2.0, 3.0, -4.0};
  CHECK(plcc(x, y) ==
        doctest::Approx(-7.0 / std::sqrt(145.0)).epsilon(1e-12));
  CHECK(plcc(x, y) == doctest::Approx(-0.58131837).epsilon(1e-6));
}

TEST_CASE("plcc input validation") {
  const std::vector<double> a = {1.0, 2.0, 3.0};
  const std::vector<double> b = {1.0, 2.0};
  CHECK_THROWS_AS(plcc(a, b), std::invalid_argument);
  CHECK_THROWS_AS(plcc(b, b), std::invalid_argument);
  const std::vector<double> flat = {2.0, 2.0, 2.0};
  CHECK_THROWS_AS(plcc(a, flat), std::domain_error);
}

TEST_CASE("descriptor JSON round trip and verdict serialization") {
  const std::string text = R"([
    {"eccentricity_deg": 30.0, "fs_cpd": 1.0, "ft_hz": 20.0},
    {"eccentricity_deg": [10.0, 4.0, 12.0], "fs_cpd": 0.5, "ft_hz": 90.0,
     "radius_deg": 2.0, "luminance_cdm2": 380.0}
  ])";
  const auto ds = descriptors_from_json(text);
  REQUIRE(ds.size() == 2);
  CHECK(ds[0].eccentricity_track == std::vector<double>{30.0});
  CHECK(ds[1].effective_eccentricity() == 4.0);
  CHECK(ds[1].radius == 2.0);
  CHECK(ds[1].luminance.has_value());
  const VideoVerdict v = predict_visibility(ds, CffParameters::full());
  const std::string out = verdict_to_json(v);
  CHECK(out.find("\"label\"") != std::string::npos);
  CHECK(out.find("bad") != std::string::npos);
  CHECK_THROWS_AS(descriptors_from_json("{}"), std::invalid_argument);
  CHECK_THROWS_AS(descriptors_from_json("[{\"fs_cpd\": 1.0}]"),
                  std::invalid_argument);
}
