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
#include <complex>
#include <cstdio>
#include <fstream>
#include <random>

#include "cff/stimulus.hpp"

using namespace cff;

namespace {

GaborStimulus order4_at(double e) {
  GaborStimulus s;
  s.center_x = e;
  s.sigma = 1.2;
  s.fs = 0.571;
  s.order = 4;
  return s;
}

}  // namespace

TEST_CASE("gabor peak, envelope cut-off and far field") {
  GaborStimulus s = order4_at(0.0);
  CHECK(gabor_value(0.0, 0.0, s) == doctest::Approx(1.0));
  // Displacement perpendicular to the carrier keeps the cosine at 1, so the
  // value at 2 sigma is the bare envelope.
  CHECK(gabor_value(0.0, 2.0 * s.sigma, s) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK(std::fabs(gabor_value(0.0, 40.0 * s.sigma, s)) < 1e-300);
}

TEST_CASE("gabor carrier is anchored at the origin") {
  GaborStimulus s = order4_at(10.0);
  // At the origin the carrier phase is zero regardless of the center.
  const double d = std::hypot(10.0, 0.0);
  CHECK(gabor_value(0.0, 0.0, s) ==
        doctest::Approx(std::exp(-d * d / (2.0 * s.sigma * s.sigma))));
}

TEST_CASE("full-field stimulus is the bare carrier") {
  GaborStimulus s;
  s.sigma = std::numeric_limits<double>::infinity();
  s.fs = 0.0;
  s.order = 0;
  CHECK(s.full_field());
  CHECK(s.analysis_fs() == kFullFieldAnalysisFs);
  CHECK(gabor_value(31.0, -14.0, s) == 1.0);
}

TEST_CASE("rotating the carrier by 180 degrees preserves magnitude") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-20.0, 20.0);
  for (double theta : {0.0, 45.0, 90.0, 135.0}) {
    GaborStimulus a = order4_at(4.0);
    a.theta = theta;
    GaborStimulus b = a;
    b.theta = theta + 180.0;
    for (int i = 0; i < 100; ++i) {
      const double x = pos(rng), y = pos(rng);
      CHECK(std::fabs(gabor_value(x, y, a)) ==
            doctest::Approx(std::fabs(gabor_value(x, y, b))).epsilon(1e-9));
    }
  }
}

TEST_CASE("zero-contrast frame is uniform background") {
  GaborStimulus s = order4_at(0.0);
  s.ft = 10.0;
  DisplayGeometry geom;
  geom.width = 64;
  geom.height = 36;
  const Image img = render_frame(0.0, s, geom);
  for (double v : img.data) CHECK(v == 0.5);
}

TEST_CASE("rendered values stay in range for random stimuli") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ecc(0.0, 35.0);
  std::uniform_real_distribution<double> sig(0.3, 20.0);
  std::uniform_real_distribution<double> freq(0.01, 2.0);
  std::uniform_real_distribution<double> time(0.0, 1.0);
  DisplayGeometry geom;
  geom.width = 80;
  geom.height = 45;
  for (int i = 0; i < 20; ++i) {
    GaborStimulus s;
    s.center_x = ecc(rng);
    s.sigma = sig(rng);
    s.fs = freq(rng);
    s.ft = 15.0;
    const Image img = render_frame(time(rng), s, geom);
    for (double v : img.data) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("pixel temporal spectrum holds a single tone at ft") {
  GaborStimulus s = order4_at(0.0);
  s.ft = 5.0;
  DisplayGeometry geom;
  geom.width = 16;
  geom.height = 16;
  geom.fov_h = 8.0;
  geom.fov_v = 8.0;
  const int n = 40;  // one 0.2 s period at 200 Hz sampling
  const double rate = 200.0;
  std::vector<Image> frames;
  for (int k = 0; k < n; ++k) frames.push_back(render_frame(k / rate, s, geom));
  // DFT of one interior pixel across the period.
  const int px = 9, py = 7;
  for (int bin = 1; bin < n / 2; ++bin) {
    std::complex<double> acc(0.0, 0.0);
    for (int k = 0; k < n; ++k)
      acc += frames[size_t(k)].at(px, py) *
             std::exp(std::complex<double>(0.0, -2.0 * M_PI * bin * k / n));
    const double mag = std::abs(acc);
    if (bin == 1)  // 1 cycle / 0.2 s = 5 Hz
      CHECK(mag > 1.0);
    else
      CHECK(mag < 1e-9);
  }
}

TEST_CASE("render rejects degenerate geometry and negative time") {
  GaborStimulus s = order4_at(0.0);
  DisplayGeometry bad;
  bad.width = 0;
  CHECK_THROWS_AS(render_frame(0.0, s, bad), std::domain_error);
  DisplayGeometry geom;
  CHECK_THROWS_AS(render_frame(-1.0, s, geom), std::domain_error);
}

TEST_CASE("catalog matches the published stimulus table") {
  const auto cat = stimulus_catalog();
  REQUIRE(cat.size() == 18);
  // Order 3 block.
  std::vector<double> ecc3;
  for (const auto& s : cat)
    if (s.order == 3) {
      CHECK(s.fs == 0.154);
      CHECK(s.sigma == 4.6);
      ecc3.push_back(s.eccentricity());
    }
  CHECK(ecc3 == std::vector<double>{0.0, 24.5, 48.2});
  // Scaling sigma ~ 0.7 / fs for orders 1-4 within table rounding.
  for (const auto& s : cat)
    if (s.order >= 1 && s.order <= 4)
      CHECK(std::fabs(s.sigma - 0.7 / s.fs) / (0.7 / s.fs) < 0.03);
  // Order 5 uses the published sigma, which is looser than 0.7 / fs.
  for (const auto& s : cat)
    if (s.order == 5) CHECK(s.sigma == 0.5);
  // Order 0 is the flagged full-field row.
  CHECK(cat.front().full_field());
  CHECK(cat.front().fs == 0.0);
  // All eccentricities run along the temporal (+x) direction.
  for (const auto& s : cat) CHECK(s.center_y == 0.0);
}

TEST_CASE("pixel to eccentricity mapping") {
  DisplayGeometry geom;  // 1280 x 720, 80 x 87 deg
  CHECK(pixel_to_eccentricity(640.0, 360.0, geom) == 0.0);
  // Endpoints of the horizontal axis are a full fov apart.
  const double left = pixel_to_eccentricity(0.0, 360.0, geom);
  const double right = pixel_to_eccentricity(1280.0, 360.0, geom);
  CHECK(left == doctest::Approx(40.0));
  CHECK(right == doctest::Approx(40.0));
  CHECK(left + right == doctest::Approx(geom.fov_h));
  // Symmetric pixels around the gaze share their eccentricity.
  for (double d : {13.0, 111.0, 640.0})
    CHECK(pixel_to_eccentricity(640.0 - d, 360.0, geom) ==
          doctest::Approx(pixel_to_eccentricity(640.0 + d, 360.0, geom)));
  CHECK_THROWS_AS(pixel_to_eccentricity(-1.0, 0.0, geom), std::domain_error);
  CHECK_THROWS_AS(pixel_to_eccentricity(0.0, 721.0, geom), std::domain_error);
}

TEST_CASE("energy outside three sigma is marginal") {
  GaborStimulus s = order4_at(0.0);
  DisplayGeometry geom;
  geom.width = 400;
  geom.height = 400;
  geom.fov_h = 20.0;
  geom.fov_v = 20.0;
  double inside = 0.0, outside = 0.0;
  for (int j = 0; j < geom.height; ++j)
    for (int i = 0; i < geom.width; ++i) {
      const double x = (i + 0.5 - geom.width / 2.0) * geom.deg_per_px_x();
      const double y = (j + 0.5 - geom.height / 2.0) * geom.deg_per_px_y();
      const double dev = std::fabs(gabor_value(x, y, s));
      (std::hypot(x, y) <= 3.0 * s.sigma ? inside : outside) += dev;
    }
  CHECK(outside < 0.015 * inside);
}

TEST_CASE("rendering is deterministic") {
  GaborStimulus s = order4_at(14.8);
  s.ft = 37.0;
  DisplayGeometry geom;
  geom.width = 64;
  geom.height = 64;
  const Image a = render_frame(0.123, s, geom);
  const Image b = render_frame(0.123, s, geom);
  CHECK(a.data == b.data);
}

TEST_CASE("PGM output bytes") {
  Image img(2, 2);
  img.at(0, 0) = 0.0;
  img.at(1, 0) = 1.0;
  img.at(0, 1) = 0.5;
  img.at(1, 1) = 0.25;
  const std::string path = "test_stimulus_tmp.pgm";
  write_pgm(img, path, 8);
  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  CHECK(content == std::string("P5\n2 2\n255\n\x00\xff\x80\x40", 15));
  write_pgm(img, path, 16);
  std::ifstream in16(path, std::ios::binary);
  std::string content16((std::istreambuf_iterator<char>(in16)),
                        std::istreambuf_iterator<char>());
  CHECK(content16.size() == 13 + 8);
  CHECK(content16.substr(0, 13) == std::string("P5\n2 2\n65535\n"));
  // 0.5 quantizes to 32768 big-endian.
  CHECK(static_cast<unsigned char>(content16[13 + 4]) == 0x80);
  CHECK(static_cast<unsigned char>(content16[13 + 5]) == 0x00);
  std::remove(path.c_str());
}

TEST_CASE("stimulus JSON round trip") {
  const auto cat = stimulus_catalog();
  for (const auto& s : cat) {
    const GaborStimulus t = stimulus_from_json(stimulus_to_json(s));
    CHECK(t.center_x == s.center_x);
    CHECK(t.center_y == s.center_y);
    CHECK((t.full_field() ? -1.0 : t.sigma) == (s.full_field() ? -1.0 : s.sigma));
    CHECK(t.full_field() == s.full_field());
    CHECK(t.fs == s.fs);
    CHECK(t.order == s.order);
  }
  CHECK_THROWS_AS(stimulus_from_json("[]"), std::invalid_argument);
}
