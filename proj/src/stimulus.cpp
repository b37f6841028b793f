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

#include "cff/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace cff {

using nlohmann::json;

bool GaborStimulus::full_field() const { return std::isinf(sigma); }

double GaborStimulus::eccentricity() const {
  return std::hypot(center_x, center_y);
}

double GaborStimulus::analysis_fs() const {
  return full_field() ? kFullFieldAnalysisFs : fs;
}

double GaborStimulus::extent() const {
  if (full_field()) return std::numeric_limits<double>::infinity();
  return 2.0 * sigma;
}

void GaborStimulus::validate() const {
  if (!(sigma > 0.0)) throw std::domain_error("sigma must be > 0");
  if (full_field()) {
    if (fs != 0.0) throw std::domain_error("full-field stimulus must have fs = 0");
  } else if (!(fs > 0.0)) {
    throw std::domain_error("fs must be > 0 for a bounded stimulus");
  }
  if (!(ft >= 0.0)) throw std::domain_error("ft must be >= 0");
}

void DisplayGeometry::validate() const {
  if (width <= 0 || height <= 0 || !(fov_h > 0.0) || !(fov_v > 0.0))
    throw std::domain_error("degenerate display geometry");
}

double gabor_value(double x, double y, const GaborStimulus& stim) {
  stim.validate();
  double envelope = 1.0;
  if (!stim.full_field()) {
    const double dx = x - stim.center_x;
    const double dy = y - stim.center_y;
    envelope = std::exp(-(dx * dx + dy * dy) / (2.0 * stim.sigma * stim.sigma));
  }
  const double th = stim.theta * M_PI / 180.0;
  const double carrier = std::cos(
      2.0 * M_PI * stim.fs * (x * std::cos(th) + y * std::sin(th)) + stim.phase);
  return envelope * carrier;
}

Image render_frame(double t, const GaborStimulus& stim,
                   const DisplayGeometry& geom) {
  if (!(t >= 0.0)) throw std::domain_error("time must be >= 0");
  geom.validate();
  stim.validate();
  const double contrast = std::sin(2.0 * M_PI * stim.ft * t);
  const double dppx = geom.deg_per_px_x();
  const double dppy = geom.deg_per_px_y();
  Image img(geom.width, geom.height);
  for (int j = 0; j < geom.height; ++j) {
    const double y = (j + 0.5 - geom.height / 2.0) * dppy;
    for (int i = 0; i < geom.width; ++i) {
      const double x = (i + 0.5 - geom.width / 2.0) * dppx;
      const double v = geom.background + 0.5 * contrast * gabor_value(x, y, stim);
      img.at(i, j) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

std::vector<GaborStimulus> stimulus_catalog() {
  // The 18 published test wavelets: six spatial-frequency orders, each with
  // sigma ~ 0.7/fs and eccentricities spread along the temporal direction.
  // Order 5 carries sigma = 0.5 as published even though 0.7/fs gives 0.35.
  struct Row {
    int order;
    double fs, sigma;
    std::vector<double> ecc;
  };
  const double inf = std::numeric_limits<double>::infinity();
  static const std::vector<Row> rows = {
      {0, 0.0, inf, {0.0}},
      {1, 0.011, 63.0, {0.0}},
      {2, 0.041, 17.2, {0.0, 19.2}},
      {3, 0.154, 4.6, {0.0, 24.5, 48.2}},
      {4, 0.571, 1.2, {0.0, 14.8, 29.2, 42.7, 55.0}},
      {5, 2.000, 0.5, {0.0, 12.3, 24.4, 35.9, 46.8, 56.8}},
  };
  std::vector<GaborStimulus> out;
  out.reserve(18);
  for (const Row& r : rows)
    for (double e : r.ecc) {
      GaborStimulus s;
      s.center_x = e;
      s.center_y = 0.0;
      s.sigma = r.sigma;
      s.fs = r.fs;
      s.order = r.order;
      out.push_back(s);
    }
  return out;
}

double pixel_to_eccentricity(double px, double py, const DisplayGeometry& geom,
                             double gaze_x_deg, double gaze_y_deg) {
  geom.validate();
  if (!(px >= 0.0 && px <= geom.width && py >= 0.0 && py <= geom.height))
    throw std::domain_error("pixel coordinate outside the display");
  const double x = (px - geom.width / 2.0) * geom.deg_per_px_x();
  const double y = (py - geom.height / 2.0) * geom.deg_per_px_y();
  return std::hypot(x - gaze_x_deg, y - gaze_y_deg);
}

void write_pgm(const Image& img, const std::string& path, int bits) {
  if (bits != 8 && bits != 16) throw std::invalid_argument("PGM bits must be 8 or 16");
  if (img.width <= 0 || img.height <= 0) throw std::invalid_argument("empty image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const int maxval = bits == 8 ? 255 : 65535;
  out << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
  for (double v : img.data) {
    const long q = std::lround(std::clamp(v, 0.0, 1.0) * maxval);
    if (bits == 8) {
      out.put(static_cast<char>(q));
    } else {
      out.put(static_cast<char>((q >> 8) & 0xff));
      out.put(static_cast<char>(q & 0xff));
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

json stimulus_json(const GaborStimulus& s) {
  json doc;
  doc["center"] = {s.center_x, s.center_y};
  doc["sigma"] = s.full_field() ? json("unbounded") : json(s.sigma);
  doc["fs_cpd"] = s.fs;
  doc["theta_deg"] = s.theta;
  doc["ft_hz"] = s.ft;
  doc["order"] = s.order;
  doc["phase_rad"] = s.phase;
  return doc;
}

}  // namespace

std::string stimulus_to_json(const GaborStimulus& stim) {
  return stimulus_json(stim).dump(2) + "\n";
}

std::string catalog_to_json(const std::vector<GaborStimulus>& stims) {
  json arr = json::array();
  for (const auto& s : stims) arr.push_back(stimulus_json(s));
  return arr.dump(2) + "\n";
}

GaborStimulus stimulus_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("bad stimulus JSON: ") + e.what());
  }
  GaborStimulus s;
  try {
    const auto& c = doc.at("center");
    s.center_x = c.at(0).get<double>();
    s.center_y = c.at(1).get<double>();
    const auto& sig = doc.at("sigma");
    s.sigma = sig.is_string() ? std::numeric_limits<double>::infinity()
                              : sig.get<double>();
    s.fs = doc.at("fs_cpd").get<double>();
    s.theta = doc.value("theta_deg", 0.0);
    s.ft = doc.value("ft_hz", 0.0);
    s.order = doc.value("order", -1);
    s.phase = doc.value("phase_rad", 0.0);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad stimulus JSON: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace cff
