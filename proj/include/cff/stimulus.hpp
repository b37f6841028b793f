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

#ifndef CFF_STIMULUS_HPP
#define CFF_STIMULUS_HPP

#include <string>
#include <vector>

namespace cff {

// Spatial frequency substituted for full-field (order 0) stimuli when they
// enter any model evaluation.
inline constexpr double kFullFieldAnalysisFs = 0.0055;  // cpd

// One Gabor test pattern. Coordinates are visual degrees with the gaze
// direction at the origin; the catalog places eccentricity along +x
// (temporal direction of the right eye).
struct GaborStimulus {
  double center_x = 0.0;  // deg
  double center_y = 0.0;  // deg
  double sigma = 1.0;     // deg; infinity marks the unbounded full-field case
  double fs = 1.0;        // cpd; 0 for the full-field order
  double theta = 0.0;     // carrier orientation, deg
  double ft = 0.0;        // temporal modulation, Hz
  int order = -1;         // catalog order 0..5, -1 for ad hoc stimuli
  double phase = 0.0;     // carrier phase at the coordinate origin, radians

  bool full_field() const;
  double eccentricity() const;      // distance of center from gaze
  double analysis_fs() const;       // fs, or the full-field substitute
  double extent() const;            // localization uncertainty u = 2 sigma
  void validate() const;
};

struct DisplayGeometry {
  int width = 1280;
  int height = 720;
  double fov_h = 80.0;  // deg
  double fov_v = 87.0;  // deg
  double background = 0.5;

  double deg_per_px_x() const { return fov_h / width; }
  double deg_per_px_y() const { return fov_v / height; }
  void validate() const;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // row-major, height rows of width

  Image() = default;
  Image(int w, int h) : width(w), height(h), data(size_t(w) * h, 0.0) {}
  double& at(int x, int y) { return data[size_t(y) * width + x]; }
  double at(int x, int y) const { return data[size_t(y) * width + x]; }
};

// Gaussian-windowed cosine carrier, in [-1, 1]. The carrier is anchored at
// the coordinate origin, not at the wavelet center.
double gabor_value(double x, double y, const GaborStimulus& stim);

// One display frame at time t: background + 0.5 * sin(2 pi ft t) * gabor,
// clamped to [0, 1]. Pixel (i, j) samples the angular position of its center.
Image render_frame(double t, const GaborStimulus& stim,
                   const DisplayGeometry& geom);

// The 18-entry catalog of test wavelets, ordered by (order, eccentricity).
std::vector<GaborStimulus> stimulus_catalog();

// Angular distance (deg) of a continuous pixel coordinate from the gaze
// position, under the uniform degrees-per-pixel mapping. Accepts the closed
// range [0, width] x [0, height].
double pixel_to_eccentricity(double px, double py, const DisplayGeometry& geom,
                             double gaze_x_deg = 0.0, double gaze_y_deg = 0.0);

// Binary PGM (P5), 8- or 16-bit. 16-bit samples are big-endian per the spec.
void write_pgm(const Image& img, const std::string& path, int bits = 8);

std::string stimulus_to_json(const GaborStimulus& stim);
std::string catalog_to_json(const std::vector<GaborStimulus>& stims);
GaborStimulus stimulus_from_json(const std::string& text);

}  // namespace cff

#endif  // CFF_STIMULUS_HPP
