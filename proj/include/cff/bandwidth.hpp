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

#ifndef CFF_BANDWIDTH_HPP
#define CFF_BANDWIDTH_HPP

#include <array>
#include <string>
#include <vector>

#include "cff/model.hpp"
#include "cff/wavelet.hpp"

namespace cff {

enum class DiscardMode { spatial_only, spatio_temporal };
enum class CountingMethod { enumerated, analytic };

const char* to_string(DiscardMode m);
const char* to_string(CountingMethod m);
DiscardMode discard_mode_from_string(const std::string& name);
CountingMethod counting_from_string(const std::string& name);

struct AnalysisConfig {
  double ppd = 60.0;        // pixels per degree
  double fov_h = 165.0;     // deg (165:135 approximates the binocular field)
  double fov_v = 135.0;     // deg
  double framerate = 200.0;  // Hz
  int temporal_window = 128;  // frames, power of two
  double gaze_x = 0.0;      // deg from screen center
  double gaze_y = 0.0;
  double luminance = 380.0;  // cd/m^2; reported context, thresholds use psi
  DiscardMode mode = DiscardMode::spatio_temporal;
  CountingMethod counting = CountingMethod::analytic;
  int threads = 1;

  int width() const;   // round(fov_h * ppd)
  int height() const;  // round(fov_v * ppd)
  void validate() const;
};

// One merged spatio-temporal band. Spatial detail levels merge the three
// orientation subbands of that level into a single radial frequency range;
// level 1 is the finest. Level 0 is the spatial approximation. Temporal
// level 0 is the temporal approximation (DC).
struct BandDescriptor {
  int spatial_level = 0;
  int temporal_level = 0;
  double fs_low = 0.0, fs_high = 0.0;  // cpd
  double ft_low = 0.0, ft_high = 0.0;  // Hz
  long long coefficient_count = 0;
  double support_deg = 0.0;  // angular support per coefficient, per axis
};

struct BandRetention {
  BandDescriptor band;
  long long retained = 0;
};

struct GainReport {
  long long total = 0;
  long long retained = 0;
  DiscardMode mode = DiscardMode::spatio_temporal;
  CountingMethod counting = CountingMethod::analytic;
  std::vector<BandRetention> per_band;

  double gain() const;
};

// The full spatio-temporal band structure of a configuration; coefficient
// counts over all bands sum to width * height * temporal_window.
std::vector<BandDescriptor> band_layout(const AnalysisConfig& config);

// Counts coefficients surviving the perceptual discard rules.
//
// A coefficient keeps the most favorable point of its support: eccentricity
// is the minimum over the spatial support, the band spatial frequency is the
// one maximizing psi there (5 log-spaced samples), and the band temporal
// frequency is the lower band edge. spatial_only keeps, for every frame,
// spatial coefficients with psi > 0; spatio_temporal additionally drops
// temporal-detail coefficients whose band lower edge exceeds psi, always
// keeping the temporal DC of spatially retained positions.
GainReport retained_count(const AnalysisConfig& config,
                          const CffParameters& model = CffParameters::full());

struct SweepRow {
  AnalysisConfig config;
  GainReport report;
};

// One report per horizontal FOV, with fov_v = fov_h * 135 / 165.
std::vector<SweepRow> gain_sweep(const AnalysisConfig& base,
                                 const std::vector<double>& fov_h_list,
                                 const CffParameters& model =
                                     CffParameters::full());

// CSV with header fov_h_deg,fov_v_deg,ppd,framerate_hz,mode,total_coeffs,
// retained_coeffs,gain.
std::string gain_sweep_csv(const std::vector<SweepRow>& rows);

// Forward transform, zero every discarded coefficient, inverse transform.
// Non-power-of-two axes are symmetrically edge-padded to the next power of
// two and cropped back; the angular origin stays at the input frame center.
Video filter_video(const Video& video, const AnalysisConfig& config,
                   const CffParameters& model = CffParameters::full());

// Headerless 8-bit grayscale video with a JSON sidecar at <path>.json
// holding {width, height, frames, framerate}.
void write_raw_video(const Video& video, const std::string& path,
                     double framerate);
Video load_raw_video(const std::string& path, double* framerate = nullptr);

namespace detail {

// Both counters share the discard predicate and band geometry; they differ
// in traversal: the enumerated counter walks every coefficient slot of the
// transform layout, the analytic one multiplies per-band cell decisions by
// temporal band sizes. Results must agree exactly.
GainReport count_enumerated(const AnalysisConfig& config,
                            const CffParameters& model);
void count_analytic(const AnalysisConfig& config, const CffParameters& model,
                    GainReport* spatial_only, GainReport* spatio_temporal);

// psi maximized over the 5 sample frequencies of a spatial band, at the
// given eccentricity.
double band_psi_star(double e, double fs_low, double fs_high,
                     const CffParameters& model);

}  // namespace detail

}  // namespace cff

#endif  // CFF_BANDWIDTH_HPP
