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

#ifndef CFF_QUALITY_HPP
#define CFF_QUALITY_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cff/model.hpp"

namespace cff {

// One flickering perturbation of a video. The eccentricity track holds the
// per-frame distance from the gaze position (a single entry for a fixed
// gaze); the minimum over the track is what the threshold test uses, since
// flicker only needs to be visible at one moment.
struct PerturbationDescriptor {
  std::vector<double> eccentricity_track;  // deg, one entry per frame or one
  double fs = 1.0;                         // cpd
  double ft = 10.0;                        // Hz
  double radius = 0.0;                     // deg; metadata, not thresholded
  std::optional<double> luminance;         // cd/m^2

  double effective_eccentricity() const;   // min over the track
  void validate() const;
};

struct DescriptorVisibility {
  bool visible = false;
  double eccentricity = 0.0;  // the value used for the test
  double threshold_hz = 0.0;  // psi (or psi-hat) at that point
};

// good = no descriptor flickers visibly; bad = at least one does.
struct VideoVerdict {
  bool good = true;
  std::vector<DescriptorVisibility> details;
};

// A descriptor is visible iff its modulation frequency lies below the CFF
// threshold at its (eccentricity, fs): ft < psi, or ft < psi_hat when the
// descriptor carries a luminance and scaling is supplied.
VideoVerdict predict_visibility(
    const std::vector<PerturbationDescriptor>& descriptors,
    const CffParameters& model,
    const LuminanceScaling* lum = nullptr,
    const PhotometricContext& ctx = {});

// Pearson linear correlation coefficient; requires equal lengths >= 3 and
// nonzero variance on both sides.
double plcc(std::span<const double> x, std::span<const double> y);

std::vector<PerturbationDescriptor> descriptors_from_json(
    const std::string& text);
std::string verdict_to_json(const VideoVerdict& verdict);

}  // namespace cff

#endif  // CFF_QUALITY_HPP
