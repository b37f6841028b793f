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

#ifndef CFF_MODEL_HPP
#define CFF_MODEL_HPP

#include <array>
#include <cmath>
#include <string>

namespace cff {

enum class ModelVariant { conservative, relaxed, full };

const char* to_string(ModelVariant v);
ModelVariant variant_from_string(const std::string& name);

// Coefficients of the eccentricity-dependent critical flicker fusion (CFF)
// model. psi(e, fs) is a quadratic in eccentricity whose three coefficients
// are themselves quadratics in log-offset spatial frequency; see psi().
struct CffParameters {
  std::array<double, 10> p{};
  double cutoff_fs = 0.0055;  // cpd; below this the model is constant in e
  ModelVariant variant = ModelVariant::full;

  static const CffParameters& conservative();
  static const CffParameters& relaxed();
  static const CffParameters& full();
  static const CffParameters& preset(ModelVariant v);

  void validate() const;  // throws std::domain_error on bad invariants
};

// Ferry-Porter luminance scaling: an eccentricity-dependent slope applied to
// psi in log retinal illuminance, anchored at reference_trolands.
struct LuminanceScaling {
  double q0 = 5.71e-6;
  double q1 = -1.78e-4;
  double q2 = 0.204;
  double reference_trolands = 1488.0;  // published reference; kept as an
                                       // independent constant, not recomputed
};

struct PhotometricContext {
  double luminance = 380.0;       // cd/m^2
  double adapting_area = 6960.0;  // deg^2
};

// Acuity falloff A(e) = scale * e2 / (slope * (e + e2)).
struct AcuityParameters {
  double scale = std::log(64.0);
  double e2 = 2.3;     // deg
  double slope = 0.106;
};

// Log-frequency offset above the constant-function cut-off; 0 at or below it.
double tau(double fs, const CffParameters& params);

// exp(p9 * tau) - 1; gates eccentricity terms off for unlocalized stimuli.
double zeta(double fs, const CffParameters& params);

// CFF threshold in Hz at eccentricity e (deg) and spatial frequency fs (cpd).
// Clamped at zero; constant in e whenever fs <= cutoff_fs.
double psi(double e, double fs, const CffParameters& params);

// Vertex -B/(2C) of the eccentricity quadratic underlying psi at fixed fs.
// Requires a strictly concave quadratic (C < 0), i.e. fs above the cut-off.
double psi_peak_eccentricity(double fs, const CffParameters& params);

// Highest perceivable spatial frequency (cpd) at eccentricity e (deg).
double acuity_limit(double e, const AcuityParameters& params = {});

// Stanley-Davies pupil diameter in mm for the given adapting field.
double pupil_diameter_mm(const PhotometricContext& ctx);

// Retinal illuminance l(L) = pi d(L)^2 / 4 * L in Trolands.
double retinal_illuminance_td(const PhotometricContext& ctx);

// Slope s(e, fs) of the Ferry-Porter line in log10 retinal illuminance.
double ferry_porter_slope(double e, double fs, const CffParameters& params,
                          const LuminanceScaling& lum);

// Luminance-scaled CFF. Equals psi when the retinal illuminance matches the
// reference; clamped at zero. ctx supplies the adapting area; the luminance
// argument overrides ctx.luminance.
double psi_hat(double e, double fs, double luminance,
               const CffParameters& params, const LuminanceScaling& lum,
               const PhotometricContext& ctx = {});

// Same without the final clamp; exactly linear in log10 retinal illuminance
// for fixed (e, fs) with psi > 0.
double psi_hat_unclamped(double e, double fs, double luminance,
                         const CffParameters& params,
                         const LuminanceScaling& lum,
                         const PhotometricContext& ctx = {});

// One self-contained parameter document: CFF coefficients, luminance scaling
// and the acuity extrapolation used by the full variant.
struct ModelPreset {
  CffParameters cff;
  LuminanceScaling luminance;
  AcuityParameters acuity;
};

ModelPreset default_preset(ModelVariant v);

// JSON document with keys {variant, p, fs0, q, l0, acuity:{scale,e2,slope}}.
// Serialization is exact: load(save(x)) reproduces every double bit-for-bit.
std::string preset_to_json(const ModelPreset& preset);
ModelPreset preset_from_json(const std::string& text);
void save_preset(const ModelPreset& preset, const std::string& path);
ModelPreset load_preset(const std::string& path);

}  // namespace cff

#endif  // CFF_MODEL_HPP
