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

#include "cff/model.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace cff {

using nlohmann::json;

const char* to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::conservative: return "conservative";
    case ModelVariant::relaxed: return "relaxed";
    case ModelVariant::full: return "full";
  }
  throw std::domain_error("unknown model variant");
}

ModelVariant variant_from_string(const std::string& name) {
  if (name == "conservative") return ModelVariant::conservative;
  if (name == "relaxed") return ModelVariant::relaxed;
  if (name == "full") return ModelVariant::full;
  throw std::invalid_argument("unknown model variant: " + name);
}

const CffParameters& CffParameters::conservative() {
  static const CffParameters k{
      {-4.08, -10.1, 94.4, 0.0484, -0.280, 0.431, -0.00140, 0.00679, -0.00912,
       1.56},
      0.0055,
      ModelVariant::conservative};
  return k;
}

const CffParameters& CffParameters::relaxed() {
  static const CffParameters k{
      {-4.06, -10.1, 94.3, 0.0464, -0.282, 0.430, -0.00129, 0.00672, -0.00929,
       1.58},
      0.0055,
      ModelVariant::relaxed};
  return k;
}

const CffParameters& CffParameters::full() {
  static const CffParameters k{
      {-4.06, -10.1, 94.3, 0.0440, -0.281, 0.435, -0.00111, 0.00613, -0.00877,
       1.58},
      0.0055,
      ModelVariant::full};
  return k;
}

const CffParameters& CffParameters::preset(ModelVariant v) {
  switch (v) {
    case ModelVariant::conservative: return conservative();
    case ModelVariant::relaxed: return relaxed();
    case ModelVariant::full: return full();
  }
  throw std::domain_error("unknown model variant");
}

void CffParameters::validate() const {
  if (!(cutoff_fs > 0.0)) throw std::domain_error("cutoff_fs must be > 0");
  if (!(p[2] > 0.0)) throw std::domain_error("p2 (foveal low-fs CFF) must be > 0");
  for (double v : p)
    if (!std::isfinite(v)) throw std::domain_error("non-finite model parameter");
}

double tau(double fs, const CffParameters& params) {
  if (!(fs > 0.0)) throw std::domain_error("spatial frequency must be > 0");
  return std::max(std::log10(fs) - std::log10(params.cutoff_fs), 0.0);
}

double zeta(double fs, const CffParameters& params) {
  // expm1 keeps zeta exactly zero at the cut-off.
  return std::expm1(params.p[9] * tau(fs, params));
}

namespace {

struct EccQuadratic {
  double a, b, c;  // psi = max(0, a + b e + c e^2)
};

EccQuadratic ecc_quadratic(double fs, const CffParameters& m) {
  const double t = tau(fs, m);
  const double z = std::expm1(m.p[9] * t);
  return {(m.p[0] * t + m.p[1]) * t + m.p[2],
          ((m.p[3] * t + m.p[4]) * t + m.p[5]) * z,
          ((m.p[6] * t + m.p[7]) * t + m.p[8]) * z};
}

}  // namespace

double psi(double e, double fs, const CffParameters& params) {
  if (!(e >= 0.0)) throw std::domain_error("eccentricity must be >= 0");
  const EccQuadratic q = ecc_quadratic(fs, params);
  return std::max(0.0, q.a + q.b * e + q.c * e * e);
}

double psi_peak_eccentricity(double fs, const CffParameters& params) {
  const EccQuadratic q = ecc_quadratic(fs, params);
  if (!(q.c < 0.0))
    throw std::domain_error("psi has no interior peak at this frequency");
  return -q.b / (2.0 * q.c);
}

double acuity_limit(double e, const AcuityParameters& params) {
  if (!(e >= 0.0)) throw std::domain_error("eccentricity must be >= 0");
  if (!(params.scale > 0.0 && params.e2 > 0.0 && params.slope > 0.0))
    throw std::domain_error("acuity parameters must be strictly positive");
  return params.scale * params.e2 / (params.slope * (e + params.e2));
}

double pupil_diameter_mm(const PhotometricContext& ctx) {
  if (!(ctx.adapting_area > 0.0)) throw std::domain_error("adapting area must be > 0");
  if (!(ctx.luminance >= 0.0)) throw std::domain_error("luminance must be >= 0");
  const double x = std::pow(ctx.luminance * ctx.adapting_area / 846.0, 0.41);
  return 7.75 - 5.75 * (x / (x + 2.0));
}

double retinal_illuminance_td(const PhotometricContext& ctx) {
  const double d = pupil_diameter_mm(ctx);
  return M_PI * d * d / 4.0 * ctx.luminance;
}

double ferry_porter_slope(double e, double fs, const CffParameters& params,
                          const LuminanceScaling& lum) {
  if (!(e >= 0.0)) throw std::domain_error("eccentricity must be >= 0");
  return zeta(fs, params) * (lum.q0 * e * e + lum.q1 * e) + lum.q2;
}

double psi_hat_unclamped(double e, double fs, double luminance,
                         const CffParameters& params,
                         const LuminanceScaling& lum,
                         const PhotometricContext& ctx) {
  if (!(luminance >= 0.0)) throw std::domain_error("luminance must be >= 0");
  const double base = psi(e, fs, params);
  if (base == 0.0) return 0.0;
  const double l =
      retinal_illuminance_td({luminance, ctx.adapting_area});
  if (l <= 0.0) return 0.0;  // no light reaching the retina, nothing flickers
  const double s = ferry_porter_slope(e, fs, params, lum);
  return (s * std::log10(l / lum.reference_trolands) + 1.0) * base;
}

double psi_hat(double e, double fs, double luminance,
               const CffParameters& params, const LuminanceScaling& lum,
               const PhotometricContext& ctx) {
  return std::max(0.0, psi_hat_unclamped(e, fs, luminance, params, lum, ctx));
}

ModelPreset default_preset(ModelVariant v) {
  return ModelPreset{CffParameters::preset(v), LuminanceScaling{},
                     AcuityParameters{}};
}

std::string preset_to_json(const ModelPreset& preset) {
  json doc;
  doc["variant"] = to_string(preset.cff.variant);
  doc["p"] = preset.cff.p;
  doc["fs0"] = preset.cff.cutoff_fs;
  doc["q"] = {preset.luminance.q0, preset.luminance.q1, preset.luminance.q2};
  doc["l0"] = preset.luminance.reference_trolands;
  doc["acuity"] = {{"scale", preset.acuity.scale},
                   {"e2", preset.acuity.e2},
                   {"slope", preset.acuity.slope}};
  return doc.dump(2) + "\n";
}

ModelPreset preset_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("bad preset JSON: ") + e.what());
  }
  ModelPreset preset;
  try {
    preset.cff.variant = variant_from_string(doc.at("variant").get<std::string>());
    const auto& p = doc.at("p");
    if (p.size() != 10) throw std::invalid_argument("preset needs 10 p values");
    for (size_t i = 0; i < 10; ++i) preset.cff.p[i] = p[i].get<double>();
    preset.cff.cutoff_fs = doc.at("fs0").get<double>();
    const auto& q = doc.at("q");
    if (q.size() != 3) throw std::invalid_argument("preset needs 3 q values");
    preset.luminance.q0 = q[0].get<double>();
    preset.luminance.q1 = q[1].get<double>();
    preset.luminance.q2 = q[2].get<double>();
    preset.luminance.reference_trolands = doc.at("l0").get<double>();
    const auto& ac = doc.at("acuity");
    preset.acuity.scale = ac.at("scale").get<double>();
    preset.acuity.e2 = ac.at("e2").get<double>();
    preset.acuity.slope = ac.at("slope").get<double>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad preset JSON: ") + e.what());
  }
  preset.cff.validate();
  return preset;
}

void save_preset(const ModelPreset& preset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << preset_to_json(preset);
}

ModelPreset load_preset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return preset_from_json(buf.str());
}

}  // namespace cff
