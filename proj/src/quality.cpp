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

#include "cff/quality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace cff {

using nlohmann::json;

double PerturbationDescriptor::effective_eccentricity() const {
  return *std::min_element(eccentricity_track.begin(),
                           eccentricity_track.end());
}

void PerturbationDescriptor::validate() const {
  if (eccentricity_track.empty())
    throw std::domain_error("descriptor needs at least one eccentricity");
  for (double e : eccentricity_track)
    if (!(e >= 0.0)) throw std::domain_error("eccentricity must be >= 0");
  if (!(fs > 0.0)) throw std::domain_error("fs must be > 0");
  if (!(ft > 0.0)) throw std::domain_error("ft must be > 0");
  if (luminance && !(*luminance >= 0.0))
    throw std::domain_error("luminance must be >= 0");
}

VideoVerdict predict_visibility(
    const std::vector<PerturbationDescriptor>& descriptors,
    const CffParameters& model, const LuminanceScaling* lum,
    const PhotometricContext& ctx) {
  if (descriptors.empty())
    throw std::invalid_argument("descriptor list must not be empty");
  VideoVerdict verdict;
  verdict.details.reserve(descriptors.size());
  for (const auto& d : descriptors) {
    d.validate();
    DescriptorVisibility v;
    v.eccentricity = d.effective_eccentricity();
    v.threshold_hz = (d.luminance && lum)
                         ? psi_hat(v.eccentricity, d.fs, *d.luminance, model,
                                   *lum, ctx)
                         : psi(v.eccentricity, d.fs, model);
    v.visible = d.ft < v.threshold_hz;
    if (v.visible) verdict.good = false;
    verdict.details.push_back(v);
  }
  return verdict;
}

double plcc(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("series lengths differ");
  const size_t n = x.size();
  if (n < 3) throw std::invalid_argument("need at least 3 points");
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw std::domain_error("degenerate variance");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<PerturbationDescriptor> descriptors_from_json(
    const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("bad descriptor JSON: ") + e.what());
  }
  if (!doc.is_array())
    throw std::invalid_argument("descriptor document must be a JSON array");
  std::vector<PerturbationDescriptor> out;
  out.reserve(doc.size());
  for (const auto& item : doc) {
    PerturbationDescriptor d;
    try {
      const auto& e = item.at("eccentricity_deg");
      if (e.is_array())
        for (const auto& v : e) d.eccentricity_track.push_back(v.get<double>());
      else
        d.eccentricity_track.push_back(e.get<double>());
      d.fs = item.at("fs_cpd").get<double>();
      d.ft = item.at("ft_hz").get<double>();
      d.radius = item.value("radius_deg", 0.0);
      if (item.contains("luminance_cdm2"))
        d.luminance = item.at("luminance_cdm2").get<double>();
    } catch (const json::exception& e) {
      throw std::invalid_argument(std::string("bad descriptor JSON: ") + e.what());
    }
    d.validate();
    out.push_back(std::move(d));
  }
  return out;
}

std::string verdict_to_json(const VideoVerdict& verdict) {
  json doc;
  doc["label"] = verdict.good ? "good" : "bad";
  json arr = json::array();
  for (const auto& d : verdict.details)
    arr.push_back({{"visible", d.visible},
                   {"eccentricity_deg", d.eccentricity},
                   {"threshold_hz", d.threshold_hz}});
  doc["descriptors"] = arr;
  return doc.dump(2) + "\n";
}

}  // namespace cff
