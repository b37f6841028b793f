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

#ifndef CFF_FITTING_HPP
#define CFF_FITTING_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cff/model.hpp"

namespace cff {

// One measured CFF data point. The extent is the localization uncertainty u
// of the stimulus; when absent it defaults to 2 sigma = 1.4 / fs.
struct ThresholdSample {
  double e = 0.0;                   // deg
  double fs = 1.0;                  // cpd
  std::optional<double> cff;        // Hz; absent iff the flicker was invisible
  bool visible = true;
  std::optional<double> extent;     // u, deg
  std::optional<double> luminance;  // cd/m^2
  std::string subject;

  double extent_or_default() const { return extent ? *extent : 1.4 / fs; }
  void validate() const;
};

enum class FitInitialization { table3, multi_start };

struct FitConfig {
  ModelVariant mode = ModelVariant::relaxed;
  // Named soft-constraint weights. Conservative mode bounds the model from
  // below across each stimulus extent (it must not predict less flicker than
  // was measured anywhere the stimulus reached); relaxed and full modes can
  // bound it from above. The upper bound defaults to off: a measured
  // threshold reflects the most sensitive point of the extent, so taken as a
  // pointwise cap at every extent position it systematically drags the fit
  // below data generated from the model itself.
  double weight_extent_lower = 10.0;  // conservative-mode hinge
  double weight_extent_upper = 0.0;   // relaxed/full-mode hinge
  double weight_zero = 10.0;          // invisible-sample forcing
  double weight_acuity = 5.0;         // full-mode acuity boundary
  int extent_grid_points = 9;      // psi samples across each extent
  std::vector<double> acuity_grid;  // deg; empty -> 0..60 step 2
  int max_iterations = 500;
  double convergence_tol = 1e-9;   // relative loss change
  FitInitialization initialization = FitInitialization::table3;
  std::uint64_t seed = 0;
  int start_count = 4;             // used by multi_start
  bool aggregate_subjects = true;  // average per (e, fs, L) before fitting
  AcuityParameters acuity;
};

struct FitResult {
  CffParameters params;
  double adjusted_r2 = 0.0;  // NaN when too few samples for the adjustment
  double final_loss = 0.0;   // sum of squared residuals
  int iterations = 0;
  bool converged = false;
  std::vector<double> residuals;        // per aggregated sample, nominal e
  std::vector<double> accepted_losses;  // non-increasing across accepted steps
};

// Thrown when the optimizer exhausts max_iterations; carries the best fit.
class FitConvergenceError : public std::runtime_error {
 public:
  FitConvergenceError(const std::string& what, FitResult best_so_far)
      : std::runtime_error(what), best(std::move(best_so_far)) {}
  FitResult best;
};

// Penalized least squares over the sample set. Conservative mode matches the
// maximum of psi over each sample's extent to the measurement and penalizes
// dipping below it anywhere in the extent; relaxed and full match at the
// nominal eccentricity, optionally capping the extent from above. All modes
// force psi toward zero at invisible samples; full mode additionally
// penalizes psi at the acuity boundary. Deterministic for a fixed config
// and seed.
FitResult fit_cff(const std::vector<ThresholdSample>& samples,
                  const FitConfig& config = {});

// Degrees-of-freedom adjusted coefficient of determination.
double adjusted_r2(std::span<const double> predicted,
                   std::span<const double> observed, int num_params);

// Linear least squares for the Ferry-Porter slope coefficients q0..q2 with
// the base model and the reference illuminance held fixed. Requires visible
// samples at two or more distinct luminances.
LuminanceScaling fit_luminance(const std::vector<ThresholdSample>& samples,
                               const CffParameters& base,
                               const PhotometricContext& ctx = {},
                               const LuminanceScaling& init = {});

// CSV with header subject_id,e_deg,fs_cpd,cff_hz,visible,extent_deg,
// luminance_cdm2. Empty cff_hz is allowed only on invisible rows.
std::vector<ThresholdSample> parse_threshold_csv(const std::string& text);
std::vector<ThresholdSample> load_threshold_csv(const std::string& path);

std::string fit_report_json(const FitResult& result);

namespace detail {

// Residual vector of the fit objective at the given parameters; exposed so
// tests can difference it against the analytic Jacobian.
std::vector<double> fit_residuals(const CffParameters& params,
                                  const std::vector<ThresholdSample>& samples,
                                  const FitConfig& config);

// rows = residuals, cols = 10 parameters.
std::vector<std::array<double, 10>> fit_jacobian(
    const CffParameters& params, const std::vector<ThresholdSample>& samples,
    const FitConfig& config);

// Subject aggregation: mean cff per (e, fs, luminance) key; a key is
// invisible only if every contributing sample was.
std::vector<ThresholdSample> aggregate_samples(
    const std::vector<ThresholdSample>& samples);

}  // namespace detail

}  // namespace cff

#endif  // CFF_FITTING_HPP
