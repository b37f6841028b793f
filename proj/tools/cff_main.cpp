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

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cff/bandwidth.hpp"
#include "cff/fitting.hpp"
#include "cff/model.hpp"
#include "cff/quality.hpp"
#include "cff/stimulus.hpp"
#include "cff/wavelet.hpp"

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Shared model selection: --preset / --params flag, then the CFF_PRESET
// environment variable, then the built-in full preset.
struct ModelOptions {
  std::string preset_name;
  std::string params_path;

  cff::ModelPreset resolve() const {
    if (!params_path.empty()) return cff::load_preset(params_path);
    if (!preset_name.empty())
      return cff::default_preset(cff::variant_from_string(preset_name));
    if (const char* env = std::getenv("CFF_PRESET"); env && *env)
      return cff::load_preset(env);
    return cff::default_preset(cff::ModelVariant::full);
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--preset", preset_name,
                    "Built-in parameter set: conservative, relaxed or full")
        ->check(CLI::IsMember({"conservative", "relaxed", "full"}));
    cmd->add_option("--params", params_path,
                    "Model parameter JSON file (overrides --preset)");
  }
};

// Echo the resolved configuration: digest line on stderr, sidecar JSON next
// to the primary output when there is one.
void announce(const cff::ModelPreset& preset, const json& resolved,
              const std::string& output_path) {
  const std::string canonical = resolved.dump();
  std::fprintf(stderr, "cff: preset=%s digest=%016llx\n",
               cff::to_string(preset.cff.variant),
               static_cast<unsigned long long>(fnv1a64(canonical)));
  if (!output_path.empty())
    write_text(output_path + ".config.json", resolved.dump(2) + "\n");
}

json model_json(const cff::ModelPreset& preset) {
  return json::parse(cff::preset_to_json(preset));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    size_t pos = 0;
    out.push_back(std::stod(item, &pos));
    if (pos != item.size())
      throw std::invalid_argument("bad number in list: " + item);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  ModelOptions model;
  double e = 0.0, fs = 1.0;
  std::optional<double> luminance;
  double area = 6960.0;
};

int run_eval(const EvalArgs& a) {
  const cff::ModelPreset preset = a.model.resolve();
  json resolved{{"command", "eval"},
                {"e_deg", a.e},
                {"fs_cpd", a.fs},
                {"adapting_area_deg2", a.area},
                {"model", model_json(preset)}};
  if (a.luminance) resolved["luminance_cdm2"] = *a.luminance;
  announce(preset, resolved, "");
  const double value =
      a.luminance ? cff::psi_hat(a.e, a.fs, *a.luminance, preset.cff,
                                 preset.luminance, {*a.luminance, a.area})
                  : cff::psi(a.e, a.fs, preset.cff);
  std::printf("%s\n", num(value).c_str());
  return 0;
}

// ---------------------------------------------------------------- acuity

int run_acuity(const ModelOptions& model, double e) {
  const cff::ModelPreset preset = model.resolve();
  announce(preset, json{{"command", "acuity"}, {"e_deg", e}}, "");
  std::printf("%s\n", num(cff::acuity_limit(e, preset.acuity)).c_str());
  return 0;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  ModelOptions model;  // initialization + acuity parameters
  std::string input;
  std::string output;
  std::string report;
  std::string mode = "relaxed";
  int max_iterations = 500;
  double tol = 1e-9;
  double weight_zero = 10.0, weight_acuity = 5.0;
  double weight_extent_lower = 10.0, weight_extent_upper = 0.0;
  int multi_start = 0;
  std::uint64_t seed = 0;
  bool no_aggregate = false;
};

int run_fit(const FitArgs& a) {
  const cff::ModelPreset base = a.model.resolve();
  cff::FitConfig config;
  config.mode = cff::variant_from_string(a.mode);
  config.max_iterations = a.max_iterations;
  config.convergence_tol = a.tol;
  config.weight_zero = a.weight_zero;
  config.weight_acuity = a.weight_acuity;
  config.weight_extent_lower = a.weight_extent_lower;
  config.weight_extent_upper = a.weight_extent_upper;
  config.aggregate_subjects = !a.no_aggregate;
  config.acuity = base.acuity;
  if (a.multi_start > 0) {
    config.initialization = cff::FitInitialization::multi_start;
    config.start_count = a.multi_start;
    config.seed = a.seed;
  }
  json resolved{{"command", "fit"},
                {"input", a.input},
                {"mode", a.mode},
                {"max_iterations", a.max_iterations},
                {"convergence_tol", a.tol},
                {"weight_zero", a.weight_zero},
                {"weight_acuity", a.weight_acuity},
                {"weight_extent_lower", a.weight_extent_lower},
                {"weight_extent_upper", a.weight_extent_upper},
                {"multi_start", a.multi_start},
                {"seed", a.seed},
                {"aggregate_subjects", !a.no_aggregate}};
  announce(base, resolved, a.output);

  const auto samples = cff::load_threshold_csv(a.input);
  const cff::FitResult result = cff::fit_cff(samples, config);

  cff::ModelPreset fitted = base;
  fitted.cff = result.params;
  if (!a.output.empty()) cff::save_preset(fitted, a.output);
  if (!a.report.empty()) write_text(a.report, cff::fit_report_json(result));
  std::printf("adjustedR2=%s finalLoss=%s iterations=%d\n",
              num(result.adjusted_r2).c_str(), num(result.final_loss).c_str(),
              result.iterations);
  return 0;
}

// ---------------------------------------------------------------- stimulus

struct StimulusArgs {
  std::string catalog_path;
  std::string render_path;
  std::string descriptor_path;
  std::string spec_path;
  int index = -1;
  double t = 0.0;
  double ft = -1.0;
  int bits = 8;
  int width = 1280, height = 720;
  double fov_h = 80.0, fov_v = 87.0;
};

int run_stimulus(const StimulusArgs& a) {
  const cff::ModelPreset preset = cff::default_preset(cff::ModelVariant::full);
  json resolved{{"command", "stimulus"},
                {"index", a.index},
                {"t_s", a.t},
                {"bits", a.bits},
                {"width", a.width},
                {"height", a.height},
                {"fov_h_deg", a.fov_h},
                {"fov_v_deg", a.fov_v}};
  const std::string primary = !a.render_path.empty()    ? a.render_path
                              : !a.catalog_path.empty() ? a.catalog_path
                                                        : a.descriptor_path;
  announce(preset, resolved, primary);

  if (!a.catalog_path.empty())
    write_text(a.catalog_path, cff::catalog_to_json(cff::stimulus_catalog()));

  if (a.render_path.empty() && a.descriptor_path.empty()) return 0;

  cff::GaborStimulus stim;
  if (!a.spec_path.empty()) {
    stim = cff::stimulus_from_json(read_file(a.spec_path));
  } else {
    const auto catalog = cff::stimulus_catalog();
    if (a.index < 0 || a.index >= int(catalog.size()))
      throw std::invalid_argument("--index must select a catalog entry 0..17");
    stim = catalog[size_t(a.index)];
  }
  if (a.ft >= 0.0) stim.ft = a.ft;

  if (!a.descriptor_path.empty())
    write_text(a.descriptor_path, cff::stimulus_to_json(stim));
  if (!a.render_path.empty()) {
    cff::DisplayGeometry geom;
    geom.width = a.width;
    geom.height = a.height;
    geom.fov_h = a.fov_h;
    geom.fov_v = a.fov_v;
    cff::write_pgm(cff::render_frame(a.t, stim, geom), a.render_path, a.bits);
  }
  return 0;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  ModelOptions model;
  std::string input;
  std::string output;
  double area = 6960.0;
};

int run_predict(const PredictArgs& a) {
  const cff::ModelPreset preset = a.model.resolve();
  announce(preset,
           json{{"command", "predict"},
                {"input", a.input},
                {"adapting_area_deg2", a.area},
                {"model", model_json(preset)}},
           a.output);
  const auto descriptors = cff::descriptors_from_json(read_file(a.input));
  const cff::VideoVerdict verdict = cff::predict_visibility(
      descriptors, preset.cff, &preset.luminance, {380.0, a.area});
  const std::string text = cff::verdict_to_json(verdict);
  if (a.output.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_text(a.output, text);
  return 0;
}

// ---------------------------------------------------------------- bandwidth

struct BandwidthArgs {
  ModelOptions model;
  cff::AnalysisConfig config;
  std::string mode = "spatioTemporal";
  std::string counting = "analytic";
  std::string output;
  std::string filter_input;
  std::string filter_output;
};

json report_json(const cff::AnalysisConfig& c, const cff::GainReport& r) {
  json bands = json::array();
  for (const auto& br : r.per_band)
    bands.push_back({{"spatial_level", br.band.spatial_level},
                     {"temporal_level", br.band.temporal_level},
                     {"fs_low_cpd", br.band.fs_low},
                     {"fs_high_cpd", br.band.fs_high},
                     {"ft_low_hz", br.band.ft_low},
                     {"ft_high_hz", br.band.ft_high},
                     {"count", br.band.coefficient_count},
                     {"retained", br.retained}});
  return json{{"fov_h_deg", c.fov_h},
              {"fov_v_deg", c.fov_v},
              {"ppd", c.ppd},
              {"framerate_hz", c.framerate},
              {"temporal_window", c.temporal_window},
              {"gaze_x_deg", c.gaze_x},
              {"gaze_y_deg", c.gaze_y},
              {"mode", cff::to_string(r.mode)},
              {"counting", cff::to_string(r.counting)},
              {"total", r.total},
              {"retained", r.retained},
              {"gain", r.gain()},
              {"per_band", bands}};
}

int run_bandwidth(BandwidthArgs& a) {
  const cff::ModelPreset preset = a.model.resolve();
  a.config.mode = cff::discard_mode_from_string(a.mode);
  a.config.counting = cff::counting_from_string(a.counting);
  json resolved{{"command", "bandwidth"}, {"mode", a.mode},
                {"counting", a.counting}, {"ppd", a.config.ppd},
                {"fov_h_deg", a.config.fov_h}, {"fov_v_deg", a.config.fov_v},
                {"framerate_hz", a.config.framerate},
                {"temporal_window", a.config.temporal_window},
                {"gaze_x_deg", a.config.gaze_x},
                {"gaze_y_deg", a.config.gaze_y},
                {"threads", a.config.threads},
                {"model", model_json(preset)}};
  announce(preset, resolved, a.output.empty() ? a.filter_output : a.output);

  if (!a.filter_input.empty()) {
    if (a.filter_output.empty())
      throw std::invalid_argument(
          "--filter-output required with --filter-input");
    double framerate = a.config.framerate;
    const cff::Video in = cff::load_raw_video(a.filter_input, &framerate);
    cff::AnalysisConfig fc = a.config;
    fc.framerate = framerate;
    const cff::Video out = cff::filter_video(in, fc, preset.cff);
    cff::write_raw_video(out, a.filter_output, framerate);
    return 0;
  }

  const cff::GainReport report = cff::retained_count(a.config, preset.cff);
  const json doc = report_json(a.config, report);
  if (a.output.empty())
    std::printf("total=%lld retained=%lld gain=%s\n",
                static_cast<long long>(report.total),
                static_cast<long long>(report.retained),
                num(report.gain()).c_str());
  else
    write_text(a.output, doc.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------- sweeps

int run_sweep_fig3(const ModelOptions& model, const std::string& output) {
  const cff::ModelPreset preset = model.resolve();
  announce(preset, json{{"command", "sweep-fig3"}, {"output", output}}, output);
  std::string csv = "section,preset,e_deg,fs_cpd,psi_hz\n";
  const std::vector<const cff::CffParameters*> models = {
      &cff::CffParameters::conservative(), &cff::CffParameters::relaxed(),
      &cff::CffParameters::full()};
  const std::vector<double> fs_rows = {0.0055, 0.011, 0.041,
                                       0.154,  0.571, 2.0};
  for (const auto* m : models) {
    for (double fs : fs_rows)
      for (double e = 0.0; e <= 60.0 + 1e-9; e += 0.5)
        csv += "ecc," + std::string(cff::to_string(m->variant)) + "," +
               num(e) + "," + num(fs) + "," + num(cff::psi(e, fs, *m)) + "\n";
    for (double e : {0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0})
      for (int k = 0; k < 60; ++k) {
        const double fs = 0.0055 * std::pow(2.0 / 0.0055, k / 59.0);
        csv += "fs," + std::string(cff::to_string(m->variant)) + "," + num(e) +
               "," + num(fs) + "," + num(cff::psi(e, fs, *m)) + "\n";
      }
  }
  write_text(output, csv);
  return 0;
}

int run_sweep_fig4(const ModelOptions& model, const std::string& output) {
  const cff::ModelPreset preset = model.resolve();
  announce(preset, json{{"command", "sweep-fig4"}, {"output", output}}, output);
  std::string csv = "section,e_deg,fs_cpd,luminance_cdm2,psi_hat_hz\n";
  const std::vector<double> lums = {3.0, 23.9, 380.0};
  for (double lum : lums)
    for (double e = 0.0; e <= 60.0 + 1e-9; e += 1.0)
      csv += "ecc," + num(e) + ",0.57," + num(lum) + "," +
             num(cff::psi_hat(e, 0.57, lum, preset.cff, preset.luminance)) +
             "\n";
  for (double lum : lums)
    for (int k = 0; k < 40; ++k) {
      const double fs = 0.0055 * std::pow(2.0 / 0.0055, k / 39.0);
      csv += "fs,0," + num(fs) + "," + num(lum) + "," +
             num(cff::psi_hat(0.0, fs, lum, preset.cff, preset.luminance)) +
             "\n";
    }
  write_text(output, csv);
  return 0;
}

struct SweepFig6Args {
  ModelOptions model;
  std::string output;
  double ppd = 60.0;
  double framerate = 200.0;
  int window = 128;
  int threads = 1;
  std::string fovs = "20,40,60,80,100,120,140,160,165";
};

int run_sweep_fig6(const SweepFig6Args& a) {
  const cff::ModelPreset preset = a.model.resolve();
  announce(preset,
           json{{"command", "sweep-fig6"},
                {"ppd", a.ppd},
                {"framerate_hz", a.framerate},
                {"temporal_window", a.window},
                {"fovs", a.fovs},
                {"threads", a.threads}},
           a.output);
  std::vector<cff::SweepRow> rows;
  for (double fov : parse_double_list(a.fovs)) {
    cff::AnalysisConfig c;
    c.ppd = a.ppd;
    c.framerate = a.framerate;
    c.temporal_window = a.window;
    c.threads = a.threads;
    c.fov_h = fov;
    c.fov_v = fov * 135.0 / 165.0;
    cff::GainReport spatial, spatio;
    cff::detail::count_analytic(c, preset.cff, &spatial, &spatio);
    cff::AnalysisConfig cs = c;
    cs.mode = cff::DiscardMode::spatial_only;
    rows.push_back({cs, spatial});
    rows.push_back({c, spatio});
  }
  write_text(a.output, cff::gain_sweep_csv(rows));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eccentricity-dependent flicker fusion model toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Read default option values from an INI file");

  EvalArgs eval_args;
  auto* eval_cmd =
      app.add_subcommand("eval", "Evaluate the CFF threshold at (e, fs)");
  eval_args.model.attach(eval_cmd);
  eval_cmd->add_option("--e", eval_args.e, "Eccentricity in degrees")
      ->required();
  eval_cmd->add_option("--fs", eval_args.fs, "Spatial frequency in cpd")
      ->required();
  double eval_lum = -1.0;
  eval_cmd->add_option(
      "--luminance", eval_lum,
      "Display luminance in cd/m^2 (switches to the scaled model)");
  eval_cmd->add_option("--area", eval_args.area, "Adapting area in deg^2");

  ModelOptions acuity_model;
  double acuity_e = 0.0;
  auto* acuity_cmd =
      app.add_subcommand("acuity", "Evaluate the acuity limit at e");
  acuity_model.attach(acuity_cmd);
  acuity_cmd->add_option("--e", acuity_e, "Eccentricity in degrees")
      ->required();

  FitArgs fit_args;
  auto* fit_cmd =
      app.add_subcommand("fit", "Fit model parameters to a threshold CSV");
  fit_args.model.attach(fit_cmd);
  fit_cmd->add_option("--input", fit_args.input, "Threshold CSV")->required();
  fit_cmd->add_option("--mode", fit_args.mode, "conservative, relaxed or full")
      ->check(CLI::IsMember({"conservative", "relaxed", "full"}));
  fit_cmd->add_option("--output", fit_args.output, "Fitted parameter JSON path");
  fit_cmd->add_option("--report", fit_args.report, "Fit report JSON path");
  fit_cmd->add_option("--max-iter", fit_args.max_iterations, "Iteration cap");
  fit_cmd->add_option("--tol", fit_args.tol,
                      "Relative loss convergence tolerance");
  fit_cmd->add_option("--weight-zero", fit_args.weight_zero,
                      "Invisible-sample forcing weight");
  fit_cmd->add_option("--weight-acuity", fit_args.weight_acuity,
                      "Acuity-boundary weight (full mode)");
  fit_cmd->add_option("--weight-extent-lower", fit_args.weight_extent_lower,
                      "Conservative extent hinge weight");
  fit_cmd->add_option("--weight-extent-upper", fit_args.weight_extent_upper,
                      "Relaxed/full extent hinge weight");
  fit_cmd->add_option("--multi-start", fit_args.multi_start,
                      "Number of jittered optimizer starts");
  fit_cmd->add_option("--seed", fit_args.seed, "Multi-start jitter seed");
  fit_cmd->add_flag("--no-aggregate", fit_args.no_aggregate,
                    "Fit raw per-subject rows instead of per-location means");

  StimulusArgs stim_args;
  auto* stim_cmd = app.add_subcommand(
      "stimulus", "Emit catalog data or render test patterns");
  stim_cmd->add_option("--catalog", stim_args.catalog_path,
                       "Write the 18-entry stimulus catalog JSON here");
  stim_cmd->add_option("--index", stim_args.index, "Catalog entry to use");
  stim_cmd->add_option("--spec", stim_args.spec_path,
                       "Stimulus descriptor JSON");
  stim_cmd->add_option("--render", stim_args.render_path, "Output PGM path");
  stim_cmd->add_option("--descriptor", stim_args.descriptor_path,
                       "Write the selected stimulus descriptor JSON here");
  stim_cmd->add_option("--t", stim_args.t, "Frame time in seconds");
  stim_cmd->add_option("--ft", stim_args.ft,
                       "Override temporal frequency (Hz)");
  stim_cmd->add_option("--bits", stim_args.bits, "PGM depth: 8 or 16")
      ->check(CLI::IsMember({8, 16}));
  stim_cmd->add_option("--width", stim_args.width, "Display width in pixels");
  stim_cmd->add_option("--height", stim_args.height,
                       "Display height in pixels");
  stim_cmd->add_option("--fov-h", stim_args.fov_h, "Horizontal FOV in degrees");
  stim_cmd->add_option("--fov-v", stim_args.fov_v, "Vertical FOV in degrees");

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand(
      "predict", "Binary flicker visibility for perturbation descriptors");
  predict_args.model.attach(predict_cmd);
  predict_cmd
      ->add_option("--input", predict_args.input, "Descriptor JSON array")
      ->required();
  predict_cmd->add_option("--output", predict_args.output,
                          "Verdict JSON path");
  predict_cmd->add_option("--area", predict_args.area,
                          "Adapting area in deg^2");

  BandwidthArgs bw_args;
  auto* bw_cmd = app.add_subcommand(
      "bandwidth", "Perceptual coefficient-discarding gain analysis");
  bw_args.model.attach(bw_cmd);
  bw_cmd->add_option("--ppd", bw_args.config.ppd, "Pixels per degree");
  bw_cmd->add_option("--fov-h", bw_args.config.fov_h, "Horizontal FOV (deg)");
  bw_cmd->add_option("--fov-v", bw_args.config.fov_v, "Vertical FOV (deg)");
  bw_cmd->add_option("--framerate", bw_args.config.framerate,
                     "Framerate (Hz)");
  bw_cmd->add_option("--window", bw_args.config.temporal_window,
                     "Temporal window (frames, power of two)");
  bw_cmd->add_option("--gaze-x", bw_args.config.gaze_x, "Gaze x (deg)");
  bw_cmd->add_option("--gaze-y", bw_args.config.gaze_y, "Gaze y (deg)");
  bw_cmd->add_option("--mode", bw_args.mode, "spatialOnly or spatioTemporal");
  bw_cmd->add_option("--counting", bw_args.counting,
                     "analytic or enumerated");
  bw_cmd->add_option("--threads", bw_args.config.threads, "Worker threads");
  bw_cmd->add_option("--output", bw_args.output, "Report JSON path");
  bw_cmd->add_option("--filter-input", bw_args.filter_input,
                     "Raw video to filter (expects <path>.json sidecar)");
  bw_cmd->add_option("--filter-output", bw_args.filter_output,
                     "Filtered raw video path");

  ModelOptions fig3_model;
  std::string fig3_output;
  auto* fig3_cmd = app.add_subcommand(
      "sweep-fig3", "Threshold surface cross sections for all presets (CSV)");
  fig3_model.attach(fig3_cmd);
  fig3_cmd->add_option("--output", fig3_output, "CSV path")->required();

  ModelOptions fig4_model;
  std::string fig4_output;
  auto* fig4_cmd = app.add_subcommand(
      "sweep-fig4", "Luminance-scaled threshold cross sections (CSV)");
  fig4_model.attach(fig4_cmd);
  fig4_cmd->add_option("--output", fig4_output, "CSV path")->required();

  SweepFig6Args fig6_args;
  auto* fig6_cmd = app.add_subcommand(
      "sweep-fig6", "Compression-gain sweep over the covered field (CSV)");
  fig6_args.model.attach(fig6_cmd);
  fig6_cmd->add_option("--output", fig6_args.output, "CSV path")->required();
  fig6_cmd->add_option("--ppd", fig6_args.ppd, "Pixels per degree");
  fig6_cmd->add_option("--framerate", fig6_args.framerate, "Framerate (Hz)");
  fig6_cmd->add_option("--window", fig6_args.window, "Temporal window");
  fig6_cmd->add_option("--threads", fig6_args.threads, "Worker threads");
  fig6_cmd->add_option("--fovs", fig6_args.fovs,
                       "Comma-separated horizontal FOV list (deg)");

  bool error_json = false;
  app.add_flag("--error-json", error_json,
               "Report failures as machine-readable JSON on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (error_json) {
      json err{{"error", e.what()}, {"type", "usage"}};
      std::printf("%s\n", err.dump().c_str());
    }
    return 2;
  }

  try {
    if (eval_cmd->parsed()) {
      if (eval_cmd->count("--luminance")) eval_args.luminance = eval_lum;
      return run_eval(eval_args);
    }
    if (acuity_cmd->parsed()) return run_acuity(acuity_model, acuity_e);
    if (fit_cmd->parsed()) return run_fit(fit_args);
    if (stim_cmd->parsed()) return run_stimulus(stim_args);
    if (predict_cmd->parsed()) return run_predict(predict_args);
    if (bw_cmd->parsed()) return run_bandwidth(bw_args);
    if (fig3_cmd->parsed()) return run_sweep_fig3(fig3_model, fig3_output);
    if (fig4_cmd->parsed()) return run_sweep_fig4(fig4_model, fig4_output);
    if (fig6_cmd->parsed()) return run_sweep_fig6(fig6_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cff: error: %s\n", e.what());
    if (error_json) {
      json err{{"error", e.what()}, {"type", "runtime"}};
      std::printf("%s\n", err.dump().c_str());
    }
    return 1;
  }
  return 0;
}
