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

#include "cff/fitting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"

namespace cff {

using nlohmann::json;

void ThresholdSample::validate() const {
  if (!(e >= 0.0)) throw std::domain_error("sample eccentricity must be >= 0");
  if (!(fs > 0.0)) throw std::domain_error("sample fs must be > 0");
  if (cff && !(*cff >= 0.0)) throw std::domain_error("cff must be >= 0");
  if (!visible && cff)
    throw std::domain_error("invisible sample must not carry a cff value");
  if (visible && !cff)
    throw std::domain_error("visible sample must carry a cff value");
  if (extent && !(*extent > 0.0)) throw std::domain_error("extent must be > 0");
  if (luminance && !(*luminance >= 0.0))
    throw std::domain_error("luminance must be >= 0");
}

namespace {

constexpr int kNumParams = 10;

// One residual of the fit objective.
struct Term {
  enum Kind {
    kMatch,            // psi(e) - cff
    kMatchMaxOverGrid, // max psi over the extent grid - cff
    kHingeAbove,       // penalize psi above cff (measurement = upper bound)
    kHingeBelow,       // penalize psi below cff (measurement = lower bound)
    kZero,             // invisible sample: psi itself
    kAcuity            // psi at the acuity boundary
  } kind;
  double e = 0.0;
  double fs = 1.0;
  double target = 0.0;           // measured cff for kMatch*/kHinge*
  double sqrt_weight = 1.0;
  std::vector<double> grid;      // eccentricities, kMatchMaxOverGrid only
};

std::vector<double> extent_grid(double e, double u, int points) {
  if (!std::isfinite(u) || points <= 1) return {e};
  const double lo = std::max(0.0, e - u);
  const double hi = e + u;
  std::vector<double> g(size_t(points), 0.0);
  for (int k = 0; k < points; ++k)
    g[size_t(k)] = lo + (hi - lo) * k / (points - 1);
  return g;
}

std::vector<double> default_acuity_grid() {
  std::vector<double> g;
  for (int e = 0; e <= 60; e += 2) g.push_back(double(e));
  return g;
}

std::vector<Term> build_terms(const std::vector<ThresholdSample>& samples,
                              const FitConfig& config) {
  std::vector<Term> terms;
  for (const auto& s : samples) {
    s.validate();
    if (!s.visible) {
      Term t;
      t.kind = Term::kZero;
      t.e = s.e;
      t.fs = s.fs;
      t.sqrt_weight = std::sqrt(config.weight_zero);
      terms.push_back(std::move(t));
      continue;
    }
    const std::vector<double> grid =
        extent_grid(s.e, s.extent_or_default(), config.extent_grid_points);
    Term main;
    main.fs = s.fs;
    main.target = *s.cff;
    if (config.mode == ModelVariant::conservative) {
      main.kind = Term::kMatchMaxOverGrid;
      main.grid = grid;
    } else {
      main.kind = Term::kMatch;
      main.e = s.e;
    }
    terms.push_back(std::move(main));
    const bool lower = config.mode == ModelVariant::conservative;
    const double weight =
        lower ? config.weight_extent_lower : config.weight_extent_upper;
    if (weight > 0.0)
      for (double ge : grid) {
        Term h;
        h.kind = lower ? Term::kHingeBelow : Term::kHingeAbove;
        h.e = ge;
        h.fs = s.fs;
        h.target = *s.cff;
        h.sqrt_weight = std::sqrt(weight);
        terms.push_back(std::move(h));
      }
  }
  if (config.mode == ModelVariant::full) {
    const std::vector<double> grid =
        config.acuity_grid.empty() ? default_acuity_grid() : config.acuity_grid;
    for (double e : grid) {
      Term t;
      t.kind = Term::kAcuity;
      t.e = e;
      t.fs = acuity_limit(e, config.acuity);
      t.sqrt_weight = std::sqrt(config.weight_acuity);
      terms.push_back(std::move(t));
    }
  }
  return terms;
}

double term_residual(const Term& t, const CffParameters& m) {
  switch (t.kind) {
    case Term::kMatch:
      return psi(t.e, t.fs, m) - t.target;
    case Term::kMatchMaxOverGrid: {
      double best = -std::numeric_limits<double>::infinity();
      for (double e : t.grid) best = std::max(best, psi(e, t.fs, m));
      return best - t.target;
    }
    case Term::kHingeAbove:
      return t.sqrt_weight * std::max(0.0, psi(t.e, t.fs, m) - t.target);
    case Term::kHingeBelow:
      return t.sqrt_weight * std::max(0.0, t.target - psi(t.e, t.fs, m));
    case Term::kZero:
    case Term::kAcuity:
      return t.sqrt_weight * psi(t.e, t.fs, m);
  }
  return 0.0;
}

// d psi / d p at (e, fs); zero when the outer clamp is active.
std::array<double, kNumParams> psi_gradient(double e, double fs,
                                            const CffParameters& m) {
  std::array<double, kNumParams> g{};
  const double t = tau(fs, m);
  const double expv = std::exp(m.p[9] * t);
  const double z = expv - 1.0;
  const double a = (m.p[0] * t + m.p[1]) * t + m.p[2];
  const double b = (m.p[3] * t + m.p[4]) * t + m.p[5];
  const double c = (m.p[6] * t + m.p[7]) * t + m.p[8];
  if (a + b * z * e + c * z * e * e <= 0.0) return g;
  const double t2 = t * t, e2 = e * e;
  g[0] = t2;
  g[1] = t;
  g[2] = 1.0;
  g[3] = t2 * z * e;
  g[4] = t * z * e;
  g[5] = z * e;
  g[6] = t2 * z * e2;
  g[7] = t * z * e2;
  g[8] = z * e2;
  g[9] = (b * e + c * e2) * t * expv;
  return g;
}

std::array<double, kNumParams> term_gradient(const Term& t,
                                             const CffParameters& m) {
  switch (t.kind) {
    case Term::kMatch:
      return psi_gradient(t.e, t.fs, m);
    case Term::kMatchMaxOverGrid: {
      double best = -std::numeric_limits<double>::infinity();
      double best_e = t.grid.front();
      for (double e : t.grid) {
        const double v = psi(e, t.fs, m);
        if (v > best) {
          best = v;
          best_e = e;
        }
      }
      return psi_gradient(best_e, t.fs, m);
    }
    case Term::kHingeAbove: {
      std::array<double, kNumParams> g{};
      if (psi(t.e, t.fs, m) > t.target) {
        g = psi_gradient(t.e, t.fs, m);
        for (double& v : g) v *= t.sqrt_weight;
      }
      return g;
    }
    case Term::kHingeBelow: {
      std::array<double, kNumParams> g{};
      if (psi(t.e, t.fs, m) < t.target) {
        g = psi_gradient(t.e, t.fs, m);
        for (double& v : g) v *= -t.sqrt_weight;
      }
      return g;
    }
    case Term::kZero:
    case Term::kAcuity: {
      std::array<double, kNumParams> g = psi_gradient(t.e, t.fs, m);
      for (double& v : g) v *= t.sqrt_weight;
      return g;
    }
  }
  return {};
}

double loss_of(const std::vector<Term>& terms, const CffParameters& m) {
  double loss = 0.0;
  for (const auto& t : terms) {
    const double r = term_residual(t, m);
    loss += r * r;
  }
  return loss;
}

// Gaussian elimination with partial pivoting; A is n x n row-major.
bool solve_dense(std::vector<double> A, std::vector<double> b, int n,
                 std::vector<double>* x) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(A[size_t(r) * n + col]) >
          std::fabs(A[size_t(pivot) * n + col]))
        pivot = r;
    if (std::fabs(A[size_t(pivot) * n + col]) < 1e-300) return false;
    if (pivot != col) {
      for (int c = 0; c < n; ++c)
        std::swap(A[size_t(col) * n + c], A[size_t(pivot) * n + c]);
      std::swap(b[size_t(col)], b[size_t(pivot)]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = A[size_t(r) * n + col] / A[size_t(col) * n + col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) A[size_t(r) * n + c] -= f * A[size_t(col) * n + c];
      b[size_t(r)] -= f * b[size_t(col)];
    }
  }
  x->assign(size_t(n), 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[size_t(r)];
    for (int c = r + 1; c < n; ++c) acc -= A[size_t(r) * n + c] * (*x)[size_t(c)];
    (*x)[size_t(r)] = acc / A[size_t(r) * n + r];
  }
  return true;
}

struct LmOutcome {
  std::array<double, kNumParams> p{};
  double loss = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> accepted_losses;
};

LmOutcome run_levenberg_marquardt(std::array<double, kNumParams> p,
                                  const std::vector<Term>& terms,
                                  const FitConfig& config) {
  CffParameters m = CffParameters::preset(config.mode);
  m.p = p;
  LmOutcome out;
  out.p = p;
  out.loss = loss_of(terms, m);
  out.accepted_losses.push_back(out.loss);

  double lambda = 1e-3;
  const size_t nr = terms.size();
  std::vector<double> residual(nr);
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    out.iterations = iter + 1;
    // Assemble J^T J and J^T r.
    std::vector<double> H(kNumParams * kNumParams, 0.0);
    std::vector<double> g(kNumParams, 0.0);
    for (size_t i = 0; i < nr; ++i) {
      residual[i] = term_residual(terms[i], m);
      const auto grad = term_gradient(terms[i], m);
      for (int a = 0; a < kNumParams; ++a) {
        g[size_t(a)] += grad[size_t(a)] * residual[i];
        for (int b = a; b < kNumParams; ++b)
          H[size_t(a) * kNumParams + b] += grad[size_t(a)] * grad[size_t(b)];
      }
    }
    for (int a = 0; a < kNumParams; ++a)
      for (int b = 0; b < a; ++b)
        H[size_t(a) * kNumParams + b] = H[size_t(b) * kNumParams + a];

    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::fabs(v));
    if (gmax < 1e-12) {
      out.converged = true;
      break;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      std::vector<double> damped = H;
      for (int a = 0; a < kNumParams; ++a) {
        const double d = std::max(H[size_t(a) * kNumParams + a], 1e-12);
        damped[size_t(a) * kNumParams + a] += lambda * d;
      }
      std::vector<double> rhs(kNumParams);
      for (int a = 0; a < kNumParams; ++a) rhs[size_t(a)] = -g[size_t(a)];
      std::vector<double> step;
      if (!solve_dense(damped, rhs, kNumParams, &step)) {
        lambda *= 10.0;
        continue;
      }
      std::array<double, kNumParams> cand = out.p;
      double step_norm = 0.0;
      for (int a = 0; a < kNumParams; ++a) {
        cand[size_t(a)] += step[size_t(a)];
        step_norm = std::max(step_norm, std::fabs(step[size_t(a)]));
      }
      CffParameters cm = m;
      cm.p = cand;
      const double cand_loss = loss_of(terms, cm);
      if (cand_loss < out.loss) {
        const double rel =
            (out.loss - cand_loss) / std::max(out.loss, 1e-300);
        out.p = cand;
        out.loss = cand_loss;
        out.accepted_losses.push_back(cand_loss);
        m = cm;
        lambda = std::max(lambda / 3.0, 1e-15);
        accepted = true;
        if (rel < config.convergence_tol || step_norm < 1e-14)
          out.converged = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) {
      // No descent direction at any damping: a (possibly kinked) minimum.
      out.converged = true;
      break;
    }
    if (out.converged) break;
  }
  return out;
}

struct AggregateKey {
  double e, fs, lum;
  bool operator==(const AggregateKey& o) const {
    return e == o.e && fs == o.fs && lum == o.lum;
  }
};

}  // namespace

namespace detail {

std::vector<ThresholdSample> aggregate_samples(
    const std::vector<ThresholdSample>& samples) {
  std::vector<AggregateKey> keys;
  std::vector<ThresholdSample> out;
  std::vector<int> visible_count;
  std::vector<double> cff_sum;
  const double no_lum = -1.0;
  for (const auto& s : samples) {
    s.validate();
    const AggregateKey key{s.e, s.fs, s.luminance ? *s.luminance : no_lum};
    size_t idx = keys.size();
    for (size_t i = 0; i < keys.size(); ++i)
      if (keys[i] == key) {
        idx = i;
        break;
      }
    if (idx == keys.size()) {
      keys.push_back(key);
      ThresholdSample agg = s;
      agg.subject.clear();
      agg.cff.reset();
      agg.visible = false;
      out.push_back(agg);
      visible_count.push_back(0);
      cff_sum.push_back(0.0);
    }
    ThresholdSample& agg = out[idx];
    if (s.extent)
      agg.extent = agg.extent ? std::max(*agg.extent, *s.extent) : *s.extent;
    if (s.visible) {
      visible_count[idx] += 1;
      cff_sum[idx] += *s.cff;
      agg.visible = true;
    }
  }
  for (size_t i = 0; i < out.size(); ++i)
    if (visible_count[i] > 0) out[i].cff = cff_sum[i] / visible_count[i];
  return out;
}

std::vector<double> fit_residuals(const CffParameters& params,
                                  const std::vector<ThresholdSample>& samples,
                                  const FitConfig& config) {
  const std::vector<Term> terms = build_terms(samples, config);
  std::vector<double> r(terms.size());
  for (size_t i = 0; i < terms.size(); ++i) r[i] = term_residual(terms[i], params);
  return r;
}

std::vector<std::array<double, 10>> fit_jacobian(
    const CffParameters& params, const std::vector<ThresholdSample>& samples,
    const FitConfig& config) {
  const std::vector<Term> terms = build_terms(samples, config);
  std::vector<std::array<double, 10>> jac(terms.size());
  for (size_t i = 0; i < terms.size(); ++i) jac[i] = term_gradient(terms[i], params);
  return jac;
}

}  // namespace detail

FitResult fit_cff(const std::vector<ThresholdSample>& samples,
                  const FitConfig& config) {
  if (config.extent_grid_points < 1)
    throw std::invalid_argument("extent grid needs at least one point");
  if (!(config.convergence_tol > 0.0))
    throw std::invalid_argument("convergence tolerance must be > 0");
  if (config.weight_extent_lower < 0 || config.weight_extent_upper < 0 ||
      config.weight_zero < 0 || config.weight_acuity < 0)
    throw std::invalid_argument("penalty weights must be >= 0");

  const std::vector<ThresholdSample> data =
      config.aggregate_subjects ? detail::aggregate_samples(samples) : samples;
  long visible = 0;
  for (const auto& s : data) visible += s.visible ? 1 : 0;
  if (visible < 11)
    throw std::invalid_argument(
        "underdetermined fit: need at least 11 samples with a measured cff, "
        "got " + std::to_string(visible));

  const std::vector<Term> terms = build_terms(data, config);

  std::vector<std::array<double, kNumParams>> starts;
  starts.push_back(CffParameters::preset(config.mode).p);
  if (config.initialization == FitInitialization::multi_start) {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int i = 1; i < std::max(1, config.start_count); ++i) {
      auto p = starts.front();
      for (double& v : p) v = v * (1.0 + 0.2 * noise(rng)) + 0.01 * noise(rng);
      starts.push_back(p);
    }
  }

  LmOutcome best;
  bool have_best = false;
  for (const auto& p0 : starts) {
    const LmOutcome run = run_levenberg_marquardt(p0, terms, config);
    if (!have_best || run.loss < best.loss) {
      best = run;
      have_best = true;
    }
  }

  FitResult result;
  result.params = CffParameters::preset(config.mode);
  result.params.p = best.p;
  result.final_loss = best.loss;
  result.iterations = best.iterations;
  result.converged = best.converged;
  result.accepted_losses = best.accepted_losses;

  std::vector<double> predicted, observed;
  for (const auto& s : data) {
    const double pred = psi(s.e, s.fs, result.params);
    result.residuals.push_back(pred - (s.visible ? *s.cff : 0.0));
    if (s.visible) {
      predicted.push_back(pred);
      observed.push_back(*s.cff);
    }
  }
  result.adjusted_r2 =
      predicted.size() > kNumParams + 1
          ? adjusted_r2(predicted, observed, kNumParams)
          : std::numeric_limits<double>::quiet_NaN();

  if (!result.converged)
    throw FitConvergenceError("fit did not converge within max_iterations",
                              std::move(result));
  return result;
}

double adjusted_r2(std::span<const double> predicted,
                   std::span<const double> observed, int num_params) {
  if (predicted.size() != observed.size())
    throw std::invalid_argument("series lengths differ");
  const long n = long(observed.size());
  if (n <= num_params + 1)
    throw std::invalid_argument("too few points for the adjustment");
  double mean = 0.0;
  for (double v : observed) mean += v;
  mean /= double(n);
  double ss_res = 0.0, ss_tot = 0.0;
  for (size_t i = 0; i < observed.size(); ++i) {
    ss_res += (observed[i] - predicted[i]) * (observed[i] - predicted[i]);
    ss_tot += (observed[i] - mean) * (observed[i] - mean);
  }
  if (!(ss_tot > 0.0)) throw std::domain_error("observed variance is zero");
  const double r2 = 1.0 - ss_res / ss_tot;
  return 1.0 - (1.0 - r2) * double(n - 1) / double(n - num_params - 1);
}

LuminanceScaling fit_luminance(const std::vector<ThresholdSample>& samples,
                               const CffParameters& base,
                               const PhotometricContext& ctx,
                               const LuminanceScaling& init) {
  struct Row {
    double ze2, ze, one, rhs;
  };
  std::vector<Row> rows;
  std::vector<double> lums;
  for (const auto& s : samples) {
    s.validate();
    if (!s.visible || !s.cff || !s.luminance) continue;
    const double base_psi = psi(s.e, s.fs, base);
    if (base_psi <= 0.0) continue;
    const double l = retinal_illuminance_td({*s.luminance, ctx.adapting_area});
    if (!(l > 0.0)) continue;
    const double x = std::log10(l / init.reference_trolands);
    const double z = zeta(s.fs, base);
    // cff = psi (1 + s x), s = z (q0 e^2 + q1 e) + q2, linear in q.
    rows.push_back({base_psi * x * z * s.e * s.e, base_psi * x * z * s.e,
                    base_psi * x, *s.cff - base_psi});
    if (std::find(lums.begin(), lums.end(), *s.luminance) == lums.end())
      lums.push_back(*s.luminance);
  }
  if (lums.size() < 2)
    throw std::invalid_argument(
        "luminance fit needs visible samples at two or more distinct "
        "luminances");
  if (rows.size() < 3)
    throw std::invalid_argument("luminance fit needs at least 3 usable rows");

  std::vector<double> H(9, 0.0), g(3, 0.0);
  for (const Row& r : rows) {
    const double v[3] = {r.ze2, r.ze, r.one};
    for (int a = 0; a < 3; ++a) {
      g[size_t(a)] += v[a] * r.rhs;
      for (int b = 0; b < 3; ++b) H[size_t(a) * 3 + b] += v[a] * v[b];
    }
  }
  std::vector<double> q;
  if (!solve_dense(H, g, 3, &q))
    throw std::domain_error(
        "degenerate luminance design (all samples at the reference "
        "illuminance?)");
  LuminanceScaling out = init;
  out.q0 = q[0];
  out.q1 = q[1];
  out.q2 = q[2];
  return out;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double_field(const std::string& s, int line_no, const char* col) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("threshold CSV line " + std::to_string(line_no) +
                                ": bad " + col + " value '" + s + "'");
  }
}

bool parse_bool_field(std::string s, int line_no) {
  std::transform(s.begin(), s.end(), s.begin(), ::tolower);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("threshold CSV line " + std::to_string(line_no) +
                              ": bad visible value '" + s + "'");
}

}  // namespace

std::vector<ThresholdSample> parse_threshold_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("threshold CSV is empty");
  const std::vector<std::string> header = split_csv_line(line);
  const std::vector<std::string> expected = {
      "subject_id", "e_deg", "fs_cpd", "cff_hz",
      "visible",    "extent_deg", "luminance_cdm2"};
  if (header != expected)
    throw std::invalid_argument(
        "threshold CSV header must be: subject_id,e_deg,fs_cpd,cff_hz,"
        "visible,extent_deg,luminance_cdm2");
  std::vector<ThresholdSample> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != expected.size())
      throw std::invalid_argument("threshold CSV line " +
                                  std::to_string(line_no) + ": expected " +
                                  std::to_string(expected.size()) + " fields");
    ThresholdSample s;
    s.subject = f[0];
    s.e = parse_double_field(f[1], line_no, "e_deg");
    s.fs = parse_double_field(f[2], line_no, "fs_cpd");
    s.visible = parse_bool_field(f[4], line_no);
    if (!f[3].empty()) s.cff = parse_double_field(f[3], line_no, "cff_hz");
    if (!f[5].empty()) s.extent = parse_double_field(f[5], line_no, "extent_deg");
    if (!f[6].empty())
      s.luminance = parse_double_field(f[6], line_no, "luminance_cdm2");
    try {
      s.validate();
    } catch (const std::domain_error& e) {
      throw std::invalid_argument("threshold CSV line " +
                                  std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ThresholdSample> load_threshold_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_threshold_csv(buf.str());
}

std::string fit_report_json(const FitResult& result) {
  json doc;
  doc["adjustedR2"] = result.adjusted_r2;
  doc["finalLoss"] = result.final_loss;
  doc["iterations"] = result.iterations;
  doc["converged"] = result.converged;
  doc["residuals"] = result.residuals;
  return doc.dump(2) + "\n";
}

}  // namespace cff
