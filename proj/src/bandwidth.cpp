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

#include "cff/bandwidth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace cff {

using nlohmann::json;

const char* to_string(DiscardMode m) {
  return m == DiscardMode::spatial_only ? "spatialOnly" : "spatioTemporal";
}

const char* to_string(CountingMethod m) {
  return m == CountingMethod::enumerated ? "enumerated" : "analytic";
}

DiscardMode discard_mode_from_string(const std::string& name) {
  if (name == "spatialOnly" || name == "spatial-only" || name == "spatial")
    return DiscardMode::spatial_only;
  if (name == "spatioTemporal" || name == "spatio-temporal" ||
      name == "spatiotemporal")
    return DiscardMode::spatio_temporal;
  throw std::invalid_argument("unknown discard mode: " + name);
}

CountingMethod counting_from_string(const std::string& name) {
  if (name == "enumerated") return CountingMethod::enumerated;
  if (name == "analytic") return CountingMethod::analytic;
  throw std::invalid_argument("unknown counting method: " + name);
}

int AnalysisConfig::width() const {
  return static_cast<int>(std::llround(fov_h * ppd));
}

int AnalysisConfig::height() const {
  return static_cast<int>(std::llround(fov_v * ppd));
}

void AnalysisConfig::validate() const {
  if (!(ppd > 0.0) || !(fov_h > 0.0) || !(fov_v > 0.0))
    throw std::domain_error("ppd and fov must be > 0");
  if (width() < 2 || height() < 2)
    throw std::domain_error("degenerate resolution");
  if (!(framerate > 0.0)) throw std::domain_error("framerate must be > 0");
  if (temporal_window < 2 || !is_power_of_two(temporal_window))
    throw std::domain_error("temporal window must be a power of two >= 2");
  if (threads < 1) throw std::domain_error("threads must be >= 1");
}

double GainReport::gain() const {
  if (retained == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(total) / static_cast<double>(retained);
}

namespace {

struct EccQuad {
  double a = 0, b = 0, c = 0;
};

EccQuad ecc_quad(double fs, const CffParameters& m) {
  const double t = tau(fs, m);
  const double z = std::expm1(m.p[9] * t);
  return {(m.p[0] * t + m.p[1]) * t + m.p[2],
          ((m.p[3] * t + m.p[4]) * t + m.p[5]) * z,
          ((m.p[6] * t + m.p[7]) * t + m.p[8]) * z};
}

// Per-band psi evaluator: the 5 log-spaced sample frequencies reduced to
// quadratics in eccentricity. Evaluation order matches psi() exactly so the
// fast counting path and direct psi() calls agree bit-for-bit.
struct BandModel {
  int n = 0;
  std::array<EccQuad, 5> rows{};

  double eval(double e) const {
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = rows[i].a + rows[i].b * e + rows[i].c * e * e;
      if (v > best) best = v;
    }
    return best;
  }
};

std::array<double, 5> band_sample_frequencies(double fs_low, double fs_high,
                                              const CffParameters& model) {
  // psi is constant below the cut-off, so sampling never needs to reach
  // below it: the value at the cut-off covers the whole constant region.
  const double lo = std::max(fs_low, std::min(model.cutoff_fs, fs_high));
  std::array<double, 5> fs{};
  for (int i = 0; i < 5; ++i)
    fs[size_t(i)] = lo * std::pow(fs_high / lo, i / 4.0);
  return fs;
}

BandModel make_band_model(double fs_low, double fs_high,
                          const CffParameters& model) {
  BandModel bm;
  for (double f : band_sample_frequencies(fs_low, fs_high, model))
    bm.rows[size_t(bm.n++)] = ecc_quad(f, model);
  return bm;
}

struct LevelDims {
  long long in_w = 0, in_h = 0;   // block handed to this level
  long long cw = 0, ch = 0;       // approximation (ceil) sizes
  long long fw = 0, fh = 0;       // detail (floor) sizes
};

int levels_until_one(long long n) {
  int levels = 0;
  while (n > 1) {
    n -= n / 2;  // ceil-halving
    ++levels;
  }
  return levels;
}

// Everything both counters need: dimensions, band edges, evaluators.
struct CountingScheme {
  long long W = 0, H = 0;
  int T = 0, J = 0, L = 0;
  double ppd = 0, framerate = 0, gx = 0, gy = 0;
  std::vector<LevelDims> dims;       // [1..J]
  std::vector<BandModel> models;     // [0] = LL, [1..J] detail levels
  std::vector<double> fs_low, fs_high;
  std::vector<double> ft_low, ft_high;  // [0] = DC, [1..L], 1 = finest
  std::vector<long long> tsize;         // temporal band sizes

  double min_eccentricity(int level, long long cx, long long cy) const {
    const long long sup = 1LL << level;
    const double px0 = double(cx * sup), py0 = double(cy * sup);
    const double px1 = double(std::min((cx + 1) * sup, W));
    const double py1 = double(std::min((cy + 1) * sup, H));
    const double ax0 = (px0 - W / 2.0) / ppd, ax1 = (px1 - W / 2.0) / ppd;
    const double ay0 = (py0 - H / 2.0) / ppd, ay1 = (py1 - H / 2.0) / ppd;
    const double dx = gx < ax0 ? ax0 - gx : (gx > ax1 ? gx - ax1 : 0.0);
    const double dy = gy < ay0 ? ay0 - gy : (gy > ay1 ? gy - ay1 : 0.0);
    return std::sqrt(dx * dx + dy * dy);
  }

};

CountingScheme make_scheme_raw(long long W, long long H, int T, double ppd,
                               double framerate, double gx, double gy,
                               const CffParameters& model) {
  CountingScheme s;
  s.W = W;
  s.H = H;
  s.T = T;
  s.ppd = ppd;
  s.framerate = framerate;
  s.gx = gx;
  s.gy = gy;
  s.J = std::min(levels_until_one(W), levels_until_one(H));
  s.L = haar_levels(T);

  s.dims.resize(size_t(s.J) + 1);
  long long w = W, h = H;
  for (int j = 1; j <= s.J; ++j) {
    LevelDims d;
    d.in_w = w;
    d.in_h = h;
    d.fw = w / 2;
    d.fh = h / 2;
    d.cw = w - d.fw;
    d.ch = h - d.fh;
    s.dims[size_t(j)] = d;
    w = d.cw;
    h = d.ch;
  }

  s.fs_low.resize(size_t(s.J) + 1);
  s.fs_high.resize(size_t(s.J) + 1);
  s.models.resize(size_t(s.J) + 1);
  for (int j = 1; j <= s.J; ++j) {
    s.fs_high[size_t(j)] = ppd / std::pow(2.0, j);
    s.fs_low[size_t(j)] = ppd / std::pow(2.0, j + 1);
    s.models[size_t(j)] =
        make_band_model(s.fs_low[size_t(j)], s.fs_high[size_t(j)], model);
  }
  s.fs_low[0] = 0.0;
  s.fs_high[0] = ppd / std::pow(2.0, s.J + 1);
  s.models[0] = make_band_model(s.fs_low[0], s.fs_high[0], model);

  s.ft_low.resize(size_t(s.L) + 1);
  s.ft_high.resize(size_t(s.L) + 1);
  s.tsize.resize(size_t(s.L) + 1);
  for (int l = 1; l <= s.L; ++l) {
    s.ft_high[size_t(l)] = framerate / std::pow(2.0, l);
    s.ft_low[size_t(l)] = framerate / std::pow(2.0, l + 1);
    s.tsize[size_t(l)] = T >> l;
  }
  s.ft_low[0] = 0.0;
  s.ft_high[0] = framerate / std::pow(2.0, s.L + 1);
  s.tsize[0] = 1;
  return s;
}

CountingScheme make_scheme(const AnalysisConfig& config,
                           const CffParameters& model) {
  config.validate();
  model.validate();
  return make_scheme_raw(config.width(), config.height(),
                         config.temporal_window, config.ppd, config.framerate,
                         config.gaze_x, config.gaze_y, model);
}

// Index of the (spatial level, temporal level) row in band_layout order:
// spatial 0 (LL) first, then J down to 1; within each, temporal 0 then
// L down to 1.
size_t band_row_index(const CountingScheme& s, int j, int l) {
  const size_t tcount = size_t(s.L) + 1;
  const size_t jpos = j == 0 ? 0 : size_t(s.J - j + 1);
  const size_t lpos = l == 0 ? 0 : size_t(s.L - l + 1);
  return jpos * tcount + lpos;
}

std::vector<BandDescriptor> layout_from_scheme(const CountingScheme& s) {
  std::vector<BandDescriptor> out((size_t(s.J) + 1) * (size_t(s.L) + 1));
  for (int j = 0; j <= s.J; ++j) {
    long long cells;
    int support_level;
    if (j == 0) {
      cells = s.dims[size_t(s.J)].cw * s.dims[size_t(s.J)].ch;
      support_level = s.J;
    } else {
      const LevelDims& d = s.dims[size_t(j)];
      cells = d.fw * d.ch + d.cw * d.fh + d.fw * d.fh;
      support_level = j;
    }
    for (int l = 0; l <= s.L; ++l) {
      BandDescriptor b;
      b.spatial_level = j;
      b.temporal_level = l;
      b.fs_low = s.fs_low[size_t(j)];
      b.fs_high = s.fs_high[size_t(j)];
      b.ft_low = s.ft_low[size_t(l)];
      b.ft_high = s.ft_high[size_t(l)];
      b.coefficient_count = cells * s.tsize[size_t(l)];
      b.support_deg = std::pow(2.0, support_level) / s.ppd;
      out[band_row_index(s, j, l)] = b;
    }
  }
  return out;
}

// Mult-weighted per-cell tallies for one spatial level: how many cells are
// spatially kept, and how many of those clear each temporal band edge.
struct LevelTally {
  long long kept_cells = 0;                  // subband-multiplicity weighted
  std::vector<long long> kept_at_level;      // [1..L], same weighting

  explicit LevelTally(int L) : kept_at_level(size_t(L) + 1, 0) {}
  void merge(const LevelTally& other) {
    kept_cells += other.kept_cells;
    for (size_t i = 0; i < kept_at_level.size(); ++i)
      kept_at_level[i] += other.kept_at_level[i];
  }
};

// Evaluate one level's approximation grid over rows [row0, row1); detail
// subband membership is resolved by index multiplicity, so the grid is
// walked exactly once.
void tally_level_rows(const CountingScheme& s, int j, bool ll_band,
                      long long row0, long long row1, LevelTally* tally) {
  const int level = ll_band ? s.J : j;
  long long cw, ch, fw, fh;
  if (ll_band) {
    cw = s.dims[size_t(s.J)].cw;
    ch = s.dims[size_t(s.J)].ch;
    fw = cw;  // every LL cell counts once
    fh = ch;
  } else {
    cw = s.dims[size_t(j)].cw;
    ch = s.dims[size_t(j)].ch;
    fw = s.dims[size_t(j)].fw;
    fh = s.dims[size_t(j)].fh;
  }
  const BandModel& bm = s.models[size_t(ll_band ? 0 : j)];
  for (long long cy = row0; cy < std::min(row1, ch); ++cy) {
    for (long long cx = 0; cx < cw; ++cx) {
      long long mult;
      if (ll_band) {
        mult = 1;
      } else {
        mult = (cx < fw ? 1 : 0) + (cy < fh ? 1 : 0) +
               (cx < fw && cy < fh ? 1 : 0);
        if (mult == 0) continue;
      }
      const double ps = bm.eval(s.min_eccentricity(level, cx, cy));
      if (ps <= 0.0) continue;
      tally->kept_cells += mult;
      for (int l = 1; l <= s.L; ++l)
        if (s.ft_low[size_t(l)] <= ps) tally->kept_at_level[size_t(l)] += mult;
    }
  }
}

LevelTally tally_level(const CountingScheme& s, int j, bool ll_band,
                       int threads) {
  const long long ch =
      ll_band ? s.dims[size_t(s.J)].ch : s.dims[size_t(j)].ch;
  const int nthreads =
      int(std::max(1LL, std::min<long long>(threads, std::min(ch, 64LL))));
  if (nthreads == 1) {
    LevelTally t(s.L);
    tally_level_rows(s, j, ll_band, 0, ch, &t);
    return t;
  }
  std::vector<LevelTally> parts(size_t(nthreads), LevelTally(s.L));
  std::vector<std::thread> pool;
  const long long chunk = (ch + nthreads - 1) / nthreads;
  for (int i = 0; i < nthreads; ++i)
    pool.emplace_back([&, i] {
      tally_level_rows(s, j, ll_band, i * chunk,
                       std::min<long long>((i + 1) * chunk, ch), &parts[size_t(i)]);
    });
  for (auto& th : pool) th.join();
  LevelTally t(s.L);
  for (const auto& p : parts) t.merge(p);
  return t;
}

}  // namespace

namespace detail {

double band_psi_star(double e, double fs_low, double fs_high,
                     const CffParameters& model) {
  return make_band_model(fs_low, fs_high, model).eval(e);
}

void count_analytic(const AnalysisConfig& config, const CffParameters& model,
                    GainReport* spatial_only, GainReport* spatio_temporal) {
  const CountingScheme s = make_scheme(config, model);
  const std::vector<BandDescriptor> layout = layout_from_scheme(s);
  auto init = [&](GainReport* r, DiscardMode mode) {
    if (!r) return;
    r->total = s.W * s.H * s.T;
    r->retained = 0;
    r->mode = mode;
    r->counting = CountingMethod::analytic;
    r->per_band.clear();
    r->per_band.reserve(layout.size());
    for (const auto& b : layout) r->per_band.push_back({b, 0});
  };
  init(spatial_only, DiscardMode::spatial_only);
  init(spatio_temporal, DiscardMode::spatio_temporal);

  for (int j = 0; j <= s.J; ++j) {
    const bool ll = j == 0;
    const LevelTally t = tally_level(s, j, ll, config.threads);
    for (int l = 0; l <= s.L; ++l) {
      const size_t row = band_row_index(s, j, l);
      if (spatial_only) {
        const long long kept = t.kept_cells * s.tsize[size_t(l)];
        spatial_only->per_band[row].retained = kept;
        spatial_only->retained += kept;
      }
      if (spatio_temporal) {
        const long long cells =
            l == 0 ? t.kept_cells : t.kept_at_level[size_t(l)];
        const long long kept = cells * s.tsize[size_t(l)];
        spatio_temporal->per_band[row].retained = kept;
        spatio_temporal->retained += kept;
      }
    }
  }
}

GainReport count_enumerated(const AnalysisConfig& config,
                            const CffParameters& model) {
  const CountingScheme s = make_scheme(config, model);
  const long long slots = s.W * s.H * s.T;
  if (slots > (1LL << 33))
    throw std::invalid_argument(
        "enumerated counting is infeasible at this size; use analytic");
  const std::vector<BandDescriptor> layout = layout_from_scheme(s);
  GainReport r;
  r.total = slots;
  r.mode = config.mode;
  r.counting = CountingMethod::enumerated;
  for (const auto& b : layout) r.per_band.push_back({b, 0});

  for (long long iy = 0; iy < s.H; ++iy) {
    for (long long ix = 0; ix < s.W; ++ix) {
      // Decode the Mallat position: descend while inside the approximation.
      int j = 0;
      long long cx = ix, cy = iy;
      bool ll = true;
      while (j < s.J) {
        const LevelDims& d = s.dims[size_t(j + 1)];
        ++j;
        if (cx < d.cw && cy < d.ch) continue;  // approximation, go deeper
        ll = false;
        if (cx >= d.cw) cx -= d.cw;
        if (cy >= d.ch) cy -= d.ch;
        break;
      }
      const int level = j;  // == s.J when ll
      const BandModel& bm = s.models[size_t(ll ? 0 : j)];
      const double ps = bm.eval(s.min_eccentricity(level, cx, cy));
      if (ps <= 0.0) continue;
      const int jband = ll ? 0 : j;
      if (config.mode == DiscardMode::spatial_only) {
        for (int l = 0; l <= s.L; ++l) {
          r.per_band[band_row_index(s, jband, l)].retained +=
              s.tsize[size_t(l)];
          r.retained += s.tsize[size_t(l)];
        }
      } else {
        for (long long it = 0; it < s.T; ++it) {
          int l;
          if (it == 0) {
            l = 0;  // temporal DC, always kept
          } else {
            const int k = std::bit_width(static_cast<unsigned long long>(it));
            l = s.L - k + 1;
            if (s.ft_low[size_t(l)] > ps) continue;
          }
          r.per_band[band_row_index(s, jband, l)].retained += 1;
          r.retained += 1;
        }
      }
    }
  }
  return r;
}

}  // namespace detail

std::vector<BandDescriptor> band_layout(const AnalysisConfig& config) {
  return layout_from_scheme(make_scheme(config, CffParameters::full()));
}

GainReport retained_count(const AnalysisConfig& config,
                          const CffParameters& model) {
  if (config.counting == CountingMethod::enumerated)
    return detail::count_enumerated(config, model);
  GainReport s, st;
  detail::count_analytic(config, model, &s, &st);
  return config.mode == DiscardMode::spatial_only ? s : st;
}

std::vector<SweepRow> gain_sweep(const AnalysisConfig& base,
                                 const std::vector<double>& fov_h_list,
                                 const CffParameters& model) {
  std::vector<SweepRow> rows;
  rows.reserve(fov_h_list.size());
  for (double f : fov_h_list) {
    AnalysisConfig c = base;
    c.fov_h = f;
    c.fov_v = f * 135.0 / 165.0;
    rows.push_back({c, retained_count(c, model)});
  }
  return rows;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string gain_sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "fov_h_deg,fov_v_deg,ppd,framerate_hz,mode,total_coeffs,"
      "retained_coeffs,gain\n";
  for (const auto& r : rows) {
    out += num(r.config.fov_h) + "," + num(r.config.fov_v) + "," +
           num(r.config.ppd) + "," + num(r.config.framerate) + "," +
           to_string(r.report.mode) + "," + std::to_string(r.report.total) +
           "," + std::to_string(r.report.retained) + "," +
           num(r.report.gain()) + "\n";
  }
  return out;
}

namespace {

long long next_pow2(long long n) {
  long long p = 1;
  while (p < n) p *= 2;
  return p;
}

}  // namespace

Video filter_video(const Video& video, const AnalysisConfig& config,
                   const CffParameters& model) {
  if (video.width <= 0 || video.height <= 0 || video.frames <= 0)
    throw std::invalid_argument("empty video");
  if (video.data.size() !=
      size_t(video.width) * size_t(video.height) * size_t(video.frames))
    throw std::invalid_argument("video buffer does not match its shape");
  if (!(config.ppd > 0.0)) throw std::domain_error("ppd must be > 0");
  model.validate();

  const long long PW = next_pow2(video.width);
  const long long PH = next_pow2(video.height);
  const long long PT = next_pow2(video.frames);
  const long long px0 = (PW - video.width) / 2;
  const long long py0 = (PH - video.height) / 2;
  const long long pt0 = (PT - video.frames) / 2;

  Video padded{int(PW), int(PH), int(PT)};
  for (long long t = 0; t < PT; ++t) {
    const long long st = std::clamp(t - pt0, 0LL, (long long)video.frames - 1);
    for (long long y = 0; y < PH; ++y) {
      const long long sy = std::clamp(y - py0, 0LL, (long long)video.height - 1);
      for (long long x = 0; x < PW; ++x) {
        const long long sx = std::clamp(x - px0, 0LL, (long long)video.width - 1);
        padded.at(int(x), int(y), int(t)) = video.at(int(sx), int(sy), int(st));
      }
    }
  }

  Video coeffs = haar_forward(padded);

  // Discard geometry mirrors the counting scheme on the padded cube; the
  // angular origin stays at the center of the original frame, so the gaze is
  // re-expressed relative to the padded center.
  const CountingScheme s = make_scheme_raw(
      PW, PH, int(PT), config.ppd, config.framerate,
      config.gaze_x + (px0 + video.width / 2.0 - PW / 2.0) / config.ppd,
      config.gaze_y + (py0 + video.height / 2.0 - PH / 2.0) / config.ppd,
      model);

  const long long plane = PW * PH;
  for (long long iy = 0; iy < PH; ++iy) {
    for (long long ix = 0; ix < PW; ++ix) {
      int j = 0;
      long long cx = ix, cy = iy;
      bool ll = true;
      while (j < s.J) {
        const LevelDims& d = s.dims[size_t(j + 1)];
        ++j;
        if (cx < d.cw && cy < d.ch) continue;
        ll = false;
        if (cx >= d.cw) cx -= d.cw;
        if (cy >= d.ch) cy -= d.ch;
        break;
      }
      const BandModel& bm = s.models[size_t(ll ? 0 : j)];
      const double ps = bm.eval(s.min_eccentricity(j, cx, cy));
      double* column = coeffs.data.data() + iy * PW + ix;
      if (ps <= 0.0) {
        for (long long it = 0; it < PT; ++it) column[it * plane] = 0.0;
        continue;
      }
      if (config.mode == DiscardMode::spatial_only) continue;
      for (long long it = 1; it < PT; ++it) {
        const int k = std::bit_width(static_cast<unsigned long long>(it));
        const int l = s.L - k + 1;
        if (s.ft_low[size_t(l)] > ps) column[it * plane] = 0.0;
      }
    }
  }

  Video restored = haar_inverse(coeffs);
  Video out(video.width, video.height, video.frames);
  for (int t = 0; t < video.frames; ++t)
    for (int y = 0; y < video.height; ++y)
      for (int x = 0; x < video.width; ++x)
        out.at(x, y, t) =
            restored.at(int(x + px0), int(y + py0), int(t + pt0));
  return out;
}

void write_raw_video(const Video& video, const std::string& path,
                     double framerate) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (double v : video.data) {
    const long q = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
    out.put(static_cast<char>(q));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
  json sidecar;
  sidecar["width"] = video.width;
  sidecar["height"] = video.height;
  sidecar["frames"] = video.frames;
  sidecar["framerate"] = framerate;
  std::ofstream side(path + ".json", std::ios::binary);
  if (!side) throw std::runtime_error("cannot open for writing: " + path + ".json");
  side << sidecar.dump(2) << "\n";
}

Video load_raw_video(const std::string& path, double* framerate) {
  std::ifstream side(path + ".json", std::ios::binary);
  if (!side) throw std::runtime_error("cannot open sidecar: " + path + ".json");
  json sidecar;
  try {
    side >> sidecar;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("bad video sidecar: ") + e.what());
  }
  Video v(sidecar.at("width").get<int>(), sidecar.at("height").get<int>(),
          sidecar.at("frames").get<int>());
  if (framerate) *framerate = sidecar.at("framerate").get<double>();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<char> bytes(v.data.size());
  in.read(bytes.data(), std::streamsize(bytes.size()));
  if (in.gcount() != std::streamsize(bytes.size()))
    throw std::invalid_argument("video file shorter than sidecar shape");
  for (size_t i = 0; i < bytes.size(); ++i)
    v.data[i] = static_cast<unsigned char>(bytes[i]) / 255.0;
  return v;
}

}  // namespace cff
