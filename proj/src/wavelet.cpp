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

#include "cff/wavelet.hpp"

#include <cmath>
#include <stdexcept>

namespace cff {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// One analysis step over the first n strided samples (n even): packs the
// running approximation into the front half and details into the back half.
void step_forward(double* data, long long n, long long stride,
                  std::vector<double>& tmp) {
  tmp.resize(size_t(n));
  for (long long k = 0; k < n / 2; ++k) {
    const double a = data[2 * k * stride];
    const double b = data[(2 * k + 1) * stride];
    tmp[size_t(k)] = (a + b) * kInvSqrt2;
    tmp[size_t(n / 2 + k)] = (a - b) * kInvSqrt2;
  }
  for (long long k = 0; k < n; ++k) data[k * stride] = tmp[size_t(k)];
}

void step_inverse(double* data, long long n, long long stride,
                  std::vector<double>& tmp) {
  tmp.resize(size_t(n));
  for (long long k = 0; k < n / 2; ++k) {
    const double a = data[k * stride];
    const double d = data[(n / 2 + k) * stride];
    tmp[size_t(2 * k)] = (a + d) * kInvSqrt2;
    tmp[size_t(2 * k + 1)] = (a - d) * kInvSqrt2;
  }
  for (long long k = 0; k < n; ++k) data[k * stride] = tmp[size_t(k)];
}

void multilevel_forward(double* data, long long n, long long stride,
                        std::vector<double>& tmp) {
  for (long long len = n; len >= 2; len /= 2) step_forward(data, len, stride, tmp);
}

void multilevel_inverse(double* data, long long n, long long stride,
                        std::vector<double>& tmp) {
  for (long long len = 2; len <= n; len *= 2) step_inverse(data, len, stride, tmp);
}

void require_pow2(long long n, const char* what) {
  if (!is_power_of_two(n))
    throw std::invalid_argument(std::string(what) +
                                " length must be a power of two");
}

int spatial_levels(int w, int h) {
  return haar_levels(std::min(w, h));
}

// In-place 2D square transform on one w x h plane with row stride rowstride.
void forward_2d(double* plane, int w, int h, long long rowstride,
                std::vector<double>& tmp) {
  const int levels = spatial_levels(w, h);
  int cw = w, ch = h;
  for (int lvl = 0; lvl < levels; ++lvl) {
    for (int y = 0; y < ch; ++y) step_forward(plane + y * rowstride, cw, 1, tmp);
    for (int x = 0; x < cw; ++x) step_forward(plane + x, ch, rowstride, tmp);
    cw /= 2;
    ch /= 2;
  }
}

void inverse_2d(double* plane, int w, int h, long long rowstride,
                std::vector<double>& tmp) {
  const int levels = spatial_levels(w, h);
  int cw = w >> levels, ch = h >> levels;
  for (int lvl = 0; lvl < levels; ++lvl) {
    cw *= 2;
    ch *= 2;
    for (int x = 0; x < cw; ++x) step_inverse(plane + x, ch, rowstride, tmp);
    for (int y = 0; y < ch; ++y) step_inverse(plane + y * rowstride, cw, 1, tmp);
  }
}

}  // namespace

bool is_power_of_two(long long n) { return n > 0 && (n & (n - 1)) == 0; }

int haar_levels(long long n) {
  require_pow2(n, "signal");
  int levels = 0;
  while (n > 1) {
    n /= 2;
    ++levels;
  }
  return levels;
}

std::vector<double> haar_forward(const std::vector<double>& signal) {
  require_pow2(static_cast<long long>(signal.size()), "signal");
  std::vector<double> out = signal;
  std::vector<double> tmp;
  multilevel_forward(out.data(), static_cast<long long>(out.size()), 1, tmp);
  return out;
}

std::vector<double> haar_inverse(const std::vector<double>& coeffs) {
  require_pow2(static_cast<long long>(coeffs.size()), "signal");
  std::vector<double> out = coeffs;
  std::vector<double> tmp;
  multilevel_inverse(out.data(), static_cast<long long>(out.size()), 1, tmp);
  return out;
}

Image haar_forward(const Image& img) {
  require_pow2(img.width, "image x");
  require_pow2(img.height, "image y");
  Image out = img;
  std::vector<double> tmp;
  forward_2d(out.data.data(), out.width, out.height, out.width, tmp);
  return out;
}

Image haar_inverse(const Image& coeffs) {
  require_pow2(coeffs.width, "image x");
  require_pow2(coeffs.height, "image y");
  Image out = coeffs;
  std::vector<double> tmp;
  inverse_2d(out.data.data(), out.width, out.height, out.width, tmp);
  return out;
}

Video haar_forward(const Video& video) {
  require_pow2(video.width, "video x");
  require_pow2(video.height, "video y");
  require_pow2(video.frames, "video t");
  Video out = video;
  std::vector<double> tmp;
  const long long plane = static_cast<long long>(out.width) * out.height;
  for (int t = 0; t < out.frames; ++t)
    forward_2d(out.data.data() + t * plane, out.width, out.height, out.width,
               tmp);
  for (long long i = 0; i < plane; ++i)
    multilevel_forward(out.data.data() + i, out.frames, plane, tmp);
  return out;
}

Video haar_inverse(const Video& coeffs) {
  require_pow2(coeffs.width, "video x");
  require_pow2(coeffs.height, "video y");
  require_pow2(coeffs.frames, "video t");
  Video out = coeffs;
  std::vector<double> tmp;
  const long long plane = static_cast<long long>(out.width) * out.height;
  for (long long i = 0; i < plane; ++i)
    multilevel_inverse(out.data.data() + i, out.frames, plane, tmp);
  for (int t = 0; t < out.frames; ++t)
    inverse_2d(out.data.data() + t * plane, out.width, out.height, out.width,
               tmp);
  return out;
}

}  // namespace cff
