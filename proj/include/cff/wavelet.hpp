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

#ifndef CFF_WAVELET_HPP
#define CFF_WAVELET_HPP

#include <vector>

#include "cff/stimulus.hpp"  // Image

namespace cff {

// Frame-major grayscale video cube: data[t * w * h + y * w + x].
struct Video {
  int width = 0;
  int height = 0;
  int frames = 0;
  std::vector<double> data;

  Video() = default;
  Video(int w, int h, int t)
      : width(w), height(h), frames(t), data(size_t(w) * h * t, 0.0) {}
  double& at(int x, int y, int t) {
    return data[(size_t(t) * height + y) * width + x];
  }
  double at(int x, int y, int t) const {
    return data[(size_t(t) * height + y) * width + x];
  }
};

bool is_power_of_two(long long n);

// Orthonormal two-tap Haar pair: approx = (a+b)/sqrt2, detail = (a-b)/sqrt2.
// All transforms below are critically sampled and perfectly reconstructing.
//
// 1D layout after the full log2(N) levels:
//   [ a_J | d_J | d_{J-1} (2) | ... | d_1 (N/2) ]
// where d_1 is the finest detail plane. Length must be a power of two.
std::vector<double> haar_forward(const std::vector<double>& signal);
std::vector<double> haar_inverse(const std::vector<double>& coeffs);

// 2D multilevel square decomposition: each level splits the running
// approximation into LL/HL/LH/HH and recurses on LL, for
// log2(min(W, H)) levels. Both axes must be powers of two.
Image haar_forward(const Image& img);
Image haar_inverse(const Image& coeffs);

// 3D decomposition used for video: the 2D spatial transform above applied to
// every frame, then the full 1D temporal transform applied to every spatial
// coefficient across frames. All three axes must be powers of two.
Video haar_forward(const Video& video);
Video haar_inverse(const Video& coeffs);

// Number of levels the 1D transform applies to a signal of length n.
int haar_levels(long long n);

}  // namespace cff

#endif  // CFF_WAVELET_HPP
