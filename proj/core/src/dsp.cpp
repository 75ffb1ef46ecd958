// Copyright 2026 The Vocalis Authors
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

#include "vocalis/dsp.hpp"

#include <cmath>
#include <numbers>

#include "vocalis/error.hpp"

namespace vocalis::dsp {

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "FFT length must be positive");
  bluestein_ = (n & (n - 1)) != 0;
  m_ = bluestein_ ? next_pow2(2 * n - 1) : n;
  twiddle_.resize(m_ / 2);
  for (std::size_t k = 0; k < m_ / 2; ++k)
    twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                      static_cast<double>(m_));
  if (!bluestein_) return;

  // chirp[t] = exp(-i pi t^2 / n); t^2 reduced mod 2n to keep the angle small
  chirp_.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto sq = static_cast<unsigned long long>(t) * t % (2 * n);
    chirp_[t] = std::polar(1.0, -std::numbers::pi * static_cast<double>(sq) / static_cast<double>(n));
  }
  chirp_fft_.assign(m_, {0.0, 0.0});
  chirp_fft_[0] = std::conj(chirp_[0]);
  for (std::size_t t = 1; t < n; ++t) {
    chirp_fft_[t] = std::conj(chirp_[t]);
    chirp_fft_[m_ - t] = std::conj(chirp_[t]);
  }
  radix2(chirp_fft_, false);
}

void Fft::radix2(std::vector<std::complex<double>>& a, bool inverse) const {
  const std::size_t m = a.size();
  for (std::size_t i = 1, j = 0; i < m; ++i) {
    std::size_t bit = m >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= m; len <<= 1) {
    const std::size_t step = m / len;
    for (std::size_t i = 0; i < m; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        auto w = twiddle_[k * step];
        if (inverse) w = std::conj(w);
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

std::vector<std::complex<double>> Fft::forward(std::span<const double> x) const {
  if (x.size() != n_) throw Error(ErrorCode::ShapeMismatch, "FFT input length");
  if (!bluestein_) {
    std::vector<std::complex<double>> a(x.begin(), x.end());
    radix2(a, false);
    return a;
  }
  std::vector<std::complex<double>> a(m_, {0.0, 0.0});
  for (std::size_t t = 0; t < n_; ++t) a[t] = x[t] * chirp_[t];
  radix2(a, false);
  for (std::size_t k = 0; k < m_; ++k) a[k] *= chirp_fft_[k];
  radix2(a, true);
  const double scale = 1.0 / static_cast<double>(m_);
  std::vector<std::complex<double>> out(n_);
  for (std::size_t k = 0; k < n_; ++k) out[k] = a[k] * scale * chirp_[k];
  return out;
}

std::vector<double> power_spectrum(const Fft& fft, std::span<const double> frame) {
  const auto spec = fft.forward(frame);
  const std::size_t bins = fft.size() / 2 + 1;
  std::vector<double> power(bins);
  const double inv_n = 1.0 / static_cast<double>(fft.size());
  for (std::size_t k = 0; k < bins; ++k) power[k] = std::norm(spec[k]) * inv_n;
  return power;
}

std::vector<double> hamming(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n == 1) return w;
  for (std::size_t t = 0; t < n; ++t)
    w[t] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) /
                                  static_cast<double>(n - 1));
  return w;
}

std::size_t frame_count(std::size_t n, std::size_t frame_len, std::size_t hop) {
  if (frame_len == 0 || hop == 0 || n < frame_len) return 0;
  return (n - frame_len) / hop + 1;
}

}  // namespace vocalis::dsp
