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

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vocalis::dsp {

/// Discrete Fourier transform of arbitrary length. Power-of-two sizes use an
/// iterative radix-2 kernel; other sizes go through Bluestein's chirp-z
/// algorithm on top of it. Plans are immutable and safe to share.
class Fft {
 public:
  explicit Fft(std::size_t n);

  std::size_t size() const { return n_; }

  /// Forward transform X[k] = sum_t x[t] exp(-2 pi i k t / n).
  std::vector<std::complex<double>> forward(std::span<const double> x) const;

 private:
  void radix2(std::vector<std::complex<double>>& a, bool inverse) const;

  std::size_t n_;
  std::size_t m_;  // radix-2 length (n_ itself, or the Bluestein padding)
  bool bluestein_;
  std::vector<std::complex<double>> twiddle_;  // length m_/2
  std::vector<std::complex<double>> chirp_;    // length n_
  std::vector<std::complex<double>> chirp_fft_;  // length m_
};

/// |X[k]|^2 / n for k = 0..n/2.
std::vector<double> power_spectrum(const Fft& fft, std::span<const double> frame);

/// Symmetric Hamming window, 0.54 - 0.46 cos(2 pi t / (n - 1)).
std::vector<double> hamming(std::size_t n);

/// Number of complete frames: floor((n - frame_len) / hop) + 1, or 0.
std::size_t frame_count(std::size_t n, std::size_t frame_len, std::size_t hop);

}  // namespace vocalis::dsp
