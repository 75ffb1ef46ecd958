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

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>

#include "vocalis/error.hpp"

namespace vocalis::binio {

static_assert(std::endian::native == std::endian::little,
              "binary containers are written in host order, which must be little-endian");

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw Error(ErrorCode::UnwritableOutput, path.string());
  }

  void magic(std::string_view m) { out_.write(m.data(), static_cast<std::streamsize>(m.size())); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void i32(std::int32_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void f64s(std::span<const double> v) { raw(v.data(), v.size_bytes()); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }

  void finish() {
    out_.flush();
    if (!out_) throw Error(ErrorCode::UnwritableOutput, path_.string());
  }

 private:
  void raw(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw Error(ErrorCode::FileNotFound, path.string());
  }

  void expect_magic(std::string_view m) {
    std::string got(m.size(), '\0');
    in_.read(got.data(), static_cast<std::streamsize>(m.size()));
    if (!in_ || got != m) throw Error(ErrorCode::BadFormat, path_.string() + ": bad magic");
  }
  std::uint32_t u32() { return pod<std::uint32_t>(); }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  std::int32_t i32() { return pod<std::int32_t>(); }
  double f64() { return pod<double>(); }
  void f64s(std::span<double> v) { raw(v.data(), v.size_bytes()); }
  std::string str() {
    const auto n = u32();
    if (n > (1u << 20)) throw Error(ErrorCode::BadFormat, path_.string() + ": string too long");
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  template <typename T>
  T pod() {
    T v;
    raw(&v, sizeof v);
    return v;
  }
  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw Error(ErrorCode::TruncatedData, path_.string());
  }

  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace vocalis::binio
