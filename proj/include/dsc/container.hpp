// Copyright 2026 The DSC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian binary encoding shared by checkpoints and corpus caches.
//
//   u8 / u32 / u64   fixed-width little-endian integers
//   f64              IEEE-754 binary64, little-endian bit pattern
//   string           u64 byte length, then raw bytes
//   tensor           u32 rank, rank x u64 extents, then product(extents) f64

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "dsc/tensor.hpp"

namespace dsc {

class BinaryWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void raw(std::string_view s) { bytes_.append(s); }
  void string(std::string_view s);
  void tensor(const Tensor& t);

  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

// Every read checks bounds and throws FormatError on truncation.
class BinaryReader {
 public:
  explicit BinaryReader(std::string bytes) : bytes_(std::move(bytes)) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string raw(std::size_t n);
  std::string string();
  Tensor tensor();

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const;

  std::string bytes_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomically(const std::filesystem::path& path, const std::string& bytes);

}  // namespace dsc
