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

#include <array>
#include <cstdint>

#include "dsc/data.hpp"
#include "dsc/errors.hpp"

namespace dsc {
namespace {

constexpr std::array<std::uint8_t, 95 * 5> kFont = {
#include "font5x8.inc"
};

constexpr std::size_t kGlyphWidth = 5;
constexpr std::size_t kGlyphRows = 8;
constexpr std::size_t kRowScale = 2;

}  // namespace

Tensor render_text(const std::string& name) {
  if (name.size() > kMaxTextLength) {
    throw RenderError("name '" + name + "' is longer than " + std::to_string(kMaxTextLength) + " characters");
  }
  Tensor out(kTextShape);
  const std::size_t height = kTextShape[1];
  const std::size_t top = (height - kGlyphRows * kRowScale) / 2;
  for (std::size_t n = 0; n < name.size(); ++n) {
    const auto ch = static_cast<unsigned char>(name[n]);
    if (ch < 0x20 || ch > 0x7E) {
      throw RenderError("unprintable character code " + std::to_string(ch) + " in name");
    }
    const std::uint8_t* glyph = &kFont[(ch - 0x20) * kGlyphWidth];
    const std::size_t x0 = kTextLeftMargin + n * kGlyphAdvance;
    for (std::size_t col = 0; col < kGlyphWidth; ++col) {
      for (std::size_t row = 0; row < kGlyphRows; ++row) {
        if (!(glyph[col] >> row & 1)) continue;
        for (std::size_t r = 0; r < kRowScale; ++r) out.at(0, top + row * kRowScale + r, x0 + col) = 1.0;
      }
    }
  }
  return out;
}

}  // namespace dsc
