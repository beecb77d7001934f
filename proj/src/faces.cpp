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

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "dsc/data.hpp"
#include "dsc/errors.hpp"

namespace dsc {
namespace {

constexpr std::array<const char*, 12> kNames = {
    "Halle Berry",  "George W Bush",   "Colin Powell", "Gerhard Schroeder",
    "Tony Blair",   "Donald Rumsfeld", "Ariel Sharon", "Hugo Chavez",
    "Jean Chretien", "John Ashcroft",  "Serena Williams", "Junichiro Koizumi",
};

using Rgb = std::array<double, 3>;

struct Ellipse {
  double cx, cy, rx, ry;
  // Approximate signed distance in px, negative inside.
  double sdf(double x, double y) const {
    const double dx = (x - cx) / rx;
    const double dy = (y - cy) / ry;
    return (std::sqrt(dx * dx + dy * dy) - 1.0) * std::min(rx, ry);
  }
};

struct FaceStyle {
  Rgb background, skin, hair, eyes, mouth;
  Ellipse face;
  double hair_line;     // y above which the face ellipse is hair
  double eye_y, eye_dx, eye_r;
  double mouth_y, mouth_w, mouth_h;
  bool glasses;
  Rgb glasses_color;
};

Rgb random_color(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

FaceStyle class_style(std::uint64_t seed, std::size_t cls) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + cls * 0xBF58476D1CE4E5B9ULL + 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto in = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  FaceStyle s;
  s.background = random_color(rng, 0.0, 1.0);
  const double tone = in(0.25, 0.95);
  s.skin = {tone, tone * in(0.7, 0.85), tone * in(0.5, 0.7)};
  s.hair = random_color(rng, 0.0, 0.8);
  s.eyes = random_color(rng, 0.0, 0.4);
  s.mouth = {in(0.5, 0.9), in(0.0, 0.3), in(0.1, 0.4)};
  s.face = {32.0, in(32.0, 36.0), in(15.0, 22.0), in(19.0, 26.0)};
  s.hair_line = s.face.cy - s.face.ry * in(0.3, 0.8);
  s.eye_y = s.face.cy - in(2.0, 7.0);
  s.eye_dx = in(5.0, 9.0);
  s.eye_r = in(1.5, 3.5);
  s.mouth_y = s.face.cy + in(8.0, 13.0);
  s.mouth_w = in(4.0, 9.0);
  s.mouth_h = in(1.0, 2.5);
  s.glasses = u(rng) < 0.4;
  s.glasses_color = random_color(rng, 0.0, 1.0);
  return s;
}

double coverage(double sdf) { return std::clamp(0.5 - sdf, 0.0, 1.0); }

void blend(Rgb& px, const Rgb& color, double alpha) {
  for (int c = 0; c < 3; ++c) px[c] = px[c] * (1.0 - alpha) + color[c] * alpha;
}

Tensor draw_face(const FaceStyle& s, double shift_x, double shift_y, double gain, std::mt19937_64& rng,
                 double noise_sigma) {
  std::normal_distribution<double> noise(0.0, noise_sigma);
  Tensor img(kImageShape);
  Ellipse face = s.face;
  face.cx += shift_x;
  face.cy += shift_y;
  const double hair_line = s.hair_line + shift_y;
  const Ellipse eye_l{face.cx - s.eye_dx, s.eye_y + shift_y, s.eye_r, s.eye_r * 0.8};
  const Ellipse eye_r{face.cx + s.eye_dx, s.eye_y + shift_y, s.eye_r, s.eye_r * 0.8};
  const Ellipse mouth{face.cx, s.mouth_y + shift_y, s.mouth_w, s.mouth_h};
  const Ellipse lens_l{eye_l.cx, eye_l.cy, s.eye_r + 2.5, s.eye_r + 2.0};
  const Ellipse lens_r{eye_r.cx, eye_r.cy, s.eye_r + 2.5, s.eye_r + 2.0};
  for (std::size_t y = 0; y < 64; ++y) {
    for (std::size_t x = 0; x < 64; ++x) {
      const double px = x + 0.5;
      const double py = y + 0.5;
      Rgb c = s.background;
      const double inside = coverage(face.sdf(px, py));
      if (inside > 0.0) {
        blend(c, py < hair_line ? s.hair : s.skin, inside);
        if (s.glasses) {
          blend(c, s.glasses_color, coverage(std::abs(lens_l.sdf(px, py)) - 0.7));
          blend(c, s.glasses_color, coverage(std::abs(lens_r.sdf(px, py)) - 0.7));
        }
        blend(c, s.eyes, coverage(eye_l.sdf(px, py)));
        blend(c, s.eyes, coverage(eye_r.sdf(px, py)));
        blend(c, s.mouth, coverage(mouth.sdf(px, py)));
      }
      for (std::size_t ch = 0; ch < 3; ++ch) {
        img.at(ch, y, x) = std::clamp(c[ch] * gain + noise(rng), 0.0, 1.0);
      }
    }
  }
  return img;
}

}  // namespace

std::string synthetic_face_name(std::size_t index) {
  if (index < kNames.size()) return kNames[index];
  return "Person " + std::to_string(index + 1);
}

Corpus generate_synthetic_faces(std::size_t n_classes, std::size_t n_per_class, std::size_t overrepresented,
                                std::uint64_t seed) {
  if (n_classes < 2) throw PreconditionError("generate_synthetic_faces needs at least two classes");
  if (n_per_class < 1 || overrepresented < 1) {
    throw PreconditionError("generate_synthetic_faces needs positive class sizes");
  }
  Corpus corpus;
  std::mt19937_64 jitter(seed ^ 0xD1B54A32D192ED03ULL);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t cls = 0; cls < n_classes; ++cls) {
    const FaceStyle style = class_style(seed, cls);
    const std::string name = synthetic_face_name(cls);
    const Tensor text = render_text(name);
    const std::size_t count = cls == 0 ? n_per_class * overrepresented : n_per_class;
    for (std::size_t n = 0; n < count; ++n) {
      const double sx = -2.0 + 4.0 * u(jitter);
      const double sy = -2.0 + 4.0 * u(jitter);
      const double gain = 0.9 + 0.2 * u(jitter);
      corpus.samples.push_back({draw_face(style, sx, sy, gain, jitter, 0.03), text, name});
    }
  }
  assign_split(corpus);
  return corpus;
}

}  // namespace dsc
