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
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "dsc/data.hpp"
#include "dsc/errors.hpp"

namespace dsc {
namespace {

constexpr std::size_t kCanvas = 64;
constexpr double kGlyphUnit = 40.0;  // px per glyph height at scale 1
constexpr std::size_t kPerClass = 50;

struct Point {
  double x;
  double y;
};

void append_arc(std::vector<Point>& path, Point center, double radius, double from, double to) {
  constexpr int kSteps = 12;
  for (int s = 1; s <= kSteps; ++s) {
    const double t = from + (to - from) * s / kSteps;
    path.push_back({center.x + radius * std::cos(t), center.y + radius * std::sin(t)});
  }
}

// Polylines of the glyph in unit coordinates (y down, glyph height 1).
std::vector<std::vector<Point>> glyph_strokes(double m) {
  const double gap = 0.32 * m;
  const double half_pi = std::numbers::pi / 2;
  std::vector<std::vector<Point>> strokes;
  strokes.push_back({{0.0, 0.0}, {0.0, 1.0}});
  if (m > 0.0) strokes.push_back({{-0.15 * m, 0.15 * m}, {0.0, 0.0}});

  std::vector<Point> upper{{gap, 0.0}, {gap + 0.28, 0.0}};
  append_arc(upper, {gap + 0.28, 0.25}, 0.25, -half_pi, half_pi);
  upper.push_back({gap + 0.12 * m, 0.5});
  strokes.push_back(std::move(upper));

  std::vector<Point> lower{{gap + 0.12 * m, 0.5}, {gap + 0.32, 0.5}};
  append_arc(lower, {gap + 0.32, 0.75}, 0.25, -half_pi, half_pi);
  lower.push_back({gap, 1.0});
  strokes.push_back(std::move(lower));
  return strokes;
}

double segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = a.x + t * dx - p.x;
  const double ey = a.y + t * dy - p.y;
  return std::sqrt(ex * ex + ey * ey);
}

double distance(const Tensor& a, const Tensor& b) { return l2_norm(subtract(a, b)); }

Tensor mean_of(const std::vector<const Tensor*>& items) {
  Tensor m(items.front()->shape());
  for (const Tensor* t : items) axpy(1.0, *t, m);
  return scale(m, 1.0 / static_cast<double>(items.size()));
}

}  // namespace

Tensor draw_toy_glyph(const GlyphStyle& style) {
  const double unit = kGlyphUnit * style.scale;
  const double m = std::clamp(style.morph, 0.0, 1.0);
  const double left = -0.15 * m;
  const double right = 0.32 * m + 0.57;
  const double u_center = 0.5 * (left + right);
  const double cx = kCanvas / 2.0 + style.shift_x;
  const double cy = kCanvas / 2.0 + style.shift_y;

  std::vector<std::pair<Point, Point>> segments;
  for (const auto& stroke : glyph_strokes(m)) {
    std::vector<Point> px;
    for (const Point& p : stroke) {
      const double v = p.y - 0.5;
      px.push_back({cx + unit * (p.x - u_center) + style.slant * unit * -v, cy + unit * v});
    }
    for (std::size_t i = 1; i < px.size(); ++i) segments.emplace_back(px[i - 1], px[i]);
  }

  Tensor img(kImageShape);
  const double half = style.thickness / 2.0;
  for (std::size_t y = 0; y < kCanvas; ++y) {
    for (std::size_t x = 0; x < kCanvas; ++x) {
      const Point p{x + 0.5, y + 0.5};
      double ink = 0.0;
      for (const auto& [a, b] : segments) {
        ink = std::max(ink, std::clamp(half + 0.5 - segment_distance(p, a, b), 0.0, 1.0));
        if (ink == 1.0) break;
      }
      for (std::size_t c = 0; c < 3; ++c) img.at(c, y, x) = ink;
    }
  }
  return img;
}

double toy_probe_ratio(const Corpus& toy) {
  if (!toy.probe) throw PreconditionError("toy corpus has no probe");
  std::vector<const Tensor*> b, t13;
  for (std::size_t i : toy.train_indices()) {
    (toy.samples[i].label == kToyLabelB ? b : t13).push_back(&toy.samples[i].image);
  }
  if (b.empty() || t13.empty()) throw PreconditionError("toy corpus is missing a class");
  return distance(toy.probe->image, mean_of(b)) / distance(toy.probe->image, mean_of(t13));
}

Corpus generate_toy_corpus(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  Corpus corpus;
  const Tensor text_b = render_text(kToyLabelB);
  const Tensor text_13 = render_text(kToyLabel13);
  for (int cls = 0; cls < 2; ++cls) {
    for (std::size_t n = 0; n < kPerClass; ++n) {
      GlyphStyle style;
      style.morph = cls == 0 ? uniform(0.0, 0.25) : uniform(0.75, 1.0);
      style.scale = uniform(0.9, 1.1);
      style.shift_x = uniform(-3.0, 3.0);
      style.shift_y = uniform(-3.0, 3.0);
      style.slant = uniform(-0.12, 0.12);
      style.thickness = uniform(3.0, 5.0);
      corpus.samples.push_back(
          {draw_toy_glyph(style), cls == 0 ? text_b : text_13, cls == 0 ? kToyLabelB : kToyLabel13});
    }
  }
  assign_split(corpus);

  // The probe is a neutral glyph whose morph is tuned so it sits just on the
  // B side of the raw-pixel decision boundary.
  constexpr double kTargetRatio = 0.95;
  double best_morph = 0.5;
  double best_gap = 1e9;
  for (int step = 30; step <= 70; ++step) {
    GlyphStyle style;
    style.morph = step / 100.0;
    corpus.probe = Sample{draw_toy_glyph(style), Tensor(kTextShape), kToyProbeLabel};
    const double gap = std::abs(toy_probe_ratio(corpus) - kTargetRatio);
    if (gap < best_gap) {
      best_gap = gap;
      best_morph = style.morph;
    }
  }
  GlyphStyle probe_style;
  probe_style.morph = best_morph;
  corpus.probe = Sample{draw_toy_glyph(probe_style), Tensor(kTextShape), kToyProbeLabel};
  return corpus;
}

}  // namespace dsc
