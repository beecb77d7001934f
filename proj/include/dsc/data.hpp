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

// Datasets: text rasterization, procedural corpora and image ingestion.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsc/sample.hpp"

namespace dsc {

struct Corpus {
  std::vector<Sample> samples;
  std::vector<bool> is_test;  // parallel to samples
  std::map<std::string, std::size_t> class_counts;
  // Held-out probe that belongs to neither split (the toy corpus's ambiguous
  // handwritten glyph).
  std::optional<Sample> probe;

  std::vector<std::size_t> train_indices() const;
  std::vector<std::size_t> test_indices() const;
  std::vector<Sample> select(const std::vector<std::size_t>& indices) const;
  std::vector<Sample> train_samples() const { return select(train_indices()); }
  std::vector<Sample> test_samples() const { return select(test_indices()); }

  // Throws PreconditionError if a sample breaks the range/shape contract, the
  // split is malformed or class_counts disagree with the labels.
  void validate() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Recounts labels and assigns a label-stratified split: within each class,
// every `test_every`-th sample (1-based) goes to test, except that a class
// with a single sample stays in train.
void assign_split(Corpus& corpus, std::size_t test_every = 5);

// ---- text ---------------------------------------------------------------

inline constexpr std::size_t kGlyphAdvance = 6;   // px per character
inline constexpr std::size_t kTextLeftMargin = 1;
inline constexpr std::size_t kMaxTextLength = (128 - kTextLeftMargin) / kGlyphAdvance;

// Rasterizes `name` into a [1, 16, 128] tensor with the embedded 5x8 font
// drawn at 1x horizontal, 2x vertical scale: left-aligned, vertically
// centered, ink 1 on background 0. Throws RenderError for characters outside
// printable ASCII or names longer than kMaxTextLength.
Tensor render_text(const std::string& name);

// ---- toy B / 13 corpus ---------------------------------------------------

inline constexpr const char* kToyLabelB = "B";
inline constexpr const char* kToyLabel13 = "13";
inline constexpr const char* kToyProbeLabel = "ambiguous";

// Handwritten-style glyph on a 64x64 canvas, replicated to three channels.
// `morph` slides the shape from B (0) to 13 (1): the bowls detach from the
// stem, the middle bar retracts and the "1" grows a flag.
struct GlyphStyle {
  double morph = 0.0;
  double scale = 1.0;
  double shift_x = 0.0;
  double shift_y = 0.0;
  double slant = 0.0;
  double thickness = 4.0;
};
Tensor draw_toy_glyph(const GlyphStyle& style);

// 50 handwritten "B" and 50 handwritten "13" paired with printed renders of
// their labels, a 40/10 per-class train/test split, and an ambiguous probe
// whose raw-pixel distance ratio to the B and 13 centroids lies in
// (0.9, 1.1) on the B side.
Corpus generate_toy_corpus(std::uint64_t seed);

// Distance ratio |probe - mean(B)| / |probe - mean(13)| over train images.
double toy_probe_ratio(const Corpus& toy);

// ---- synthetic faces -------------------------------------------------------

// Display name used for class `index` (LFW-style names, then "Person N").
std::string synthetic_face_name(std::size_t index);

// Procedural "identicon" faces: every class draws its own geometry and
// palette from the seed; samples add small pose, lighting and noise jitter.
// Class 0 gets n_per_class * overrepresented samples. Throws
// PreconditionError if n_classes < 2.
Corpus generate_synthetic_faces(std::size_t n_classes, std::size_t n_per_class, std::size_t overrepresented,
                                std::uint64_t seed);

// ---- image files ----------------------------------------------------------

// Decodes an 8-bit gray or RGB(A) PNG into [C, H, W] with values in [0, 1]
// (C = 1 for gray, 3 otherwise). Throws IngestionError naming the path.
Tensor load_png(const std::filesystem::path& path);
// Writes a [1|3, H, W] tensor, clamping to [0, 1] and rounding to 8 bits.
void save_png(const std::filesystem::path& path, const Tensor& image);

// [C, H, W] -> [3, 64, 64]: gray is replicated, non-square images are center
// cropped, other sizes resampled bilinearly. 64x64 RGB passes through
// untouched.
Tensor to_face_image(const Tensor& image);

// Reads `manifest` (lines "relative/path.png<TAB>Label Name", paths relative
// to `directory`) and renders each label as the text modality.
Corpus load_image_corpus(const std::filesystem::path& directory, const std::filesystem::path& manifest);

// Binary corpus cache (same container conventions as checkpoints).
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace dsc
