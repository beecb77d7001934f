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

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dsc/container.hpp"
#include "dsc/data.hpp"
#include "dsc/errors.hpp"

namespace dsc {
namespace {

constexpr char kCorpusMagic[8] = {'D', 'S', 'C', 'C', 'O', 'R', 'P', 'S'};
constexpr std::uint32_t kCorpusVersion = 1;

void check_sample(const Sample& s, const std::string& where) {
  if (s.image.shape() != kImageShape || s.text.shape() != kTextShape) {
    throw PreconditionError(where + ": image " + shape_to_string(s.image.shape()) + " / text " +
                            shape_to_string(s.text.shape()) + " do not match the sample shapes");
  }
  for (const Tensor* t : {&s.image, &s.text}) {
    for (double v : t->values()) {
      if (!(v >= 0.0 && v <= 1.0)) throw PreconditionError(where + ": pixel value outside [0, 1]");
    }
  }
}

void write_sample(BinaryWriter& w, const Sample& s) {
  w.string(s.label);
  w.tensor(s.image);
  w.tensor(s.text);
}

Sample read_sample(BinaryReader& r) {
  Sample s;
  s.label = r.string();
  s.image = r.tensor();
  s.text = r.tensor();
  return s;
}

}  // namespace

std::vector<std::size_t> Corpus::train_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!is_test.at(i)) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Corpus::test_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (is_test.at(i)) out.push_back(i);
  }
  return out;
}

std::vector<Sample> Corpus::select(const std::vector<std::size_t>& indices) const {
  std::vector<Sample> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(samples.at(i));
  return out;
}

void Corpus::validate() const {
  if (is_test.size() != samples.size()) throw PreconditionError("corpus split does not cover every sample");
  std::map<std::string, std::size_t> counts;
  std::map<std::string, bool> in_train;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    check_sample(samples[i], "sample " + std::to_string(i));
    ++counts[samples[i].label];
    if (!is_test[i]) in_train[samples[i].label] = true;
  }
  if (counts != class_counts) throw PreconditionError("corpus class counts disagree with labels");
  for (const auto& [label, n] : counts) {
    if (!in_train[label]) throw PreconditionError("class '" + label + "' has no training sample");
  }
  if (probe) check_sample(*probe, "probe");
}

void assign_split(Corpus& corpus, std::size_t test_every) {
  corpus.class_counts.clear();
  for (const auto& s : corpus.samples) ++corpus.class_counts[s.label];
  corpus.is_test.assign(corpus.samples.size(), false);
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    const auto& label = corpus.samples[i].label;
    const std::size_t k = ++seen[label];
    corpus.is_test[i] = test_every > 0 && corpus.class_counts[label] > 1 && k % test_every == 0;
  }
}

Tensor load_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IngestionError("cannot decode '" + path.string() + "': " + image.message);
  }
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const std::size_t channels = gray ? 1 : 3;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IngestionError("cannot decode '" + path.string() + "': " + msg);
  }
  const std::size_t h = image.height;
  const std::size_t w = image.width;
  Tensor out({channels, h, w});
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < channels; ++c) out.at(c, y, x) = buffer[(y * w + x) * channels + c] / 255.0;
    }
  }
  return out;
}

void save_png(const std::filesystem::path& path, const Tensor& img) {
  if (img.rank() != 3 || (img.dim(0) != 1 && img.dim(0) != 3)) {
    throw GeometryError("save_png expects [1|3, H, W], got " + shape_to_string(img.shape()));
  }
  const std::size_t channels = img.dim(0);
  const std::size_t h = img.dim(1);
  const std::size_t w = img.dim(2);
  std::vector<png_byte> buffer(channels * h * w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        const double v = std::clamp(img.at(c, y, x), 0.0, 1.0);
        buffer[(y * w + x) * channels + c] = static_cast<png_byte>(std::lround(v * 255.0));
      }
    }
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw IngestionError("cannot write '" + path.string() + "': " + image.message);
  }
}

Tensor to_face_image(const Tensor& image) {
  if (image.rank() != 3 || (image.dim(0) != 1 && image.dim(0) != 3)) {
    throw GeometryError("image must be [1|3, H, W], got " + shape_to_string(image.shape()));
  }
  const std::size_t target = kImageShape[1];
  if (image.shape() == kImageShape) return image;

  const std::size_t h = image.dim(1);
  const std::size_t w = image.dim(2);
  const std::size_t side = std::min(h, w);
  const std::size_t y0 = (h - side) / 2;
  const std::size_t x0 = (w - side) / 2;
  const double step = static_cast<double>(side) / target;
  Tensor out(kImageShape);
  for (std::size_t c = 0; c < 3; ++c) {
    const std::size_t src_c = image.dim(0) == 1 ? 0 : c;
    for (std::size_t y = 0; y < target; ++y) {
      const double sy = std::clamp((y + 0.5) * step - 0.5, 0.0, side - 1.0);
      const auto iy = static_cast<std::size_t>(sy);
      const std::size_t iy1 = std::min(iy + 1, side - 1);
      const double fy = sy - iy;
      for (std::size_t x = 0; x < target; ++x) {
        const double sx = std::clamp((x + 0.5) * step - 0.5, 0.0, side - 1.0);
        const auto ix = static_cast<std::size_t>(sx);
        const std::size_t ix1 = std::min(ix + 1, side - 1);
        const double fx = sx - ix;
        const double top = image.at(src_c, y0 + iy, x0 + ix) * (1 - fx) + image.at(src_c, y0 + iy, x0 + ix1) * fx;
        const double bot =
            image.at(src_c, y0 + iy1, x0 + ix) * (1 - fx) + image.at(src_c, y0 + iy1, x0 + ix1) * fx;
        out.at(c, y, x) = top * (1 - fy) + bot * fy;
      }
    }
  }
  return out;
}

Corpus load_image_corpus(const std::filesystem::path& directory, const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IngestionError("cannot open manifest '" + manifest.string() + "'");
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw IngestionError(manifest.string() + ":" + std::to_string(line_no) + ": expected 'path<TAB>label'");
    }
    const std::filesystem::path file = directory / line.substr(0, tab);
    const std::string label = line.substr(tab + 1);
    if (!std::filesystem::exists(file)) throw IngestionError("missing image '" + file.string() + "'");
    Sample s;
    s.image = to_face_image(load_png(file));
    try {
      s.text = render_text(label);
    } catch (const RenderError& e) {
      throw IngestionError(manifest.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    s.label = label;
    corpus.samples.push_back(std::move(s));
  }
  assign_split(corpus);
  return corpus;
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  BinaryWriter w;
  w.raw({kCorpusMagic, sizeof kCorpusMagic});
  w.u32(kCorpusVersion);
  w.u64(corpus.samples.size());
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    w.u8(corpus.is_test.at(i) ? 1 : 0);
    write_sample(w, corpus.samples[i]);
  }
  w.u8(corpus.probe ? 1 : 0);
  if (corpus.probe) write_sample(w, *corpus.probe);
  write_file_atomically(path, w.bytes());
}

Corpus load_corpus(const std::filesystem::path& path) {
  BinaryReader r(read_file(path));
  if (r.raw(sizeof kCorpusMagic) != std::string(kCorpusMagic, sizeof kCorpusMagic)) {
    throw FormatError("'" + path.string() + "' is not a corpus file");
  }
  const std::uint32_t version = r.u32();
  if (version != kCorpusVersion) throw FormatError("unsupported corpus version " + std::to_string(version));
  Corpus corpus;
  const std::uint64_t n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) {
    corpus.is_test.push_back(r.u8() != 0);
    corpus.samples.push_back(read_sample(r));
    ++corpus.class_counts[corpus.samples.back().label];
  }
  if (r.u8()) corpus.probe = read_sample(r);
  if (!r.at_end()) throw FormatError("trailing bytes in '" + path.string() + "'");
  corpus.validate();
  return corpus;
}

}  // namespace dsc
