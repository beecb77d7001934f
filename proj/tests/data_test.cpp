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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "dsc/container.hpp"
#include "dsc/data.hpp"
#include "dsc/errors.hpp"
#include "test_util.hpp"

namespace dsc {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("dsc_data_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

TEST(RenderTextTest, ShapeInkAndPlacement) {
  Tensor t = render_text("Ab 13");
  ASSERT_EQ(t.shape(), kTextShape);
  std::size_t top = 16, bottom = 0, left = 128;
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 128; ++x) {
      const double v = t.at(0, y, x);
      ASSERT_TRUE(v == 0.0 || v == 1.0);
      if (v == 1.0) {
        top = std::min(top, y);
        bottom = std::max(bottom, y);
        left = std::min(left, x);
      }
    }
  EXPECT_EQ(left, kTextLeftMargin);
  EXPECT_LE(std::abs(static_cast<int>(top) - static_cast<int>(15 - bottom)), 2);
  EXPECT_EQ(l1_norm(render_text("")), 0.0);
  EXPECT_EQ(render_text("B"), render_text("B"));
  EXPECT_FALSE(render_text("B") == render_text("13"));
}

TEST(RenderTextTest, Errors) {
  EXPECT_NO_THROW(render_text(std::string(kMaxTextLength, 'W')));
  EXPECT_THROW(render_text(std::string(kMaxTextLength + 1, 'W')), RenderError);
  EXPECT_THROW(render_text("a\tb"), RenderError);
  EXPECT_THROW(render_text("caf\xc3\xa9"), RenderError);
}

TEST(ToyCorpusTest, Structure) {
  Corpus c = generate_toy_corpus(7);
  EXPECT_NO_THROW(c.validate());
  ASSERT_EQ(c.samples.size(), 100u);
  EXPECT_EQ(c.class_counts.at(kToyLabelB), 50u);
  EXPECT_EQ(c.class_counts.at(kToyLabel13), 50u);
  std::map<std::string, std::size_t> test_counts;
  for (std::size_t i : c.test_indices()) ++test_counts[c.samples[i].label];
  EXPECT_EQ(test_counts[kToyLabelB], 10u);
  EXPECT_EQ(test_counts[kToyLabel13], 10u);
  for (const Sample& s : c.samples) {
    EXPECT_EQ(s.text, render_text(s.label));
    for (std::size_t y = 0; y < 64; ++y)
      for (std::size_t x = 0; x < 64; ++x) ASSERT_EQ(s.image.at(0, y, x), s.image.at(2, y, x));
  }
  ASSERT_TRUE(c.probe.has_value());
  EXPECT_EQ(c.probe->label, kToyProbeLabel);
  const double r = toy_probe_ratio(c);
  EXPECT_GT(r, 0.9);
  EXPECT_LT(r, 1.0);
}

TEST(ToyCorpusTest, SeededDeterminism) {
  EXPECT_EQ(generate_toy_corpus(3), generate_toy_corpus(3));
  EXPECT_FALSE(generate_toy_corpus(3) == generate_toy_corpus(4));
  for (std::uint64_t seed : {1, 2, 5}) {
    const double r = toy_probe_ratio(generate_toy_corpus(seed));
    EXPECT_GT(r, 0.9) << seed;
    EXPECT_LT(r, 1.1) << seed;
  }
}

TEST(ToyCorpusTest, MorphMovesTowardThirteen) {
  GlyphStyle b, m, t;
  m.morph = 0.5;
  t.morph = 1.0;
  const Tensor gb = draw_toy_glyph(b), gm = draw_toy_glyph(m), gt = draw_toy_glyph(t);
  EXPECT_EQ(gb.shape(), kImageShape);
  EXPECT_LT(l2_norm(subtract(gm, gt)), l2_norm(subtract(gb, gt)));
  EXPECT_LT(l2_norm(subtract(gm, gb)), l2_norm(subtract(gt, gb)));
}

TEST(FacesTest, CountsNamesAndSeparation) {
  Corpus c = generate_synthetic_faces(4, 6, 3, 11);
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.samples.size(), 18u + 6u * 3u);
  EXPECT_EQ(c.class_counts.at(synthetic_face_name(0)), 18u);
  std::set<std::string> names;
  for (std::size_t i = 0; i < 12; ++i) names.insert(synthetic_face_name(i));
  EXPECT_EQ(names.size(), 12u);

  // Mean distance to the own-class mean stays below the distance between
  // class means.
  std::map<std::string, Tensor> sums;
  for (const Sample& s : c.samples) {
    auto [it, fresh] = sums.try_emplace(s.label, Tensor(kImageShape));
    axpy(1.0, s.image, it->second);
  }
  for (auto& [label, sum] : sums) sum = scale(sum, 1.0 / static_cast<double>(c.class_counts.at(label)));
  double within = 0;
  for (const Sample& s : c.samples) within += l2_norm(subtract(s.image, sums.at(s.label)));
  within /= static_cast<double>(c.samples.size());
  double between = 1e300;
  for (auto& [a, ma] : sums)
    for (auto& [b, mb] : sums)
      if (a < b) between = std::min(between, l2_norm(subtract(ma, mb)));
  EXPECT_LT(within, between);

  EXPECT_EQ(generate_synthetic_faces(4, 6, 3, 11), c);
  EXPECT_THROW(generate_synthetic_faces(1, 6, 3, 11), PreconditionError);
}

TEST(SplitTest, EveryKthPerClassAndSingletonsStayInTrain) {
  Corpus c;
  for (int i = 0; i < 7; ++i) c.samples.push_back({Tensor(kImageShape), Tensor(kTextShape), "a"});
  c.samples.push_back({Tensor(kImageShape), Tensor(kTextShape), "solo"});
  assign_split(c, 3);
  EXPECT_EQ(c.test_indices(), (std::vector<std::size_t>{2, 5}));
  EXPECT_EQ(c.class_counts.at("solo"), 1u);
  EXPECT_NO_THROW(c.validate());
  c.is_test[7] = true;
  EXPECT_THROW(c.validate(), PreconditionError);
}

TEST(ImageIoTest, PngRoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(1);
  Tensor rgb = testing::uniform({3, 5, 7}, rng);
  save_png(dir.path() / "rgb.png", rgb);
  Tensor back = load_png(dir.path() / "rgb.png");
  ASSERT_EQ(back.shape(), rgb.shape());
  for (std::size_t i = 0; i < rgb.size(); ++i) EXPECT_NEAR(back[i], rgb[i], 0.5 / 255 + 1e-12);
  save_png(dir.path() / "gray.png", testing::uniform({1, 4, 4}, rng));
  EXPECT_EQ(load_png(dir.path() / "gray.png").dim(0), 1u);
  EXPECT_THROW(load_png(dir.path() / "missing.png"), IngestionError);
  std::ofstream(dir.path() / "junk.png") << "not a png";
  EXPECT_THROW(load_png(dir.path() / "junk.png"), IngestionError);
}

TEST(ImageIoTest, FaceImageNormalization) {
  std::mt19937_64 rng(2);
  Tensor native = testing::uniform(kImageShape, rng);
  EXPECT_EQ(to_face_image(native), native);
  Tensor gray = to_face_image(testing::uniform({1, 32, 32}, rng));
  ASSERT_EQ(gray.shape(), kImageShape);
  for (std::size_t i = 0; i < 64 * 64; ++i) ASSERT_EQ(gray[i], gray[2 * 64 * 64 + i]);
  Tensor flat = to_face_image(Tensor({3, 40, 90}, 0.25));
  ASSERT_EQ(flat.shape(), kImageShape);
  for (double v : flat.values()) EXPECT_NEAR(v, 0.25, 1e-12);
}

TEST(ImageIoTest, ManifestCorpus) {
  TempDir dir;
  std::mt19937_64 rng(3);
  fs::create_directories(dir.path() / "img");
  save_png(dir.path() / "img/a.png", testing::uniform({3, 64, 64}, rng));
  save_png(dir.path() / "img/b.png", testing::uniform({1, 50, 40}, rng));
  {
    std::ofstream m(dir.path() / "manifest.tsv");
    m << "img/a.png\tAda Lovelace\n\nimg/b.png\tAda Lovelace\n";
  }
  Corpus c = load_image_corpus(dir.path(), dir.path() / "manifest.tsv");
  ASSERT_EQ(c.samples.size(), 2u);
  EXPECT_EQ(c.samples[1].label, "Ada Lovelace");
  EXPECT_EQ(c.samples[1].image.shape(), kImageShape);
  EXPECT_EQ(c.samples[0].text, render_text("Ada Lovelace"));
  EXPECT_NO_THROW(c.validate());

  std::ofstream(dir.path() / "bad.tsv") << "img/a.png Ada\n";
  EXPECT_THROW(load_image_corpus(dir.path(), dir.path() / "bad.tsv"), IngestionError);
  std::ofstream(dir.path() / "missing.tsv") << "img/zzz.png\tAda\n";
  EXPECT_THROW(load_image_corpus(dir.path(), dir.path() / "missing.tsv"), IngestionError);
  EXPECT_THROW(load_image_corpus(dir.path(), dir.path() / "nope.tsv"), IngestionError);
}

TEST(CorpusCacheTest, RoundTripIsBytewiseStable) {
  TempDir dir;
  Corpus c = generate_toy_corpus(5);
  save_corpus(dir.path() / "a.bin", c);
  Corpus back = load_corpus(dir.path() / "a.bin");
  EXPECT_EQ(back, c);
  save_corpus(dir.path() / "b.bin", back);
  EXPECT_EQ(read_file(dir.path() / "a.bin"), read_file(dir.path() / "b.bin"));

  std::string bytes = read_file(dir.path() / "a.bin");
  write_file_atomically(dir.path() / "short.bin", bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(load_corpus(dir.path() / "short.bin"), FormatError);
  write_file_atomically(dir.path() / "long.bin", bytes + "x");
  EXPECT_THROW(load_corpus(dir.path() / "long.bin"), FormatError);
  write_file_atomically(dir.path() / "magic.bin", "XXXXXXXX" + bytes.substr(8));
  EXPECT_THROW(load_corpus(dir.path() / "magic.bin"), FormatError);
}

}  // namespace
}  // namespace dsc
