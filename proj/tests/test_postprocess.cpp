#include <gtest/gtest.h>

#include "caries/error.hpp"
#include "caries/postprocess.hpp"
#include "caries/rng.hpp"

using namespace caries;

namespace {

ProbabilityMap filled(int w, int h, float v) {
  return ProbabilityMap{w, h, std::vector<float>(static_cast<std::size_t>(w) * h, v)};
}

void paint(ProbabilityMap& m, int r0, int c0, int r1, int c1, float v) {
  for (int r = r0; r < r1; ++r) {
    for (int c = c0; c < c1; ++c) m.values[static_cast<std::size_t>(r) * m.width + c] = v;
  }
}

}  // namespace

TEST(Threshold, Examples) {
  EXPECT_EQ(threshold_map(filled(3, 3, 0.9f), 0.5).count(), 9u);
  EXPECT_EQ(threshold_map(filled(3, 3, 0.5f), 0.5).count(), 9u);
  const ProbabilityMap m{2, 2, {0.2f, 0.7f, 0.5f, 0.4f}};
  const BinaryMask b = threshold_map(m, 0.5);
  EXPECT_FALSE(b.at(0, 0));
  EXPECT_TRUE(b.at(0, 1));
  EXPECT_TRUE(b.at(1, 0));
  EXPECT_FALSE(b.at(1, 1));
}

TEST(Threshold, ForegroundShrinksAsThresholdRises) {
  Rng rng(1);
  ProbabilityMap m = filled(20, 20, 0.0f);
  for (auto& v : m.values) v = static_cast<float>(rng.uniform());
  std::size_t prev = m.values.size() + 1;
  for (int k = 1; k < 20; ++k) {
    const std::size_t n = threshold_map(m, k / 20.0).count();
    EXPECT_LE(n, prev);
    prev = n;
  }
}

TEST(Threshold, MismatchedMapIsShapeError) {
  const ProbabilityMap bad{3, 3, {0.1f}};
  EXPECT_THROW(threshold_map(bad, 0.5), ShapeError);
}

TEST(Detect, Examples) {
  EXPECT_TRUE(detect(filled(10, 10, 0.0f), PostprocessConfig{}).empty());
  ProbabilityMap m = filled(12, 10, 0.0f);
  paint(m, 2, 5, 5, 8, 0.9f);
  const auto d = detect(m, PostprocessConfig{0.5, 0});
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].box, BBox::make(5, 2, 8, 5));
  EXPECT_NEAR(d[0].score, 0.9, 1e-6);
  EXPECT_TRUE(detect(m, PostprocessConfig{0.5, 16}).empty());
}

TEST(Detect, OrderedByScoreThenPosition) {
  ProbabilityMap m = filled(30, 30, 0.0f);
  paint(m, 20, 2, 23, 5, 0.7f);
  paint(m, 2, 20, 5, 23, 0.7f);
  paint(m, 10, 10, 13, 13, 0.95f);
  const auto d = detect(m, PostprocessConfig{0.5, 4});
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[0].box.x_min, 10);
  EXPECT_EQ(d[1].box.y_min, 2);
  EXPECT_EQ(d[2].box.y_min, 20);
}

TEST(Detect, EveryBoxHoldsEnoughForeground) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    ProbabilityMap m = filled(24, 24, 0.0f);
    for (auto& v : m.values) v = rng.uniform() < 0.3 ? static_cast<float>(rng.uniform(0.5, 1.0)) : 0.1f;
    const PostprocessConfig cfg{0.5, static_cast<int>(rng.uniform_int(0, 6))};
    const BinaryMask fg = threshold_map(m, cfg.threshold);
    for (const auto& det : detect(m, cfg)) {
      int inside = 0;
      for (int r = det.box.y_min; r < det.box.y_max; ++r) {
        for (int c = det.box.x_min; c < det.box.x_max; ++c) inside += fg.at(r, c);
      }
      EXPECT_GE(inside, cfg.min_component_area);
      EXPECT_GE(det.score, cfg.threshold);
      EXPECT_LE(det.score, 1.0);
    }
  }
}

TEST(Detect, InvalidConfigRejected) {
  EXPECT_THROW(detect(filled(4, 4, 0.0f), PostprocessConfig{0.0, 4}), ConfigError);
  EXPECT_THROW(detect(filled(4, 4, 0.0f), PostprocessConfig{1.0, 4}), ConfigError);
  EXPECT_THROW(detect(filled(4, 4, 0.0f), PostprocessConfig{0.5, -1}), ConfigError);
}

TEST(Predictions, JsonRoundTrip) {
  const std::vector<ImagePredictions> preds{
      {"img_00000.pgm", {{BBox::make(1, 2, 5, 6), 0.75}, {BBox::make(10, 10, 12, 13), 0.5}}},
      {"img_00001.pgm", {}}};
  const auto back = predictions_from_json(predictions_to_json(preds));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].image, "img_00000.pgm");
  EXPECT_EQ(back[0].boxes, preds[0].boxes);
  EXPECT_TRUE(back[1].boxes.empty());
  EXPECT_THROW(predictions_from_json("[1, 2"), FormatError);
  EXPECT_THROW(predictions_from_json(R"({"predictions":[{"image":"a","boxes":[{"x_min":3,"y_min":0,"x_max":3,"y_max":4}]}]})"),
               ConfigError);
}
