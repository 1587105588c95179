#include <gtest/gtest.h>

#include "caries/error.hpp"
#include "caries/network.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace caries;

TEST(Network, LayerLayout) {
  const Network net(NetworkConfig{}, 0);
  ASSERT_EQ(net.layers().size(), 18u);
  EXPECT_EQ(net.layers().front().name, "enc0.conv0");
  EXPECT_EQ(net.layers()[6].name, "mid.conv0");
  EXPECT_EQ(net.layers()[8].name, "dec2.up");
  EXPECT_EQ(net.layers().back().name, "head");
  EXPECT_EQ(net.layers().back().weight.shape(), (Shape{1, 8, 1, 1}));
  EXPECT_EQ(net.layers()[6].weight.shape(), (Shape{64, 32, 3, 3}));
}

TEST(Network, OutputShapeMatchesInput) {
  for (int depth : {1, 2, 3}) {
    const Network net(NetworkConfig{depth, 2, 3}, 1);
    for (int size : {8, 16, 32, 64}) {
      for (int n : {1, 2}) {
        const Tensor y = net.forward(Tensor(Shape{n, 1, size, size}, 0.5f));
        EXPECT_EQ(y.shape(), (Shape{n, 1, size, size})) << "depth " << depth << " size " << size;
      }
    }
  }
  const Network wide(NetworkConfig{2, 2, 3}, 1);
  EXPECT_EQ(wide.forward(Tensor(Shape{1, 1, 8, 24})).shape(), (Shape{1, 1, 8, 24}));
}

TEST(Network, IndivisibleInputIsShapeError) {
  const Network net(NetworkConfig{3, 2, 3}, 1);
  EXPECT_THROW(net.forward(Tensor(Shape{1, 1, 12, 16})), ShapeError);
  EXPECT_THROW(net.forward(Tensor(Shape{1, 1, 4, 4})), ShapeError);
  EXPECT_THROW(net.forward(Tensor(Shape{1, 2, 16, 16})), ShapeError);
}

TEST(Network, InvalidConfigRejected) {
  EXPECT_THROW(Network(NetworkConfig{0, 8, 3}, 0), ConfigError);
  EXPECT_THROW(Network(NetworkConfig{2, 0, 3}, 0), ConfigError);
  EXPECT_THROW(Network(NetworkConfig{2, 8, 4}, 0), ConfigError);
}

TEST(Network, InitializationIsPureFunctionOfSeed) {
  const NetworkConfig cfg{2, 4, 3};
  EXPECT_EQ(Network(cfg, 5), Network(cfg, 5));
  EXPECT_NE(Network(cfg, 5), Network(cfg, 6));
  const Network net(cfg, 5);
  for (const auto& layer : net.layers()) {
    const Shape s = layer.weight.shape();
    const double bound = std::sqrt(6.0 / (s.c * s.h * s.w));
    for (float w : layer.weight.data()) ASSERT_LE(std::abs(w), bound);
    for (float b : layer.bias) ASSERT_EQ(b, 0.0f);
  }
}

TEST(Network, ForwardIsDeterministic) {
  Rng rng(3);
  const Network net(NetworkConfig{}, 9);
  const Tensor x = tensor_cast<float>(oracle::random_tensor(rng, Shape{1, 1, 32, 32}, 0.0, 1.0));
  EXPECT_EQ(net.forward(x), net.forward(x));
}

TEST(Network, BatchMatchesSingleSamples) {
  Rng rng(4);
  const BasicNetwork<double> net(NetworkConfig{2, 3, 3}, 2);
  const auto x = oracle::random_tensor(rng, Shape{2, 1, 16, 16}, 0.0, 1.0);
  const auto both = net.forward(x);
  for (int n = 0; n < 2; ++n) {
    BasicTensor<double> one(Shape{1, 1, 16, 16});
    std::copy(x.plane(n, 0), x.plane(n, 0) + 256, one.ptr());
    const auto y = net.forward(one);
    for (std::size_t i = 0; i < 256; ++i) ASSERT_NEAR(y[i], both.plane(n, 0)[i], 1e-12);
  }
}

TEST(Network, ImageScaling) {
  GrayImage img(2, 1, {0, 255});
  const Tensor t = image_to_tensor(img);
  EXPECT_EQ(t.shape(), (Shape{1, 1, 1, 2}));
  EXPECT_EQ(t[0], 0.0f);
  EXPECT_EQ(t[1], 1.0f);
}

TEST(GradientCheck, FullNetwork) {
  const auto s = gradcheck::network(20, 200);
  EXPECT_TRUE(s.ok()) << s.first_failure;
}
