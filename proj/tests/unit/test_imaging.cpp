#include <gtest/gtest.h>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "froq/error.hpp"
#include "froq/hash.hpp"
#include "froq/imaging.hpp"
#include "test_support.hpp"

namespace froq {
namespace {

using testing::expect_kind;
using testing::random_image;

ModelManifest face_manifest() { return testing::stub_manifest(112, 0.5f, 0.5f); }

TEST(Preprocess, RangeForHalfMeanHalfStd) {
  const auto dir = testing::scratch_dir("pre_range");
  save_png(random_image(112, 112, 1), dir / "x.png");
  const Tensor t = load_and_preprocess(dir / "x.png", face_manifest());
  EXPECT_EQ(t.shape(), (Shape{1, 3, 112, 112}));
  for (float v : t.data()) {
    EXPECT_GE(v, -1.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Preprocess, ResizesToManifest) {
  const auto dir = testing::scratch_dir("pre_resize");
  save_png(random_image(224, 224, 2), dir / "big.png");
  EXPECT_EQ(load_and_preprocess(dir / "big.png", face_manifest()).shape(),
            (Shape{1, 3, 112, 112}));
  EXPECT_EQ(load_for_model(dir / "big.png", face_manifest()).height, 112);
}

TEST(Preprocess, UniformGrayNormalizesToZero) {
  const Tensor t = to_tensor(Image(112, 112, 0.5f), face_manifest());
  EXPECT_TRUE(std::all_of(t.data().begin(), t.data().end(), [](float v) { return v == 0.0f; }));
}

TEST(Preprocess, ChannelOrderAndPerChannelStats) {
  Image image(2, 2);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      image.at(r, c, 0) = 0.1f;  // R
      image.at(r, c, 1) = 0.2f;  // G
      image.at(r, c, 2) = 0.3f;  // B
    }
  }
  ModelManifest m = testing::stub_manifest(2);
  m.channel_order = ChannelOrder::kBgr;
  m.mean = {0.3f, 0.0f, 0.0f};
  m.std = {1.0f, 2.0f, 1.0f};
  const Tensor t = to_tensor(image, m);
  // Plane 0 is blue minus its mean, plane 1 green over its std, plane 2 red.
  EXPECT_FLOAT_EQ(t.data()[0], 0.0f);
  EXPECT_FLOAT_EQ(t.data()[4], 0.1f);
  EXPECT_FLOAT_EQ(t.data()[8], 0.1f);
}

TEST(Preprocess, WrongSizeRejected) {
  expect_kind(ErrorKind::kShape, [] { to_tensor(Image(64, 64), testing::stub_manifest(112)); });
}

TEST(LoadImage, DecodesPngAndJpeg) {
  const auto dir = testing::scratch_dir("load_formats");
  cv::Mat bgr(8, 8, CV_8UC3, cv::Scalar(255, 0, 0));  // pure blue
  ASSERT_TRUE(cv::imwrite((dir / "b.png").string(), bgr));
  ASSERT_TRUE(cv::imwrite((dir / "b.jpg").string(), bgr));
  const Image png = load_image(dir / "b.png");
  EXPECT_EQ(png.at(0, 0, 2), 1.0f);
  EXPECT_EQ(png.at(0, 0, 0), 0.0f);
  const Image jpg = load_image(dir / "b.jpg");
  EXPECT_GT(jpg.at(4, 4, 2), 0.9f);
  EXPECT_LT(jpg.at(4, 4, 0), 0.1f);
}

TEST(LoadImage, Errors) {
  const auto dir = testing::scratch_dir("load_errors");
  write_file(dir / "broken.png", "not an image");
  expect_kind(ErrorKind::kImageFormat, [&] { load_image(dir / "broken.png"); });
  expect_kind(ErrorKind::kImageFormat, [&] { load_image(dir / "missing.png"); });
}

TEST(Flip, Involution) {
  const Image x = random_image(16, 12, 3);
  EXPECT_EQ(flip_horizontal(flip_horizontal(x)), x);
}

TEST(Flip, SymmetricImageUnchanged) {
  Image x = random_image(8, 8, 4);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 4; ++c) {
      for (int k = 0; k < 3; ++k) x.at(r, 7 - c, k) = x.at(r, c, k);
    }
  }
  EXPECT_EQ(flip_horizontal(x), x);
}

TEST(Flip, IndexReversalOracle) {
  const Image x = random_image(10, 7, 5);
  const Image f = flip_horizontal(x);
  for (int r = 0; r < x.height; ++r) {
    for (int c = 0; c < x.width; ++c) {
      for (int k = 0; k < 3; ++k) ASSERT_EQ(f.at(r, c, k), x.at(r, x.width - 1 - c, k));
    }
  }
  auto a = x.pixels, b = f.pixels;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(Noise, AlphaZeroIsIdentity) {
  const Image x = random_image(8, 8, 6);
  EXPECT_EQ(add_noise(x, 0.0, 99), x);
}

TEST(Noise, ReplaysSeededGenerator) {
  const Image x = random_image(6, 5, 7);
  std::mt19937_64 rng(1234);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> field(x.pixels.size());
  for (auto& n : field) n = normal(rng);

  const Image pure = add_noise(x, 1.0, 1234);
  for (std::size_t i = 0; i < field.size(); ++i) {
    ASSERT_EQ(pure.pixels[i], static_cast<float>(field[i]));
  }
  const Image mixed = add_noise(x, 0.001, 1234);
  for (std::size_t i = 0; i < field.size(); ++i) {
    ASSERT_EQ(mixed.pixels[i], static_cast<float>((1.0 - 0.001) * x.pixels[i] + 0.001 * field[i]));
  }
}

TEST(Noise, DeterministicUnclampedAndSmallForSmallAlpha) {
  const Image x(8, 8, 1.0f);
  const Image a = add_noise(x, 0.5, 5);
  EXPECT_EQ(a, add_noise(x, 0.5, 5));
  EXPECT_NE(a, add_noise(x, 0.5, 6));
  EXPECT_TRUE(std::any_of(a.pixels.begin(), a.pixels.end(), [](float v) { return v > 1.0f; }));
  float worst = 0.0f;
  const Image b = add_noise(x, 1e-6, 5);
  for (std::size_t i = 0; i < x.pixels.size(); ++i) {
    worst = std::max(worst, std::abs(b.pixels[i] - x.pixels[i]));
  }
  EXPECT_LT(worst, 1e-4f);
}

TEST(Noise, RejectsBadAlpha) {
  expect_kind(ErrorKind::kInvalidParameter, [] { add_noise(Image(4, 4), 2.0, 0); });
  expect_kind(ErrorKind::kInvalidParameter, [] { add_noise(Image(4, 4), -0.1, 0); });
}

TEST(Occlusion, FaceGridHas64Variants) {
  const Image x = random_image(112, 112, 8);
  EXPECT_EQ(occlusion_count(x, 14), 64);
  EXPECT_EQ(occlusion_grid(x, 14).size(), 64u);
}

TEST(Occlusion, FullSquareIsAllBlack) {
  const auto grid = occlusion_grid(random_image(112, 112, 9), 112);
  ASSERT_EQ(grid.size(), 1u);
  EXPECT_EQ(grid[0], Image(112, 112, 0.0f));
}

TEST(Occlusion, PartitionAndRowMajorOrder) {
  const Image x = random_image(12, 12, 10);
  const auto grid = occlusion_grid(x, 4);
  ASSERT_EQ(grid.size(), 9u);
  std::vector<int> covered(144, 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (int r = 0; r < 12; ++r) {
      for (int c = 0; c < 12; ++c) {
        const bool inside = r / 4 == static_cast<int>(i) / 3 && c / 4 == static_cast<int>(i) % 3;
        for (int k = 0; k < 3; ++k) {
          if (inside) {
            ASSERT_EQ(grid[i].at(r, c, k), 0.0f);
          } else {
            ASSERT_EQ(grid[i].at(r, c, k), x.at(r, c, k));
          }
        }
        covered[r * 12 + c] += inside;
      }
    }
    for (std::size_t j = 0; j < i; ++j) EXPECT_NE(grid[i], grid[j]);
  }
  EXPECT_TRUE(std::all_of(covered.begin(), covered.end(), [](int n) { return n == 1; }));
}

TEST(Occlusion, Errors) {
  expect_kind(ErrorKind::kInvalidParameter, [] { occlusion_count(Image(112, 112), 15); });
  expect_kind(ErrorKind::kInvalidParameter, [] { occlusion_count(Image(112, 96), 14); });
  expect_kind(ErrorKind::kInvalidParameter, [] { occlusion_count(Image(112, 112), 0); });
  expect_kind(ErrorKind::kInvalidParameter, [] { occlude(Image(112, 112), 14, 64); });
}

TEST(Resize, BilinearOfConstantIsConstant) {
  const Image r = resize_bilinear(Image(50, 70, 0.25f), 112, 112);
  EXPECT_EQ(r.height, 112);
  for (float v : r.pixels) ASSERT_FLOAT_EQ(v, 0.25f);
}

}  // namespace
}  // namespace froq
