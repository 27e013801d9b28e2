#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "froq/backend.hpp"
#include "froq/tensor.hpp"

namespace froq {

/// RGB image with float pixels, interleaved row-major (HWC). Pixels are in
/// [0, 1] after loading; add_noise deliberately leaves them unclamped.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<float> pixels;

  static constexpr int kChannels = 3;

  Image() = default;
  Image(int h, int w, float fill = 0.0f);

  float& at(int row, int col, int channel) {
    return pixels[(static_cast<std::size_t>(row) * width + col) * kChannels + channel];
  }
  float at(int row, int col, int channel) const {
    return pixels[(static_cast<std::size_t>(row) * width + col) * kChannels + channel];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Decodes PNG/JPEG (anything OpenCV reads) into RGB [0, 1].
/// Throws ImageFormatError when the file is missing or cannot be decoded.
Image load_image(const std::filesystem::path& path);

/// Writes an 8-bit PNG; values are clamped to [0, 1] and rounded.
void save_png(const Image& image, const std::filesystem::path& path);

/// Bilinear resize (pixel-centre aligned). Returns a copy when the size
/// already matches.
Image resize_bilinear(const Image& image, int height, int width);

/// Loads an image and resizes it to the manifest's input size. This is the
/// raw-space image every perturbation operates on.
Image load_for_model(const std::filesystem::path& path, const ModelManifest& manifest);

/// Channel reordering and (pixel - mean) / std normalization into a
/// 1 x 3 x H x W tensor. The image must already have the manifest size.
Tensor to_tensor(const Image& image, const ModelManifest& manifest);

/// load_for_model followed by to_tensor.
Tensor load_and_preprocess(const std::filesystem::path& path, const ModelManifest& manifest);

Image flip_horizontal(const Image& image);

/// x' = (1 - alpha) x + alpha n, with n ~ N(0, 1) drawn from a generator
/// seeded with `seed`, one draw per value in raster (row, column, channel)
/// order. No clamping. Throws InvalidParameter for alpha outside [0, 1].
Image add_noise(const Image& image, double alpha, std::uint64_t seed);

/// Number of occlusion squares, (h / o)^2. Throws InvalidParameter unless the
/// image is square and `square` divides its side.
int occlusion_count(const Image& image, int square);

/// Copy of `image` with square `index` (row-major over the grid) set to black.
Image occlude(const Image& image, int square, int index);

/// All (h / o)^2 occluded variants in row-major square order.
std::vector<Image> occlusion_grid(const Image& image, int square);

}  // namespace froq
