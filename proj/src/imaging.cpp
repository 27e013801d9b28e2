#include "froq/imaging.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "froq/error.hpp"

namespace froq {

Image::Image(int h, int w, float fill)
    : height(h), width(w), pixels(static_cast<std::size_t>(h) * w * kChannels, fill) {}

namespace {

cv::Mat as_mat(const Image& image) {
  // OpenCV does not modify the buffer through this header for read-only uses.
  return cv::Mat(image.height, image.width, CV_32FC3,
                 const_cast<float*>(image.pixels.data()));
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  cv::Mat bgr;
  try {
    bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    fail(ErrorKind::kImageFormat, path.string() + ": " + e.what());
  }
  if (bgr.empty()) fail(ErrorKind::kImageFormat, "cannot decode image " + path.string());

  Image image(bgr.rows, bgr.cols);
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  cv::Mat target = as_mat(image);
  rgb.convertTo(target, CV_32FC3, 1.0 / 255.0);
  return image;
}

void save_png(const Image& image, const std::filesystem::path& path) {
  cv::Mat rgb8;
  as_mat(image).convertTo(rgb8, CV_8UC3, 255.0);  // saturating cast clamps
  cv::Mat bgr8;
  cv::cvtColor(rgb8, bgr8, cv::COLOR_RGB2BGR);
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr8, {cv::IMWRITE_PNG_COMPRESSION, 6});
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) fail(ErrorKind::kIo, "cannot write " + path.string());
}

Image resize_bilinear(const Image& image, int height, int width) {
  if (height <= 0 || width <= 0) fail(ErrorKind::kInvalidParameter, "resize to empty size");
  if (image.height == height && image.width == width) return image;
  Image out(height, width);
  cv::Mat target = as_mat(out);
  cv::resize(as_mat(image), target, cv::Size(width, height), 0, 0, cv::INTER_LINEAR);
  return out;
}

Image load_for_model(const std::filesystem::path& path, const ModelManifest& manifest) {
  return resize_bilinear(load_image(path), manifest.input_height, manifest.input_width);
}

Tensor to_tensor(const Image& image, const ModelManifest& manifest) {
  if (image.height != manifest.input_height || image.width != manifest.input_width) {
    fail(ErrorKind::kShape, "image is " + std::to_string(image.height) + "x" +
                                std::to_string(image.width) + ", model expects " +
                                std::to_string(manifest.input_height) + "x" +
                                std::to_string(manifest.input_width));
  }
  const std::size_t plane = static_cast<std::size_t>(image.height) * image.width;
  std::vector<float> data(plane * 3);
  for (int c = 0; c < 3; ++c) {
    const int source = manifest.channel_order == ChannelOrder::kRgb ? c : 2 - c;
    const float mean = manifest.mean[c];
    const float std = manifest.std[c];
    float* dst = data.data() + c * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      dst[p] = (image.pixels[p * 3 + source] - mean) / std;
    }
  }
  return Tensor(manifest.input_shape(), std::move(data));
}

Tensor load_and_preprocess(const std::filesystem::path& path, const ModelManifest& manifest) {
  return to_tensor(load_for_model(path, manifest), manifest);
}

Image flip_horizontal(const Image& image) {
  Image out(image.height, image.width);
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      for (int ch = 0; ch < Image::kChannels; ++ch) {
        out.at(r, c, ch) = image.at(r, image.width - 1 - c, ch);
      }
    }
  }
  return out;
}

Image add_noise(const Image& image, double alpha, std::uint64_t seed) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    fail(ErrorKind::kInvalidParameter, "noise alpha must lie in [0, 1]");
  }
  std::mt19937_64 generator(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Image out = image;
  for (float& value : out.pixels) {
    const double n = normal(generator);
    value = static_cast<float>((1.0 - alpha) * static_cast<double>(value) + alpha * n);
  }
  return out;
}

int occlusion_count(const Image& image, int square) {
  if (image.height != image.width) {
    fail(ErrorKind::kInvalidParameter, "occlusion requires a square image");
  }
  if (square <= 0 || image.height % square != 0) {
    fail(ErrorKind::kInvalidParameter, "occlusion size " + std::to_string(square) +
                                           " does not divide image side " +
                                           std::to_string(image.height));
  }
  const int per_side = image.height / square;
  return per_side * per_side;
}

Image occlude(const Image& image, int square, int index) {
  const int count = occlusion_count(image, square);
  if (index < 0 || index >= count) {
    fail(ErrorKind::kInvalidParameter, "occlusion index out of range");
  }
  const int per_side = image.height / square;
  const int top = (index / per_side) * square;
  const int left = (index % per_side) * square;
  Image out = image;
  for (int r = top; r < top + square; ++r) {
    float* row = &out.at(r, left, 0);
    std::fill(row, row + square * Image::kChannels, 0.0f);
  }
  return out;
}

std::vector<Image> occlusion_grid(const Image& image, int square) {
  const int count = occlusion_count(image, square);
  std::vector<Image> variants;
  variants.reserve(count);
  for (int i = 0; i < count; ++i) variants.push_back(occlude(image, square, i));
  return variants;
}

}  // namespace froq
