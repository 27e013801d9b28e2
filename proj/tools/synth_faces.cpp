#include "synth_faces.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include <cstdio>
#include <random>

#include "froq/error.hpp"
#include "froq/eval.hpp"
#include "froq/hash.hpp"
#include "froq/imaging.hpp"

namespace froq::synth {

namespace {

struct Identity {
  cv::Scalar background;
  cv::Scalar skin;
  cv::Scalar hair;
  cv::Scalar eyes;
  double face_w;      // half-axes relative to image size
  double face_h;
  double eye_gap;     // half distance between the eyes
  double eye_y;
  double eye_r;
  double mouth_w;
  double mouth_y;
  double nose_len;
};

Identity make_identity(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto color = [&](double lo, double hi) {
    return cv::Scalar(lo + (hi - lo) * u(rng), lo + (hi - lo) * u(rng), lo + (hi - lo) * u(rng));
  };
  Identity id;
  id.background = color(0.1, 0.9);
  id.skin = cv::Scalar(0.45 + 0.45 * u(rng), 0.35 + 0.4 * u(rng), 0.25 + 0.35 * u(rng));
  id.hair = color(0.0, 0.5);
  id.eyes = color(0.0, 0.4);
  id.face_w = 0.28 + 0.08 * u(rng);
  id.face_h = 0.36 + 0.08 * u(rng);
  id.eye_gap = 0.10 + 0.06 * u(rng);
  id.eye_y = 0.40 + 0.06 * u(rng);
  id.eye_r = 0.035 + 0.025 * u(rng);
  id.mouth_w = 0.08 + 0.08 * u(rng);
  id.mouth_y = 0.68 + 0.06 * u(rng);
  id.nose_len = 0.08 + 0.06 * u(rng);
  return id;
}

cv::Mat render(const Identity& id, int size) {
  // Colors are RGB in [0, 1]; the canvas matches froq::Image's layout.
  cv::Mat img(size, size, CV_32FC3, id.background);
  const double s = size;
  const cv::Point center(size / 2, static_cast<int>(s * 0.52));
  const auto px = [&](double v) { return static_cast<int>(v * s + 0.5); };
  cv::ellipse(img, cv::Point(center.x, center.y - px(0.08)),
              cv::Size(px(id.face_w + 0.03), px(id.face_h)), 0, 180, 360, id.hair, cv::FILLED,
              cv::LINE_AA);
  cv::ellipse(img, center, cv::Size(px(id.face_w), px(id.face_h)), 0, 0, 360, id.skin, cv::FILLED,
              cv::LINE_AA);
  for (int side : {-1, 1}) {
    const cv::Point eye(center.x + side * px(id.eye_gap), px(id.eye_y));
    cv::circle(img, eye, px(id.eye_r) + 1, cv::Scalar(0.95, 0.95, 0.95), cv::FILLED, cv::LINE_AA);
    cv::circle(img, eye, std::max(1, px(id.eye_r * 0.6)), id.eyes, cv::FILLED, cv::LINE_AA);
    cv::line(img, cv::Point(eye.x - px(id.eye_r), eye.y - px(id.eye_r) - 3),
             cv::Point(eye.x + px(id.eye_r), eye.y - px(id.eye_r) - 3), id.hair, 2, cv::LINE_AA);
  }
  const cv::Scalar shade = id.skin * 0.7;
  cv::line(img, cv::Point(center.x, px(id.eye_y) + 4),
           cv::Point(center.x, px(id.eye_y + id.nose_len) + 4), shade, 2, cv::LINE_AA);
  cv::ellipse(img, cv::Point(center.x, px(id.mouth_y)), cv::Size(px(id.mouth_w), px(0.03)), 0, 0,
              180, cv::Scalar(0.6, 0.15, 0.2), 2, cv::LINE_AA);
  return img;
}

Image to_image(const cv::Mat& mat) {
  Image image(mat.rows, mat.cols);
  cv::Mat view(mat.rows, mat.cols, CV_32FC3, image.pixels.data());
  mat.copyTo(view);
  return image;
}

std::string name_of(int identity, const char* variant) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "id%02d_%s.png", identity, variant);
  return buf;
}

}  // namespace

SynthOutput generate_faces(const std::filesystem::path& dir, const SynthOptions& options) {
  if (options.identities < 2 || options.size < 16) {
    fail(ErrorKind::kInvalidParameter, "need at least 2 identities and 16 px images");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  const char* variants[] = {"clean", "blurred", "noisy"};

  SynthOutput out;
  std::string list;
  for (int i = 0; i < options.identities; ++i) {
    const Identity id = make_identity(rng);
    const cv::Mat clean = render(id, options.size);

    cv::Mat blurred;
    cv::GaussianBlur(clean, blurred, cv::Size(0, 0), 2.5);

    cv::Mat noisy = clean.clone();
    for (int r = 0; r < noisy.rows; ++r) {
      auto* row = noisy.ptr<float>(r);
      for (int k = 0; k < noisy.cols * 3; ++k) row[k] += 0.18f * gauss(rng);
    }

    const cv::Mat* renders[] = {&clean, &blurred, &noisy};
    for (int v = 0; v < 3; ++v) {
      const std::string path = (dir / name_of(i, variants[v])).string();
      save_png(to_image(*renders[v]), path);
      out.images.push_back(path);
      list += path + "\n";
    }
  }

  PairProtocol protocol;
  const std::size_t n = out.images.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      protocol.pairs.push_back({out.images[a], out.images[b], a / 3 == b / 3});
    }
  }
  out.list_file = dir / "images.txt";
  out.pairs_file = dir / "pairs.tsv";
  write_file(out.list_file, list);
  save_pairs(protocol, out.pairs_file);
  return out;
}

}  // namespace froq::synth
