#include "froq/auxiliary.hpp"

#include <optional>

#include "froq/error.hpp"
#include "froq/formats.hpp"
#include "froq/hash.hpp"
#include "froq/stats.hpp"

namespace froq {

Embedding embed_image(InferenceSession& session, const Image& image) {
  return session.run(to_tensor(image, session.manifest())).embedding;
}

double partial_flip_quality(InferenceSession& session, const Image& image,
                            const Embedding& original) {
  const Embedding flipped = embed_image(session, flip_horizontal(image));
  return stats::cosine_similarity(original, flipped);
}

double partial_flip_quality(InferenceSession& session, const Image& image) {
  return partial_flip_quality(session, image, embed_image(session, image));
}

double partial_noise_quality(InferenceSession& session, const Image& image, double alpha,
                             std::uint64_t seed, const Embedding& original) {
  const Embedding noisy = embed_image(session, add_noise(image, alpha, seed));
  return stats::cosine_similarity(original, noisy);
}

double partial_noise_quality(InferenceSession& session, const Image& image, double alpha,
                             std::uint64_t seed) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    fail(ErrorKind::kInvalidParameter, "noise alpha must lie in [0, 1]");
  }
  return partial_noise_quality(session, image, alpha, seed, embed_image(session, image));
}

double partial_occlusion_quality(InferenceSession& session, const Image& image, int square,
                                 const Embedding& original) {
  const int count = occlusion_count(image, square);
  double sum = 0.0;
  for (int i = 0; i < count; ++i) {
    sum += stats::cosine_similarity(original, embed_image(session, occlude(image, square, i)));
  }
  return sum / count;
}

double partial_occlusion_quality(InferenceSession& session, const Image& image, int square) {
  occlusion_count(image, square);
  return partial_occlusion_quality(session, image, square, embed_image(session, image));
}

PartialQualities pseudo_label_detail(InferenceSession& session, const Image& image,
                                     const AuxParams& params) {
  // Validate parameters before spending any forward pass.
  if (!(params.alpha >= 0.0 && params.alpha <= 1.0)) {
    fail(ErrorKind::kInvalidParameter, "noise alpha must lie in [0, 1]");
  }
  occlusion_count(image, params.occlusion_size);

  const Embedding original = embed_image(session, image);
  PartialQualities q;
  q.flip = partial_flip_quality(session, image, original);
  q.noise = partial_noise_quality(session, image, params.alpha, params.seed, original);
  q.occlusion = partial_occlusion_quality(session, image, params.occlusion_size, original);
  q.label = (q.flip + q.noise + q.occlusion) / 3.0;
  return q;
}

double pseudo_label(InferenceSession& session, const Image& image, const AuxParams& params) {
  return pseudo_label_detail(session, image, params).label;
}

std::uint64_t image_seed(std::uint64_t base_seed, const std::string& path) {
  // FNV-1a
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : path) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return base_seed ^ hash;
}

PseudoLabelRun pseudo_label_set(InferenceSession& session,
                                std::span<const std::string> image_paths,
                                const AuxParams& params, std::size_t threads) {
  if (image_paths.empty()) fail(ErrorKind::kInvalidParameter, "no images to label");
  if (!(params.alpha >= 0.0 && params.alpha <= 1.0)) {
    fail(ErrorKind::kInvalidParameter, "noise alpha must lie in [0, 1]");
  }
  occlusion_count(Image(session.manifest().input_height, session.manifest().input_width),
                  params.occlusion_size);

  std::vector<std::optional<double>> labels(image_paths.size());
  std::vector<std::string> errors(image_paths.size());
  parallel_for(image_paths.size(), threads, [&](std::size_t i) {
    try {
      const Image image = load_for_model(image_paths[i], session.manifest());
      AuxParams local = params;
      local.seed = image_seed(params.seed, image_paths[i]);
      labels[i] = pseudo_label(session, image, local);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  PseudoLabelRun run;
  run.labels.params = params;
  run.labels.model_identity = session.model_identity();
  for (std::size_t i = 0; i < image_paths.size(); ++i) {
    if (labels[i]) {
      run.labels.entries.push_back({image_paths[i], *labels[i]});
    } else {
      run.failures.push_back({image_paths[i], errors[i]});
    }
  }
  enforce_failure_budget(run.failures, image_paths.size(), "pseudo-labeling");
  return run;
}

std::string serialize_labels(const PseudoLabelSet& labels) {
  std::string out = "# froq-labels v1 model=" + labels.model_identity +
                    " alpha=" + text::real9(labels.params.alpha) +
                    " o=" + std::to_string(labels.params.occlusion_size) +
                    " seed=" + std::to_string(labels.params.seed) + "\n";
  for (const auto& entry : labels.entries) {
    if (entry.path.find_first_of("\t\n") != std::string::npos) {
      fail(ErrorKind::kInvalidParameter, "image path contains a tab or newline: " + entry.path);
    }
    out += entry.path + "\t" + text::real9(entry.label) + "\n";
  }
  return out;
}

PseudoLabelSet parse_labels(const std::string& contents) {
  const auto rows = text::lines(contents);
  if (rows.empty()) fail(ErrorKind::kConfigParse, "empty labels file");
  const auto header = text::parse_header(rows[0], "froq-labels", "v1");
  PseudoLabelSet labels;
  try {
    labels.model_identity = header.at("model");
    labels.params.alpha = text::parse_real(header.at("alpha"), "labels alpha");
    labels.params.occlusion_size =
        static_cast<int>(text::parse_integer(header.at("o"), "labels o"));
    labels.params.seed = std::stoull(header.at("seed"));
  } catch (const std::out_of_range&) {
    fail(ErrorKind::kConfigParse, "labels header lacks model/alpha/o/seed");
  } catch (const std::invalid_argument&) {
    fail(ErrorKind::kConfigParse, "labels header has a malformed seed");
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].empty() || rows[i].front() == '#') continue;
    const auto fields = text::split(rows[i], '\t');
    if (fields.size() != 2) {
      fail(ErrorKind::kConfigParse, "labels line " + std::to_string(i + 1) + " needs 2 fields");
    }
    const double value = text::parse_real(fields[1], "labels value");
    if (!(value >= -1.0 && value <= 1.0)) {
      fail(ErrorKind::kConfigParse, "label outside [-1, 1] on line " + std::to_string(i + 1));
    }
    labels.entries.push_back({std::string(fields[0]), value});
  }
  return labels;
}

void save_labels(const PseudoLabelSet& labels, const std::filesystem::path& path) {
  write_file(path, serialize_labels(labels));
}

PseudoLabelSet load_labels(const std::filesystem::path& path) {
  return parse_labels(read_file(path));
}

}  // namespace froq
