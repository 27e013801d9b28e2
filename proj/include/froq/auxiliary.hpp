#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "froq/backend.hpp"
#include "froq/imaging.hpp"
#include "froq/parallel.hpp"

// Perturbation-based pseudo-quality labels. A sample whose embedding barely
// moves under flipping, slight noise and local occlusion is treated as high
// quality. The labels are only used to rank taps during calibration.
namespace froq {

struct AuxParams {
  double alpha = 0.001;    // noise mixing weight
  int occlusion_size = 14;  // square side in pixels; must divide the input side
  std::uint64_t seed = 0;

  friend bool operator==(const AuxParams&, const AuxParams&) = default;
};

struct PartialQualities {
  double flip = 0.0;
  double noise = 0.0;
  double occlusion = 0.0;
  double label = 0.0;  // mean of the three partials
};

/// Embedding of an image already sized for the model. One forward pass.
Embedding embed_image(InferenceSession& session, const Image& image);

/// cos(embed(x), embed(flip(x))). Each overload without `original` spends one
/// extra pass to compute it.
double partial_flip_quality(InferenceSession& session, const Image& image);
double partial_flip_quality(InferenceSession& session, const Image& image,
                            const Embedding& original);

/// cos(embed(x), embed(add_noise(x, alpha, seed))).
double partial_noise_quality(InferenceSession& session, const Image& image, double alpha,
                             std::uint64_t seed);
double partial_noise_quality(InferenceSession& session, const Image& image, double alpha,
                             std::uint64_t seed, const Embedding& original);

/// Mean cosine similarity over all (h / o)^2 occluded variants.
double partial_occlusion_quality(InferenceSession& session, const Image& image, int square);
double partial_occlusion_quality(InferenceSession& session, const Image& image, int square,
                                 const Embedding& original);

/// All three partials and their mean, reusing one original embedding:
/// exactly 3 + (h / o)^2 forward passes. Any failing partial fails the label.
PartialQualities pseudo_label_detail(InferenceSession& session, const Image& image,
                                     const AuxParams& params);
double pseudo_label(InferenceSession& session, const Image& image, const AuxParams& params);

/// Noise seed used for a given image inside a labeled set. Derived from the
/// path rather than the list position so labels do not depend on list order
/// or on worker scheduling.
std::uint64_t image_seed(std::uint64_t base_seed, const std::string& path);

struct LabelEntry {
  std::string path;
  double label = 0.0;

  friend bool operator==(const LabelEntry&, const LabelEntry&) = default;
};

struct PseudoLabelSet {
  std::vector<LabelEntry> entries;
  AuxParams params;
  std::string model_identity;

  friend bool operator==(const PseudoLabelSet&, const PseudoLabelSet&) = default;
};

struct PseudoLabelRun {
  PseudoLabelSet labels;
  std::vector<ItemFailure> failures;
};

/// Labels every image (loaded and resized per the session manifest) in input
/// order. Failing images are reported; more than 10% failures aborts the batch.
/// Throws InvalidParameter on an empty list.
PseudoLabelRun pseudo_label_set(InferenceSession& session,
                                std::span<const std::string> image_paths,
                                const AuxParams& params, std::size_t threads = 1);

/// Labels TSV: `# froq-labels v1 model=<hash> alpha=<a> o=<o> seed=<s>` then
/// `path<TAB>label` lines with 9 significant digits.
std::string serialize_labels(const PseudoLabelSet& labels);
PseudoLabelSet parse_labels(const std::string& text);
void save_labels(const PseudoLabelSet& labels, const std::filesystem::path& path);
PseudoLabelSet load_labels(const std::filesystem::path& path);

}  // namespace froq
