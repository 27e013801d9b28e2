#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "froq/backend.hpp"
#include "froq/observer.hpp"
#include "froq/parallel.hpp"

// Quality benchmarking: verification over pair protocols, FNMR at a fixed FMR
// operating point, error-versus-discard curves and their partial area.
namespace froq {

struct EmbeddingEntry {
  std::string path;
  Embedding embedding;

  friend bool operator==(const EmbeddingEntry&, const EmbeddingEntry&) = default;
};

/// Path -> embedding map in extraction order.
struct EmbeddingStore {
  std::string model_identity;
  std::vector<EmbeddingEntry> entries;

  /// nullptr when `path` is not stored.
  const Embedding* find(const std::string& path) const;

  friend bool operator==(const EmbeddingStore&, const EmbeddingStore&) = default;
};

struct EmbeddingRun {
  EmbeddingStore store;
  std::vector<ItemFailure> failures;
};

/// One forward pass per image.
EmbeddingRun embed_set(InferenceSession& session, std::span<const std::string> image_paths,
                       std::size_t threads = 1);

/// `# froq-embeddings v1 model=<hash> dim=<d>` then `path<TAB>v1,v2,...`.
/// Values are float32 and written with 9 significant digits, which restores
/// them exactly.
std::string serialize_embeddings(const EmbeddingStore& store);
EmbeddingStore parse_embeddings(const std::string& text);
void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path);
EmbeddingStore load_embeddings(const std::filesystem::path& path);

struct VerificationPair {
  std::string a;
  std::string b;
  bool mated = false;

  friend bool operator==(const VerificationPair&, const VerificationPair&) = default;
};

struct PairProtocol {
  std::vector<VerificationPair> pairs;

  /// Every distinct image, in order of first appearance.
  std::vector<std::string> images() const;

  friend bool operator==(const PairProtocol&, const PairProtocol&) = default;
};

/// Lines `image_a<TAB>image_b<TAB>{0|1}` (1 = mated); `#` starts a comment
/// line. Parsing requires at least one mated and one non-mated pair.
std::string serialize_pairs(const PairProtocol& protocol);
PairProtocol parse_pairs(const std::string& text);
void save_pairs(const PairProtocol& protocol, const std::filesystem::path& path);
PairProtocol load_pairs(const std::filesystem::path& path);

struct PairScore {
  double similarity = 0.0;
  bool mated = false;
};

/// Cosine similarity per pair, in protocol order. Throws AlignmentError when a
/// pair member has no embedding.
std::vector<PairScore> verification_scores(const PairProtocol& protocol,
                                           const EmbeddingStore& embeddings);

struct FmrThreshold {
  double threshold = 0.0;
  double realized_fmr = 0.0;
  /// True when no observed similarity satisfies the target, so the threshold
  /// sits just above the largest non-mated similarity.
  bool granularity_warning = false;
};

/// Smallest observed non-mated similarity t with fraction(s >= t) <= target.
/// A comparison is accepted as a match when its similarity is >= t.
/// Throws InvalidParameter for a target outside (0, 1) or an empty set.
FmrThreshold threshold_at_fmr(std::span<const double> nonmated, double fmr_target);

/// Default discard grid: 101 evenly spaced rates on [0, 0.5].
std::vector<double> default_discard_grid();

struct EdcPoint {
  double discard_rate = 0.0;
  double fnmr = 0.0;  // NaN when no mated pair survives

  friend bool operator==(const EdcPoint&, const EdcPoint&) = default;
};

struct EdcCurve {
  double fmr_target = 1e-3;
  double threshold = 0.0;  // fixed at 0% discard
  std::vector<EdcPoint> points;
  std::vector<std::string> warnings;
};

/// Image quality lookup built from a scores file. Throws AlignmentError on
/// duplicate paths.
std::map<std::string, double> quality_map(const ScoreSet& scores);

/// Error-versus-discard curve. The decision threshold is fixed once from all
/// non-mated pairs. At discard rate d the images whose quality falls below the
/// d-quantile of the protocol's image qualities are removed (tied qualities
/// are removed together or not at all), every pair touching a removed image
/// is dropped, and FNMR is recomputed over the surviving mated pairs.
///
/// `scores` must be aligned with `protocol.pairs`. Throws AlignmentError when
/// a protocol image has no quality, InvalidParameter for a grid that does
/// not start at 0 or is not increasing within [0, 1].
EdcCurve edc_curve(const PairProtocol& protocol, std::span<const PairScore> scores,
                   const std::map<std::string, double>& qualities, double fmr_target,
                   std::span<const double> grid);
EdcCurve edc_curve(const PairProtocol& protocol, std::span<const PairScore> scores,
                   const std::map<std::string, double>& qualities, double fmr_target = 1e-3);

/// Trapezoidal area under FNMR over [0, discard_max]; undefined points are
/// skipped. With `normalize` the area is divided by discard_max * FNMR(0),
/// so a flat curve yields exactly 1. Throws DegenerateInput when normalizing
/// with FNMR(0) = 0 or when FNMR(0) is undefined, InvalidParameter when the
/// curve does not reach discard_max.
double pauc(const EdcCurve& curve, double discard_max = 0.2, bool normalize = true);

/// `discard_rate,fnmr` with one row per point, shortest round-trip reals
/// (`nan` for undefined points).
std::string serialize_edc_csv(std::span<const EdcPoint> points);
std::vector<EdcPoint> parse_edc_csv(const std::string& text);
void save_edc_csv(std::span<const EdcPoint> points, const std::filesystem::path& path);
std::vector<EdcPoint> load_edc_csv(const std::filesystem::path& path);

/// Line plot of the curve with labeled axes; the bytes depend only on the input.
std::string render_edc_svg(const EdcCurve& curve, double discard_max);

struct PaucSummary {
  double fmr_target = 1e-3;
  double threshold = 0.0;
  double discard_max = 0.2;
  bool normalized = true;
  double fnmr_at_zero = 0.0;
  double pauc = 0.0;
  std::size_t pairs = 0;
  std::size_t undefined_points = 0;
};

std::string serialize_pauc_summary(const PaucSummary& summary);

}  // namespace froq
