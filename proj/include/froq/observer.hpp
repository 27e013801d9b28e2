#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "froq/backend.hpp"
#include "froq/parallel.hpp"
#include "froq/tensor.hpp"

namespace froq {

inline constexpr const char* kAggregationL2 = "l2norm-v1";
inline constexpr const char* kConfigFormatVersion = "v1";

/// L2 norm of the row-major flattening of `z`. Throws InvalidScore for
/// non-finite entries and ShapeError for an empty tensor.
double aggregate(const Tensor& z);

/// Per-tap min-max statistics over the calibration set.
struct TapRange {
  std::string tap;
  double min = 0.0;
  double max = 0.0;

  friend bool operator==(const TapRange&, const TapRange&) = default;
};

enum class JointScaling { kRaw, kMinMax };

struct ObserverMeta {
  std::string format_version = kConfigFormatVersion;
  std::size_t b = 0;
  std::size_t n = 0;
  std::string label_file_hash;
  std::string created;  // ISO-8601 UTC
  JointScaling joint_scaling = JointScaling::kRaw;

  friend bool operator==(const ObserverMeta&, const ObserverMeta&) = default;
};

/// Calibrated observer: which taps to watch on which exact model.
struct ObserverConfig {
  std::string model_identity;
  std::vector<std::string> taps;
  std::string aggregation = kAggregationL2;
  std::optional<std::vector<TapRange>> normalization;  // aligned with `taps`
  ObserverMeta meta;

  friend bool operator==(const ObserverConfig&, const ObserverConfig&) = default;
};

/// Canonical JSON document: fixed key order, reals rounded to 9 significant
/// digits, so equal configs always produce equal bytes.
std::string serialize_config(const ObserverConfig& config);
/// Throws FormatVersionError for other versions or unknown fields,
/// ConfigParseError for malformed documents. Tap existence is not checked here.
ObserverConfig parse_config(const std::string& text);
void save_config(const ObserverConfig& config, const std::filesystem::path& path);
ObserverConfig load_config(const std::filesystem::path& path);
/// SHA-256 of the canonical serialization.
std::string config_hash(const ObserverConfig& config);

/// Rounds to 9 significant digits, the precision every file format stores.
double round9(double value);

/// Opens the model with exactly the config's taps exposed. Unknown taps
/// surface here (UnknownTap), model mismatches as CompatibilityError.
std::unique_ptr<InferenceSession> bind_observer(const std::filesystem::path& model_path,
                                                const ObserverConfig& config);
std::unique_ptr<InferenceSession> bind_observer(const std::filesystem::path& model_path,
                                                const ModelManifest& manifest,
                                                const ObserverConfig& config);

enum class ScoreMode {
  kConfigured,  // raw or min-max, whichever the observer was calibrated with
  kRaw,
  kMinMax,
};

/// Quality of one preprocessed input: the mean of the aggregated observed
/// taps, from exactly one forward pass.
double score(InferenceSession& session, const ObserverConfig& config, const Tensor& input,
             ScoreMode mode = ScoreMode::kConfigured);

/// Mean of the per-tap aggregates (optionally min-max normalized) taken from
/// an already computed forward result.
double score_from_taps(const ObserverConfig& config, const ForwardResult& result,
                       ScoreMode mode = ScoreMode::kConfigured);

struct ScoreEntry {
  std::string path;
  double score = 0.0;

  friend bool operator==(const ScoreEntry&, const ScoreEntry&) = default;
};

struct ScoreSet {
  std::string observer_hash;
  std::vector<ScoreEntry> entries;

  friend bool operator==(const ScoreSet&, const ScoreSet&) = default;
};

struct ScoreRun {
  ScoreSet scores;
  std::vector<ItemFailure> failures;
};

/// Scores images in order, one forward pass each.
ScoreRun score_batch(InferenceSession& session, const ObserverConfig& config,
                     std::span<const std::string> image_paths,
                     ScoreMode mode = ScoreMode::kConfigured, std::size_t threads = 1);

/// Scores TSV: `# froq-scores v1 observer=<config-hash>` then `path<TAB>score`.
std::string serialize_scores(const ScoreSet& scores);
ScoreSet parse_scores(const std::string& text);
void save_scores(const ScoreSet& scores, const std::filesystem::path& path);
ScoreSet load_scores(const std::filesystem::path& path);

}  // namespace froq
