#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "froq/auxiliary.hpp"
#include "froq/backend.hpp"
#include "froq/observer.hpp"
#include "froq/parallel.hpp"

// Observer initialization: find the taps whose activation norms rank the
// calibration images the way the pseudo-labels do.
namespace froq {

/// N x L matrix of aggregated tap values, row-major. Column order follows the
/// model's topological tap order; row order follows `images`.
class LayerScoreMatrix {
 public:
  LayerScoreMatrix() = default;
  LayerScoreMatrix(std::vector<std::string> taps, std::vector<std::string> images,
                   std::vector<double> scores);

  const std::vector<std::string>& taps() const noexcept { return taps_; }
  const std::vector<std::string>& images() const noexcept { return images_; }
  std::size_t rows() const noexcept { return images_.size(); }
  std::size_t cols() const noexcept { return taps_.size(); }

  double at(std::size_t image, std::size_t tap) const { return scores_[image * cols() + tap]; }
  std::vector<double> column(std::size_t tap) const;
  std::span<const double> values() const noexcept { return scores_; }

  /// Matrix with only the given columns, in the given order.
  LayerScoreMatrix select_columns(std::span<const std::size_t> columns) const;

 private:
  std::vector<std::string> taps_;
  std::vector<std::string> images_;
  std::vector<double> scores_;
};

struct LayerScan {
  LayerScoreMatrix matrix;
  std::vector<ItemFailure> failures;
  std::vector<std::string> warnings;  // one per excluded tap
};

/// One forward pass per image with every active tap exposed; entry (i, l) is
/// aggregate(tap l of image i). Taps producing non-finite values for any
/// image are dropped with a warning.
LayerScan layer_scan(InferenceSession& session, std::span<const std::string> image_paths,
                     std::size_t threads = 1);

struct TapCorrelation {
  std::string tap;
  std::size_t column = 0;  // index in the source matrix (topological order)
  double correlation = 0.0;
};

struct LayerCorrelations {
  std::vector<TapCorrelation> taps;   // matrix column order, degenerate taps removed
  std::vector<std::string> warnings;
};

/// Labels aligned to the matrix rows by image id. Throws AlignmentError when a
/// row has no label. Extra labels are ignored.
std::vector<double> align_labels(const LayerScoreMatrix& matrix, const PseudoLabelSet& labels);

/// Spearman correlation of each column with the labels. Constant columns are
/// excluded with a warning instead of being assigned 0.
LayerCorrelations layer_correlations(const LayerScoreMatrix& matrix,
                                     std::span<const double> labels);
LayerCorrelations layer_correlations(const LayerScoreMatrix& matrix,
                                     const PseudoLabelSet& labels);

/// Highest `b` correlations, descending; ties go to the earlier column.
std::vector<TapCorrelation> top_b(std::span<const TapCorrelation> correlations, std::size_t b);

struct GreedyStep {
  std::size_t step = 0;                 // 1-based greedy step
  std::vector<std::string> candidate;   // K^n plus the tap under evaluation
  double correlation = 0.0;
};

struct CalibrationReport {
  std::vector<TapCorrelation> per_tap;       // every retained tap
  std::vector<std::string> top_b;            // L^b, best first
  std::vector<GreedyStep> greedy_trace;      // every joint evaluation, in order
  std::vector<double> prefix_correlations;   // c^{K^n} for n = 1..|L^b|
  std::vector<std::string> selected;         // K, in selection order
  double selected_correlation = 0.0;
  std::vector<std::string> warnings;
};

/// Greedy forward selection over the top-b taps.
///
/// K^1 holds the single best tap. Each step appends the tap that maximizes
/// the Spearman correlation between the labels and the element-wise mean of
/// the chosen columns; ties go to the earlier column. After |L^b| - 1 steps
/// the prefix K^n with the highest correlation is returned (smallest n on
/// ties). That costs at most b(b+1)/2 joint evaluations.
///
/// With JointScaling::kMinMax each column is rescaled to [0, 1] by its
/// calibration-set range before averaging.
CalibrationReport greedy_select(const LayerScoreMatrix& matrix, std::span<const double> labels,
                                std::size_t b, JointScaling scaling = JointScaling::kRaw);

struct CalibrationOptions {
  std::size_t b = 10;
  JointScaling scaling = JointScaling::kRaw;
  bool force = false;            // accept labels made with another model
  std::string label_file_hash;   // recorded in the config
  std::string created;           // timestamp recorded in the config
  std::size_t threads = 1;
};

struct CalibrationResult {
  ObserverConfig config;
  CalibrationReport report;
  std::vector<ItemFailure> failures;
};

/// Full observer initialization: layer scan over `image_paths`, correlation
/// with the labels, greedy selection. The session must expose every eligible
/// tap. Throws CompatibilityError when the labels were produced with a
/// different model, unless `options.force` is set.
CalibrationResult calibrate(InferenceSession& session, std::span<const std::string> image_paths,
                            const PseudoLabelSet& labels, const CalibrationOptions& options);

/// Human-readable report: per-tap correlations, greedy trace, final K.
std::string format_report(const CalibrationReport& report);

}  // namespace froq
