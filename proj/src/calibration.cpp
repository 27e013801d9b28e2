#include "froq/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <unordered_map>

#include "froq/error.hpp"
#include "froq/formats.hpp"
#include "froq/imaging.hpp"
#include "froq/stats.hpp"

namespace froq {

LayerScoreMatrix::LayerScoreMatrix(std::vector<std::string> taps, std::vector<std::string> images,
                                   std::vector<double> scores)
    : taps_(std::move(taps)), images_(std::move(images)), scores_(std::move(scores)) {
  if (scores_.size() != taps_.size() * images_.size()) {
    fail(ErrorKind::kShape, "score matrix size does not match " +
                                std::to_string(images_.size()) + " x " +
                                std::to_string(taps_.size()));
  }
}

std::vector<double> LayerScoreMatrix::column(std::size_t tap) const {
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = at(i, tap);
  return out;
}

LayerScoreMatrix LayerScoreMatrix::select_columns(std::span<const std::size_t> columns) const {
  std::vector<std::string> taps;
  for (auto c : columns) taps.push_back(taps_.at(c));
  std::vector<double> scores;
  scores.reserve(rows() * columns.size());
  for (std::size_t i = 0; i < rows(); ++i) {
    for (auto c : columns) scores.push_back(at(i, c));
  }
  return LayerScoreMatrix(std::move(taps), images_, std::move(scores));
}

LayerScan layer_scan(InferenceSession& session, std::span<const std::string> image_paths,
                     std::size_t threads) {
  if (image_paths.empty()) fail(ErrorKind::kInvalidParameter, "no calibration images");
  const auto taps = session.active_taps();
  if (taps.empty()) fail(ErrorKind::kInvalidParameter, "layer scan needs at least one active tap");
  const std::size_t width = taps.size();

  // NaN marks a non-finite tap value; rows stay empty for failed images.
  std::vector<std::vector<double>> rows(image_paths.size());
  std::vector<std::string> errors(image_paths.size());
  parallel_for(image_paths.size(), threads, [&](std::size_t i) {
    try {
      const auto result = session.run(load_and_preprocess(image_paths[i], session.manifest()));
      std::vector<double> row(width);
      for (std::size_t l = 0; l < width; ++l) {
        const Tensor& z = result.tapped.at(taps[l].tap_id);
        try {
          row[l] = aggregate(z);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kInvalidScore) throw;
          row[l] = std::numeric_limits<double>::quiet_NaN();
        }
      }
      rows[i] = std::move(row);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  LayerScan scan;
  std::vector<std::string> images;
  std::vector<std::size_t> kept_rows;
  for (std::size_t i = 0; i < image_paths.size(); ++i) {
    if (rows[i].empty()) {
      scan.failures.push_back({image_paths[i], errors[i]});
    } else {
      images.push_back(image_paths[i]);
      kept_rows.push_back(i);
    }
  }
  enforce_failure_budget(scan.failures, image_paths.size(), "layer scan");

  std::vector<std::size_t> kept_cols;
  for (std::size_t l = 0; l < width; ++l) {
    const bool finite = std::all_of(kept_rows.begin(), kept_rows.end(),
                                     [&](std::size_t i) { return std::isfinite(rows[i][l]); });
    if (finite) {
      kept_cols.push_back(l);
    } else {
      scan.warnings.push_back("tap '" + taps[l].tap_id +
                              "' produced non-finite values and was excluded");
    }
  }
  std::vector<std::string> names;
  for (auto l : kept_cols) names.push_back(taps[l].tap_id);
  std::vector<double> values;
  values.reserve(kept_rows.size() * kept_cols.size());
  for (auto i : kept_rows) {
    for (auto l : kept_cols) values.push_back(rows[i][l]);
  }
  scan.matrix = LayerScoreMatrix(std::move(names), std::move(images), std::move(values));
  return scan;
}

std::vector<double> align_labels(const LayerScoreMatrix& matrix, const PseudoLabelSet& labels) {
  std::unordered_map<std::string, double> by_path;
  for (const auto& e : labels.entries) by_path.emplace(e.path, e.label);
  std::vector<double> aligned;
  aligned.reserve(matrix.rows());
  for (const auto& image : matrix.images()) {
    auto it = by_path.find(image);
    if (it == by_path.end()) fail(ErrorKind::kAlignment, "no pseudo-label for image " + image);
    aligned.push_back(it->second);
  }
  return aligned;
}

LayerCorrelations layer_correlations(const LayerScoreMatrix& matrix,
                                     std::span<const double> labels) {
  if (labels.size() != matrix.rows()) {
    fail(ErrorKind::kAlignment, std::to_string(labels.size()) + " labels for " +
                                    std::to_string(matrix.rows()) + " images");
  }
  LayerCorrelations out;
  for (std::size_t l = 0; l < matrix.cols(); ++l) {
    const auto column = matrix.column(l);
    try {
      out.taps.push_back({matrix.taps()[l], l, stats::spearman(labels, column)});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kDegenerateInput) throw;
      // Either the column or the labels are constant. Constant labels make
      // every tap degenerate, which surfaces later as an empty candidate set.
      out.warnings.push_back("tap '" + matrix.taps()[l] + "' is constant over the calibration set"
                             " and was excluded");
    }
  }
  return out;
}

LayerCorrelations layer_correlations(const LayerScoreMatrix& matrix,
                                     const PseudoLabelSet& labels) {
  return layer_correlations(matrix, align_labels(matrix, labels));
}

std::vector<TapCorrelation> top_b(std::span<const TapCorrelation> correlations, std::size_t b) {
  std::vector<TapCorrelation> sorted(correlations.begin(), correlations.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) {
    if (x.correlation != y.correlation) return x.correlation > y.correlation;
    return x.column < y.column;
  });
  if (sorted.size() > b) sorted.resize(b);
  return sorted;
}

namespace {

struct ColumnRange {
  double min = 0.0;
  double max = 0.0;
};

ColumnRange column_range(std::span<const double> column) {
  auto [lo, hi] = std::minmax_element(column.begin(), column.end());
  return {round9(*lo), round9(*hi)};
}

double joint_correlation(std::span<const double> labels,
                         const std::vector<const std::vector<double>*>& columns) {
  std::vector<double> joint(labels.size(), 0.0);
  for (const auto* column : columns) {
    for (std::size_t i = 0; i < joint.size(); ++i) joint[i] += (*column)[i];
  }
  const double count = static_cast<double>(columns.size());
  for (double& v : joint) v /= count;
  try {
    return stats::spearman(labels, joint);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kDegenerateInput) throw;
    return -std::numeric_limits<double>::infinity();
  }
}

}  // namespace

CalibrationReport greedy_select(const LayerScoreMatrix& matrix, std::span<const double> labels,
                                std::size_t b, JointScaling scaling) {
  if (b < 1) fail(ErrorKind::kInvalidParameter, "b must be at least 1");
  CalibrationReport report;
  auto correlations = layer_correlations(matrix, labels);
  report.per_tap = correlations.taps;
  report.warnings = std::move(correlations.warnings);
  const auto best = top_b(report.per_tap, b);
  if (best.empty()) fail(ErrorKind::kDegenerateInput, "no non-degenerate tap to select from");
  for (const auto& t : best) report.top_b.push_back(t.tap);

  // Candidate columns, optionally rescaled to [0, 1].
  std::vector<std::vector<double>> columns;
  for (const auto& t : best) {
    auto column = matrix.column(t.column);
    if (scaling == JointScaling::kMinMax) {
      const auto r = column_range(column);
      for (double& v : column) v = (v - r.min) / (r.max - r.min);
    }
    columns.push_back(std::move(column));
  }

  // Step 1 evaluates every singleton; their joint correlation is c^l.
  for (const auto& t : best) report.greedy_trace.push_back({1, {t.tap}, t.correlation});

  std::vector<std::size_t> chosen{0};
  std::vector<bool> used(best.size(), false);
  used[0] = true;
  report.prefix_correlations.push_back(best[0].correlation);

  for (std::size_t step = 2; step <= best.size(); ++step) {
    std::optional<std::size_t> winner;
    double winner_corr = 0.0;
    // Candidates in topological (column) order so that ties favor earlier taps.
    std::vector<std::size_t> candidates;
    for (std::size_t k = 0; k < best.size(); ++k) {
      if (!used[k]) candidates.push_back(k);
    }
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t x, std::size_t y) {
      return best[x].column < best[y].column;
    });
    for (std::size_t k : candidates) {
      std::vector<const std::vector<double>*> set;
      std::vector<std::string> names;
      for (std::size_t c : chosen) {
        set.push_back(&columns[c]);
        names.push_back(best[c].tap);
      }
      set.push_back(&columns[k]);
      names.push_back(best[k].tap);
      const double corr = joint_correlation(labels, set);
      report.greedy_trace.push_back({step, std::move(names), corr});
      if (!winner || corr > winner_corr) {
        winner = k;
        winner_corr = corr;
      }
    }
    chosen.push_back(*winner);
    used[*winner] = true;
    report.prefix_correlations.push_back(winner_corr);
  }

  std::size_t best_prefix = 0;
  for (std::size_t n = 1; n < report.prefix_correlations.size(); ++n) {
    if (report.prefix_correlations[n] > report.prefix_correlations[best_prefix]) best_prefix = n;
  }
  for (std::size_t n = 0; n <= best_prefix; ++n) report.selected.push_back(best[chosen[n]].tap);
  report.selected_correlation = report.prefix_correlations[best_prefix];
  return report;
}

CalibrationResult calibrate(InferenceSession& session, std::span<const std::string> image_paths,
                            const PseudoLabelSet& labels, const CalibrationOptions& options) {
  if (!options.force && labels.model_identity != session.model_identity()) {
    fail(ErrorKind::kCompatibility, "labels were produced with model " + labels.model_identity +
                                        ", calibrating model " + session.model_identity() +
                                        " (override with force)");
  }
  if (options.b < 1) fail(ErrorKind::kInvalidParameter, "b must be at least 1");

  auto scan = layer_scan(session, image_paths, options.threads);
  const auto aligned = align_labels(scan.matrix, labels);

  CalibrationResult result;
  result.report = greedy_select(scan.matrix, aligned, options.b, options.scaling);
  result.report.warnings.insert(result.report.warnings.begin(), scan.warnings.begin(),
                                scan.warnings.end());
  if (result.report.per_tap.size() < options.b) {
    result.report.warnings.push_back("only " + std::to_string(result.report.per_tap.size()) +
                                     " usable taps for b = " + std::to_string(options.b));
  }
  result.failures = std::move(scan.failures);

  ObserverConfig& config = result.config;
  config.model_identity = session.model_identity();
  config.taps = result.report.selected;
  std::vector<TapRange> ranges;
  for (const auto& tap : config.taps) {
    const auto it = std::find(scan.matrix.taps().begin(), scan.matrix.taps().end(), tap);
    const auto r = column_range(scan.matrix.column(
        static_cast<std::size_t>(it - scan.matrix.taps().begin())));
    ranges.push_back({tap, r.min, r.max});
  }
  config.normalization = std::move(ranges);
  config.meta.b = options.b;
  config.meta.n = scan.matrix.rows();
  config.meta.label_file_hash = options.label_file_hash;
  config.meta.created = options.created;
  config.meta.joint_scaling = options.scaling;
  return result;
}

std::string format_report(const CalibrationReport& report) {
  std::string out = "# froq calibration report\n\n";
  out += "## per-tap Spearman correlation (" + std::to_string(report.per_tap.size()) + " taps)\n";
  out += "tap\tcorrelation\n";
  for (const auto& t : report.per_tap) out += t.tap + "\t" + text::real9(t.correlation) + "\n";

  out += "\n## top-b (" + std::to_string(report.top_b.size()) + ")\n";
  for (std::size_t i = 0; i < report.top_b.size(); ++i) {
    out += std::to_string(i + 1) + "\t" + report.top_b[i] + "\n";
  }

  out += "\n## greedy trace (" + std::to_string(report.greedy_trace.size()) + " evaluations)\n";
  out += "step\tcorrelation\tcandidate\n";
  for (const auto& s : report.greedy_trace) {
    std::string set;
    for (std::size_t i = 0; i < s.candidate.size(); ++i) set += (i ? "," : "") + s.candidate[i];
    out += std::to_string(s.step) + "\t" + text::real9(s.correlation) + "\t" + set + "\n";
  }

  out += "\n## prefix correlations\n";
  for (std::size_t n = 0; n < report.prefix_correlations.size(); ++n) {
    out += "K^" + std::to_string(n + 1) + "\t" + text::real9(report.prefix_correlations[n]) + "\n";
  }

  out += "\n## selected (|K| = " + std::to_string(report.selected.size()) +
         ", c^K = " + text::real9(report.selected_correlation) + ")\n";
  for (const auto& tap : report.selected) out += tap + "\n";

  if (!report.warnings.empty()) {
    out += "\n## warnings\n";
    for (const auto& w : report.warnings) out += w + "\n";
  }
  return out;
}

}  // namespace froq
