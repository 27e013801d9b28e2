#include "froq/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <unordered_map>

#include "froq/error.hpp"
#include "froq/formats.hpp"
#include "froq/hash.hpp"
#include "froq/imaging.hpp"
#include "froq/stats.hpp"
#include "json.hpp"

namespace froq {

namespace {

void check_path(const std::string& path) {
  if (path.empty() || path.find_first_of("\t\n") != std::string::npos) {
    fail(ErrorKind::kInvalidParameter, "image path is empty or contains a tab or newline: " + path);
  }
}

float parse_float(std::string_view token) {
  float value = 0.0f;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorKind::kConfigParse, "malformed embedding value '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

const Embedding* EmbeddingStore::find(const std::string& path) const {
  for (const auto& e : entries) {
    if (e.path == path) return &e.embedding;
  }
  return nullptr;
}

EmbeddingRun embed_set(InferenceSession& session, std::span<const std::string> image_paths,
                       std::size_t threads) {
  if (image_paths.empty()) fail(ErrorKind::kInvalidParameter, "no images to embed");
  std::vector<std::optional<Embedding>> embeddings(image_paths.size());
  std::vector<std::string> errors(image_paths.size());
  parallel_for(image_paths.size(), threads, [&](std::size_t i) {
    try {
      embeddings[i] =
          session.run(load_and_preprocess(image_paths[i], session.manifest())).embedding;
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  EmbeddingRun run;
  run.store.model_identity = session.model_identity();
  for (std::size_t i = 0; i < image_paths.size(); ++i) {
    if (embeddings[i]) {
      run.store.entries.push_back({image_paths[i], std::move(*embeddings[i])});
    } else {
      run.failures.push_back({image_paths[i], errors[i]});
    }
  }
  enforce_failure_budget(run.failures, image_paths.size(), "embedding extraction");
  return run;
}

std::string serialize_embeddings(const EmbeddingStore& store) {
  const std::size_t dim = store.entries.empty() ? 0 : store.entries.front().embedding.size();
  std::string out = "# froq-embeddings v1 model=" + store.model_identity +
                    " dim=" + std::to_string(dim) + "\n";
  for (const auto& e : store.entries) {
    check_path(e.path);
    if (e.embedding.size() != dim) {
      fail(ErrorKind::kShape, "embedding of " + e.path + " has dimension " +
                                  std::to_string(e.embedding.size()) + ", expected " +
                                  std::to_string(dim));
    }
    out += e.path + "\t";
    for (std::size_t k = 0; k < dim; ++k) {
      if (k) out += ',';
      out += text::real9(e.embedding[k]);
    }
    out += '\n';
  }
  return out;
}

EmbeddingStore parse_embeddings(const std::string& contents) {
  const auto rows = text::lines(contents);
  if (rows.empty()) fail(ErrorKind::kConfigParse, "empty embeddings file");
  const auto header = text::parse_header(rows[0], "froq-embeddings", "v1");
  EmbeddingStore store;
  long long dim = 0;
  try {
    store.model_identity = header.at("model");
    dim = text::parse_integer(header.at("dim"), "embeddings dim");
  } catch (const std::out_of_range&) {
    fail(ErrorKind::kConfigParse, "embeddings header lacks model/dim");
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].empty() || rows[i].front() == '#') continue;
    const auto fields = text::split(rows[i], '\t');
    if (fields.size() != 2) {
      fail(ErrorKind::kConfigParse, "embeddings line " + std::to_string(i + 1) + " needs 2 fields");
    }
    Embedding embedding;
    for (auto token : text::split(fields[1], ',')) embedding.push_back(parse_float(token));
    if (static_cast<long long>(embedding.size()) != dim) {
      fail(ErrorKind::kConfigParse, "embeddings line " + std::to_string(i + 1) + " has " +
                                        std::to_string(embedding.size()) + " values, expected " +
                                        std::to_string(dim));
    }
    store.entries.push_back({std::string(fields[0]), std::move(embedding)});
  }
  return store;
}

void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path) {
  write_file(path, serialize_embeddings(store));
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  return parse_embeddings(read_file(path));
}

std::vector<std::string> PairProtocol::images() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& p : pairs) {
    for (const auto* image : {&p.a, &p.b}) {
      if (seen.insert(*image).second) out.push_back(*image);
    }
  }
  return out;
}

std::string serialize_pairs(const PairProtocol& protocol) {
  std::string out;
  for (const auto& p : protocol.pairs) {
    check_path(p.a);
    check_path(p.b);
    out += p.a + "\t" + p.b + "\t" + (p.mated ? "1" : "0") + "\n";
  }
  return out;
}

PairProtocol parse_pairs(const std::string& contents) {
  PairProtocol protocol;
  const auto rows = text::lines(contents);
  bool any_mated = false;
  bool any_nonmated = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].empty() || rows[i].front() == '#') continue;
    const auto fields = text::split(rows[i], '\t');
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() ||
        (fields[2] != "0" && fields[2] != "1")) {
      fail(ErrorKind::kConfigParse,
           "pairs line " + std::to_string(i + 1) + " must be image_a<TAB>image_b<TAB>{0|1}");
    }
    const bool mated = fields[2] == "1";
    any_mated = any_mated || mated;
    any_nonmated = any_nonmated || !mated;
    protocol.pairs.push_back({std::string(fields[0]), std::string(fields[1]), mated});
  }
  if (!any_mated || !any_nonmated) {
    fail(ErrorKind::kConfigParse, "pair protocol needs at least one mated and one non-mated pair");
  }
  return protocol;
}

void save_pairs(const PairProtocol& protocol, const std::filesystem::path& path) {
  write_file(path, serialize_pairs(protocol));
}

PairProtocol load_pairs(const std::filesystem::path& path) { return parse_pairs(read_file(path)); }

std::vector<PairScore> verification_scores(const PairProtocol& protocol,
                                           const EmbeddingStore& embeddings) {
  std::unordered_map<std::string, const Embedding*> index;
  for (const auto& e : embeddings.entries) index.emplace(e.path, &e.embedding);
  const auto lookup = [&](const std::string& path) {
    auto it = index.find(path);
    if (it == index.end()) fail(ErrorKind::kAlignment, "no embedding for image " + path);
    return it->second;
  };
  std::vector<PairScore> scores;
  scores.reserve(protocol.pairs.size());
  for (const auto& p : protocol.pairs) {
    scores.push_back({stats::cosine_similarity(*lookup(p.a), *lookup(p.b)), p.mated});
  }
  return scores;
}

FmrThreshold threshold_at_fmr(std::span<const double> nonmated, double fmr_target) {
  if (!(fmr_target > 0.0 && fmr_target < 1.0)) {
    fail(ErrorKind::kInvalidParameter, "FMR target must lie in (0, 1)");
  }
  if (nonmated.empty()) fail(ErrorKind::kInvalidParameter, "no non-mated comparisons");
  stats::require_finite(nonmated);

  std::vector<double> sorted(nonmated.begin(), nonmated.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  // Largest admissible number of accepted non-mated comparisons; the epsilon
  // absorbs representation error in products such as 0.1 * 10.
  const auto budget = static_cast<std::size_t>(std::floor(fmr_target * static_cast<double>(n) + 1e-9));

  FmrThreshold result;
  for (std::size_t k = 0; k < n; k = static_cast<std::size_t>(
                                      std::upper_bound(sorted.begin(), sorted.end(), sorted[k]) -
                                      sorted.begin())) {
    // sorted[k] starts a tie block; accepting it accepts everything from k on.
    if (n - k <= budget) {
      result.threshold = sorted[k];
      result.realized_fmr = static_cast<double>(n - k) / static_cast<double>(n);
      return result;
    }
  }
  result.threshold = std::nextafter(sorted.back(), std::numeric_limits<double>::infinity());
  result.realized_fmr = 0.0;
  result.granularity_warning = true;
  return result;
}

std::vector<double> default_discard_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(i * 0.5 / 100.0);
  return grid;
}

std::map<std::string, double> quality_map(const ScoreSet& scores) {
  std::map<std::string, double> out;
  for (const auto& e : scores.entries) {
    if (!out.emplace(e.path, e.score).second) {
      fail(ErrorKind::kAlignment, "image " + e.path + " is scored twice");
    }
  }
  return out;
}

EdcCurve edc_curve(const PairProtocol& protocol, std::span<const PairScore> scores,
                   const std::map<std::string, double>& qualities, double fmr_target,
                   std::span<const double> grid) {
  if (scores.size() != protocol.pairs.size()) {
    fail(ErrorKind::kAlignment, std::to_string(scores.size()) + " comparison scores for " +
                                    std::to_string(protocol.pairs.size()) + " pairs");
  }
  if (grid.empty() || grid.front() != 0.0) {
    fail(ErrorKind::kInvalidParameter, "discard grid must start at 0");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      fail(ErrorKind::kInvalidParameter, "discard grid must increase within [0, 1]");
    }
  }

  // Image qualities over the images the protocol actually uses.
  const auto images = protocol.images();
  std::unordered_map<std::string, std::size_t> image_index;
  std::vector<double> image_quality;
  for (const auto& image : images) {
    auto it = qualities.find(image);
    if (it == qualities.end()) fail(ErrorKind::kAlignment, "no quality score for image " + image);
    image_index.emplace(image, image_quality.size());
    image_quality.push_back(it->second);
  }
  stats::require_finite(image_quality);

  std::vector<double> nonmated;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].mated != protocol.pairs[i].mated) {
      fail(ErrorKind::kAlignment, "comparison scores are not aligned with the protocol");
    }
    if (!scores[i].mated) nonmated.push_back(scores[i].similarity);
  }
  const auto threshold = threshold_at_fmr(nonmated, fmr_target);

  EdcCurve curve;
  curve.fmr_target = fmr_target;
  curve.threshold = threshold.threshold;
  if (threshold.granularity_warning) {
    curve.warnings.push_back("too few non-mated comparisons for FMR " + text::real9(fmr_target) +
                             "; threshold placed above the largest non-mated similarity");
  }

  struct MatedPair {
    std::size_t a;
    std::size_t b;
    bool false_non_match;
  };
  std::vector<MatedPair> mated;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!scores[i].mated) continue;
    const auto& p = protocol.pairs[i];
    mated.push_back({image_index.at(p.a), image_index.at(p.b),
                     scores[i].similarity < threshold.threshold});
  }

  for (double d : grid) {
    const double cut = stats::quantile_threshold(image_quality, d);
    std::size_t kept = 0;
    std::size_t errors = 0;
    for (const auto& m : mated) {
      if (image_quality[m.a] < cut || image_quality[m.b] < cut) continue;
      ++kept;
      if (m.false_non_match) ++errors;
    }
    double fnmr = std::numeric_limits<double>::quiet_NaN();
    if (kept > 0) {
      fnmr = static_cast<double>(errors) / static_cast<double>(kept);
    } else {
      curve.warnings.push_back("no mated comparison survives discard rate " + text::real9(d) +
                               "; point left undefined");
    }
    curve.points.push_back({d, fnmr});
  }
  return curve;
}

EdcCurve edc_curve(const PairProtocol& protocol, std::span<const PairScore> scores,
                   const std::map<std::string, double>& qualities, double fmr_target) {
  return edc_curve(protocol, scores, qualities, fmr_target, default_discard_grid());
}

double pauc(const EdcCurve& curve, double discard_max, bool normalize) {
  if (!(discard_max > 0.0 && discard_max <= 1.0)) {
    fail(ErrorKind::kInvalidParameter, "discard_max must lie in (0, 1]");
  }
  if (curve.points.empty() || curve.points.front().discard_rate != 0.0 ||
      std::isnan(curve.points.front().fnmr)) {
    fail(ErrorKind::kDegenerateInput, "EDC curve has no defined point at discard rate 0");
  }
  const double base = curve.points.front().fnmr;
  if (normalize && base == 0.0) {
    fail(ErrorKind::kDegenerateInput, "FNMR at 0% discard is 0; there is nothing to improve");
  }

  // Defined points up to discard_max, closing the interval by linear
  // interpolation when discard_max falls between two points.
  std::vector<EdcPoint> pts;
  for (const auto& p : curve.points) {
    if (std::isnan(p.fnmr)) continue;
    if (p.discard_rate <= discard_max) {
      pts.push_back(p);
      continue;
    }
    const auto& prev = pts.back();
    const double w = (discard_max - prev.discard_rate) / (p.discard_rate - prev.discard_rate);
    pts.push_back({discard_max, prev.fnmr + w * (p.fnmr - prev.fnmr)});
    break;
  }
  if (pts.back().discard_rate != discard_max) {
    fail(ErrorKind::kInvalidParameter, "EDC curve ends before discard rate " +
                                           text::real9(discard_max));
  }

  if (!normalize) {
    double area = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      area += (pts[i].discard_rate - pts[i - 1].discard_rate) *
              (pts[i].fnmr + pts[i - 1].fnmr) / 2.0;
    }
    return area;
  }
  // Integrating the deficit 1 - FNMR/FNMR(0) keeps a flat curve at exactly 1.
  double deficit = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double r0 = 1.0 - pts[i - 1].fnmr / base;
    const double r1 = 1.0 - pts[i].fnmr / base;
    deficit += (pts[i].discard_rate - pts[i - 1].discard_rate) * (r0 + r1) / 2.0;
  }
  return 1.0 - deficit / discard_max;
}

std::string serialize_edc_csv(std::span<const EdcPoint> points) {
  std::string out = "discard_rate,fnmr\n";
  for (const auto& p : points) {
    out += text::shortest(p.discard_rate) + "," + text::shortest(p.fnmr) + "\n";
  }
  return out;
}

std::vector<EdcPoint> parse_edc_csv(const std::string& contents) {
  const auto rows = text::lines(contents);
  if (rows.empty() || rows[0] != "discard_rate,fnmr") {
    fail(ErrorKind::kConfigParse, "EDC CSV must start with 'discard_rate,fnmr'");
  }
  std::vector<EdcPoint> points;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto fields = text::split(rows[i], ',');
    if (fields.size() != 2) {
      fail(ErrorKind::kConfigParse, "EDC CSV line " + std::to_string(i + 1) + " needs 2 fields");
    }
    const double fnmr = fields[1] == "nan" ? std::numeric_limits<double>::quiet_NaN()
                                           : text::parse_real(fields[1], "EDC fnmr");
    points.push_back({text::parse_real(fields[0], "EDC discard rate"), fnmr});
  }
  return points;
}

void save_edc_csv(std::span<const EdcPoint> points, const std::filesystem::path& path) {
  write_file(path, serialize_edc_csv(points));
}

std::vector<EdcPoint> load_edc_csv(const std::filesystem::path& path) {
  return parse_edc_csv(read_file(path));
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string render_edc_svg(const EdcCurve& curve, double discard_max) {
  constexpr double kWidth = 640, kHeight = 420;
  constexpr double kLeft = 70, kRight = 20, kTop = 30, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double x_max = discard_max;
  double y_max = 0.0;
  for (const auto& p : curve.points) {
    x_max = std::max(x_max, p.discard_rate);
    if (!std::isnan(p.fnmr)) y_max = std::max(y_max, p.fnmr);
  }
  y_max = y_max > 0.0 ? std::min(1.0, std::ceil(y_max * 10.0) / 10.0) : 1.0;
  const auto sx = [&](double x) { return kLeft + x / x_max * plot_w; };
  const auto sy = [&](double y) { return kTop + (1.0 - y / y_max) * plot_h; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth, 0) +
         "\" height=\"" + fixed(kHeight, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // Axes.
  svg += "<line x1=\"" + fixed(kLeft, 2) + "\" y1=\"" + fixed(kTop + plot_h, 2) + "\" x2=\"" +
         fixed(kLeft + plot_w, 2) + "\" y2=\"" + fixed(kTop + plot_h, 2) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fixed(kLeft, 2) + "\" y1=\"" + fixed(kTop, 2) + "\" x2=\"" +
         fixed(kLeft, 2) + "\" y2=\"" + fixed(kTop + plot_h, 2) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double x = x_max * i / 5.0;
    const double y = y_max * i / 5.0;
    svg += "<text x=\"" + fixed(sx(x), 2) + "\" y=\"" + fixed(kTop + plot_h + 18, 2) +
           "\" text-anchor=\"middle\">" + fixed(x, 2) + "</text>\n";
    svg += "<text x=\"" + fixed(kLeft - 8, 2) + "\" y=\"" + fixed(sy(y) + 4, 2) +
           "\" text-anchor=\"end\">" + fixed(y, 2) + "</text>\n";
  }
  svg += "<text x=\"" + fixed(kLeft + plot_w / 2, 2) + "\" y=\"" + fixed(kHeight - 15, 2) +
         "\" text-anchor=\"middle\">Discard rate</text>\n";
  svg += "<text x=\"18\" y=\"" + fixed(kTop + plot_h / 2, 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " + fixed(kTop + plot_h / 2, 2) +
         ")\">FNMR at FMR=" + text::real9(curve.fmr_target) + "</text>\n";
  // pAUC cut-off.
  svg += "<line x1=\"" + fixed(sx(discard_max), 2) + "\" y1=\"" + fixed(kTop, 2) + "\" x2=\"" +
         fixed(sx(discard_max), 2) + "\" y2=\"" + fixed(kTop + plot_h, 2) +
         "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
  // Curve; undefined points break the line.
  std::string path;
  bool pen_down = false;
  for (const auto& p : curve.points) {
    if (std::isnan(p.fnmr)) {
      pen_down = false;
      continue;
    }
    path += (pen_down ? " L" : (path.empty() ? "M" : " M")) + fixed(sx(p.discard_rate), 2) + " " +
            fixed(sy(p.fnmr), 2);
    pen_down = true;
  }
  if (!path.empty()) {
    svg += "<path d=\"" + path + "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string serialize_pauc_summary(const PaucSummary& summary) {
  nlohmann::ordered_json doc;
  doc["fmr_target"] = summary.fmr_target;
  doc["threshold"] = summary.threshold;
  doc["discard_max"] = summary.discard_max;
  doc["normalized"] = summary.normalized;
  doc["fnmr_at_zero"] = summary.fnmr_at_zero;
  doc["pauc"] = summary.pauc;
  doc["pairs"] = summary.pairs;
  doc["undefined_points"] = summary.undefined_points;
  return doc.dump(2) + "\n";
}

}  // namespace froq
