// froq: single-pass face image quality from intermediate model activations.
//
//   froq inspect       list the taps a model exposes
//   froq pseudo-label  perturbation-based pseudo-quality labels
//   froq calibrate     choose the observed taps for a model
//   froq score         one-pass quality scores with a calibrated observer
//   froq embed         embedding store for verification
//   froq evaluate      EDC curve and pAUC for a set of quality scores

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "froq/auxiliary.hpp"
#include "froq/backend.hpp"
#include "froq/calibration.hpp"
#include "froq/error.hpp"
#include "froq/eval.hpp"
#include "froq/formats.hpp"
#include "froq/hash.hpp"
#include "froq/observer.hpp"
#include "froq/parallel.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "froq 0.1.0";

/// Reproducibility envelope written next to every primary output.
class RunManifest {
 public:
  explicit RunManifest(std::string command)
      : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {
    doc_["command"] = command_;
    doc_["tool_version"] = kToolVersion;
    doc_["parameters"] = ordered_json::object();
    doc_["inputs"] = ordered_json::object();
  }

  template <typename T>
  void param(const std::string& name, const T& value) {
    doc_["parameters"][name] = value;
  }

  void input(const std::string& label, const fs::path& path) {
    doc_["inputs"][label] = {{"path", path.string()}, {"sha256", froq::sha256_file(path)}};
  }

  void output(const std::string& label, const fs::path& path) {
    doc_["outputs"][label] = path.string();
  }

  void failures(std::span<const froq::ItemFailure> items) {
    ordered_json list = ordered_json::array();
    for (const auto& f : items) list.push_back({{"path", f.path}, {"message", f.message}});
    doc_["failures"] = std::move(list);
  }

  void warnings(std::span<const std::string> items) {
    doc_["warnings"] = std::vector<std::string>(items.begin(), items.end());
  }

  void passes(std::uint64_t count) { doc_["forward_passes"] = count; }

  /// Writes `<primary>.run.json`, or to stderr when the result went to stdout.
  void emit(const std::optional<fs::path>& primary) {
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_);
    doc_["duration_seconds"] = elapsed.count();
    if (!doc_.contains("forward_passes")) doc_["forward_passes"] = 0;
    const std::string text = doc_.dump(2) + "\n";
    if (primary) {
      froq::write_file(fs::path(primary->string() + ".run.json"), text);
    } else {
      std::cerr << text;
    }
  }

 private:
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  ordered_json doc_;
};

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

/// Image ids from a directory (sorted image files) or a list file (one path
/// per line, `#` comments). Ids are kept exactly as written.
std::vector<std::string> collect_images(const fs::path& source) {
  std::vector<std::string> images;
  if (fs::is_directory(source)) {
    for (const auto& entry : fs::directory_iterator(source)) {
      if (entry.is_regular_file() && is_image_file(entry.path())) {
        images.push_back((source / entry.path().filename()).string());
      }
    }
    std::sort(images.begin(), images.end());
  } else {
    const std::string contents = froq::read_file(source);
    for (auto line : froq::text::lines(contents)) {
      if (line.empty() || line.front() == '#') continue;
      images.emplace_back(line);
    }
  }
  if (images.empty()) {
    froq::fail(froq::ErrorKind::kInvalidParameter, "no images found in " + source.string());
  }
  return images;
}

/// First column of every non-comment line: accepts `froq inspect --format tsv`.
std::vector<std::string> read_taps_file(const fs::path& path) {
  std::vector<std::string> taps;
  const std::string contents = froq::read_file(path);
  for (auto line : froq::text::lines(contents)) {
    if (line.empty() || line.front() == '#') continue;
    taps.emplace_back(froq::text::split(line, '\t').front());
  }
  if (taps.empty()) froq::fail(froq::ErrorKind::kInvalidParameter, "no taps in " + path.string());
  return taps;
}

froq::ModelManifest manifest_for(const fs::path& model, const std::string& manifest) {
  return froq::load_manifest(manifest.empty() ? froq::default_manifest_path(model)
                                              : fs::path(manifest));
}

fs::path manifest_path(const fs::path& model, const std::string& manifest) {
  return manifest.empty() ? froq::default_manifest_path(model) : fs::path(manifest);
}

/// ISO-8601 UTC; SOURCE_DATE_EPOCH pins the value for reproducible runs.
std::string creation_time(const std::string& explicit_value) {
  if (!explicit_value.empty()) return explicit_value;
  std::time_t t = std::time(nullptr);
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
    t = static_cast<std::time_t>(froq::text::parse_integer(env, "SOURCE_DATE_EPOCH"));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_or_print(const std::optional<fs::path>& out, const std::string& text) {
  if (out) {
    froq::write_file(*out, text);
  } else {
    std::cout << text;
  }
}

std::optional<fs::path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

void report_problems(std::span<const froq::ItemFailure> failures,
                     std::span<const std::string> warnings) {
  for (const auto& f : failures) std::cerr << "warning: skipped " << f.path << ": " << f.message << "\n";
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

std::string shape_text(const froq::TapPoint& tap) {
  if (!tap.static_shape) return "?";
  std::string s;
  for (std::size_t i = 0; i < tap.static_shape->size(); ++i) {
    s += (i ? "x" : "") + std::to_string((*tap.static_shape)[i]);
  }
  return s;
}

// ---------------------------------------------------------------------------

struct InspectArgs {
  std::string model, manifest, format = "table", out;
};

int cmd_inspect(const InspectArgs& a) {
  RunManifest run("inspect");
  const auto manifest = manifest_for(a.model, a.manifest);
  const auto session = froq::load_model(a.model, manifest);
  const auto taps = session->list_taps();

  std::string text;
  if (a.format == "tsv") {
    text = "# froq-taps v1 model=" + session->model_identity() +
           " count=" + std::to_string(taps.size()) + "\n";
    for (const auto& t : taps) text += t.tap_id + "\t" + t.producer_kind + "\t" + shape_text(t) + "\n";
  } else {
    std::size_t w_id = 6, w_kind = 8;
    for (const auto& t : taps) {
      w_id = std::max(w_id, t.tap_id.size());
      w_kind = std::max(w_kind, t.producer_kind.size());
    }
    const auto pad = [](std::string s, std::size_t w) { return s.append(w - s.size() + 2, ' '); };
    text = pad("tap_id", w_id) + pad("producer", w_kind) + "shape\n";
    for (const auto& t : taps) text += pad(t.tap_id, w_id) + pad(t.producer_kind, w_kind) + shape_text(t) + "\n";
    text += "L = " + std::to_string(taps.size()) + "\n";
  }
  write_or_print(optional_path(a.out), text);

  run.param("format", a.format);
  run.param("tap_count", taps.size());
  run.input("model", a.model);
  run.input("manifest", manifest_path(a.model, a.manifest));
  run.passes(session->pass_count());
  run.emit(optional_path(a.out));
  return 0;
}

struct PseudoLabelArgs {
  std::string model, manifest, images, out;
  double alpha = 0.001;
  int occlusion_size = 14;
  std::uint64_t seed = 0;
};

int cmd_pseudo_label(const PseudoLabelArgs& a) {
  RunManifest run("pseudo-label");
  froq::AuxParams params{a.alpha, a.occlusion_size, a.seed};
  if (!(params.alpha >= 0.0 && params.alpha <= 1.0)) {
    froq::fail(froq::ErrorKind::kInvalidParameter, "--alpha must lie in [0, 1]");
  }
  const auto images = collect_images(a.images);
  const auto session = froq::load_model(a.model, manifest_for(a.model, a.manifest));
  const std::size_t threads = froq::default_thread_count();
  const auto result = froq::pseudo_label_set(*session, images, params, threads);
  write_or_print(optional_path(a.out), froq::serialize_labels(result.labels));
  report_problems(result.failures, {});

  run.param("alpha", a.alpha);
  run.param("occlusion_size", a.occlusion_size);
  run.param("seed", a.seed);
  run.param("threads", threads);
  run.param("images", images.size());
  run.input("model", a.model);
  run.input("manifest", manifest_path(a.model, a.manifest));
  run.input("images", a.images);
  run.failures(result.failures);
  run.passes(session->pass_count());
  run.emit(optional_path(a.out));
  return 0;
}

struct CalibrateArgs {
  std::string model, manifest, images, labels, taps_file, out, report, created;
  std::size_t top_b = 10;
  bool normalize = false;
  bool force = false;
};

int cmd_calibrate(const CalibrateArgs& a) {
  RunManifest run("calibrate");
  const auto labels = froq::load_labels(a.labels);
  const auto images = collect_images(a.images);
  const auto manifest = manifest_for(a.model, a.manifest);

  std::vector<std::string> taps;
  if (!a.taps_file.empty()) {
    taps = read_taps_file(a.taps_file);
  } else {
    taps = froq::tap_ids(froq::list_taps(a.model, manifest.embedding_output_name));
  }
  const auto session = froq::load_model(a.model, manifest, taps);

  froq::CalibrationOptions options;
  options.b = a.top_b;
  options.scaling = a.normalize ? froq::JointScaling::kMinMax : froq::JointScaling::kRaw;
  options.force = a.force;
  options.label_file_hash = froq::sha256_file(a.labels);
  options.created = creation_time(a.created);
  options.threads = froq::default_thread_count();
  if (a.force && labels.model_identity != session->model_identity()) {
    std::cerr << "warning: labels were produced with model " << labels.model_identity
              << "; continuing because of --force\n";
  }
  const auto result = froq::calibrate(*session, images, labels, options);

  const fs::path report_path = a.report.empty() ? fs::path(a.out + ".report.txt") : fs::path(a.report);
  froq::save_config(result.config, a.out);
  froq::write_file(report_path, froq::format_report(result.report));
  report_problems(result.failures, result.report.warnings);
  std::cout << "selected " << result.config.taps.size() << " taps, c^K = "
            << froq::text::real9(result.report.selected_correlation) << "\n";

  run.param("top_b", a.top_b);
  run.param("normalize", a.normalize);
  run.param("force", a.force);
  run.param("created", options.created);
  run.param("threads", options.threads);
  run.param("candidate_taps", taps.size());
  run.param("images", images.size());
  run.input("model", a.model);
  run.input("manifest", manifest_path(a.model, a.manifest));
  run.input("labels", a.labels);
  run.input("images", a.images);
  if (!a.taps_file.empty()) run.input("taps_file", a.taps_file);
  run.output("config", a.out);
  run.output("report", report_path);
  run.failures(result.failures);
  run.warnings(result.report.warnings);
  run.passes(session->pass_count());
  run.emit(fs::path(a.out));
  return 0;
}

struct ScoreArgs {
  std::string config, model, manifest, images, out;
  bool normalize_scores = false;
};

int cmd_score(const ScoreArgs& a) {
  RunManifest run("score");
  const auto config = froq::load_config(a.config);
  const auto images = collect_images(a.images);
  const auto session = froq::bind_observer(a.model, manifest_for(a.model, a.manifest), config);
  const std::size_t threads = froq::default_thread_count();
  const auto mode = a.normalize_scores ? froq::ScoreMode::kMinMax : froq::ScoreMode::kConfigured;
  const auto result = froq::score_batch(*session, config, images, mode, threads);
  write_or_print(optional_path(a.out), froq::serialize_scores(result.scores));
  report_problems(result.failures, {});

  run.param("normalize_scores", a.normalize_scores);
  run.param("threads", threads);
  run.param("images", images.size());
  run.input("config", a.config);
  run.input("model", a.model);
  run.input("manifest", manifest_path(a.model, a.manifest));
  run.input("images", a.images);
  run.failures(result.failures);
  run.passes(session->pass_count());
  run.emit(optional_path(a.out));
  return 0;
}

struct EmbedArgs {
  std::string model, manifest, images, out;
};

int cmd_embed(const EmbedArgs& a) {
  RunManifest run("embed");
  const auto images = collect_images(a.images);
  const auto session = froq::load_model(a.model, manifest_for(a.model, a.manifest));
  const std::size_t threads = froq::default_thread_count();
  const auto result = froq::embed_set(*session, images, threads);
  write_or_print(optional_path(a.out), froq::serialize_embeddings(result.store));
  report_problems(result.failures, {});

  run.param("threads", threads);
  run.param("images", images.size());
  run.input("model", a.model);
  run.input("manifest", manifest_path(a.model, a.manifest));
  run.input("images", a.images);
  run.failures(result.failures);
  run.passes(session->pass_count());
  run.emit(optional_path(a.out));
  return 0;
}

struct EvaluateArgs {
  std::string scores, pairs, model, manifest, embeddings, edc_out, svg_out, out;
  double fmr = 1e-3;
  double discard_max = 0.2;
};

int cmd_evaluate(const EvaluateArgs& a) {
  RunManifest run("evaluate");
  if (a.model.empty() == a.embeddings.empty()) {
    froq::fail(froq::ErrorKind::kInvalidParameter, "pass exactly one of --model or --embeddings");
  }
  const auto scores = froq::load_scores(a.scores);
  const auto protocol = froq::load_pairs(a.pairs);
  const auto qualities = froq::quality_map(scores);
  // Check alignment before spending any forward pass.
  for (const auto& image : protocol.images()) {
    if (!qualities.count(image)) {
      froq::fail(froq::ErrorKind::kAlignment, "pairs reference unscored image " + image);
    }
  }

  froq::EmbeddingStore store;
  std::uint64_t passes = 0;
  std::vector<froq::ItemFailure> failures;
  if (!a.embeddings.empty()) {
    store = froq::load_embeddings(a.embeddings);
    run.input("embeddings", a.embeddings);
  } else {
    const auto session = froq::load_model(a.model, manifest_for(a.model, a.manifest));
    const auto images = protocol.images();
    auto result = froq::embed_set(*session, images, froq::default_thread_count());
    store = std::move(result.store);
    failures = std::move(result.failures);
    passes = session->pass_count();
    run.input("model", a.model);
    run.input("manifest", manifest_path(a.model, a.manifest));
  }

  const auto pair_scores = froq::verification_scores(protocol, store);
  const auto curve = froq::edc_curve(protocol, pair_scores, qualities, a.fmr);
  froq::PaucSummary summary;
  summary.fmr_target = a.fmr;
  summary.threshold = curve.threshold;
  summary.discard_max = a.discard_max;
  summary.normalized = true;
  summary.fnmr_at_zero = curve.points.front().fnmr;
  summary.pauc = froq::pauc(curve, a.discard_max, true);
  summary.pairs = protocol.pairs.size();
  summary.undefined_points = static_cast<std::size_t>(std::count_if(
      curve.points.begin(), curve.points.end(), [](const auto& p) { return std::isnan(p.fnmr); }));

  if (!a.edc_out.empty()) froq::save_edc_csv(curve.points, a.edc_out);
  if (!a.svg_out.empty()) froq::write_file(a.svg_out, froq::render_edc_svg(curve, a.discard_max));
  write_or_print(optional_path(a.out), froq::serialize_pauc_summary(summary));
  if (!a.out.empty()) std::cout << "pAUC = " << froq::text::real9(summary.pauc) << "\n";
  report_problems(failures, curve.warnings);

  run.param("fmr", a.fmr);
  run.param("discard_max", a.discard_max);
  run.param("discard_grid", "101 points on [0, 0.5]");
  run.input("scores", a.scores);
  run.input("pairs", a.pairs);
  if (!a.edc_out.empty()) run.output("edc", a.edc_out);
  if (!a.svg_out.empty()) run.output("svg", a.svg_out);
  run.failures(failures);
  run.warnings(curve.warnings);
  run.passes(passes);
  run.emit(optional_path(a.out));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"froq: single-pass face image quality from intermediate model activations"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  const auto add_model = [](CLI::App* sub, std::string& model, std::string& manifest) {
    sub->add_option("--model", model, "ONNX face recognition model")->required()->check(CLI::ExistingFile);
    sub->add_option("--manifest", manifest, "preprocessing manifest (default: <model>.manifest)");
  };

  InspectArgs inspect;
  auto* inspect_cmd = app.add_subcommand("inspect", "list the taps a model exposes");
  add_model(inspect_cmd, inspect.model, inspect.manifest);
  inspect_cmd->add_option("--format", inspect.format, "table or tsv")
      ->check(CLI::IsMember({"table", "tsv"}))
      ->capture_default_str();
  inspect_cmd->add_option("--out", inspect.out, "output file (default: stdout)");

  PseudoLabelArgs label;
  auto* label_cmd = app.add_subcommand("pseudo-label", "perturbation-based pseudo-quality labels");
  add_model(label_cmd, label.model, label.manifest);
  label_cmd->add_option("--images", label.images, "image directory or list file")->required();
  label_cmd->add_option("--alpha", label.alpha, "noise strength")->capture_default_str();
  label_cmd->add_option("--occlusion-size", label.occlusion_size, "occlusion square side in pixels")
      ->capture_default_str();
  label_cmd->add_option("--seed", label.seed, "noise seed")->capture_default_str();
  label_cmd->add_option("--out", label.out, "labels TSV (default: stdout)");

  CalibrateArgs calib;
  auto* calib_cmd = app.add_subcommand("calibrate", "choose the observed taps");
  add_model(calib_cmd, calib.model, calib.manifest);
  calib_cmd->add_option("--images", calib.images, "image directory or list file")->required();
  calib_cmd->add_option("--labels", calib.labels, "pseudo-label TSV")->required();
  calib_cmd->add_option("--top-b", calib.top_b, "number of best single taps considered")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  calib_cmd->add_flag("--normalize", calib.normalize, "min-max scale taps before averaging");
  calib_cmd->add_flag("--force", calib.force, "accept labels produced with another model");
  calib_cmd->add_option("--taps-file", calib.taps_file, "candidate taps (first column per line)");
  calib_cmd->add_option("--created", calib.created, "timestamp recorded in the config");
  calib_cmd->add_option("--report", calib.report, "report path (default: <out>.report.txt)");
  calib_cmd->add_option("--out", calib.out, "observer config")->required();

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "quality scores with a calibrated observer");
  add_model(score_cmd, score.model, score.manifest);
  score_cmd->add_option("--config", score.config, "observer config")->required();
  score_cmd->add_option("--images", score.images, "image directory or list file")->required();
  score_cmd->add_flag("--normalize-scores", score.normalize_scores,
                      "emit min-max normalized scores");
  score_cmd->add_option("--out", score.out, "scores TSV (default: stdout)");

  EmbedArgs embed;
  auto* embed_cmd = app.add_subcommand("embed", "embedding store for verification");
  add_model(embed_cmd, embed.model, embed.manifest);
  embed_cmd->add_option("--images", embed.images, "image directory or list file")->required();
  embed_cmd->add_option("--out", embed.out, "embeddings file (default: stdout)");

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "EDC curve and pAUC");
  eval_cmd->add_option("--scores", eval.scores, "quality scores TSV")->required();
  eval_cmd->add_option("--pairs", eval.pairs, "pair protocol")->required();
  eval_cmd->add_option("--model", eval.model, "model used to embed the protocol images");
  eval_cmd->add_option("--manifest", eval.manifest, "preprocessing manifest");
  eval_cmd->add_option("--embeddings", eval.embeddings, "precomputed embeddings store");
  eval_cmd->add_option("--fmr", eval.fmr, "FMR operating point")->capture_default_str();
  eval_cmd->add_option("--discard-max", eval.discard_max, "pAUC discard cap")->capture_default_str();
  eval_cmd->add_option("--edc-out", eval.edc_out, "EDC CSV");
  eval_cmd->add_option("--svg-out", eval.svg_out, "EDC plot");
  eval_cmd->add_option("--out", eval.out, "pAUC summary (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*inspect_cmd) return cmd_inspect(inspect);
    if (*label_cmd) return cmd_pseudo_label(label);
    if (*calib_cmd) return cmd_calibrate(calib);
    if (*score_cmd) return cmd_score(score);
    if (*embed_cmd) return cmd_embed(embed);
    if (*eval_cmd) return cmd_evaluate(eval);
  } catch (const froq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return froq::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
