#include "froq/observer.hpp"

#include <cmath>
#include <set>

#include "froq/error.hpp"
#include "froq/formats.hpp"
#include "froq/hash.hpp"
#include "froq/imaging.hpp"
#include "json.hpp"

namespace froq {

using nlohmann::ordered_json;

double aggregate(const Tensor& z) {
  if (z.empty()) fail(ErrorKind::kShape, "cannot aggregate an empty tensor");
  double sum = 0.0;
  for (float v : z.data()) {
    if (!std::isfinite(v)) fail(ErrorKind::kInvalidScore, "non-finite value in tapped tensor");
    sum += static_cast<double>(v) * static_cast<double>(v);
  }
  return std::sqrt(sum);
}

double round9(double value) {
  return text::parse_real(text::real9(value), "round9");
}

namespace {

const char* scaling_name(JointScaling s) { return s == JointScaling::kRaw ? "raw" : "minmax"; }

[[noreturn]] void unknown_field(const std::string& where, const std::string& key) {
  fail(ErrorKind::kFormatVersion, "field '" + key + "' in " + where +
                                      " is not part of observer config " +
                                      kConfigFormatVersion);
}

void check_keys(const nlohmann::json& object, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!object.is_object()) fail(ErrorKind::kConfigParse, where + " must be an object");
  for (const auto& [key, value] : object.items()) {
    if (!allowed.count(key)) unknown_field(where, key);
  }
}

}  // namespace

std::string serialize_config(const ObserverConfig& config) {
  ordered_json doc;
  doc["model_identity"] = config.model_identity;
  doc["taps"] = config.taps;
  doc["aggregation"] = config.aggregation;
  if (config.normalization) {
    ordered_json ranges = ordered_json::array();
    for (const auto& r : *config.normalization) {
      ordered_json entry;
      entry["tap"] = r.tap;
      entry["min"] = round9(r.min);
      entry["max"] = round9(r.max);
      ranges.push_back(std::move(entry));
    }
    doc["normalization"] = std::move(ranges);
  } else {
    doc["normalization"] = nullptr;
  }
  ordered_json meta;
  meta["format_version"] = config.meta.format_version;
  meta["b"] = config.meta.b;
  meta["n"] = config.meta.n;
  meta["label_file_hash"] = config.meta.label_file_hash;
  meta["created"] = config.meta.created;
  meta["joint_scaling"] = scaling_name(config.meta.joint_scaling);
  doc["meta"] = std::move(meta);
  return doc.dump(2) + "\n";
}

ObserverConfig parse_config(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfigParse, std::string("observer config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::kConfigParse, "observer config must be an object");

  // Version first, so a future document is reported as such rather than as
  // a pile of unknown fields.
  try {
    const auto version = doc.at("meta").at("format_version").get<std::string>();
    if (version != kConfigFormatVersion) {
      fail(ErrorKind::kFormatVersion, "observer config version '" + version +
                                          "' is not supported (expected " +
                                          kConfigFormatVersion + ")");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfigParse, std::string("observer config lacks meta.format_version: ") +
                                      e.what());
  }
  check_keys(doc, {"model_identity", "taps", "aggregation", "normalization", "meta"}, "config");
  check_keys(doc["meta"], {"format_version", "b", "n", "label_file_hash", "created", "joint_scaling"},
             "meta");

  ObserverConfig config;
  try {
    config.model_identity = doc.at("model_identity").get<std::string>();
    config.taps = doc.at("taps").get<std::vector<std::string>>();
    config.aggregation = doc.at("aggregation").get<std::string>();
    const auto& meta = doc.at("meta");
    config.meta.format_version = meta.at("format_version").get<std::string>();
    config.meta.b = meta.at("b").get<std::size_t>();
    config.meta.n = meta.at("n").get<std::size_t>();
    config.meta.label_file_hash = meta.at("label_file_hash").get<std::string>();
    config.meta.created = meta.at("created").get<std::string>();
    const auto scaling = meta.at("joint_scaling").get<std::string>();
    if (scaling == "raw") {
      config.meta.joint_scaling = JointScaling::kRaw;
    } else if (scaling == "minmax") {
      config.meta.joint_scaling = JointScaling::kMinMax;
    } else {
      fail(ErrorKind::kConfigParse, "unknown joint_scaling '" + scaling + "'");
    }
    const auto& norm = doc.at("normalization");
    if (!norm.is_null()) {
      std::vector<TapRange> ranges;
      for (const auto& entry : norm) {
        check_keys(entry, {"tap", "min", "max"}, "normalization entry");
        ranges.push_back({entry.at("tap").get<std::string>(), entry.at("min").get<double>(),
                          entry.at("max").get<double>()});
      }
      config.normalization = std::move(ranges);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfigParse, std::string("malformed observer config: ") + e.what());
  }

  if (config.taps.empty()) fail(ErrorKind::kConfigParse, "observer config lists no taps");
  if (config.aggregation != kAggregationL2) {
    fail(ErrorKind::kConfigParse, "unsupported aggregation '" + config.aggregation + "'");
  }
  if (config.normalization) {
    if (config.normalization->size() != config.taps.size()) {
      fail(ErrorKind::kConfigParse, "normalization must list one range per tap");
    }
    for (std::size_t i = 0; i < config.taps.size(); ++i) {
      const auto& r = (*config.normalization)[i];
      if (r.tap != config.taps[i]) {
        fail(ErrorKind::kConfigParse, "normalization order differs from taps at " + r.tap);
      }
      if (!(r.min < r.max)) fail(ErrorKind::kConfigParse, "normalization needs min < max for " + r.tap);
    }
  }
  if (config.meta.joint_scaling == JointScaling::kMinMax && !config.normalization) {
    fail(ErrorKind::kConfigParse, "minmax joint scaling requires normalization ranges");
  }
  return config;
}

void save_config(const ObserverConfig& config, const std::filesystem::path& path) {
  write_file(path, serialize_config(config));
}

ObserverConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

std::string config_hash(const ObserverConfig& config) {
  return sha256_hex(serialize_config(config));
}

std::unique_ptr<InferenceSession> bind_observer(const std::filesystem::path& model_path,
                                                const ModelManifest& manifest,
                                                const ObserverConfig& config) {
  const std::string identity = sha256_file(model_path);
  if (identity != config.model_identity) {
    fail(ErrorKind::kCompatibility, "observer was calibrated for model " +
                                        config.model_identity + ", not " + identity);
  }
  return load_model(model_path, manifest, config.taps);
}

std::unique_ptr<InferenceSession> bind_observer(const std::filesystem::path& model_path,
                                                const ObserverConfig& config) {
  return bind_observer(model_path, load_manifest(default_manifest_path(model_path)), config);
}

double score_from_taps(const ObserverConfig& config, const ForwardResult& result,
                       ScoreMode mode) {
  bool normalized = mode == ScoreMode::kMinMax ||
                    (mode == ScoreMode::kConfigured &&
                     config.meta.joint_scaling == JointScaling::kMinMax);
  if (normalized && !config.normalization) {
    fail(ErrorKind::kInvalidParameter, "min-max scores need normalization ranges in the config");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < config.taps.size(); ++i) {
    auto it = result.tapped.find(config.taps[i]);
    if (it == result.tapped.end()) {
      fail(ErrorKind::kUnknownTap, "tap '" + config.taps[i] + "' is not active in the session");
    }
    double value = aggregate(it->second);
    if (normalized) {
      const auto& r = (*config.normalization)[i];
      value = (value - r.min) / (r.max - r.min);
    }
    sum += value;
  }
  return sum / static_cast<double>(config.taps.size());
}

double score(InferenceSession& session, const ObserverConfig& config, const Tensor& input,
             ScoreMode mode) {
  if (session.model_identity() != config.model_identity) {
    fail(ErrorKind::kCompatibility, "session model " + session.model_identity() +
                                        " does not match observer model " +
                                        config.model_identity);
  }
  for (const auto& tap : config.taps) {
    bool active = false;
    for (const auto& t : session.active_taps()) active = active || t.tap_id == tap;
    if (!active) fail(ErrorKind::kUnknownTap, "tap '" + tap + "' is not active in the session");
  }
  return score_from_taps(config, session.run(input), mode);
}

ScoreRun score_batch(InferenceSession& session, const ObserverConfig& config,
                     std::span<const std::string> image_paths, ScoreMode mode,
                     std::size_t threads) {
  if (image_paths.empty()) fail(ErrorKind::kInvalidParameter, "no images to score");
  std::vector<std::optional<double>> scores(image_paths.size());
  std::vector<std::string> errors(image_paths.size());
  parallel_for(image_paths.size(), threads, [&](std::size_t i) {
    try {
      scores[i] = score(session, config, load_and_preprocess(image_paths[i], session.manifest()),
                        mode);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kCompatibility || e.kind() == ErrorKind::kUnknownTap) throw;
      errors[i] = e.what();
    }
  });

  ScoreRun run;
  run.scores.observer_hash = config_hash(config);
  for (std::size_t i = 0; i < image_paths.size(); ++i) {
    if (scores[i]) {
      run.scores.entries.push_back({image_paths[i], *scores[i]});
    } else {
      run.failures.push_back({image_paths[i], errors[i]});
    }
  }
  enforce_failure_budget(run.failures, image_paths.size(), "scoring");
  return run;
}

std::string serialize_scores(const ScoreSet& scores) {
  std::string out = "# froq-scores v1 observer=" + scores.observer_hash + "\n";
  for (const auto& e : scores.entries) {
    if (e.path.find_first_of("\t\n") != std::string::npos) {
      fail(ErrorKind::kInvalidParameter, "image path contains a tab or newline: " + e.path);
    }
    out += e.path + "\t" + text::real9(e.score) + "\n";
  }
  return out;
}

ScoreSet parse_scores(const std::string& contents) {
  const auto rows = text::lines(contents);
  if (rows.empty()) fail(ErrorKind::kConfigParse, "empty scores file");
  const auto header = text::parse_header(rows[0], "froq-scores", "v1");
  ScoreSet scores;
  if (auto it = header.find("observer"); it != header.end()) scores.observer_hash = it->second;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].empty() || rows[i].front() == '#') continue;
    const auto fields = text::split(rows[i], '\t');
    if (fields.size() != 2) {
      fail(ErrorKind::kConfigParse, "scores line " + std::to_string(i + 1) + " needs 2 fields");
    }
    scores.entries.push_back({std::string(fields[0]), text::parse_real(fields[1], "score")});
  }
  return scores;
}

void save_scores(const ScoreSet& scores, const std::filesystem::path& path) {
  write_file(path, serialize_scores(scores));
}

ScoreSet load_scores(const std::filesystem::path& path) { return parse_scores(read_file(path)); }

}  // namespace froq
