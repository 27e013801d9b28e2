#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "froq/backend.hpp"
#include "froq/error.hpp"
#include "froq/hash.hpp"
#include "graph.hpp"
#include "json.hpp"

namespace froq {

namespace {

using onnx_backend::CompiledGraph;

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

[[noreturn]] void unknown_tap(const std::string& id, std::span<const TapPoint> eligible) {
  std::vector<std::pair<std::size_t, std::string>> ranked;
  for (const auto& tap : eligible) ranked.emplace_back(edit_distance(id, tap.tap_id), tap.tap_id);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::string message = "'" + id + "' is not an eligible tap";
  if (!ranked.empty()) {
    message += "; did you mean";
    for (std::size_t i = 0; i < std::min<std::size_t>(3, ranked.size()); ++i) {
      message += (i ? ", '" : " '") + ranked[i].second + "'";
    }
    message += "?";
  }
  fail(ErrorKind::kUnknownTap, message);
}

class OnnxSession final : public InferenceSession {
 public:
  OnnxSession(std::string identity, ModelManifest manifest, std::vector<TapPoint> eligible,
              std::vector<TapPoint> active, CompiledGraph graph)
      : identity_(std::move(identity)),
        manifest_(std::move(manifest)),
        eligible_(std::move(eligible)),
        active_(std::move(active)),
        graph_(std::move(graph)) {}

  const std::string& model_identity() const override { return identity_; }
  const ModelManifest& manifest() const override { return manifest_; }
  std::span<const TapPoint> active_taps() const override { return active_; }
  std::vector<TapPoint> list_taps() const override { return eligible_; }

 protected:
  ForwardResult forward(const Tensor& input) const override {
    auto outputs = onnx_backend::execute(graph_, input);
    ForwardResult result;
    auto it = outputs.find(manifest_.embedding_output_name);
    if (it == outputs.end()) {
      fail(ErrorKind::kModelFormat, "embedding output missing from execution results");
    }
    result.embedding = std::move(it->second).release();
    for (const auto& tap : active_) {
      auto found = outputs.find(tap.tap_id);
      result.tapped.emplace(tap.tap_id, std::move(found->second));
    }
    return result;
  }

 private:
  std::string identity_;
  ModelManifest manifest_;
  std::vector<TapPoint> eligible_;
  std::vector<TapPoint> active_;
  CompiledGraph graph_;
};

void check_input_shape(const onnx::GraphProto& graph, const ModelManifest& manifest) {
  const auto& input = onnx_backend::graph_input(graph);
  if (!input.type().has_tensor_type() || !input.type().tensor_type().has_shape()) return;
  const auto& dims = input.type().tensor_type().shape().dim();
  const Shape expected = manifest.input_shape();
  if (dims.size() != static_cast<int>(expected.size())) {
    fail(ErrorKind::kModelFormat, "model input rank " + std::to_string(dims.size()) +
                                      " does not match manifest input " +
                                      shape_to_string(expected));
  }
  for (int i = 1; i < dims.size(); ++i) {
    if (dims[i].has_dim_value() && dims[i].dim_value() > 0 &&
        dims[i].dim_value() != expected[i]) {
      fail(ErrorKind::kModelFormat, "model input dimension " + std::to_string(i) + " is " +
                                        std::to_string(dims[i].dim_value()) +
                                        " but manifest expects " + std::to_string(expected[i]));
    }
  }
}

}  // namespace

ForwardResult InferenceSession::run(const Tensor& input) {
  const Shape expected = manifest().input_shape();
  if (input.shape() != expected) {
    fail(ErrorKind::kShape, "input shape " + shape_to_string(input.shape()) +
                                " does not match expected " + shape_to_string(expected));
  }
  passes_.fetch_add(1);
  return forward(input);
}

std::filesystem::path default_manifest_path(const std::filesystem::path& model_path) {
  return std::filesystem::path(model_path.string() + ".manifest");
}

ModelManifest load_manifest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  ModelManifest manifest;
  try {
    const auto doc = nlohmann::json::parse(text);
    manifest.input_height = doc.at("input_height").get<int>();
    manifest.input_width = doc.at("input_width").get<int>();
    const auto order = doc.at("channel_order").get<std::string>();
    if (order == "RGB") {
      manifest.channel_order = ChannelOrder::kRgb;
    } else if (order == "BGR") {
      manifest.channel_order = ChannelOrder::kBgr;
    } else {
      fail(ErrorKind::kConfigParse, "channel_order must be RGB or BGR, got " + order);
    }
    manifest.mean = doc.at("mean").get<std::array<float, 3>>();
    manifest.std = doc.at("std").get<std::array<float, 3>>();
    manifest.embedding_output_name = doc.at("embedding_output_name").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfigParse, path.string() + ": " + e.what());
  }
  if (manifest.input_height <= 0 || manifest.input_width <= 0) {
    fail(ErrorKind::kConfigParse, path.string() + ": input dimensions must be positive");
  }
  for (float s : manifest.std) {
    if (!(s > 0.0f)) fail(ErrorKind::kConfigParse, path.string() + ": std must be positive");
  }
  return manifest;
}

void save_manifest(const ModelManifest& manifest, const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  doc["input_height"] = manifest.input_height;
  doc["input_width"] = manifest.input_width;
  doc["channel_order"] = manifest.channel_order == ChannelOrder::kRgb ? "RGB" : "BGR";
  doc["mean"] = manifest.mean;
  doc["std"] = manifest.std;
  doc["embedding_output_name"] = manifest.embedding_output_name;
  write_file(path, doc.dump(2) + "\n");
}

std::unique_ptr<InferenceSession> load_model(const std::filesystem::path& model_path,
                                             const ModelManifest& manifest,
                                             std::span<const std::string> taps) {
  const std::string bytes = read_file(model_path);
  onnx::ModelProto model = onnx_backend::parse_model(bytes, model_path.string());
  check_input_shape(model.graph(), manifest);

  bool embedding_found = false;
  for (const auto& out : model.graph().output()) {
    embedding_found = embedding_found || out.name() == manifest.embedding_output_name;
  }
  if (!embedding_found) {
    fail(ErrorKind::kModelFormat,
         "embedding output '" + manifest.embedding_output_name + "' is not a graph output");
  }

  auto eligible = onnx_backend::eligible_taps(model.graph(), manifest.embedding_output_name);
  std::vector<TapPoint> active;
  std::unordered_set<std::string> seen;
  for (const auto& id : taps) {
    auto it = std::find_if(eligible.begin(), eligible.end(),
                           [&](const TapPoint& t) { return t.tap_id == id; });
    if (it == eligible.end()) unknown_tap(id, eligible);
    if (seen.insert(id).second) active.push_back(*it);
  }

  onnx_backend::expose_outputs(model, tap_ids(active));
  auto compiled = onnx_backend::compile(model);
  return std::make_unique<OnnxSession>(sha256_hex(bytes), manifest, std::move(eligible),
                                       std::move(active), std::move(compiled));
}

std::unique_ptr<InferenceSession> load_model(const std::filesystem::path& model_path,
                                             std::span<const std::string> taps) {
  return load_model(model_path, load_manifest(default_manifest_path(model_path)), taps);
}

std::vector<TapPoint> list_taps(const std::filesystem::path& model_path,
                                const std::string& embedding_output_name) {
  const auto model = onnx_backend::parse_model(read_file(model_path), model_path.string());
  return onnx_backend::eligible_taps(model.graph(), embedding_output_name);
}

std::vector<std::string> tap_ids(std::span<const TapPoint> taps) {
  std::vector<std::string> ids;
  ids.reserve(taps.size());
  for (const auto& t : taps) ids.push_back(t.tap_id);
  return ids;
}

}  // namespace froq
