#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "froq/tensor.hpp"

namespace froq {

using Embedding = std::vector<float>;

enum class ChannelOrder { kRgb, kBgr };

/// Preprocessing sidecar for a model. The exchange format does not carry
/// input normalization, so it lives next to the model as `<model>.manifest`.
/// `mean`/`std` are indexed in the model's channel order.
struct ModelManifest {
  int input_height = 112;
  int input_width = 112;
  ChannelOrder channel_order = ChannelOrder::kRgb;
  std::array<float, 3> mean{0.5f, 0.5f, 0.5f};
  std::array<float, 3> std{0.5f, 0.5f, 0.5f};
  std::string embedding_output_name;

  Shape input_shape() const { return {1, 3, input_height, input_width}; }

  friend bool operator==(const ModelManifest&, const ModelManifest&) = default;
};

ModelManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const ModelManifest& manifest, const std::filesystem::path& path);
/// `<model>.manifest`, the default sidecar location.
std::filesystem::path default_manifest_path(const std::filesystem::path& model_path);

/// A computed value inside the model graph that can be exposed for observation.
struct TapPoint {
  std::string tap_id;
  std::string producer_kind;
  std::optional<Shape> static_shape;  // nullopt when any dimension is dynamic

  friend bool operator==(const TapPoint&, const TapPoint&) = default;
};

struct ForwardResult {
  Embedding embedding;
  std::map<std::string, Tensor> tapped;
};

/// A loaded recognition model plus the set of taps it exposes.
///
/// run() is the only way to execute the model; it counts every forward pass
/// exactly once, however many taps are active. The counter is atomic, and
/// implementations keep forward() reentrant, so one session can be shared
/// by concurrent workers.
class InferenceSession {
 public:
  InferenceSession() = default;
  InferenceSession(const InferenceSession&) = delete;
  InferenceSession& operator=(const InferenceSession&) = delete;
  virtual ~InferenceSession() = default;

  /// Throws ShapeError when `input` does not match the manifest input shape.
  ForwardResult run(const Tensor& input);

  std::uint64_t pass_count() const noexcept { return passes_.load(); }

  virtual const std::string& model_identity() const = 0;
  virtual const ModelManifest& manifest() const = 0;
  /// Taps exposed by run(), in the order they were requested.
  virtual std::span<const TapPoint> active_taps() const = 0;
  /// Every eligible tap of the model, in topological order.
  virtual std::vector<TapPoint> list_taps() const = 0;

 protected:
  virtual ForwardResult forward(const Tensor& input) const = 0;

 private:
  std::atomic<std::uint64_t> passes_{0};
};

/// Loads an ONNX model, rewrites its graph so every requested tap becomes an
/// additional output, and prepares it for execution.
///
/// Errors: IoError for a missing file, ModelFormatError for anything that does
/// not parse or uses unsupported operators, UnknownTap (with near matches) for
/// a tap id that is not an eligible computed value.
std::unique_ptr<InferenceSession> load_model(const std::filesystem::path& model_path,
                                             const ModelManifest& manifest,
                                             std::span<const std::string> taps = {});

/// Overload reading the default sidecar manifest.
std::unique_ptr<InferenceSession> load_model(const std::filesystem::path& model_path,
                                             std::span<const std::string> taps = {});

/// Eligible taps of a model file without building a session.
std::vector<TapPoint> list_taps(const std::filesystem::path& model_path,
                                const std::string& embedding_output_name);

std::vector<std::string> tap_ids(std::span<const TapPoint> taps);

}  // namespace froq
