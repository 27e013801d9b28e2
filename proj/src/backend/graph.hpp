#pragma once

// Internal ONNX graph representation shared by the loader and the
// interpreter. Nothing here leaks into the public headers.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "froq/backend.hpp"
#include "froq/tensor.hpp"
#include "onnx.pb.h"

namespace froq::onnx_backend {

class Attributes {
 public:
  Attributes() = default;
  explicit Attributes(const google::protobuf::RepeatedPtrField<onnx::AttributeProto>& attrs);

  bool has(const std::string& name) const { return attrs_.count(name) != 0; }
  std::int64_t get_int(const std::string& name, std::int64_t fallback) const;
  float get_float(const std::string& name, float fallback) const;
  std::string get_string(const std::string& name, const std::string& fallback) const;
  std::vector<std::int64_t> get_ints(const std::string& name,
                                     std::vector<std::int64_t> fallback) const;
  const onnx::TensorProto* get_tensor(const std::string& name) const;

 private:
  std::map<std::string, onnx::AttributeProto> attrs_;
};

struct Node {
  std::string name;
  std::string op_type;
  std::vector<std::string> inputs;  // empty string marks an omitted optional input
  std::vector<std::string> outputs;
  Attributes attrs;
};

/// Executable form of a graph: nodes in topological order, constants decoded.
struct CompiledGraph {
  std::string input_name;
  std::vector<Node> nodes;
  std::unordered_map<std::string, Tensor> float_constants;
  std::unordered_map<std::string, std::vector<std::int64_t>> int_constants;
  std::vector<std::string> outputs;
  // Index of the last node reading each value; values not listed are kept.
  std::unordered_map<std::string, std::size_t> last_use;
};

onnx::ModelProto parse_model(const std::string& bytes, const std::string& origin);

/// Decodes a float or integer initializer. Throws ModelFormatError for other
/// element types or externally stored data.
Tensor decode_float(const onnx::TensorProto& proto);
std::vector<std::int64_t> decode_ints(const onnx::TensorProto& proto);

/// Single non-initializer graph input.
const onnx::ValueInfoProto& graph_input(const onnx::GraphProto& graph);

/// Nodes sorted topologically; ties keep file order. Throws ModelFormatError
/// on cycles or dangling inputs.
std::vector<const onnx::NodeProto*> topological_nodes(const onnx::GraphProto& graph);

/// Computed values that depend on the graph input, excluding Constant outputs
/// and the embedding, in topological order.
std::vector<TapPoint> eligible_taps(const onnx::GraphProto& graph,
                                    const std::string& embedding_output_name);

/// Graph surgery: appends each named value to graph.output unless already
/// present. The value's type is copied from value_info when known. Existing
/// outputs and nodes are untouched.
void expose_outputs(onnx::ModelProto& model, std::span<const std::string> names);

CompiledGraph compile(const onnx::ModelProto& model);

/// Runs the graph on a single input and returns every graph output by name.
std::map<std::string, Tensor> execute(const CompiledGraph& graph, const Tensor& input);

}  // namespace froq::onnx_backend
