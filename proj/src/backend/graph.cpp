#include "graph.hpp"

#include <algorithm>
#include <cstring>
#include <queue>
#include <set>
#include <unordered_set>

#include "froq/error.hpp"
#include "kernels.hpp"

namespace froq::onnx_backend {

namespace {

[[noreturn]] void bad_model(const std::string& message) {
  fail(ErrorKind::kModelFormat, message);
}

template <typename T>
std::vector<T> raw_values(const onnx::TensorProto& proto) {
  const std::string& raw = proto.raw_data();
  if (raw.size() % sizeof(T) != 0) bad_model("raw_data size mismatch in " + proto.name());
  std::vector<T> out(raw.size() / sizeof(T));
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

Shape dims_of(const onnx::TensorProto& proto) {
  return Shape(proto.dims().begin(), proto.dims().end());
}

std::optional<Shape> static_shape_of(const onnx::ValueInfoProto& info) {
  if (!info.has_type() || !info.type().has_tensor_type() ||
      !info.type().tensor_type().has_shape()) {
    return std::nullopt;
  }
  Shape shape;
  for (const auto& dim : info.type().tensor_type().shape().dim()) {
    if (!dim.has_dim_value() || dim.dim_value() <= 0) return std::nullopt;
    shape.push_back(dim.dim_value());
  }
  return shape;
}

std::unordered_set<std::string> initializer_names(const onnx::GraphProto& graph) {
  std::unordered_set<std::string> names;
  for (const auto& init : graph.initializer()) names.insert(init.name());
  return names;
}

}  // namespace

Attributes::Attributes(const google::protobuf::RepeatedPtrField<onnx::AttributeProto>& attrs) {
  for (const auto& attr : attrs) attrs_[attr.name()] = attr;
}

std::int64_t Attributes::get_int(const std::string& name, std::int64_t fallback) const {
  auto it = attrs_.find(name);
  return it == attrs_.end() ? fallback : it->second.i();
}

float Attributes::get_float(const std::string& name, float fallback) const {
  auto it = attrs_.find(name);
  return it == attrs_.end() ? fallback : it->second.f();
}

std::string Attributes::get_string(const std::string& name, const std::string& fallback) const {
  auto it = attrs_.find(name);
  return it == attrs_.end() ? fallback : it->second.s();
}

std::vector<std::int64_t> Attributes::get_ints(const std::string& name,
                                               std::vector<std::int64_t> fallback) const {
  auto it = attrs_.find(name);
  if (it == attrs_.end()) return fallback;
  return {it->second.ints().begin(), it->second.ints().end()};
}

const onnx::TensorProto* Attributes::get_tensor(const std::string& name) const {
  auto it = attrs_.find(name);
  return it == attrs_.end() || !it->second.has_t() ? nullptr : &it->second.t();
}

onnx::ModelProto parse_model(const std::string& bytes, const std::string& origin) {
  onnx::ModelProto model;
  if (bytes.empty() || !model.ParseFromString(bytes)) {
    bad_model(origin + " is not a valid ONNX protobuf");
  }
  if (!model.has_graph() || model.graph().node_size() == 0) {
    bad_model(origin + " contains no graph");
  }
  return model;
}

Tensor decode_float(const onnx::TensorProto& proto) {
  if (proto.data_location() == onnx::TensorProto::EXTERNAL) {
    bad_model("external tensor data is not supported (" + proto.name() + ")");
  }
  std::vector<float> values;
  switch (proto.data_type()) {
    case onnx::TensorProto::FLOAT:
      values = proto.has_raw_data()
                   ? raw_values<float>(proto)
                   : std::vector<float>(proto.float_data().begin(), proto.float_data().end());
      break;
    case onnx::TensorProto::DOUBLE: {
      auto wide = proto.has_raw_data() ? raw_values<double>(proto)
                                       : std::vector<double>(proto.double_data().begin(),
                                                             proto.double_data().end());
      values.assign(wide.begin(), wide.end());
      break;
    }
    case onnx::TensorProto::INT64:
    case onnx::TensorProto::INT32: {
      auto ints = decode_ints(proto);
      values.assign(ints.begin(), ints.end());
      break;
    }
    default:
      bad_model("unsupported tensor element type " + std::to_string(proto.data_type()) +
                " for " + proto.name());
  }
  return Tensor(dims_of(proto), std::move(values));
}

std::vector<std::int64_t> decode_ints(const onnx::TensorProto& proto) {
  if (proto.data_location() == onnx::TensorProto::EXTERNAL) {
    bad_model("external tensor data is not supported (" + proto.name() + ")");
  }
  switch (proto.data_type()) {
    case onnx::TensorProto::INT64:
      return proto.has_raw_data()
                 ? raw_values<std::int64_t>(proto)
                 : std::vector<std::int64_t>(proto.int64_data().begin(), proto.int64_data().end());
    case onnx::TensorProto::INT32: {
      if (proto.has_raw_data()) {
        auto narrow = raw_values<std::int32_t>(proto);
        return {narrow.begin(), narrow.end()};
      }
      return {proto.int32_data().begin(), proto.int32_data().end()};
    }
    default:
      bad_model("expected an integer tensor for " + proto.name());
  }
}

const onnx::ValueInfoProto& graph_input(const onnx::GraphProto& graph) {
  const auto inits = initializer_names(graph);
  const onnx::ValueInfoProto* found = nullptr;
  for (const auto& input : graph.input()) {
    if (inits.count(input.name())) continue;
    if (found) bad_model("models with more than one data input are not supported");
    found = &input;
  }
  if (!found) bad_model("graph has no data input");
  return *found;
}

std::vector<const onnx::NodeProto*> topological_nodes(const onnx::GraphProto& graph) {
  std::unordered_set<std::string> available = initializer_names(graph);
  for (const auto& input : graph.input()) available.insert(input.name());

  const int n = graph.node_size();
  std::unordered_map<std::string, int> producer;
  for (int i = 0; i < n; ++i) {
    for (const auto& out : graph.node(i).output()) {
      if (out.empty()) continue;
      if (!producer.emplace(out, i).second) bad_model("value produced twice: " + out);
    }
  }

  std::vector<int> pending(n, 0);
  std::vector<std::vector<int>> consumers(n);
  for (int i = 0; i < n; ++i) {
    std::set<int> deps;
    for (const auto& in : graph.node(i).input()) {
      if (in.empty() || available.count(in)) continue;
      auto it = producer.find(in);
      if (it == producer.end()) bad_model("node input '" + in + "' is never produced");
      deps.insert(it->second);
    }
    pending[i] = static_cast<int>(deps.size());
    for (int d : deps) consumers[d].push_back(i);
  }

  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.push(i);
  }
  std::vector<const onnx::NodeProto*> order;
  order.reserve(n);
  while (!ready.empty()) {
    const int i = ready.top();
    ready.pop();
    order.push_back(&graph.node(i));
    for (int c : consumers[i]) {
      if (--pending[c] == 0) ready.push(c);
    }
  }
  if (static_cast<int>(order.size()) != n) bad_model("graph contains a cycle");
  return order;
}

std::vector<TapPoint> eligible_taps(const onnx::GraphProto& graph,
                                    const std::string& embedding_output_name) {
  std::unordered_map<std::string, const onnx::ValueInfoProto*> infos;
  for (const auto& info : graph.value_info()) infos[info.name()] = &info;
  for (const auto& info : graph.output()) infos[info.name()] = &info;

  std::unordered_set<std::string> input_dependent{graph_input(graph).name()};
  std::vector<TapPoint> taps;
  for (const auto* node : topological_nodes(graph)) {
    const bool depends = std::any_of(node->input().begin(), node->input().end(),
                                     [&](const std::string& in) {
                                       return input_dependent.count(in) != 0;
                                     });
    if (!depends || node->op_type() == "Constant") continue;
    for (const auto& out : node->output()) {
      if (out.empty()) continue;
      input_dependent.insert(out);
      if (out == embedding_output_name) continue;
      auto it = infos.find(out);
      taps.push_back(TapPoint{out, node->op_type(),
                              it == infos.end() ? std::nullopt : static_shape_of(*it->second)});
    }
  }
  return taps;
}

void expose_outputs(onnx::ModelProto& model, std::span<const std::string> names) {
  auto* graph = model.mutable_graph();
  std::unordered_set<std::string> existing;
  for (const auto& out : graph->output()) existing.insert(out.name());
  std::unordered_map<std::string, const onnx::ValueInfoProto*> infos;
  for (const auto& info : graph->value_info()) infos[info.name()] = &info;

  for (const auto& name : names) {
    if (!existing.insert(name).second) continue;
    auto it = infos.find(name);
    onnx::ValueInfoProto info = it == infos.end() ? onnx::ValueInfoProto{} : *it->second;
    info.set_name(name);
    *graph->add_output() = std::move(info);
  }
}

CompiledGraph compile(const onnx::ModelProto& model) {
  const auto& graph = model.graph();
  for (const auto& opset : model.opset_import()) {
    if (!opset.domain().empty() && opset.domain() != "ai.onnx") continue;
    if (opset.version() < 7) {
      bad_model("opset " + std::to_string(opset.version()) + " is older than supported (7)");
    }
  }

  CompiledGraph compiled;
  compiled.input_name = graph_input(graph).name();
  for (const auto& init : graph.initializer()) {
    if (init.data_type() == onnx::TensorProto::INT64 ||
        init.data_type() == onnx::TensorProto::INT32) {
      compiled.int_constants[init.name()] = decode_ints(init);
    }
    if (init.data_type() == onnx::TensorProto::FLOAT ||
        init.data_type() == onnx::TensorProto::DOUBLE ||
        init.data_type() == onnx::TensorProto::INT64 ||
        init.data_type() == onnx::TensorProto::INT32) {
      compiled.float_constants.emplace(init.name(), decode_float(init));
    }
  }

  for (const auto* proto : topological_nodes(graph)) {
    if (!proto->domain().empty() && proto->domain() != "ai.onnx") {
      bad_model("custom operator domain '" + proto->domain() + "' (" + proto->op_type() + ")");
    }
    Node node{proto->name(), proto->op_type(),
              {proto->input().begin(), proto->input().end()},
              {proto->output().begin(), proto->output().end()},
              Attributes(proto->attribute())};
    if (node.op_type == "Constant") {
      const auto* value = node.attrs.get_tensor("value");
      if (!value || node.outputs.size() != 1) {
        bad_model("Constant node '" + node.name + "' without a tensor value");
      }
      if (value->data_type() == onnx::TensorProto::INT64 ||
          value->data_type() == onnx::TensorProto::INT32) {
        compiled.int_constants[node.outputs[0]] = decode_ints(*value);
      }
      compiled.float_constants.emplace(node.outputs[0], decode_float(*value));
      continue;
    }
    if (!is_supported(node.op_type)) {
      bad_model("unsupported operator " + node.op_type + " (node '" + node.name + "')");
    }
    compiled.nodes.push_back(std::move(node));
  }

  for (const auto& out : graph.output()) compiled.outputs.push_back(out.name());
  const std::unordered_set<std::string> keep(compiled.outputs.begin(), compiled.outputs.end());
  for (std::size_t i = 0; i < compiled.nodes.size(); ++i) {
    for (const auto& in : compiled.nodes[i].inputs) {
      if (!in.empty() && !keep.count(in)) compiled.last_use[in] = i;
    }
  }
  return compiled;
}

std::map<std::string, Tensor> execute(const CompiledGraph& graph, const Tensor& input) {
  std::unordered_map<std::string, Tensor> values;
  values.emplace(graph.input_name, input);

  auto lookup = [&](const std::string& name) -> const Tensor* {
    if (name.empty()) return nullptr;
    if (auto it = values.find(name); it != values.end()) return &it->second;
    if (auto it = graph.float_constants.find(name); it != graph.float_constants.end()) {
      return &it->second;
    }
    fail(ErrorKind::kModelFormat, "value '" + name + "' unavailable at execution time");
  };

  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const Node& node = graph.nodes[i];
    std::vector<const Tensor*> inputs;
    inputs.reserve(node.inputs.size());
    for (const auto& name : node.inputs) inputs.push_back(lookup(name));

    KernelContext ctx{node, inputs, graph.int_constants};
    std::vector<Tensor> outputs = run_kernel(ctx);
    for (std::size_t k = 0; k < outputs.size() && k < node.outputs.size(); ++k) {
      if (!node.outputs[k].empty()) values.insert_or_assign(node.outputs[k], std::move(outputs[k]));
    }
    for (const auto& name : node.inputs) {
      auto it = graph.last_use.find(name);
      if (it != graph.last_use.end() && it->second == i) values.erase(name);
    }
  }

  std::map<std::string, Tensor> result;
  for (const auto& name : graph.outputs) {
    auto it = values.find(name);
    if (it != values.end()) {
      result.emplace(name, it->second);
    } else if (auto c = graph.float_constants.find(name); c != graph.float_constants.end()) {
      result.emplace(name, c->second);
    } else {
      fail(ErrorKind::kModelFormat, "graph output '" + name + "' was never computed");
    }
  }
  return result;
}

}  // namespace froq::onnx_backend
