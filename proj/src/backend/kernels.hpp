#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "froq/tensor.hpp"
#include "graph.hpp"

namespace froq::onnx_backend {

struct KernelContext {
  const Node& node;
  std::span<const Tensor* const> inputs;  // nullptr for omitted optional inputs
  const std::unordered_map<std::string, std::vector<std::int64_t>>& int_constants;
};

bool is_supported(const std::string& op_type);

/// Float32 reference kernels for the operator subset found in common face
/// recognition backbones. Throws ModelFormatError for unsupported attribute
/// combinations and ShapeError for inconsistent operands.
std::vector<Tensor> run_kernel(const KernelContext& ctx);

}  // namespace froq::onnx_backend
