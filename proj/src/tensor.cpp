#include "froq/tensor.hpp"

#include <functional>
#include <numeric>

#include "froq/error.hpp"

namespace froq {

std::int64_t element_count(std::span<const std::int64_t> shape) {
  std::int64_t n = 1;
  for (auto d : shape) {
    if (d < 0) fail(ErrorKind::kShape, "negative dimension in " + shape_to_string(shape));
    n *= d;
  }
  return n;
}

std::string shape_to_string(std::span<const std::int64_t> shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (element_count(shape_) != static_cast<std::int64_t>(data_.size())) {
    fail(ErrorKind::kShape, "shape " + shape_to_string(shape_) + " does not match " +
                                std::to_string(data_.size()) + " elements");
  }
}

Tensor Tensor::zeros(Shape shape) {
  const auto n = static_cast<std::size_t>(element_count(shape));
  return Tensor(std::move(shape), std::vector<float>(n, 0.0f));
}

Tensor Tensor::reshaped(Shape shape) const& { return Tensor(std::move(shape), data_); }

Tensor Tensor::reshaped(Shape shape) && { return Tensor(std::move(shape), std::move(data_)); }

}  // namespace froq
