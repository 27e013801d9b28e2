#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>

#include "froq/error.hpp"

namespace froq::onnx_backend {

namespace {

[[noreturn]] void unsupported(const Node& node, const std::string& what) {
  fail(ErrorKind::kModelFormat, node.op_type + " node '" + node.name + "': " + what);
}

const Tensor& required(const KernelContext& ctx, std::size_t i) {
  if (i >= ctx.inputs.size() || ctx.inputs[i] == nullptr) {
    unsupported(ctx.node, "missing input " + std::to_string(i));
  }
  return *ctx.inputs[i];
}

const Tensor* optional_input(const KernelContext& ctx, std::size_t i) {
  return i < ctx.inputs.size() ? ctx.inputs[i] : nullptr;
}

std::int64_t normalize_axis(std::int64_t axis, std::size_t rank, const Node& node) {
  const auto r = static_cast<std::int64_t>(rank);
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) unsupported(node, "axis out of range");
  return axis;
}

// ---------------------------------------------------------------------------
// Elementwise

template <typename F>
Tensor unary(const Tensor& x, F f) {
  std::vector<float> out(x.size());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return Tensor(x.shape(), std::move(out));
}

Shape broadcast_shape(const Shape& a, const Shape& b, const Node& node) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::int64_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::int64_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) {
      unsupported(node, "shapes " + shape_to_string(a) + " and " + shape_to_string(b) +
                            " do not broadcast");
    }
    out[i] = std::max(da, db);
  }
  return out;
}

// Row-major strides of `shape` aligned to `out`, zero on broadcast axes.
std::vector<std::int64_t> broadcast_strides(const Shape& shape, const Shape& out) {
  std::vector<std::int64_t> strides(out.size(), 0);
  std::int64_t stride = 1;
  const std::size_t offset = out.size() - shape.size();
  for (std::size_t i = shape.size(); i-- > 0;) {
    strides[i + offset] = shape[i] == 1 ? 0 : stride;
    stride *= shape[i];
  }
  return strides;
}

template <typename F>
Tensor binary(const Tensor& a, const Tensor& b, const Node& node, F f) {
  if (a.shape() == b.shape()) {
    std::vector<float> out(a.size());
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[i], y[i]);
    return Tensor(a.shape(), std::move(out));
  }
  const Shape shape = broadcast_shape(a.shape(), b.shape(), node);
  const auto sa = broadcast_strides(a.shape(), shape);
  const auto sb = broadcast_strides(b.shape(), shape);
  const auto total = static_cast<std::size_t>(element_count(shape));
  std::vector<float> out(total);
  std::vector<std::int64_t> index(shape.size(), 0);
  std::int64_t ia = 0, ib = 0;
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < total; ++i) {
    out[i] = f(x[ia], y[ib]);
    for (std::size_t d = shape.size(); d-- > 0;) {
      if (++index[d] < shape[d]) {
        ia += sa[d];
        ib += sb[d];
        break;
      }
      ia -= sa[d] * (shape[d] - 1);
      ib -= sb[d] * (shape[d] - 1);
      index[d] = 0;
    }
  }
  return Tensor(shape, std::move(out));
}

// ---------------------------------------------------------------------------
// Convolution and pooling (2-D, NCHW)

struct Window {
  std::int64_t kernel_h, kernel_w;
  std::int64_t stride_h, stride_w;
  std::int64_t dilation_h, dilation_w;
  std::int64_t pad_top, pad_left, pad_bottom, pad_right;
  std::int64_t out_h, out_w;
};

Window make_window(const Node& node, const Shape& x, std::int64_t kernel_h,
                   std::int64_t kernel_w, bool allow_ceil) {
  if (x.size() != 4) unsupported(node, "only 2-D spatial inputs (NCHW) are supported");
  const auto strides = node.attrs.get_ints("strides", {1, 1});
  const auto dilations = node.attrs.get_ints("dilations", {1, 1});
  auto pads = node.attrs.get_ints("pads", {0, 0, 0, 0});
  if (strides.size() != 2 || dilations.size() != 2 || pads.size() != 4) {
    unsupported(node, "expected 2-D strides/dilations and 4 pads");
  }
  Window w{kernel_h, kernel_w, strides[0], strides[1], dilations[0], dilations[1],
           pads[0],  pads[1],  pads[2],    pads[3],    0,            0};
  const std::int64_t in_h = x[2], in_w = x[3];
  const std::int64_t span_h = w.dilation_h * (kernel_h - 1) + 1;
  const std::int64_t span_w = w.dilation_w * (kernel_w - 1) + 1;

  const std::string auto_pad = node.attrs.get_string("auto_pad", "NOTSET");
  if (auto_pad == "SAME_UPPER" || auto_pad == "SAME_LOWER") {
    w.out_h = (in_h + w.stride_h - 1) / w.stride_h;
    w.out_w = (in_w + w.stride_w - 1) / w.stride_w;
    const std::int64_t total_h = std::max<std::int64_t>(0, (w.out_h - 1) * w.stride_h + span_h - in_h);
    const std::int64_t total_w = std::max<std::int64_t>(0, (w.out_w - 1) * w.stride_w + span_w - in_w);
    const bool upper = auto_pad == "SAME_UPPER";
    w.pad_top = upper ? total_h / 2 : total_h - total_h / 2;
    w.pad_bottom = total_h - w.pad_top;
    w.pad_left = upper ? total_w / 2 : total_w - total_w / 2;
    w.pad_right = total_w - w.pad_left;
    return w;
  }
  if (auto_pad == "VALID") {
    w.pad_top = w.pad_left = w.pad_bottom = w.pad_right = 0;
  } else if (auto_pad != "NOTSET") {
    unsupported(node, "auto_pad " + auto_pad);
  }
  const bool ceil_mode = allow_ceil && node.attrs.get_int("ceil_mode", 0) != 0;
  auto out_dim = [&](std::int64_t in, std::int64_t pad_begin, std::int64_t pad_end,
                     std::int64_t span, std::int64_t stride) {
    const std::int64_t numer = in + pad_begin + pad_end - span;
    if (numer < 0) unsupported(node, "kernel larger than padded input");
    std::int64_t out = numer / stride + 1;
    if (ceil_mode && numer % stride != 0) {
      ++out;
      // The last window must start inside the input or the leading padding.
      if ((out - 1) * stride >= in + pad_begin) --out;
    }
    return out;
  };
  w.out_h = out_dim(in_h, w.pad_top, w.pad_bottom, span_h, w.stride_h);
  w.out_w = out_dim(in_w, w.pad_left, w.pad_right, span_w, w.stride_w);
  return w;
}

Tensor conv(const KernelContext& ctx) {
  const Tensor& x = required(ctx, 0);
  const Tensor& weight = required(ctx, 1);
  const Tensor* bias = optional_input(ctx, 2);
  const Node& node = ctx.node;
  if (weight.rank() != 4) unsupported(node, "only 2-D convolution is supported");

  const std::int64_t group = node.attrs.get_int("group", 1);
  const std::int64_t batch = x.shape()[0], channels = x.shape()[1];
  const std::int64_t in_h = x.shape()[2], in_w = x.shape()[3];
  const std::int64_t filters = weight.shape()[0], group_channels = weight.shape()[1];
  if (channels != group_channels * group || filters % group != 0) {
    unsupported(node, "channel/group mismatch");
  }
  if (bias && static_cast<std::int64_t>(bias->size()) != filters) {
    unsupported(node, "bias length mismatch");
  }
  const Window w = make_window(node, x.shape(), weight.shape()[2], weight.shape()[3], false);
  const std::int64_t filters_per_group = filters / group;
  const std::int64_t out_plane = w.out_h * w.out_w;

  std::vector<float> out(static_cast<std::size_t>(batch * filters * out_plane));
  auto in = x.data();
  auto wd = weight.data();
  for (std::int64_t n = 0; n < batch; ++n) {
    for (std::int64_t m = 0; m < filters; ++m) {
      float* dst = out.data() + (n * filters + m) * out_plane;
      std::fill(dst, dst + out_plane, bias ? bias->data()[m] : 0.0f);
      const std::int64_t g = m / filters_per_group;
      for (std::int64_t cg = 0; cg < group_channels; ++cg) {
        const std::int64_t c = g * group_channels + cg;
        const float* src = in.data() + (n * channels + c) * in_h * in_w;
        const float* kernel = wd.data() + ((m * group_channels + cg) * w.kernel_h) * w.kernel_w;
        for (std::int64_t kh = 0; kh < w.kernel_h; ++kh) {
          for (std::int64_t kw = 0; kw < w.kernel_w; ++kw) {
            const float k = kernel[kh * w.kernel_w + kw];
            const std::int64_t offset_w = kw * w.dilation_w - w.pad_left;
            // Output columns whose input column lands inside [0, in_w).
            std::int64_t ow_begin = 0;
            while (ow_begin < w.out_w && ow_begin * w.stride_w + offset_w < 0) ++ow_begin;
            std::int64_t ow_end = w.out_w;
            while (ow_end > ow_begin && (ow_end - 1) * w.stride_w + offset_w >= in_w) --ow_end;
            for (std::int64_t oh = 0; oh < w.out_h; ++oh) {
              const std::int64_t ih = oh * w.stride_h + kh * w.dilation_h - w.pad_top;
              if (ih < 0 || ih >= in_h) continue;
              const float* row = src + ih * in_w;
              float* out_row = dst + oh * w.out_w;
              for (std::int64_t ow = ow_begin; ow < ow_end; ++ow) {
                out_row[ow] += k * row[ow * w.stride_w + offset_w];
              }
            }
          }
        }
      }
    }
  }
  return Tensor({batch, filters, w.out_h, w.out_w}, std::move(out));
}

Tensor pool(const KernelContext& ctx, bool is_max) {
  const Tensor& x = required(ctx, 0);
  const Node& node = ctx.node;
  const auto kernel = node.attrs.get_ints("kernel_shape", {});
  if (kernel.size() != 2) unsupported(node, "only 2-D pooling is supported");
  if (!is_max && node.attrs.has("dilations")) {
    const auto d = node.attrs.get_ints("dilations", {1, 1});
    if (d != std::vector<std::int64_t>{1, 1}) unsupported(node, "dilated average pooling");
  }
  const Window w = make_window(node, x.shape(), kernel[0], kernel[1], true);
  const bool include_pad = node.attrs.get_int("count_include_pad", 0) != 0;
  const std::int64_t batch = x.shape()[0], channels = x.shape()[1];
  const std::int64_t in_h = x.shape()[2], in_w = x.shape()[3];

  std::vector<float> out(static_cast<std::size_t>(batch * channels * w.out_h * w.out_w));
  auto in = x.data();
  std::size_t o = 0;
  for (std::int64_t plane = 0; plane < batch * channels; ++plane) {
    const float* src = in.data() + plane * in_h * in_w;
    for (std::int64_t oh = 0; oh < w.out_h; ++oh) {
      for (std::int64_t ow = 0; ow < w.out_w; ++ow) {
        float best = -std::numeric_limits<float>::infinity();
        float sum = 0.0f;
        std::int64_t valid = 0, padded = 0;
        for (std::int64_t kh = 0; kh < w.kernel_h; ++kh) {
          const std::int64_t ih = oh * w.stride_h + kh * w.dilation_h - w.pad_top;
          for (std::int64_t kw = 0; kw < w.kernel_w; ++kw) {
            const std::int64_t iw = ow * w.stride_w + kw * w.dilation_w - w.pad_left;
            if (ih < in_h + w.pad_bottom && iw < in_w + w.pad_right) ++padded;
            if (ih < 0 || ih >= in_h || iw < 0 || iw >= in_w) continue;
            const float v = src[ih * in_w + iw];
            best = std::max(best, v);
            sum += v;
            ++valid;
          }
        }
        if (is_max) {
          out[o++] = best;
        } else {
          const std::int64_t divisor = include_pad ? padded : valid;
          out[o++] = divisor > 0 ? sum / static_cast<float>(divisor) : 0.0f;
        }
      }
    }
  }
  return Tensor({batch, channels, w.out_h, w.out_w}, std::move(out));
}

Tensor global_pool(const Tensor& x, const Node& node, bool is_max) {
  if (x.rank() < 3) unsupported(node, "expects at least N x C x spatial");
  const std::int64_t planes = x.shape()[0] * x.shape()[1];
  const std::int64_t inner = static_cast<std::int64_t>(x.size()) / std::max<std::int64_t>(planes, 1);
  std::vector<float> out(static_cast<std::size_t>(planes));
  auto in = x.data();
  for (std::int64_t p = 0; p < planes; ++p) {
    const float* src = in.data() + p * inner;
    if (is_max) {
      out[p] = *std::max_element(src, src + inner);
    } else {
      double sum = 0.0;
      for (std::int64_t i = 0; i < inner; ++i) sum += src[i];
      out[p] = static_cast<float>(sum / static_cast<double>(inner));
    }
  }
  Shape shape(x.rank(), 1);
  shape[0] = x.shape()[0];
  shape[1] = x.shape()[1];
  return Tensor(shape, std::move(out));
}

// ---------------------------------------------------------------------------
// Normalization and linear algebra

Tensor batch_norm(const KernelContext& ctx) {
  const Tensor& x = required(ctx, 0);
  const Tensor& scale = required(ctx, 1);
  const Tensor& shift = required(ctx, 2);
  const Tensor& mean = required(ctx, 3);
  const Tensor& var = required(ctx, 4);
  const float epsilon = ctx.node.attrs.get_float("epsilon", 1e-5f);
  if (x.rank() < 2) unsupported(ctx.node, "input rank below 2");
  const std::int64_t batch = x.shape()[0], channels = x.shape()[1];
  const std::int64_t inner = static_cast<std::int64_t>(x.size()) / std::max<std::int64_t>(batch * channels, 1);
  for (const Tensor* p : {&scale, &shift, &mean, &var}) {
    if (static_cast<std::int64_t>(p->size()) != channels) unsupported(ctx.node, "parameter length");
  }
  std::vector<float> out(x.size());
  auto in = x.data();
  for (std::int64_t n = 0; n < batch; ++n) {
    for (std::int64_t c = 0; c < channels; ++c) {
      const float a = scale.data()[c] / std::sqrt(var.data()[c] + epsilon);
      const float b = shift.data()[c] - mean.data()[c] * a;
      const std::int64_t base = (n * channels + c) * inner;
      for (std::int64_t i = 0; i < inner; ++i) out[base + i] = in[base + i] * a + b;
    }
  }
  return Tensor(x.shape(), std::move(out));
}

// out[M x N] = a[M x K] * b[K x N], with optional transposition of the operands.
std::vector<float> matmul_2d(std::span<const float> a, std::span<const float> b, std::int64_t m,
                             std::int64_t k, std::int64_t n, bool trans_a, bool trans_b) {
  std::vector<float> out(static_cast<std::size_t>(m * n), 0.0f);
  for (std::int64_t i = 0; i < m; ++i) {
    for (std::int64_t p = 0; p < k; ++p) {
      const float av = trans_a ? a[p * m + i] : a[i * k + p];
      if (av == 0.0f) continue;
      float* row = out.data() + i * n;
      if (trans_b) {
        for (std::int64_t j = 0; j < n; ++j) row[j] += av * b[j * k + p];
      } else {
        const float* brow = b.data() + p * n;
        for (std::int64_t j = 0; j < n; ++j) row[j] += av * brow[j];
      }
    }
  }
  return out;
}

Tensor gemm(const KernelContext& ctx) {
  const Tensor& a = required(ctx, 0);
  const Tensor& b = required(ctx, 1);
  const Tensor* c = optional_input(ctx, 2);
  const Node& node = ctx.node;
  if (a.rank() != 2 || b.rank() != 2) unsupported(node, "operands must be 2-D");
  const bool trans_a = node.attrs.get_int("transA", 0) != 0;
  const bool trans_b = node.attrs.get_int("transB", 0) != 0;
  const float alpha = node.attrs.get_float("alpha", 1.0f);
  const float beta = node.attrs.get_float("beta", 1.0f);
  const std::int64_t m = trans_a ? a.shape()[1] : a.shape()[0];
  const std::int64_t k = trans_a ? a.shape()[0] : a.shape()[1];
  const std::int64_t kb = trans_b ? b.shape()[1] : b.shape()[0];
  const std::int64_t n = trans_b ? b.shape()[0] : b.shape()[1];
  if (k != kb) unsupported(node, "inner dimensions differ");
  auto out = matmul_2d(a.data(), b.data(), m, k, n, trans_a, trans_b);
  for (float& v : out) v *= alpha;
  Tensor result({m, n}, std::move(out));
  if (c && beta != 0.0f) {
    const float scaled_beta = beta;
    result = binary(result, *c, node, [scaled_beta](float y, float z) { return y + scaled_beta * z; });
  }
  return result;
}

Tensor matmul(const KernelContext& ctx) {
  Tensor a = required(ctx, 0);
  Tensor b = required(ctx, 1);
  const Node& node = ctx.node;
  const bool a_vec = a.rank() == 1, b_vec = b.rank() == 1;
  if (a_vec) a = a.reshaped({1, a.shape()[0]});
  if (b_vec) b = b.reshaped({b.shape()[0], 1});
  const std::int64_t k = a.shape().back();
  const std::int64_t m = a.shape()[a.rank() - 2];
  const std::int64_t n = b.shape().back();
  if (b.shape()[b.rank() - 2] != k) unsupported(node, "inner dimensions differ");

  Shape batch_a(a.shape().begin(), a.shape().end() - 2);
  Shape batch_b(b.shape().begin(), b.shape().end() - 2);
  std::int64_t batches = element_count(batch_a);
  Shape batch_shape = batch_a;
  if (!batch_b.empty() && batch_b != batch_a) {
    if (element_count(batch_b) != 1) unsupported(node, "broadcast batched MatMul");
  }
  if (batch_a.empty() && !batch_b.empty()) {
    batch_shape = batch_b;
    batches = element_count(batch_b);
  }
  const bool shared_b = batch_b.empty() || element_count(batch_b) == 1;
  const bool shared_a = batch_a.empty();

  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(batches * m * n));
  for (std::int64_t i = 0; i < batches; ++i) {
    auto as = a.data().subspan(shared_a ? 0 : i * m * k, m * k);
    auto bs = b.data().subspan(shared_b ? 0 : i * k * n, k * n);
    auto part = matmul_2d(as, bs, m, k, n, false, false);
    out.insert(out.end(), part.begin(), part.end());
  }
  Shape shape = batch_shape;
  if (!a_vec) shape.push_back(m);
  if (!b_vec) shape.push_back(n);
  return Tensor(shape, std::move(out));
}

// ---------------------------------------------------------------------------
// Shape manipulation

const std::vector<std::int64_t>& constant_ints(const KernelContext& ctx, std::size_t i) {
  if (i >= ctx.node.inputs.size()) unsupported(ctx.node, "missing shape input");
  auto it = ctx.int_constants.find(ctx.node.inputs[i]);
  if (it == ctx.int_constants.end()) {
    unsupported(ctx.node, "shape input '" + ctx.node.inputs[i] + "' must be a constant");
  }
  return it->second;
}

Tensor reshape(const KernelContext& ctx) {
  const Tensor& x = required(ctx, 0);
  const auto& requested = constant_ints(ctx, 1);
  const bool allow_zero = ctx.node.attrs.get_int("allowzero", 0) != 0;
  Shape shape(requested.begin(), requested.end());
  std::int64_t known = 1;
  int infer = -1;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] == 0 && !allow_zero) {
      if (i >= x.rank()) unsupported(ctx.node, "zero dimension beyond input rank");
      shape[i] = x.shape()[i];
    }
    if (shape[i] == -1) {
      if (infer >= 0) unsupported(ctx.node, "more than one inferred dimension");
      infer = static_cast<int>(i);
    } else {
      known *= shape[i];
    }
  }
  if (infer >= 0) {
    if (known == 0 || static_cast<std::int64_t>(x.size()) % known != 0) {
      unsupported(ctx.node, "cannot infer dimension");
    }
    shape[infer] = static_cast<std::int64_t>(x.size()) / known;
  }
  return x.reshaped(shape);
}

Tensor flatten(const KernelContext& ctx) {
  const Tensor& x = required(ctx, 0);
  std::int64_t axis = ctx.node.attrs.get_int("axis", 1);
  if (axis < 0) axis += static_cast<std::int64_t>(x.rank());
  if (axis < 0 || axis > static_cast<std::int64_t>(x.rank())) unsupported(ctx.node, "axis");
  std::int64_t outer = 1;
  for (std::int64_t i = 0; i < axis; ++i) outer *= x.shape()[i];
  return x.reshaped({outer, static_cast<std::int64_t>(x.size()) / std::max<std::int64_t>(outer, 1)});
}

Tensor transpose(const KernelContext& ctx) {
  const Tensor& x = required(ctx, 0);
  const std::size_t rank = x.rank();
  std::vector<std::int64_t> reversed(rank);
  std::iota(reversed.rbegin(), reversed.rend(), 0);
  const auto perm = ctx.node.attrs.get_ints("perm", reversed);
  if (perm.size() != rank) unsupported(ctx.node, "perm length");

  Shape out_shape(rank);
  for (std::size_t i = 0; i < rank; ++i) out_shape[i] = x.shape()[perm[i]];
  std::vector<std::int64_t> in_strides(rank, 1);
  for (std::size_t i = rank; i-- > 1;) in_strides[i - 1] = in_strides[i] * x.shape()[i];

  std::vector<float> out(x.size());
  std::vector<std::int64_t> index(rank, 0);
  auto in = x.data();
  for (std::size_t o = 0; o < out.size(); ++o) {
    std::int64_t src = 0;
    for (std::size_t d = 0; d < rank; ++d) src += index[d] * in_strides[perm[d]];
    out[o] = in[src];
    for (std::size_t d = rank; d-- > 0;) {
      if (++index[d] < out_shape[d]) break;
      index[d] = 0;
    }
  }
  return Tensor(out_shape, std::move(out));
}

Tensor concat(const KernelContext& ctx) {
  if (ctx.inputs.empty()) unsupported(ctx.node, "no inputs");
  const Tensor& first = required(ctx, 0);
  const auto axis = normalize_axis(ctx.node.attrs.get_int("axis", 0), first.rank(), ctx.node);
  std::int64_t outer = 1;
  for (std::int64_t i = 0; i < axis; ++i) outer *= first.shape()[i];

  Shape shape = first.shape();
  shape[axis] = 0;
  for (std::size_t i = 0; i < ctx.inputs.size(); ++i) {
    const Tensor& t = required(ctx, i);
    if (t.rank() != first.rank()) unsupported(ctx.node, "rank mismatch");
    shape[axis] += t.shape()[axis];
  }
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(element_count(shape)));
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < ctx.inputs.size(); ++i) {
      const Tensor& t = required(ctx, i);
      const auto chunk = static_cast<std::int64_t>(t.size()) / std::max<std::int64_t>(outer, 1);
      auto part = t.data().subspan(o * chunk, chunk);
      out.insert(out.end(), part.begin(), part.end());
    }
  }
  return Tensor(shape, std::move(out));
}

Tensor clip(const KernelContext& ctx) {
  const Tensor& x = required(ctx, 0);
  float lo = ctx.node.attrs.get_float("min", -std::numeric_limits<float>::infinity());
  float hi = ctx.node.attrs.get_float("max", std::numeric_limits<float>::infinity());
  if (const Tensor* t = optional_input(ctx, 1); t && t->size() == 1) lo = t->data()[0];
  if (const Tensor* t = optional_input(ctx, 2); t && t->size() == 1) hi = t->data()[0];
  return unary(x, [lo, hi](float v) { return std::min(std::max(v, lo), hi); });
}

const std::set<std::string>& supported_ops() {
  static const std::set<std::string> ops{
      "Add",       "AveragePool",       "BatchNormalization", "Clip",    "Concat",
      "Conv",      "Div",               "Dropout",            "Flatten", "Gemm",
      "GlobalAveragePool", "GlobalMaxPool", "Identity",       "LeakyRelu", "MatMul",
      "MaxPool",   "Mul",               "PRelu",              "Relu",    "Reshape",
      "Sigmoid",   "Sqrt",              "Sub",                "Tanh",    "Transpose"};
  return ops;
}

}  // namespace

bool is_supported(const std::string& op_type) { return supported_ops().count(op_type) != 0; }

std::vector<Tensor> run_kernel(const KernelContext& ctx) {
  const Node& node = ctx.node;
  const std::string& op = node.op_type;

  if (op == "Conv") return {conv(ctx)};
  if (op == "BatchNormalization") return {batch_norm(ctx)};
  if (op == "Relu") return {unary(required(ctx, 0), [](float v) { return v > 0.0f ? v : 0.0f; })};
  if (op == "LeakyRelu") {
    const float alpha = node.attrs.get_float("alpha", 0.01f);
    return {unary(required(ctx, 0), [alpha](float v) { return v >= 0.0f ? v : alpha * v; })};
  }
  if (op == "PRelu") {
    return {binary(required(ctx, 0), required(ctx, 1), node,
                   [](float v, float slope) { return v >= 0.0f ? v : slope * v; })};
  }
  if (op == "Sigmoid") {
    return {unary(required(ctx, 0), [](float v) { return 1.0f / (1.0f + std::exp(-v)); })};
  }
  if (op == "Tanh") return {unary(required(ctx, 0), [](float v) { return std::tanh(v); })};
  if (op == "Sqrt") return {unary(required(ctx, 0), [](float v) { return std::sqrt(v); })};
  if (op == "Identity" || op == "Dropout") return {required(ctx, 0)};
  if (op == "Add") return {binary(required(ctx, 0), required(ctx, 1), node, std::plus<>{})};
  if (op == "Sub") return {binary(required(ctx, 0), required(ctx, 1), node, std::minus<>{})};
  if (op == "Mul") return {binary(required(ctx, 0), required(ctx, 1), node, std::multiplies<>{})};
  if (op == "Div") return {binary(required(ctx, 0), required(ctx, 1), node, std::divides<>{})};
  if (op == "MaxPool") return {pool(ctx, true)};
  if (op == "AveragePool") return {pool(ctx, false)};
  if (op == "GlobalAveragePool") return {global_pool(required(ctx, 0), node, false)};
  if (op == "GlobalMaxPool") return {global_pool(required(ctx, 0), node, true)};
  if (op == "Gemm") return {gemm(ctx)};
  if (op == "MatMul") return {matmul(ctx)};
  if (op == "Reshape") return {reshape(ctx)};
  if (op == "Flatten") return {flatten(ctx)};
  if (op == "Transpose") return {transpose(ctx)};
  if (op == "Concat") return {concat(ctx)};
  if (op == "Clip") return {clip(ctx)};
  unsupported(node, "operator not implemented");
}

}  // namespace froq::onnx_backend
