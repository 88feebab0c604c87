#include "spikekit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "spikekit/parallel.hpp"

namespace spikekit {

namespace {

int64_t checked_numel(const std::vector<int64_t>& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one axis");
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d <= 0) throw ShapeError("tensor extents must be positive");
    n *= d;
  }
  return n;
}

void require_rank(const Tensor& t, int64_t rank, const char* op) {
  if (t.ndim() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) +
                     " tensor, got shape " + t.shape_str());
  }
}

}  // namespace

Tensor::Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<size_t>(checked_numel(shape_)), 0.0);
}

Tensor::Tensor(std::vector<int64_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_numel(shape_) != static_cast<int64_t>(data_.size())) {
    throw ShapeError("tensor data length does not match product of extents");
  }
}

Tensor Tensor::full(std::vector<int64_t> shape, double value) {
  Tensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

int64_t Tensor::dim(int64_t axis) const {
  const int64_t r = ndim();
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) throw ShapeError("axis out of range for shape " + shape_str());
  return shape_[static_cast<size_t>(axis)];
}

int64_t Tensor::offset_of(std::initializer_list<int64_t> idx) const {
  if (static_cast<int64_t>(idx.size()) != ndim()) {
    throw ShapeError("index rank does not match tensor rank");
  }
  int64_t off = 0;
  size_t a = 0;
  for (int64_t i : idx) {
    const int64_t d = shape_[a];
    if (i < 0 || i >= d) throw BoundsError("tensor index out of range");
    off = off * d + i;
    ++a;
  }
  return off;
}

double Tensor::at(std::initializer_list<int64_t> idx) const {
  return data_[static_cast<size_t>(offset_of(idx))];
}

double& Tensor::at(std::initializer_list<int64_t> idx) {
  return data_[static_cast<size_t>(offset_of(idx))];
}

Tensor Tensor::reshaped(std::vector<int64_t> new_shape) const {
  if (checked_numel(new_shape) != numel()) {
    throw ShapeError("reshape must preserve element count");
  }
  return Tensor(std::move(new_shape), data_);
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "x" : "") << shape_[i];
  os << "]";
  return os.str();
}

void require_finite(const Tensor& t, const char* op) {
  for (double v : t.values()) {
    if (!std::isfinite(v)) {
      throw Error(std::string(op) + ": produced a non-finite value");
    }
  }
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, int64_t stride,
              int64_t padding) {
  require_rank(input, 3, "conv2d");
  require_rank(kernel, 4, "conv2d");
  const int64_t cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int64_t cout = kernel.dim(0), kcin = kernel.dim(1);
  const int64_t kh = kernel.dim(2), kw = kernel.dim(3);
  if (kcin != cin) {
    throw ShapeError("conv2d: kernel expects " + std::to_string(kcin) +
                     " input channels, input has " + std::to_string(cin));
  }
  if (kh != kw) {
    throw ConfigError("conv2d: kernel must be square, got " + kernel.shape_str());
  }
  if (stride < 1) throw ConfigError("conv2d: stride must be >= 1");
  if (padding < 0) throw ConfigError("conv2d: padding must be >= 0");
  const int64_t span_h = h + 2 * padding - kh;
  const int64_t span_w = w + 2 * padding - kw;
  if (span_h < 0 || span_w < 0 || span_h % stride != 0 || span_w % stride != 0) {
    throw ConfigError("conv2d: output size (" + std::to_string(h) + "+" +
                      "2*" + std::to_string(padding) + "-" + std::to_string(kh) +
                      ")/" + std::to_string(stride) + "+1 is not a positive integer");
  }
  const int64_t oh = span_h / stride + 1;
  const int64_t ow = span_w / stride + 1;

  Tensor out({cout, oh, ow});
  const double* src = input.data();
  const double* ker = kernel.data();
  double* dst = out.data();

  parallel_for(cout, [&](int64_t c0, int64_t c1) {
    for (int64_t co = c0; co < c1; ++co) {
      const double* kc = ker + co * cin * kh * kw;
      double* oc = dst + co * oh * ow;
      for (int64_t oy = 0; oy < oh; ++oy) {
        for (int64_t ox = 0; ox < ow; ++ox) {
          const int64_t iy0 = oy * stride - padding;
          const int64_t ix0 = ox * stride - padding;
          double acc = 0.0;
          for (int64_t ci = 0; ci < cin; ++ci) {
            const double* plane = src + ci * h * w;
            const double* kk = kc + ci * kh * kw;
            for (int64_t ky = 0; ky < kh; ++ky) {
              const int64_t iy = iy0 + ky;
              if (iy < 0 || iy >= h) continue;
              const double* row = plane + iy * w;
              const double* krow = kk + ky * kw;
              for (int64_t kx = 0; kx < kw; ++kx) {
                const int64_t ix = ix0 + kx;
                if (ix < 0 || ix >= w) continue;
                acc += row[ix] * krow[kx];
              }
            }
          }
          oc[oy * ow + ox] = acc;
        }
      }
    }
  });
  require_finite(out, "conv2d");
  return out;
}

Tensor leaky_relu(const Tensor& input, double slope) {
  if (!(slope > 0.0 && slope < 1.0)) {
    throw ConfigError("leaky_relu: slope must lie in (0,1)");
  }
  Tensor out = input;
  for (double& v : out.values()) v = v >= 0.0 ? v : slope * v;
  require_finite(out, "leaky_relu");
  return out;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (double& v : out.values()) v = v >= 0.0 ? v : 0.0;
  require_finite(out, "relu");
  return out;
}

Tensor sigmoid(const Tensor& input) {
  Tensor out = input;
  for (double& v : out.values()) {
    // Split form avoids overflow in exp for large |v|.
    v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                 : std::exp(v) / (1.0 + std::exp(v));
  }
  require_finite(out, "sigmoid");
  return out;
}

Tensor softmax(const Tensor& input, int64_t axis) {
  const int64_t r = input.ndim();
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) {
    throw ShapeError("softmax: axis out of range for shape " + input.shape_str());
  }
  const auto& shape = input.shape();
  int64_t outer = 1, inner = 1;
  for (int64_t i = 0; i < axis; ++i) outer *= shape[static_cast<size_t>(i)];
  const int64_t n = shape[static_cast<size_t>(axis)];
  for (int64_t i = axis + 1; i < r; ++i) inner *= shape[static_cast<size_t>(i)];

  Tensor out(input.shape());
  const double* src = input.data();
  double* dst = out.data();
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t in = 0; in < inner; ++in) {
      const int64_t base = o * n * inner + in;
      double hi = src[base];
      for (int64_t k = 1; k < n; ++k) hi = std::max(hi, src[base + k * inner]);
      double sum = 0.0;
      for (int64_t k = 0; k < n; ++k) {
        const double e = std::exp(src[base + k * inner] - hi);
        dst[base + k * inner] = e;
        sum += e;
      }
      for (int64_t k = 0; k < n; ++k) dst[base + k * inner] /= sum;
    }
  }
  require_finite(out, "softmax");
  return out;
}

Tensor bilinear_sample(const Tensor& input, const Tensor& coords) {
  require_rank(input, 3, "bilinear_sample");
  require_rank(coords, 3, "bilinear_sample");
  const int64_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (coords.dim(0) != 2 || coords.dim(1) != h || coords.dim(2) != w) {
    throw ShapeError("bilinear_sample: coords must be [2 x " + std::to_string(h) +
                     " x " + std::to_string(w) + "], got " + coords.shape_str());
  }
  Tensor out({c, h, w});
  const double* src = input.data();
  const double* cy = coords.data();
  const double* cx = cy + h * w;
  double* dst = out.data();

  parallel_for(h * w, [&](int64_t p0, int64_t p1) {
    for (int64_t p = p0; p < p1; ++p) {
      const double y = cy[p];
      const double x = cx[p];
      // The guard also rejects NaN and keeps the floor cast in range.
      if (!(y > -1.0 && y < static_cast<double>(h)) ||
          !(x > -1.0 && x < static_cast<double>(w))) {
        for (int64_t ch = 0; ch < c; ++ch) dst[ch * h * w + p] = 0.0;
        continue;
      }
      const int64_t y0 = static_cast<int64_t>(std::floor(y));
      const int64_t x0 = static_cast<int64_t>(std::floor(x));
      const double fy = y - static_cast<double>(y0);
      const double fx = x - static_cast<double>(x0);
      const double w00 = (1.0 - fy) * (1.0 - fx);
      const double w01 = (1.0 - fy) * fx;
      const double w10 = fy * (1.0 - fx);
      const double w11 = fy * fx;
      const bool in_y0 = y0 >= 0, in_y1 = y0 + 1 < h;
      const bool in_x0 = x0 >= 0, in_x1 = x0 + 1 < w;
      for (int64_t ch = 0; ch < c; ++ch) {
        const double* plane = src + ch * h * w;
        double acc = 0.0;
        if (in_y0 && in_x0) acc += w00 * plane[y0 * w + x0];
        if (in_y0 && in_x1) acc += w01 * plane[y0 * w + x0 + 1];
        if (in_y1 && in_x0) acc += w10 * plane[(y0 + 1) * w + x0];
        if (in_y1 && in_x1) acc += w11 * plane[(y0 + 1) * w + x0 + 1];
        dst[ch * h * w + p] = acc;
      }
    }
  });
  require_finite(out, "bilinear_sample");
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() < 2 || b.ndim() < 2) {
    throw ShapeError("matmul: operands must have rank >= 2");
  }
  if (a.ndim() != b.ndim()) {
    throw ShapeError("matmul: operand ranks differ (" + a.shape_str() + " vs " +
                     b.shape_str() + ")");
  }
  const int64_t r = a.ndim();
  int64_t batch = 1;
  for (int64_t i = 0; i < r - 2; ++i) {
    if (a.dim(i) != b.dim(i)) {
      throw ShapeError("matmul: batch dimensions differ (" + a.shape_str() +
                       " vs " + b.shape_str() + ")");
    }
    batch *= a.dim(i);
  }
  const int64_t m = a.dim(r - 2), k = a.dim(r - 1);
  const int64_t kb = b.dim(r - 2), n = b.dim(r - 1);
  if (k != kb) {
    throw ShapeError("matmul: inner dimensions differ (" + a.shape_str() + " vs " +
                     b.shape_str() + ")");
  }
  std::vector<int64_t> out_shape(a.shape());
  out_shape[static_cast<size_t>(r - 2)] = m;
  out_shape[static_cast<size_t>(r - 1)] = n;

  Tensor out(out_shape);
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = out.data();

  parallel_for(batch * m, [&](int64_t r0, int64_t r1) {
    for (int64_t row = r0; row < r1; ++row) {
      const int64_t bi = row / m;
      const int64_t i = row % m;
      const double* arow = pa + bi * m * k + i * k;
      const double* bmat = pb + bi * k * n;
      double* crow = pc + bi * m * n + i * n;
      for (int64_t j = 0; j < n; ++j) crow[j] = 0.0;
      for (int64_t kk = 0; kk < k; ++kk) {
        const double av = arow[kk];
        const double* brow = bmat + kk * n;
        for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  });
  require_finite(out, "matmul");
  return out;
}

Tensor global_avg_pool(const Tensor& input) {
  require_rank(input, 3, "global_avg_pool");
  const int64_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  Tensor out({c});
  const double* src = input.data();
  const double inv = 1.0 / static_cast<double>(h * w);
  for (int64_t ch = 0; ch < c; ++ch) {
    double sum = 0.0;
    const double* plane = src + ch * h * w;
    for (int64_t p = 0; p < h * w; ++p) sum += plane[p];
    out[ch] = sum * inv;
  }
  require_finite(out, "global_avg_pool");
  return out;
}

Tensor concat_axis0(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_axis0: no operands");
  const auto& first = parts.front();
  int64_t total = 0;
  for (const Tensor& t : parts) {
    if (t.ndim() != first.ndim()) {
      throw ShapeError("concat_axis0: operand ranks differ");
    }
    for (int64_t i = 1; i < first.ndim(); ++i) {
      if (t.dim(i) != first.dim(i)) {
        throw ShapeError("concat_axis0: trailing extents differ (" + t.shape_str() +
                         " vs " + first.shape_str() + ")");
      }
    }
    total += t.dim(0);
  }
  std::vector<int64_t> shape(first.shape());
  shape[0] = total;
  Tensor out(shape);
  double* dst = out.data();
  for (const Tensor& t : parts) {
    std::memcpy(dst, t.data(), sizeof(double) * static_cast<size_t>(t.numel()));
    dst += t.numel();
  }
  return out;
}

Tensor slice_axis0(const Tensor& input, int64_t start, int64_t len) {
  if (input.empty()) throw ShapeError("slice_axis0: empty tensor");
  const int64_t d0 = input.dim(0);
  if (start < 0 || len < 1 || start + len > d0) {
    throw BoundsError("slice_axis0: range [" + std::to_string(start) + ", " +
                      std::to_string(start + len) + ") out of [0, " +
                      std::to_string(d0) + ")");
  }
  std::vector<int64_t> shape(input.shape());
  shape[0] = len;
  const int64_t inner = input.numel() / d0;
  Tensor out(shape);
  std::memcpy(out.data(), input.data() + start * inner,
              sizeof(double) * static_cast<size_t>(len * inner));
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("add: shapes differ (" + a.shape_str() + " vs " + b.shape_str() + ")");
  }
  Tensor out = a;
  const double* pb = b.data();
  double* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] += pb[i];
  require_finite(out, "add");
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("mul: shapes differ (" + a.shape_str() + " vs " + b.shape_str() + ")");
  }
  Tensor out = a;
  const double* pb = b.data();
  double* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] *= pb[i];
  require_finite(out, "mul");
  return out;
}

Tensor scale(const Tensor& input, double c) {
  Tensor out = input;
  for (double& v : out.values()) v *= c;
  require_finite(out, "scale");
  return out;
}

Tensor add_channel_bias(const Tensor& input, const Tensor& bias) {
  require_rank(input, 3, "add_channel_bias");
  require_rank(bias, 1, "add_channel_bias");
  const int64_t c = input.dim(0);
  if (bias.dim(0) != c) {
    throw ShapeError("add_channel_bias: bias has " + std::to_string(bias.dim(0)) +
                     " entries, input has " + std::to_string(c) + " channels");
  }
  Tensor out = input;
  const int64_t hw = input.dim(1) * input.dim(2);
  double* dst = out.data();
  for (int64_t ch = 0; ch < c; ++ch) {
    const double b = bias[ch];
    for (int64_t p = 0; p < hw; ++p) dst[ch * hw + p] += b;
  }
  require_finite(out, "add_channel_bias");
  return out;
}

Tensor transpose2d(const Tensor& input) {
  require_rank(input, 2, "transpose2d");
  const int64_t m = input.dim(0), n = input.dim(1);
  Tensor out({n, m});
  const double* src = input.data();
  double* dst = out.data();
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) dst[j * m + i] = src[i * n + j];
  }
  return out;
}

Tensor linear(const Tensor& w, const Tensor& bias, const Tensor& x) {
  require_rank(w, 2, "linear");
  require_rank(bias, 1, "linear");
  require_rank(x, 1, "linear");
  const int64_t out_dim = w.dim(0), in_dim = w.dim(1);
  if (x.dim(0) != in_dim) {
    throw ShapeError("linear: weight expects " + std::to_string(in_dim) +
                     " inputs, got " + std::to_string(x.dim(0)));
  }
  if (bias.dim(0) != out_dim) {
    throw ShapeError("linear: bias size does not match output dimension");
  }
  Tensor col = matmul(w, x.reshaped({in_dim, 1}));
  Tensor out = col.reshaped({out_dim});
  return add(out, bias);
}

}  // namespace spikekit
