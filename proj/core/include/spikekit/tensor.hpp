#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikekit/errors.hpp"

namespace spikekit {

// Dense row-major tensor of 64-bit reals. Extents are positive and the data
// vector holds exactly product(shape) values. A default-constructed Tensor is
// the empty sentinel (no shape, no data) used where an operation may yield
// nothing, e.g. attention with zero foreground windows.
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape);  // zero-filled
  Tensor(std::vector<int64_t> shape, std::vector<double> data);

  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int64_t> shape, double value);

  bool empty() const { return shape_.empty(); }
  int64_t ndim() const { return static_cast<int64_t>(shape_.size()); }
  int64_t dim(int64_t axis) const;
  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }
  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }

  // Checked multi-index access, mostly for tests and small code paths.
  double at(std::initializer_list<int64_t> idx) const;
  double& at(std::initializer_list<int64_t> idx);

  // Same element count, new shape.
  Tensor reshaped(std::vector<int64_t> new_shape) const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_str() const;

private:
  int64_t offset_of(std::initializer_list<int64_t> idx) const;

  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

// Throws if any element is NaN or infinite. Every kernel below runs this on
// its result; the module contract is that outputs are always finite.
void require_finite(const Tensor& t, const char* op);

// 2-D cross-correlation. input [Cin x H x W], kernel [Cout x Cin x k x k].
// Output [Cout x H' x W'] with H' = (H + 2*padding - k)/stride + 1, which
// must be a positive integer.
Tensor conv2d(const Tensor& input, const Tensor& kernel, int64_t stride = 1,
              int64_t padding = 0);

// Elementwise x >= 0 ? x : slope*x, slope in (0,1).
Tensor leaky_relu(const Tensor& input, double slope = 0.01);

Tensor relu(const Tensor& input);
Tensor sigmoid(const Tensor& input);

// Stable softmax along `axis` (negative axis counts from the end). Every
// slice along the axis sums to 1.
Tensor softmax(const Tensor& input, int64_t axis);

// 4-neighbor bilinear interpolation. input [C x H x W], coords [2 x H x W]
// holding (y, x) sample positions per output pixel. The image is treated as
// zero outside [0,H-1] x [0,W-1]: out-of-range taps contribute nothing, and
// positions a full pixel or more outside read exactly zero.
Tensor bilinear_sample(const Tensor& input, const Tensor& coords);

// Batched matrix product. a [... x m x k], b [... x k x n] with identical
// leading dimensions.
Tensor matmul(const Tensor& a, const Tensor& b);

// Per-channel mean over all spatial positions. input [C x H x W] -> [C].
Tensor global_avg_pool(const Tensor& input);

// Concatenation along axis 0; all other extents must agree.
Tensor concat_axis0(const std::vector<Tensor>& parts);

// Contiguous sub-tensor along axis 0.
Tensor slice_axis0(const Tensor& input, int64_t start, int64_t len);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& input, double c);

// input [C x H x W] plus per-channel bias [C].
Tensor add_channel_bias(const Tensor& input, const Tensor& bias);

// Fully connected layer: w [out x in], bias [out], x [in] -> [out].
// Composed from matmul so it inherits its numeric behavior.
Tensor linear(const Tensor& w, const Tensor& bias, const Tensor& x);

// Rank-2 transpose.
Tensor transpose2d(const Tensor& input);

}  // namespace spikekit
