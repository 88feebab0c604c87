#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "spikekit/tensor.hpp"

namespace spikekit {

// Squeeze-and-excitation gate: channel descriptors from global average
// pooling go through a two-layer bottleneck (ReLU hidden, sigmoid output) and
// rescale the input channels.
struct SeParams {
  Tensor w1, b1;  // [mid x C], [mid]
  Tensor w2, b2;  // [C x mid], [C]
};

struct TbtmConfig {
  int64_t t_prime = 41;      // temporal block length
  int64_t delta = 5;         // per-branch temporal step
  int64_t c_mid = 16;        // width between the two branch convs
  int64_t c_b = 16;          // per-branch output channels
  int64_t channels = 64;     // module output channels
  int64_t se_reduction = 4;  // bottleneck ratio of the SE gate
  double slope = 0.01;       // leaky-relu slope
};

// Four parallel conv branches over nested temporal slices, channel-concat,
// SE recalibration, and a projection to `channels`. One parameter set is
// shared across every temporal block.
struct TbtmParams {
  TbtmConfig cfg;
  std::array<Tensor, 4> conv1_w, conv1_b;  // [c_mid x (T'-2k*delta) x 3 x 3]
  std::array<Tensor, 4> conv2_w, conv2_b;  // [c_b x c_mid x 3 x 3]
  SeParams se;                             // over 4*c_b channels
  Tensor out_w, out_b;                     // [channels x 4*c_b x 3 x 3]

  // All weights drawn uniformly from [-s, s] with s = 1/sqrt(fan_in).
  static TbtmParams seeded(const TbtmConfig& cfg, uint64_t seed);

  void save(const std::string& path) const;
  static TbtmParams load(const TbtmConfig& cfg, const std::string& path);
};

// Branch k of a T' x H x W block keeps time channels [k*delta, T'-k*delta);
// branch 0 is the whole block. Requires T' - 6*delta >= 1.
std::array<Tensor, 4> slice_branches(const Tensor& block, int64_t delta);

Tensor se_attention(const Tensor& input, const SeParams& params);

Tensor tbtm_forward(const Tensor& block, const TbtmParams& params);

}  // namespace spikekit
