#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikekit/tensor.hpp"

namespace spikekit {

// Fuses N per-block feature maps into one: channel descriptors from global
// average pooling are concatenated and an MLP (ReLU hidden, sigmoid output)
// scores each block; the result is the alpha-weighted sum of the inputs.
struct FfmParams {
  int64_t channels = 0;
  int64_t blocks = 0;
  Tensor w1, b1;  // [hidden x channels*blocks], [hidden]
  Tensor w2, b2;  // [blocks x hidden], [blocks]
  // When set, the sigmoid scores are additionally softmax-normalized so they
  // sum to one. Off by default.
  bool normalize = false;

  static FfmParams seeded(int64_t channels, int64_t blocks, uint64_t seed);

  void save(const std::string& path) const;
  static FfmParams load(int64_t channels, int64_t blocks, const std::string& path);
};

// The per-block weights alpha, each strictly inside (0,1).
std::vector<double> ffm_weights(const std::vector<Tensor>& features,
                                const FfmParams& params);

Tensor ffm_forward(const std::vector<Tensor>& features, const FfmParams& params);

}  // namespace spikekit
