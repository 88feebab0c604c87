#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikekit/recon.hpp"
#include "spikekit/tensor.hpp"

namespace spikekit {

// How per-window entropy treats channels: softmax and entropy per channel
// then mean over channels (default), or channel-mean the features first.
enum class EntropyMode { PerChannel, MeanFirst };

struct EsaConfig {
  int64_t window = 8;      // window side M; M*M pixels per window
  int64_t merge = 2;       // super-block side, in windows
  double range_lo = 0.5;   // foreground band, multiples of the mean entropy
  double range_hi = 1.0;
  int64_t channels = 64;
  EntropyMode entropy_mode = EntropyMode::PerChannel;
  bool entropy_reduce = false;  // 1x1 channel reduction before the entropy block
  double slope = 0.01;
};

struct EsaParams {
  int64_t channels = 0;
  Tensor lift_w, lift_b;      // 1x1 conv lifting the intensity map to C channels
  Tensor pre1_w, pre1_b;      // 3x3 over concat(F, positional encoding)
  Tensor pre2_w, pre2_b;      // 3x3
  Tensor off1_w, off1_b;      // offset head: 3x3, ReLU, 3x3 -> 2 channels
  Tensor off2_w, off2_b;
  Tensor sa_w, sa_b;          // 3x3 conv whose channel mean is the spatial gate
  Tensor ca_w, ca_b;          // 3x3 conv whose spatial mean is the channel gate
  Tensor deform_w, deform_b;  // deformable aggregation kernel (square, odd)
  Tensor wq, wk;              // C x C query/key projections
  Tensor reduce_w, reduce_b;  // optional 1x1 reduction for the entropy block

  static EsaParams seeded(const EsaConfig& cfg, uint64_t seed);
  void save(const std::string& path) const;
  static EsaParams load(const EsaConfig& cfg, const std::string& path);
};

struct PreprocessOut {
  Tensor f;        // C x H x W
  Tensor f_prime;  // C x H x W
  Tensor offset;   // 2 x H x W, (y, x) displacements
  Tensor sa;       // 1 x H x W
  Tensor ca;       // C x 1 x 1
};

// Per-window entropies laid out row-major over the window grid.
struct EntropyGrid {
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<double> values;  // bits, in [0, log2(M*M)]
};

struct EntropyMaskSet {
  EntropyGrid windows;
  std::vector<int64_t> fore_idx;  // sorted, disjoint from back_idx
  std::vector<int64_t> back_idx;  // together they cover every window
  double e_avg = 0.0;
};

// Two coordinate channels normalized to [0,1].
Tensor positional_encoding(int64_t height, int64_t width);

PreprocessOut preprocess(const IntensityMap& imap, const EsaParams& params,
                         const EsaConfig& cfg);

// Softmax each window's M*M pixels into a distribution and take its Shannon
// entropy in bits; channel handling per cfg.entropy_mode. Requires H and W
// divisible by the window side.
EntropyGrid window_entropy(const Tensor& features, const EsaConfig& cfg);

// Averages entropies over merge x merge super-blocks and classifies blocks
// whose mean lies in [range_lo, range_hi] * E_avg (closed interval, E_avg the
// global mean over unmerged windows) as foreground, then subdivides back to
// windows. fore/back always partition the window set.
EntropyMaskSet generate_masks(const EntropyGrid& entropies, const EsaConfig& cfg);

// Deformable convolution: every tap of the square kernel samples the input
// bilinearly at its grid position displaced by the pixel's (y,x) offset.
Tensor deform_conv(const Tensor& input, const Tensor& offset,
                   const Tensor& kernel, const Tensor& bias);

// Window gather/scatter between C x H x W and K x M*M x C layouts. Windows
// are indexed row-major over the grid; pixels row-major inside a window.
Tensor gather_windows(const Tensor& chw, const std::vector<int64_t>& win_idx,
                      int64_t m);
Tensor scatter_windows(const Tensor& kmc, const std::vector<int64_t>& win_idx,
                       int64_t m, int64_t channels, int64_t height, int64_t width);

// Self-attention inside each foreground window. Query/key embeddings come
// from the deformably sampled feature map, values from the plain windowed
// features; rows are softmax(QK^T/sqrt(C)). Returns K x M*M x C, or the empty
// tensor when there is no foreground.
Tensor foreground_attention(const Tensor& f, const Tensor& offset,
                            const EntropyMaskSet& masks, const EsaParams& params,
                            const EsaConfig& cfg);

// Full pass: preprocess, entropy masks, foreground attention, spatial gating
// of background windows, scatter, channel gating. Output C x H x W.
Tensor esa_forward(const IntensityMap& imap, const EsaParams& params,
                   const EsaConfig& cfg);

}  // namespace spikekit
