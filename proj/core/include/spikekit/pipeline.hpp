#pragma once

#include <cstdint>
#include <vector>

#include "spikekit/config.hpp"
#include "spikekit/recon.hpp"
#include "spikekit/spike_stream.hpp"
#include "spikekit/tensor.hpp"

namespace spikekit {

// Start indices of overlapping temporal blocks of length t_prime. Blocks step
// by `stride`; when that leaves a tail shorter than a block, one extra block
// flush with the end is appended so the whole stream is covered.
std::vector<int64_t> block_starts(int64_t t_len, int64_t t_prime, int64_t stride);

// The intensity map feeding the lower branch, per cfg.imap_mode: full-window
// rate (tfp) or interval recovery at the mid step (tfi).
IntensityMap branch_intensity_map(const SpikeStream& stream,
                                  const PipelineConfig& cfg);

// Upper branch: per-block temporal texture features fused across blocks.
// Lower branch: intensity map through entropy selective attention.
// Parameters are derived deterministically from cfg.seed.
Tensor forward_upper(const SpikeStream& stream, const PipelineConfig& cfg);
Tensor forward_lower(const SpikeStream& stream, const PipelineConfig& cfg);

// Sum of the two branches.
Tensor forward_full(const SpikeStream& stream, const PipelineConfig& cfg);

}  // namespace spikekit
