#pragma once

#include <cstdint>

#include "spikekit/sim.hpp"
#include "spikekit/spike_stream.hpp"
#include "spikekit/tensor.hpp"

namespace spikekit {

// Firing-rate image in [0,1] plus the temporal window it came from.
struct IntensityMap {
  Tensor values;  // 1 x H x W
  int64_t window_start = 0;
  int64_t window_len = 0;
};

// Windowed spike count divided by window length.
IntensityMap tfp(const SpikeStream& stream, int64_t start, int64_t len);

// Interval-based recovery at step t: per pixel, the inter-spike interval
// bracketing t gives value clamp(theta/(lambda*isi*dt), 0, 1). If no spike
// follows t the last complete interval before t is used; if none precedes t
// the first complete interval after it is used. Pixels with fewer than two
// spikes in the whole stream read zero.
IntensityMap tfi(const SpikeStream& stream, int64_t t, const SensorConfig& cfg);

// tfp over the full temporal extent.
IntensityMap intensity_map(const SpikeStream& stream);

}  // namespace spikekit
