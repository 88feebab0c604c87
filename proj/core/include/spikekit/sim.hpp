#pragma once

#include <cstdint>
#include <vector>

#include "spikekit/spike_stream.hpp"
#include "spikekit/tensor.hpp"

namespace spikekit {

// What happens to the accumulator when a pixel fires. Residual subtracts the
// threshold and carries the remainder forward; Zero discards it. Residual is
// the default: it conserves charge, so total spikes track total irradiance.
enum class ResetMode { Residual, Zero };

struct NoiseConfig {
  bool enabled = false;
  double shot_std = 0.0;    // multiplicative gaussian on the per-step charge
  double dark_rate = 0.0;   // spurious charge added every step
  uint64_t seed = 1;

  friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
};

struct SensorConfig {
  double theta = 2.0;    // firing threshold
  double lambda = 1.0;   // photoelectric conversion rate
  double dt_us = 1.0;    // temporal resolution
  ResetMode reset = ResetMode::Residual;
  NoiseConfig noise;

  friend bool operator==(const SensorConfig&, const SensorConfig&) = default;
};

// Normalized irradiance frames, each held constant for hold_steps simulation
// steps. All frames share one H x W extent and values lie in [0,1].
struct FrameSequence {
  std::vector<Tensor> frames;
  int64_t hold_steps = 16;
};

// Per pixel: accumulate lambda*I*dt each step (noise terms if enabled, charge
// clamped at zero), fire when the accumulator reaches theta, reset per cfg.
// At most one spike per step; per-step charge above theta saturates the pixel
// at one spike per step. Output has frames*hold_steps planes and carries the
// sensor parameters as metadata. Noise draws come from per-pixel generators
// derived from seed and pixel index, so output is identical for any thread
// count and reproducible for a fixed seed.
SpikeStream simulate(const FrameSequence& frames, const SensorConfig& cfg);

// Asymptotic spikes per step for a constant intensity: lambda*I*dt/theta.
double expected_rate(double intensity, const SensorConfig& cfg);

}  // namespace spikekit
