#include "spikekit/sim.hpp"

#include <cmath>
#include <string>

#include "spikekit/parallel.hpp"
#include "spikekit/rng.hpp"

namespace spikekit {

namespace {

void validate(const FrameSequence& seq, const SensorConfig& cfg) {
  if (seq.frames.empty()) throw InputError("simulate: frame list is empty");
  if (seq.hold_steps < 1) throw InputError("simulate: hold_steps must be >= 1");
  if (!(cfg.theta > 0) || !(cfg.lambda > 0) || !(cfg.dt_us > 0)) {
    throw ConfigError("simulate: theta, lambda and dt must be positive");
  }
  if (cfg.noise.enabled && (cfg.noise.shot_std < 0 || cfg.noise.dark_rate < 0)) {
    throw ConfigError("simulate: noise magnitudes must be non-negative");
  }
  const auto& first = seq.frames.front();
  if (first.ndim() != 2) throw InputError("simulate: frames must be H x W tensors");
  for (size_t i = 0; i < seq.frames.size(); ++i) {
    const Tensor& f = seq.frames[i];
    if (!f.same_shape(first)) {
      throw InputError("simulate: frame " + std::to_string(i) +
                       " has shape " + f.shape_str() + ", expected " +
                       first.shape_str());
    }
    for (double v : f.values()) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InputError("simulate: frame " + std::to_string(i) +
                         " has intensity outside [0,1]");
      }
    }
  }
}

}  // namespace

SpikeStream simulate(const FrameSequence& seq, const SensorConfig& cfg) {
  validate(seq, cfg);
  const int64_t h = seq.frames.front().dim(0);
  const int64_t w = seq.frames.front().dim(1);
  const int64_t n_frames = static_cast<int64_t>(seq.frames.size());
  const int64_t t_len = n_frames * seq.hold_steps;

  SpikeStream out = SpikeStream::zeros(w, h, t_len, cfg.dt_us, cfg.theta, cfg.lambda);
  const int64_t pb = out.plane_bytes();
  uint8_t* bits = out.bits.data();
  const double step_scale = cfg.lambda * cfg.dt_us;
  const bool noisy = cfg.noise.enabled;
  const bool residual = cfg.reset == ResetMode::Residual;

  // Chunks are aligned to 8 pixels so no two workers share a payload byte.
  parallel_for(h * w, [&](int64_t p0, int64_t p1) {
    for (int64_t p = p0; p < p1; ++p) {
      const int64_t y = p / w, x = p % w;
      Rng rng(mix_seed(cfg.noise.seed, static_cast<uint64_t>(p)));
      double acc = 0.0;
      int64_t t = 0;
      for (int64_t f = 0; f < n_frames; ++f) {
        const double base = step_scale * seq.frames[static_cast<size_t>(f)][y * w + x];
        for (int64_t hstep = 0; hstep < seq.hold_steps; ++hstep, ++t) {
          double charge = base;
          if (noisy) {
            charge = base * (1.0 + cfg.noise.shot_std * rng.gaussian()) +
                     cfg.noise.dark_rate;
            if (charge < 0.0) charge = 0.0;  // photons cannot be un-collected
          }
          acc += charge;
          if (acc >= cfg.theta) {
            bits[t * pb + (p >> 3)] |= static_cast<uint8_t>(1u << (p & 7));
            acc = residual ? acc - cfg.theta : 0.0;
          }
        }
      }
    }
  }, /*align=*/8);

  return out;
}

double expected_rate(double intensity, const SensorConfig& cfg) {
  if (intensity < 0) throw InputError("expected_rate: intensity must be >= 0");
  return cfg.lambda * intensity * cfg.dt_us / cfg.theta;
}

}  // namespace spikekit
