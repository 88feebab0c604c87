#include "spikekit/pipeline.hpp"

#include <string>

#include "spikekit/esa.hpp"
#include "spikekit/ffm.hpp"
#include "spikekit/rng.hpp"
#include "spikekit/tbtm.hpp"

namespace spikekit {

namespace {
// Fixed salts so each parameter set gets an independent stream from one seed.
constexpr uint64_t kTbtmSalt = 1;
constexpr uint64_t kFfmSalt = 2;
constexpr uint64_t kEsaSalt = 3;
}  // namespace

std::vector<int64_t> block_starts(int64_t t_len, int64_t t_prime, int64_t stride) {
  if (t_prime < 1 || stride < 1) {
    throw ConfigError("block_starts: t_prime and stride must be >= 1");
  }
  if (t_len < t_prime) {
    throw ConfigError("block_starts: stream has " + std::to_string(t_len) +
                      " steps, shorter than one block of " +
                      std::to_string(t_prime));
  }
  std::vector<int64_t> starts;
  for (int64_t s = 0; s + t_prime <= t_len; s += stride) starts.push_back(s);
  if (starts.back() + t_prime < t_len) starts.push_back(t_len - t_prime);
  return starts;
}

IntensityMap branch_intensity_map(const SpikeStream& stream,
                                  const PipelineConfig& cfg) {
  if (cfg.imap_mode == ImapMode::Tfp) return intensity_map(stream);
  SensorConfig sensor = cfg.sensor;
  sensor.theta = stream.theta;
  sensor.lambda = stream.lambda;
  sensor.dt_us = stream.dt_us;
  return tfi(stream, stream.t_len / 2, sensor);
}

Tensor forward_upper(const SpikeStream& stream, const PipelineConfig& cfg) {
  const auto starts = block_starts(stream.t_len, cfg.tbtm_t_prime, cfg.tbtm_stride);
  const TbtmParams tbtm = TbtmParams::seeded(cfg.tbtm_config(),
                                             mix_seed(cfg.seed, kTbtmSalt));
  std::vector<Tensor> features;
  features.reserve(starts.size());
  for (int64_t s : starts) {
    features.push_back(tbtm_forward(to_tensor(stream, s, cfg.tbtm_t_prime), tbtm));
  }
  FfmParams ffm = FfmParams::seeded(cfg.channels,
                                    static_cast<int64_t>(starts.size()),
                                    mix_seed(cfg.seed, kFfmSalt));
  ffm.normalize = cfg.ffm_normalize;
  return ffm_forward(features, ffm);
}

Tensor forward_lower(const SpikeStream& stream, const PipelineConfig& cfg) {
  const EsaParams esa = EsaParams::seeded(cfg.esa_config(),
                                          mix_seed(cfg.seed, kEsaSalt));
  return esa_forward(branch_intensity_map(stream, cfg), esa, cfg.esa_config());
}

Tensor forward_full(const SpikeStream& stream, const PipelineConfig& cfg) {
  return add(forward_upper(stream, cfg), forward_lower(stream, cfg));
}

}  // namespace spikekit
