#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "spikekit/esa.hpp"
#include "spikekit/sim.hpp"
#include "spikekit/tbtm.hpp"

namespace spikekit {

enum class ImapMode { Tfp, Tfi };

// Everything the command-line pipelines need, parseable from a plain-text
// key=value file ('#' starts a comment). Every field has a default; the
// shipped values are window=8, entropy range [0.5, 1.0], and a sensor tuned
// so that a pixel's firing rate equals its normalized intensity
// (lambda * dt == theta).
struct PipelineConfig {
  PipelineConfig() {
    sensor.lambda = 0.08;
    sensor.dt_us = 25.0;
  }

  SensorConfig sensor;
  int64_t hold_steps = 16;

  int64_t channels = 64;  // output channels of both branches
  double slope = 0.01;

  int64_t tbtm_t_prime = 41;
  int64_t tbtm_delta = 5;
  int64_t tbtm_stride = 20;
  int64_t tbtm_c_mid = 16;
  int64_t tbtm_c_b = 16;
  int64_t tbtm_se_reduction = 4;

  bool ffm_normalize = false;

  int64_t esa_window = 8;
  int64_t esa_merge = 2;
  double esa_range_lo = 0.5;
  double esa_range_hi = 1.0;
  EntropyMode esa_entropy_mode = EntropyMode::PerChannel;
  bool esa_entropy_reduce = false;

  ImapMode imap_mode = ImapMode::Tfp;

  uint64_t seed = 42;
  int64_t threads = 0;  // 0 = hardware concurrency

  TbtmConfig tbtm_config() const;
  EsaConfig esa_config() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

// Throws ConfigError on unknown keys or unparseable values, naming both.
PipelineConfig parse_config(std::istream& source);
PipelineConfig parse_config_string(const std::string& text);
PipelineConfig load_config_file(const std::string& path);

// Canonical form: every key once, grouped, reals in shortest exact notation.
// parse(serialize(cfg)) == cfg for all representable configs.
std::string serialize_config(const PipelineConfig& cfg);
void save_config_file(const PipelineConfig& cfg, const std::string& path);

}  // namespace spikekit
