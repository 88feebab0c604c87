#include "spikekit/tbtm.hpp"

#include <cmath>

#include "spikekit/params_io.hpp"
#include "spikekit/rng.hpp"

namespace spikekit {

namespace {

Tensor uniform_tensor(Rng& rng, std::vector<int64_t> shape, int64_t fan_in) {
  Tensor t(std::move(shape));
  const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : t.values()) v = rng.uniform(-s, s);
  return t;
}

}  // namespace

TbtmParams TbtmParams::seeded(const TbtmConfig& cfg, uint64_t seed) {
  if (cfg.t_prime - 6 * cfg.delta < 1) {
    throw ConfigError("tbtm: need t_prime - 6*delta >= 1, got t_prime=" +
                      std::to_string(cfg.t_prime) + " delta=" +
                      std::to_string(cfg.delta));
  }
  if (cfg.c_mid < 1 || cfg.c_b < 1 || cfg.channels < 1 || cfg.se_reduction < 1) {
    throw ConfigError("tbtm: channel configuration must be positive");
  }
  Rng rng(seed);
  TbtmParams p;
  p.cfg = cfg;
  for (int64_t k = 0; k < 4; ++k) {
    const int64_t t_in = cfg.t_prime - 2 * k * cfg.delta;
    p.conv1_w[k] = uniform_tensor(rng, {cfg.c_mid, t_in, 3, 3}, t_in * 9);
    p.conv1_b[k] = uniform_tensor(rng, {cfg.c_mid}, t_in * 9);
    p.conv2_w[k] = uniform_tensor(rng, {cfg.c_b, cfg.c_mid, 3, 3}, cfg.c_mid * 9);
    p.conv2_b[k] = uniform_tensor(rng, {cfg.c_b}, cfg.c_mid * 9);
  }
  const int64_t c_cat = 4 * cfg.c_b;
  const int64_t c_se = std::max<int64_t>(1, c_cat / cfg.se_reduction);
  p.se.w1 = uniform_tensor(rng, {c_se, c_cat}, c_cat);
  p.se.b1 = uniform_tensor(rng, {c_se}, c_cat);
  p.se.w2 = uniform_tensor(rng, {c_cat, c_se}, c_se);
  p.se.b2 = uniform_tensor(rng, {c_cat}, c_se);
  p.out_w = uniform_tensor(rng, {cfg.channels, c_cat, 3, 3}, c_cat * 9);
  p.out_b = uniform_tensor(rng, {cfg.channels}, c_cat * 9);
  return p;
}

void TbtmParams::save(const std::string& path) const {
  std::vector<std::pair<std::string, const Tensor*>> entries;
  for (int64_t k = 0; k < 4; ++k) {
    const std::string suffix = std::to_string(k);
    entries.emplace_back("conv1_w" + suffix, &conv1_w[k]);
    entries.emplace_back("conv1_b" + suffix, &conv1_b[k]);
    entries.emplace_back("conv2_w" + suffix, &conv2_w[k]);
    entries.emplace_back("conv2_b" + suffix, &conv2_b[k]);
  }
  entries.emplace_back("se_w1", &se.w1);
  entries.emplace_back("se_b1", &se.b1);
  entries.emplace_back("se_w2", &se.w2);
  entries.emplace_back("se_b2", &se.b2);
  entries.emplace_back("out_w", &out_w);
  entries.emplace_back("out_b", &out_b);
  save_params_file(path, entries);
}

TbtmParams TbtmParams::load(const TbtmConfig& cfg, const std::string& path) {
  auto blob = load_params_file(path);
  auto take = [&](const std::string& name) {
    auto it = blob.find(name);
    if (it == blob.end()) throw FormatError(path + ": missing tensor " + name);
    return it->second;
  };
  TbtmParams p;
  p.cfg = cfg;
  for (int64_t k = 0; k < 4; ++k) {
    const std::string suffix = std::to_string(k);
    p.conv1_w[k] = take("conv1_w" + suffix);
    p.conv1_b[k] = take("conv1_b" + suffix);
    p.conv2_w[k] = take("conv2_w" + suffix);
    p.conv2_b[k] = take("conv2_b" + suffix);
  }
  p.se.w1 = take("se_w1");
  p.se.b1 = take("se_b1");
  p.se.w2 = take("se_w2");
  p.se.b2 = take("se_b2");
  p.out_w = take("out_w");
  p.out_b = take("out_b");
  return p;
}

std::array<Tensor, 4> slice_branches(const Tensor& block, int64_t delta) {
  if (block.ndim() != 3) {
    throw ShapeError("slice_branches: expected T' x H x W block, got " +
                     block.shape_str());
  }
  if (delta < 1) throw ConfigError("slice_branches: delta must be >= 1");
  const int64_t t_prime = block.dim(0);
  if (t_prime - 6 * delta < 1) {
    throw ConfigError("slice_branches: block too short, t_prime=" +
                      std::to_string(t_prime) + " needs > 6*delta=" +
                      std::to_string(6 * delta));
  }
  std::array<Tensor, 4> out;
  for (int64_t k = 0; k < 4; ++k) {
    out[static_cast<size_t>(k)] =
        slice_axis0(block, k * delta, t_prime - 2 * k * delta);
  }
  return out;
}

Tensor se_attention(const Tensor& input, const SeParams& params) {
  if (input.ndim() != 3) {
    throw ShapeError("se_attention: expected C x H x W input, got " +
                     input.shape_str());
  }
  if (params.w1.dim(1) != input.dim(0) || params.w2.dim(0) != input.dim(0)) {
    throw ShapeError("se_attention: parameters sized for " +
                     std::to_string(params.w1.dim(1)) + " channels, input has " +
                     std::to_string(input.dim(0)));
  }
  const Tensor pooled = global_avg_pool(input);
  const Tensor hidden = relu(linear(params.w1, params.b1, pooled));
  const Tensor gate = sigmoid(linear(params.w2, params.b2, hidden));

  Tensor out = input;
  const int64_t hw = input.dim(1) * input.dim(2);
  double* dst = out.data();
  for (int64_t c = 0; c < input.dim(0); ++c) {
    const double g = gate[c];
    for (int64_t p = 0; p < hw; ++p) dst[c * hw + p] *= g;
  }
  return out;
}

Tensor tbtm_forward(const Tensor& block, const TbtmParams& params) {
  const auto& cfg = params.cfg;
  if (block.ndim() != 3 || block.dim(0) != cfg.t_prime) {
    throw ShapeError("tbtm_forward: expected " + std::to_string(cfg.t_prime) +
                     " x H x W block, got " + block.shape_str());
  }
  const auto branches = slice_branches(block, cfg.delta);
  std::vector<Tensor> features;
  features.reserve(4);
  for (size_t k = 0; k < 4; ++k) {
    Tensor f = conv2d(branches[k], params.conv1_w[k], 1, 1);
    f = add_channel_bias(f, params.conv1_b[k]);
    f = leaky_relu(f, cfg.slope);
    f = conv2d(f, params.conv2_w[k], 1, 1);
    f = add_channel_bias(f, params.conv2_b[k]);
    features.push_back(std::move(f));
  }
  const Tensor cat = concat_axis0(features);
  const Tensor recal = se_attention(cat, params.se);
  Tensor out = conv2d(recal, params.out_w, 1, 1);
  out = add_channel_bias(out, params.out_b);
  return leaky_relu(out, cfg.slope);
}

}  // namespace spikekit
