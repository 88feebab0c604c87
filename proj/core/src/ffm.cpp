#include "spikekit/ffm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spikekit/params_io.hpp"
#include "spikekit/rng.hpp"

namespace spikekit {

FfmParams FfmParams::seeded(int64_t channels, int64_t blocks, uint64_t seed) {
  if (channels < 1 || blocks < 1) {
    throw ConfigError("ffm: channels and blocks must be positive");
  }
  const int64_t in_dim = channels * blocks;
  const int64_t hidden = std::max(blocks, in_dim / 2);
  Rng rng(seed);
  auto uniform_tensor = [&rng](std::vector<int64_t> shape, int64_t fan_in) {
    Tensor t(std::move(shape));
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : t.values()) v = rng.uniform(-s, s);
    return t;
  };
  FfmParams p;
  p.channels = channels;
  p.blocks = blocks;
  p.w1 = uniform_tensor({hidden, in_dim}, in_dim);
  p.b1 = uniform_tensor({hidden}, in_dim);
  p.w2 = uniform_tensor({blocks, hidden}, hidden);
  p.b2 = uniform_tensor({blocks}, hidden);
  return p;
}

void FfmParams::save(const std::string& path) const {
  save_params_file(path, {{"w1", &w1}, {"b1", &b1}, {"w2", &w2}, {"b2", &b2}});
}

FfmParams FfmParams::load(int64_t channels, int64_t blocks,
                          const std::string& path) {
  auto blob = load_params_file(path);
  auto take = [&](const std::string& name) {
    auto it = blob.find(name);
    if (it == blob.end()) throw FormatError(path + ": missing tensor " + name);
    return it->second;
  };
  FfmParams p;
  p.channels = channels;
  p.blocks = blocks;
  p.w1 = take("w1");
  p.b1 = take("b1");
  p.w2 = take("w2");
  p.b2 = take("b2");
  return p;
}

std::vector<double> ffm_weights(const std::vector<Tensor>& features,
                                const FfmParams& params) {
  const int64_t n = static_cast<int64_t>(features.size());
  if (n < 1) throw ShapeError("ffm: feature list is empty");
  if (n != params.blocks) {
    throw ShapeError("ffm: parameters sized for " + std::to_string(params.blocks) +
                     " blocks, got " + std::to_string(n) + " features");
  }
  const Tensor& first = features.front();
  if (first.ndim() != 3 || first.dim(0) != params.channels) {
    throw ShapeError("ffm: expected " + std::to_string(params.channels) +
                     " x H x W features, got " + first.shape_str());
  }
  Tensor descriptor({params.channels * n});
  for (int64_t i = 0; i < n; ++i) {
    const Tensor& f = features[static_cast<size_t>(i)];
    if (!f.same_shape(first)) {
      throw ShapeError("ffm: feature " + std::to_string(i) + " has shape " +
                       f.shape_str() + ", expected " + first.shape_str());
    }
    const Tensor g = global_avg_pool(f);
    for (int64_t c = 0; c < params.channels; ++c) {
      descriptor[i * params.channels + c] = g[c];
    }
  }
  const Tensor hidden = relu(linear(params.w1, params.b1, descriptor));
  const Tensor alpha = sigmoid(linear(params.w2, params.b2, hidden));
  std::vector<double> out(alpha.values());
  if (params.normalize) {
    double hi = out[0];
    for (double v : out) hi = std::max(hi, v);
    double sum = 0.0;
    for (double& v : out) {
      v = std::exp(v - hi);
      sum += v;
    }
    for (double& v : out) v /= sum;
  }
  return out;
}

Tensor ffm_forward(const std::vector<Tensor>& features, const FfmParams& params) {
  const std::vector<double> alpha = ffm_weights(features, params);
  Tensor out(features.front().shape());
  double* dst = out.data();
  for (size_t i = 0; i < features.size(); ++i) {
    const double a = alpha[i];
    const double* src = features[i].data();
    for (int64_t p = 0; p < out.numel(); ++p) dst[p] += a * src[p];
  }
  require_finite(out, "ffm_forward");
  return out;
}

}  // namespace spikekit
