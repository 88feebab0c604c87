#include "spikekit/esa.hpp"

#include <algorithm>
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

void check_divisible(int64_t h, int64_t w, int64_t m, const char* op) {
  if (m < 1) throw ConfigError(std::string(op) + ": window side must be >= 1");
  if (h % m != 0 || w % m != 0) {
    throw ConfigError(std::string(op) + ": spatial size " + std::to_string(h) +
                      "x" + std::to_string(w) + " not divisible by " +
                      std::to_string(m));
  }
}

// Shannon entropy in bits of softmax(vals), numerically stable form:
// with z = x - max, H = log2(sum e^z) - (sum z e^z)/(sum e^z * ln 2).
double softmax_entropy_bits(const std::vector<double>& vals) {
  double hi = vals[0];
  for (double v : vals) hi = std::max(hi, v);
  double sum = 0.0, weighted = 0.0;
  for (double v : vals) {
    const double e = std::exp(v - hi);
    sum += e;
    weighted += (v - hi) * e;
  }
  constexpr double kLn2 = 0.6931471805599453094172321;
  return std::log2(sum) - weighted / (sum * kLn2);
}

}  // namespace

EsaParams EsaParams::seeded(const EsaConfig& cfg, uint64_t seed) {
  if (cfg.channels < 1) throw ConfigError("esa: channels must be positive");
  if (cfg.window < 1 || cfg.merge < 1) {
    throw ConfigError("esa: window and merge must be positive");
  }
  if (!(cfg.range_lo >= 0.0) || !(cfg.range_lo < cfg.range_hi)) {
    throw ConfigError("esa: entropy range must satisfy 0 <= lo < hi");
  }
  const int64_t c = cfg.channels;
  const int64_t c_off = std::max<int64_t>(4, c / 4);
  const int64_t c_red = std::max<int64_t>(1, c / 4);
  Rng rng(seed);
  EsaParams p;
  p.channels = c;
  p.lift_w = uniform_tensor(rng, {c, 1, 1, 1}, 1);
  p.lift_b = uniform_tensor(rng, {c}, 1);
  p.pre1_w = uniform_tensor(rng, {c, c + 2, 3, 3}, (c + 2) * 9);
  p.pre1_b = uniform_tensor(rng, {c}, (c + 2) * 9);
  p.pre2_w = uniform_tensor(rng, {c, c, 3, 3}, c * 9);
  p.pre2_b = uniform_tensor(rng, {c}, c * 9);
  p.off1_w = uniform_tensor(rng, {c_off, c, 3, 3}, c * 9);
  p.off1_b = uniform_tensor(rng, {c_off}, c * 9);
  p.off2_w = uniform_tensor(rng, {2, c_off, 3, 3}, c_off * 9);
  p.off2_b = uniform_tensor(rng, {2}, c_off * 9);
  p.sa_w = uniform_tensor(rng, {c, c, 3, 3}, c * 9);
  p.sa_b = uniform_tensor(rng, {c}, c * 9);
  p.ca_w = uniform_tensor(rng, {c, c, 3, 3}, c * 9);
  p.ca_b = uniform_tensor(rng, {c}, c * 9);
  p.deform_w = uniform_tensor(rng, {c, c, 3, 3}, c * 9);
  p.deform_b = uniform_tensor(rng, {c}, c * 9);
  p.wq = uniform_tensor(rng, {c, c}, c);
  p.wk = uniform_tensor(rng, {c, c}, c);
  p.reduce_w = uniform_tensor(rng, {c_red, c, 1, 1}, c);
  p.reduce_b = uniform_tensor(rng, {c_red}, c);
  return p;
}

void EsaParams::save(const std::string& path) const {
  const std::vector<std::pair<std::string, const Tensor*>> entries = {
      {"lift_w", &lift_w},     {"lift_b", &lift_b},
      {"pre1_w", &pre1_w},     {"pre1_b", &pre1_b},
      {"pre2_w", &pre2_w},     {"pre2_b", &pre2_b},
      {"off1_w", &off1_w},     {"off1_b", &off1_b},
      {"off2_w", &off2_w},     {"off2_b", &off2_b},
      {"sa_w", &sa_w},         {"sa_b", &sa_b},
      {"ca_w", &ca_w},         {"ca_b", &ca_b},
      {"deform_w", &deform_w}, {"deform_b", &deform_b},
      {"wq", &wq},             {"wk", &wk},
      {"reduce_w", &reduce_w}, {"reduce_b", &reduce_b},
  };
  save_params_file(path, entries);
}

EsaParams EsaParams::load(const EsaConfig& cfg, const std::string& path) {
  auto blob = load_params_file(path);
  auto take = [&](const std::string& name) {
    auto it = blob.find(name);
    if (it == blob.end()) throw FormatError(path + ": missing tensor " + name);
    return it->second;
  };
  EsaParams p;
  p.channels = cfg.channels;
  p.lift_w = take("lift_w");
  p.lift_b = take("lift_b");
  p.pre1_w = take("pre1_w");
  p.pre1_b = take("pre1_b");
  p.pre2_w = take("pre2_w");
  p.pre2_b = take("pre2_b");
  p.off1_w = take("off1_w");
  p.off1_b = take("off1_b");
  p.off2_w = take("off2_w");
  p.off2_b = take("off2_b");
  p.sa_w = take("sa_w");
  p.sa_b = take("sa_b");
  p.ca_w = take("ca_w");
  p.ca_b = take("ca_b");
  p.deform_w = take("deform_w");
  p.deform_b = take("deform_b");
  p.wq = take("wq");
  p.wk = take("wk");
  p.reduce_w = take("reduce_w");
  p.reduce_b = take("reduce_b");
  return p;
}

Tensor positional_encoding(int64_t height, int64_t width) {
  Tensor pe({2, height, width});
  double* py = pe.data();
  double* px = py + height * width;
  const double sy = height > 1 ? 1.0 / static_cast<double>(height - 1) : 0.0;
  const double sx = width > 1 ? 1.0 / static_cast<double>(width - 1) : 0.0;
  for (int64_t y = 0; y < height; ++y) {
    for (int64_t x = 0; x < width; ++x) {
      py[y * width + x] = static_cast<double>(y) * sy;
      px[y * width + x] = static_cast<double>(x) * sx;
    }
  }
  return pe;
}

PreprocessOut preprocess(const IntensityMap& imap, const EsaParams& params,
                         const EsaConfig& cfg) {
  const Tensor& img = imap.values;
  if (img.ndim() != 3 || img.dim(0) != 1) {
    throw ShapeError("esa preprocess: expected 1 x H x W intensity map, got " +
                     img.shape_str());
  }
  const int64_t h = img.dim(1), w = img.dim(2);
  check_divisible(h, w, cfg.window * cfg.merge, "esa preprocess");

  PreprocessOut out;
  out.f = add_channel_bias(conv2d(img, params.lift_w, 1, 0), params.lift_b);

  const Tensor cat = concat_axis0({out.f, positional_encoding(h, w)});
  Tensor t = relu(add_channel_bias(conv2d(cat, params.pre1_w, 1, 1), params.pre1_b));
  out.f_prime = relu(add_channel_bias(conv2d(t, params.pre2_w, 1, 1), params.pre2_b));

  Tensor o = relu(add_channel_bias(conv2d(out.f_prime, params.off1_w, 1, 1),
                                   params.off1_b));
  out.offset = add_channel_bias(conv2d(o, params.off2_w, 1, 1), params.off2_b);

  const int64_t c = params.channels;
  const Tensor sa_full =
      add_channel_bias(conv2d(out.f_prime, params.sa_w, 1, 1), params.sa_b);
  out.sa = Tensor({1, h, w});
  {
    const double* src = sa_full.data();
    double* dst = out.sa.data();
    const double inv = 1.0 / static_cast<double>(c);
    for (int64_t p = 0; p < h * w; ++p) {
      double sum = 0.0;
      for (int64_t ch = 0; ch < c; ++ch) sum += src[ch * h * w + p];
      dst[p] = sum * inv;
    }
  }
  const Tensor ca_full =
      add_channel_bias(conv2d(out.f_prime, params.ca_w, 1, 1), params.ca_b);
  out.ca = global_avg_pool(ca_full).reshaped({c, 1, 1});
  return out;
}

EntropyGrid window_entropy(const Tensor& features, const EsaConfig& cfg) {
  if (features.ndim() != 3) {
    throw ShapeError("window_entropy: expected C x H x W features, got " +
                     features.shape_str());
  }
  const int64_t c = features.dim(0), h = features.dim(1), w = features.dim(2);
  const int64_t m = cfg.window;
  check_divisible(h, w, m, "window_entropy");

  EntropyGrid grid;
  grid.rows = h / m;
  grid.cols = w / m;
  grid.values.resize(static_cast<size_t>(grid.rows * grid.cols));
  const double max_bits = std::log2(static_cast<double>(m * m));
  const double* src = features.data();
  std::vector<double> pixels(static_cast<size_t>(m * m));

  for (int64_t wy = 0; wy < grid.rows; ++wy) {
    for (int64_t wx = 0; wx < grid.cols; ++wx) {
      double entropy = 0.0;
      if (cfg.entropy_mode == EntropyMode::PerChannel) {
        for (int64_t ch = 0; ch < c; ++ch) {
          const double* plane = src + ch * h * w;
          for (int64_t iy = 0; iy < m; ++iy) {
            for (int64_t ix = 0; ix < m; ++ix) {
              pixels[static_cast<size_t>(iy * m + ix)] =
                  plane[(wy * m + iy) * w + (wx * m + ix)];
            }
          }
          entropy += softmax_entropy_bits(pixels);
        }
        entropy /= static_cast<double>(c);
      } else {
        const double inv_c = 1.0 / static_cast<double>(c);
        for (int64_t iy = 0; iy < m; ++iy) {
          for (int64_t ix = 0; ix < m; ++ix) {
            double sum = 0.0;
            const int64_t p = (wy * m + iy) * w + (wx * m + ix);
            for (int64_t ch = 0; ch < c; ++ch) sum += src[ch * h * w + p];
            pixels[static_cast<size_t>(iy * m + ix)] = sum * inv_c;
          }
        }
        entropy = softmax_entropy_bits(pixels);
      }
      // Rounding can nudge past the analytic bound by an ulp or two.
      grid.values[static_cast<size_t>(wy * grid.cols + wx)] =
          std::clamp(entropy, 0.0, max_bits);
    }
  }
  return grid;
}

EntropyMaskSet generate_masks(const EntropyGrid& entropies, const EsaConfig& cfg) {
  const int64_t rows = entropies.rows, cols = entropies.cols;
  if (rows < 1 || cols < 1 ||
      static_cast<int64_t>(entropies.values.size()) != rows * cols) {
    throw ShapeError("generate_masks: malformed entropy grid");
  }
  if (cfg.merge < 1) throw ConfigError("generate_masks: merge must be >= 1");
  if (rows % cfg.merge != 0 || cols % cfg.merge != 0) {
    throw ConfigError("generate_masks: grid " + std::to_string(rows) + "x" +
                      std::to_string(cols) + " not divisible by merge=" +
                      std::to_string(cfg.merge));
  }
  EntropyMaskSet masks;
  masks.windows = entropies;
  double sum = 0.0;
  for (double v : entropies.values) sum += v;
  masks.e_avg = sum / static_cast<double>(rows * cols);

  const double lo = cfg.range_lo * masks.e_avg;
  const double hi = cfg.range_hi * masks.e_avg;
  const int64_t mb = cfg.merge;
  for (int64_t br = 0; br < rows / mb; ++br) {
    for (int64_t bc = 0; bc < cols / mb; ++bc) {
      double block = 0.0;
      for (int64_t iy = 0; iy < mb; ++iy) {
        for (int64_t ix = 0; ix < mb; ++ix) {
          block += entropies.values[static_cast<size_t>(
              (br * mb + iy) * cols + (bc * mb + ix))];
        }
      }
      block /= static_cast<double>(mb * mb);
      const bool fore = block >= lo && block <= hi;
      auto& side = fore ? masks.fore_idx : masks.back_idx;
      for (int64_t iy = 0; iy < mb; ++iy) {
        for (int64_t ix = 0; ix < mb; ++ix) {
          side.push_back((br * mb + iy) * cols + (bc * mb + ix));
        }
      }
    }
  }
  std::sort(masks.fore_idx.begin(), masks.fore_idx.end());
  std::sort(masks.back_idx.begin(), masks.back_idx.end());
  return masks;
}

Tensor deform_conv(const Tensor& input, const Tensor& offset,
                   const Tensor& kernel, const Tensor& bias) {
  if (input.ndim() != 3) {
    throw ShapeError("deform_conv: expected C x H x W input, got " +
                     input.shape_str());
  }
  const int64_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (offset.ndim() != 3 || offset.dim(0) != 2 || offset.dim(1) != h ||
      offset.dim(2) != w) {
    throw ShapeError("deform_conv: offset must be [2 x H x W], got " +
                     offset.shape_str());
  }
  if (kernel.ndim() != 4 || kernel.dim(1) != c) {
    throw ShapeError("deform_conv: kernel " + kernel.shape_str() +
                     " does not match input " + input.shape_str());
  }
  const int64_t co = kernel.dim(0), k = kernel.dim(2);
  if (kernel.dim(3) != k || k % 2 == 0) {
    throw ConfigError("deform_conv: kernel must be square with odd side");
  }
  if (bias.ndim() != 1 || bias.dim(0) != co) {
    throw ShapeError("deform_conv: bias size does not match kernel output");
  }
  const int64_t r = k / 2;
  const double* off_y = offset.data();
  const double* off_x = off_y + h * w;

  Tensor out({co, h, w});
  Tensor coords({2, h, w});
  double* cy = coords.data();
  double* cx = cy + h * w;
  const double* ker = kernel.data();
  double* dst = out.data();

  for (int64_t ky = 0; ky < k; ++ky) {
    for (int64_t kx = 0; kx < k; ++kx) {
      for (int64_t y = 0; y < h; ++y) {
        for (int64_t x = 0; x < w; ++x) {
          const int64_t p = y * w + x;
          cy[p] = static_cast<double>(y + ky - r) + off_y[p];
          cx[p] = static_cast<double>(x + kx - r) + off_x[p];
        }
      }
      const Tensor sampled = bilinear_sample(input, coords);
      const double* smp = sampled.data();
      for (int64_t oc = 0; oc < co; ++oc) {
        double* oplane = dst + oc * h * w;
        for (int64_t ic = 0; ic < c; ++ic) {
          const double wgt = ker[((oc * c + ic) * k + ky) * k + kx];
          if (wgt == 0.0) continue;
          const double* splane = smp + ic * h * w;
          for (int64_t p = 0; p < h * w; ++p) oplane[p] += wgt * splane[p];
        }
      }
    }
  }
  return add_channel_bias(out, bias);
}

Tensor gather_windows(const Tensor& chw, const std::vector<int64_t>& win_idx,
                      int64_t m) {
  if (chw.ndim() != 3) {
    throw ShapeError("gather_windows: expected C x H x W, got " + chw.shape_str());
  }
  const int64_t c = chw.dim(0), h = chw.dim(1), w = chw.dim(2);
  check_divisible(h, w, m, "gather_windows");
  const int64_t cols = w / m;
  const int64_t n_win = (h / m) * cols;
  const int64_t kwin = static_cast<int64_t>(win_idx.size());
  if (kwin == 0) return Tensor();

  Tensor out({kwin, m * m, c});
  const double* src = chw.data();
  double* dst = out.data();
  for (int64_t i = 0; i < kwin; ++i) {
    const int64_t n = win_idx[static_cast<size_t>(i)];
    if (n < 0 || n >= n_win) {
      throw BoundsError("gather_windows: window index " + std::to_string(n) +
                        " out of [0, " + std::to_string(n_win) + ")");
    }
    const int64_t y0 = (n / cols) * m, x0 = (n % cols) * m;
    for (int64_t iy = 0; iy < m; ++iy) {
      for (int64_t ix = 0; ix < m; ++ix) {
        const int64_t p = (y0 + iy) * w + (x0 + ix);
        for (int64_t ch = 0; ch < c; ++ch) {
          dst[(i * m * m + iy * m + ix) * c + ch] = src[ch * h * w + p];
        }
      }
    }
  }
  return out;
}

Tensor scatter_windows(const Tensor& kmc, const std::vector<int64_t>& win_idx,
                       int64_t m, int64_t channels, int64_t height, int64_t width) {
  Tensor out({channels, height, width});
  if (win_idx.empty()) return out;
  if (kmc.ndim() != 3 || kmc.dim(0) != static_cast<int64_t>(win_idx.size()) ||
      kmc.dim(1) != m * m || kmc.dim(2) != channels) {
    throw ShapeError("scatter_windows: expected [" +
                     std::to_string(win_idx.size()) + " x " +
                     std::to_string(m * m) + " x " + std::to_string(channels) +
                     "], got " + kmc.shape_str());
  }
  check_divisible(height, width, m, "scatter_windows");
  const int64_t cols = width / m;
  const double* src = kmc.data();
  double* dst = out.data();
  for (size_t i = 0; i < win_idx.size(); ++i) {
    const int64_t n = win_idx[i];
    const int64_t y0 = (n / cols) * m, x0 = (n % cols) * m;
    for (int64_t iy = 0; iy < m; ++iy) {
      for (int64_t ix = 0; ix < m; ++ix) {
        const int64_t p = (y0 + iy) * width + (x0 + ix);
        for (int64_t ch = 0; ch < channels; ++ch) {
          dst[ch * height * width + p] =
              src[(static_cast<int64_t>(i) * m * m + iy * m + ix) * channels + ch];
        }
      }
    }
  }
  return out;
}

Tensor foreground_attention(const Tensor& f, const Tensor& offset,
                            const EntropyMaskSet& masks, const EsaParams& params,
                            const EsaConfig& cfg) {
  if (masks.fore_idx.empty()) return Tensor();
  const int64_t m = cfg.window;
  const int64_t c = params.channels;
  if (f.ndim() != 3 || f.dim(0) != c) {
    throw ShapeError("foreground_attention: expected " + std::to_string(c) +
                     " x H x W features, got " + f.shape_str());
  }
  const Tensor x_dense = deform_conv(f, offset, params.deform_w, params.deform_b);
  const Tensor x = gather_windows(x_dense, masks.fore_idx, m);
  const Tensor v = gather_windows(f, masks.fore_idx, m);
  const int64_t kwin = x.dim(0);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(c));

  Tensor out({kwin, m * m, c});
  for (int64_t i = 0; i < kwin; ++i) {
    const Tensor xw = slice_axis0(x, i, 1).reshaped({m * m, c});
    const Tensor vw = slice_axis0(v, i, 1).reshaped({m * m, c});
    const Tensor q = matmul(xw, params.wq);
    const Tensor kk = matmul(xw, params.wk);
    const Tensor scores = scale(matmul(q, transpose2d(kk)), inv_sqrt_d);
    const Tensor attn = softmax(scores, 1);
    const Tensor res = matmul(attn, vw);
    std::copy(res.data(), res.data() + res.numel(), out.data() + i * m * m * c);
  }
  return out;
}

Tensor esa_forward(const IntensityMap& imap, const EsaParams& params,
                   const EsaConfig& cfg) {
  const PreprocessOut pre = preprocess(imap, params, cfg);
  const int64_t c = params.channels;
  const int64_t h = pre.f.dim(1), w = pre.f.dim(2);

  Tensor ent_input = pre.f_prime;
  if (cfg.entropy_reduce) {
    ent_input = add_channel_bias(conv2d(pre.f_prime, params.reduce_w, 1, 0),
                                 params.reduce_b);
  }
  const EntropyGrid grid = window_entropy(ent_input, cfg);
  const EntropyMaskSet masks = generate_masks(grid, cfg);

  Tensor combined({c, h, w});
  if (!masks.fore_idx.empty()) {
    const Tensor fore = foreground_attention(pre.f, pre.offset, masks, params, cfg);
    combined = scatter_windows(fore, masks.fore_idx, cfg.window, c, h, w);
  }
  // Background windows: spatial gate broadcast over channels.
  const double* sa = pre.sa.data();
  const double* fsrc = pre.f.data();
  double* dst = combined.data();
  const int64_t m = cfg.window;
  const int64_t cols = w / m;
  for (int64_t n : masks.back_idx) {
    const int64_t y0 = (n / cols) * m, x0 = (n % cols) * m;
    for (int64_t iy = 0; iy < m; ++iy) {
      for (int64_t ix = 0; ix < m; ++ix) {
        const int64_t p = (y0 + iy) * w + (x0 + ix);
        for (int64_t ch = 0; ch < c; ++ch) {
          dst[ch * h * w + p] = fsrc[ch * h * w + p] * sa[p];
        }
      }
    }
  }
  // Channel gate.
  for (int64_t ch = 0; ch < c; ++ch) {
    const double g = pre.ca[ch];
    for (int64_t p = 0; p < h * w; ++p) dst[ch * h * w + p] *= g;
  }
  require_finite(combined, "esa_forward");
  return combined;
}

}  // namespace spikekit
