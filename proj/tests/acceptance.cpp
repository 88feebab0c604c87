// Acceptance suite: one criterion per section, one [PASS]/[FAIL] line each.
// Exit code is nonzero when any criterion fails. The CLI-level criteria need
// --cli <path-to-binary>; ctest wires that automatically.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <unistd.h>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spikekit/annotations.hpp"
#include "spikekit/codec.hpp"
#include "spikekit/config.hpp"
#include "spikekit/esa.hpp"
#include "spikekit/ffm.hpp"
#include "spikekit/params_io.hpp"
#include "spikekit/pgm.hpp"
#include "spikekit/pipeline.hpp"
#include "spikekit/recon.hpp"
#include "spikekit/sim.hpp"
#include "spikekit/tbtm.hpp"

using namespace spikekit;
namespace fs = std::filesystem;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& msg) {
  if (!cond) throw Failure(msg);
}

std::string g_cli;
fs::path g_work;

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  const fs::path log = g_work / "run.log";
  const std::string cmd = "cd '" + g_work.string() + "' && '" + g_cli + "' " +
                          args + " > '" + log.string() + "' 2>&1";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SpikeStream constant_sim(double intensity, int64_t h, int64_t w, int64_t t_len,
                         const SensorConfig& cfg) {
  FrameSequence seq;
  seq.hold_steps = t_len;
  seq.frames.push_back(Tensor::full({h, w}, intensity));
  return simulate(seq, cfg);
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

void spike_count_identity() {
  Rng rng(0xC0FFEE);
  for (int iter = 0; iter < 200; ++iter) {
    SensorConfig cfg;
    cfg.lambda = rng.uniform(0.05, 2.0);
    cfg.dt_us = rng.uniform(0.05, 2.0);
    cfg.theta = cfg.lambda * cfg.dt_us * rng.uniform(1.0, 4.0);
    const double intensity = rng.uniform01();
    const int64_t t_len = rng.uniform_int(20, 400);
    const SpikeStream s = constant_sim(intensity, 4, 4, t_len, cfg);
    const auto want = static_cast<int64_t>(
        std::floor(static_cast<double>(t_len) * cfg.lambda * intensity *
                   cfg.dt_us / cfg.theta));
    for (int64_t y = 0; y < 4; ++y) {
      for (int64_t x = 0; x < 4; ++x) {
        const int64_t got = s.count_spikes(0, y, x, t_len);
        require(got == want, "config " + std::to_string(iter) + ": got " +
                                 std::to_string(got) + " spikes, want " +
                                 std::to_string(want));
      }
    }
  }
}

void rate_law() {
  Rng rng(0xBEEF);
  const int64_t t_len = 10000;
  for (int iter = 0; iter < 20; ++iter) {
    SensorConfig cfg;
    cfg.lambda = rng.uniform(0.05, 1.5);
    cfg.dt_us = rng.uniform(0.05, 1.5);
    cfg.theta = cfg.lambda * cfg.dt_us * rng.uniform(1.0, 5.0);
    const double intensity = rng.uniform01();
    const SpikeStream s = constant_sim(intensity, 1, 1, t_len, cfg);
    const double empirical = static_cast<double>(s.count_spikes(0, 0, 0, t_len)) /
                             static_cast<double>(t_len);
    const double expected = expected_rate(intensity, cfg);
    require(std::abs(empirical - expected) <= 1.0 / static_cast<double>(t_len),
            "config " + std::to_string(iter) + ": empirical " +
                std::to_string(empirical) + " vs expected " +
                std::to_string(expected));
  }
}

void tfi_inversion() {
  SensorConfig cfg;
  cfg.theta = 2.0;
  cfg.lambda = 1.0;
  cfg.dt_us = 1.0;
  const int64_t t_len = 1000;
  for (int step = 2; step <= 10; ++step) {
    const double intensity = static_cast<double>(step) / 10.0;
    const SpikeStream s = constant_sim(intensity, 4, 4, t_len, cfg);
    const IntensityMap map = tfi(s, t_len / 2, cfg);
    for (double v : map.values.values()) {
      require(v > 0.0, "tfi returned zero for a firing pixel");
      const auto isi = static_cast<int64_t>(
          std::llround(cfg.theta / (cfg.lambda * v * cfg.dt_us)));
      const double rel = std::abs(v - intensity) / intensity;
      require(rel <= 1.0 / static_cast<double>(isi) + 1e-12,
              "I=" + std::to_string(intensity) + ": relative error " +
                  std::to_string(rel) + " exceeds 1/" + std::to_string(isi));
    }
  }
}

void codec_roundtrip() {
  Rng rng(0xD00D);
  for (int iter = 0; iter < 1000; ++iter) {
    const int64_t w = rng.uniform_int(1, 24);
    const int64_t h = rng.uniform_int(1, 16);
    const int64_t t = rng.uniform_int(1, 12);
    SpikeStream s = SpikeStream::zeros(w, h, t, rng.uniform(0.1, 40.0),
                                       rng.uniform(0.2, 5.0), rng.uniform(0.1, 3.0));
    for (int64_t tt = 0; tt < t; ++tt) {
      for (int64_t y = 0; y < h; ++y) {
        for (int64_t x = 0; x < w; ++x) {
          if (rng.next_u64() & 1) s.set(tt, y, x, true);
        }
      }
    }
    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    write_stream(s, buf);
    const std::string bytes = buf.str();
    std::istringstream back_src(bytes, std::ios::binary);
    const SpikeStream back = read_stream(back_src);
    require(back.bits == s.bits && back.width == s.width &&
                back.height == s.height && back.t_len == s.t_len &&
                back.dt_us == s.dt_us && back.theta == s.theta &&
                back.lambda == s.lambda,
            "round trip mismatch at iteration " + std::to_string(iter));

    // Truncation: drop 1..payload bytes; always detected.
    const auto cut = static_cast<size_t>(
        rng.uniform_int(1, static_cast<int64_t>(bytes.size()) - 1));
    std::istringstream trunc(bytes.substr(0, bytes.size() - cut), std::ios::binary);
    bool threw = false;
    try {
      read_stream(trunc);
    } catch (const CorruptionError&) {
      threw = true;
    } catch (const FormatError&) {
      threw = true;  // header cut down to a non-stream prefix
    }
    require(threw, "truncation by " + std::to_string(cut) + " bytes not detected");

    // Magic corruption: always detected.
    std::string corrupt = bytes;
    corrupt[static_cast<size_t>(rng.uniform_int(0, 3))] ^= 0x5A;
    std::istringstream bad(corrupt, std::ios::binary);
    threw = false;
    try {
      read_stream(bad);
    } catch (const FormatError&) {
      threw = true;
    }
    require(threw, "magic corruption not detected");
  }
}

void entropy_bounds() {
  EsaConfig cfg;
  cfg.window = 8;
  cfg.merge = 1;
  cfg.channels = 1;
  Rng rng(0xE117);
  for (int iter = 0; iter < 10000; ++iter) {
    Tensor window = ref::random_tensor(rng, {1, 8, 8}, -6.0, 6.0);
    const double e = window_entropy(window, cfg).values[0];
    require(e >= 0.0 && e <= 6.0,
            "entropy " + std::to_string(e) + " outside [0, 6]");
  }
  const Tensor flat = Tensor::full({1, 8, 8}, 1.234);
  const double e_flat = window_entropy(flat, cfg).values[0];
  require(std::abs(e_flat - 6.0) <= 1e-9,
          "constant window entropy " + std::to_string(e_flat) + " != 6");
  Tensor hot({1, 8, 8});
  hot[27] = 1000.0;
  const double e_hot = window_entropy(hot, cfg).values[0];
  require(e_hot >= 0.0 && e_hot <= 1e-6,
          "near-one-hot entropy " + std::to_string(e_hot) + " > 1e-6");
}

void mask_partition_and_defaults() {
  Rng rng(0xFACADE);
  for (int iter = 0; iter < 1000; ++iter) {
    EsaConfig cfg;
    cfg.merge = rng.uniform_int(1, 3);
    cfg.range_lo = 0.5;
    cfg.range_hi = 1.0;
    EntropyGrid grid;
    grid.rows = cfg.merge * rng.uniform_int(1, 5);
    grid.cols = cfg.merge * rng.uniform_int(1, 5);
    for (int64_t i = 0; i < grid.rows * grid.cols; ++i) {
      grid.values.push_back(rng.uniform(0.0, 6.0));
    }
    const EntropyMaskSet masks = generate_masks(grid, cfg);
    std::vector<int64_t> all(masks.fore_idx);
    all.insert(all.end(), masks.back_idx.begin(), masks.back_idx.end());
    std::sort(all.begin(), all.end());
    std::vector<int64_t> expect(static_cast<size_t>(grid.rows * grid.cols));
    std::iota(expect.begin(), expect.end(), 0);
    require(all == expect, "fore/back do not partition the window set");
  }

  // Shipped defaults: 8x8 windows, foreground band [1/2, 1] of mean entropy.
  const EsaConfig esa_defaults;
  require(esa_defaults.window == 8, "EsaConfig default window != 8");
  require(esa_defaults.range_lo == 0.5, "EsaConfig default range_lo != 0.5");
  require(esa_defaults.range_hi == 1.0, "EsaConfig default range_hi != 1.0");
  const PipelineConfig cfg;
  require(cfg.esa_window == 8, "pipeline default window != 8");
  require(cfg.esa_range_lo == 0.5 && cfg.esa_range_hi == 1.0,
          "pipeline default entropy range != [0.5, 1.0]");
  const std::string text = serialize_config(cfg);
  require(text.find("esa.window = 8") != std::string::npos &&
              text.find("esa.range_lo = 0.5") != std::string::npos &&
              text.find("esa.range_hi = 1") != std::string::npos,
          "serialized defaults do not carry the shipped values");
}

void kernel_oracles() {
  // conv2d, 1e-9
  {
    Rng rng(1001);
    for (int iter = 0; iter < 50; ++iter) {
      const bool big = iter < 3;
      const int64_t cin = rng.uniform_int(1, big ? 3 : 6);
      const int64_t cout = rng.uniform_int(1, big ? 3 : 6);
      const int64_t k = 2 * rng.uniform_int(0, 2) + 1;
      const int64_t stride = rng.uniform_int(1, 2);
      const int64_t pad = rng.uniform_int(0, 2);
      int64_t h = big ? 64 : rng.uniform_int(4, 64);
      int64_t w = big ? 64 : rng.uniform_int(4, 64);
      h -= (h + 2 * pad - k) % stride;
      w -= (w + 2 * pad - k) % stride;
      const Tensor input = ref::random_tensor(rng, {cin, h, w});
      const Tensor kernel = ref::random_tensor(rng, {cout, cin, k, k});
      require(ref::max_abs_diff(conv2d(input, kernel, stride, pad),
                                ref::conv2d_direct(input, kernel, stride, pad)) < 1e-9,
              "conv2d oracle mismatch at iteration " + std::to_string(iter));
    }
  }
  // matmul, 1e-9
  {
    Rng rng(1002);
    for (int iter = 0; iter < 50; ++iter) {
      const int64_t m = iter < 3 ? 64 : rng.uniform_int(1, 32);
      const int64_t k = iter < 3 ? 64 : rng.uniform_int(1, 32);
      const int64_t n = iter < 3 ? 64 : rng.uniform_int(1, 32);
      Tensor a, b;
      if (iter % 2) {
        const int64_t batch = rng.uniform_int(1, 3);
        a = ref::random_tensor(rng, {batch, m, k});
        b = ref::random_tensor(rng, {batch, k, n});
      } else {
        a = ref::random_tensor(rng, {m, k});
        b = ref::random_tensor(rng, {k, n});
      }
      require(ref::max_abs_diff(matmul(a, b), ref::matmul_direct(a, b)) < 1e-9,
              "matmul oracle mismatch at iteration " + std::to_string(iter));
    }
  }
  // softmax, 1e-12
  {
    Rng rng(1003);
    for (int iter = 0; iter < 50; ++iter) {
      const int64_t rows = rng.uniform_int(1, 64);
      const int64_t cols = iter < 3 ? 64 : rng.uniform_int(2, 64);
      const Tensor m = ref::random_tensor(rng, {rows, cols}, -30.0, 30.0);
      const Tensor got = softmax(m, 1);
      for (int64_t r = 0; r < rows; ++r) {
        std::vector<double> row(static_cast<size_t>(cols));
        for (int64_t c = 0; c < cols; ++c) row[static_cast<size_t>(c)] = m[r * cols + c];
        const auto want = ref::softmax_direct(row);
        for (int64_t c = 0; c < cols; ++c) {
          require(std::abs(got[r * cols + c] - want[static_cast<size_t>(c)]) < 1e-12,
                  "softmax oracle mismatch at iteration " + std::to_string(iter));
        }
      }
    }
  }
  // bilinear_sample, 1e-12
  {
    Rng rng(1004);
    for (int iter = 0; iter < 50; ++iter) {
      const int64_t c = rng.uniform_int(1, 4);
      const int64_t h = iter < 3 ? 64 : rng.uniform_int(2, 64);
      const int64_t w = iter < 3 ? 64 : rng.uniform_int(2, 64);
      const Tensor img = ref::random_tensor(rng, {c, h, w});
      Tensor coords({2, h, w});
      for (int64_t p = 0; p < h * w; ++p) {
        coords[p] = rng.uniform(-3.0, static_cast<double>(h) + 2.0);
        coords[h * w + p] = rng.uniform(-3.0, static_cast<double>(w) + 2.0);
      }
      const Tensor got = bilinear_sample(img, coords);
      for (int64_t ch = 0; ch < c; ++ch) {
        for (int64_t p = 0; p < h * w; ++p) {
          const double want =
              ref::bilinear_point(img, ch, coords[p], coords[h * w + p]);
          require(std::abs(got[ch * h * w + p] - want) < 1e-12,
                  "bilinear oracle mismatch at iteration " + std::to_string(iter));
        }
      }
    }
  }
  // se_attention, 1e-12
  {
    Rng rng(1005);
    for (int iter = 0; iter < 50; ++iter) {
      const int64_t c = rng.uniform_int(2, 12);
      const int64_t mid = rng.uniform_int(1, c);
      const int64_t h = iter < 3 ? 64 : rng.uniform_int(2, 24);
      const int64_t w = iter < 3 ? 64 : rng.uniform_int(2, 24);
      SeParams p;
      p.w1 = ref::random_tensor(rng, {mid, c});
      p.b1 = ref::random_tensor(rng, {mid});
      p.w2 = ref::random_tensor(rng, {c, mid});
      p.b2 = ref::random_tensor(rng, {c});
      const Tensor input = ref::random_tensor(rng, {c, h, w});
      require(ref::max_abs_diff(se_attention(input, p), ref::se_direct(input, p)) <
                  1e-12,
              "se_attention oracle mismatch at iteration " + std::to_string(iter));
    }
  }
  // ffm_forward, 1e-12
  {
    Rng rng(1006);
    for (int iter = 0; iter < 50; ++iter) {
      const int64_t n = rng.uniform_int(1, 5);
      const int64_t c = rng.uniform_int(2, 8);
      const int64_t h = iter < 3 ? 64 : rng.uniform_int(2, 32);
      const int64_t w = iter < 3 ? 64 : rng.uniform_int(2, 32);
      const auto p = FfmParams::seeded(c, n, rng.next_u64());
      std::vector<Tensor> feats;
      for (int64_t i = 0; i < n; ++i) feats.push_back(ref::random_tensor(rng, {c, h, w}));
      require(ref::max_abs_diff(ffm_forward(feats, p), ref::ffm_direct(feats, p)) <
                  1e-12,
              "ffm oracle mismatch at iteration " + std::to_string(iter));
    }
  }
  // tbtm_forward, 1e-9
  {
    Rng rng(1007);
    const int64_t t_primes[] = {9, 13, 17, 25, 41};
    for (int iter = 0; iter < 50; ++iter) {
      TbtmConfig cfg;
      cfg.t_prime = t_primes[rng.uniform_int(0, 4)];
      cfg.delta = rng.uniform_int(1, std::max<int64_t>(1, (cfg.t_prime - 1) / 6));
      cfg.c_mid = rng.uniform_int(2, 4);
      cfg.c_b = rng.uniform_int(2, 4);
      cfg.channels = rng.uniform_int(3, 8);
      const int64_t h = iter < 2 ? 64 : rng.uniform_int(4, 24);
      const int64_t w = iter < 2 ? 64 : rng.uniform_int(4, 24);
      const auto params = TbtmParams::seeded(cfg, rng.next_u64());
      const Tensor block = ref::random_tensor(rng, {cfg.t_prime, h, w}, 0.0, 1.0);
      require(ref::max_abs_diff(tbtm_forward(block, params),
                                ref::tbtm_direct(block, params)) < 1e-9,
              "tbtm oracle mismatch at iteration " + std::to_string(iter));
    }
  }
  // foreground_attention, 1e-9
  {
    Rng rng(1008);
    for (int iter = 0; iter < 50; ++iter) {
      EsaConfig cfg;
      cfg.window = int64_t{1} << rng.uniform_int(1, 3);
      cfg.merge = 1;
      cfg.channels = rng.uniform_int(2, 8);
      const int64_t gh = iter < 3 ? 64 / cfg.window : rng.uniform_int(1, 4);
      const int64_t gw = iter < 3 ? 64 / cfg.window : rng.uniform_int(1, 4);
      const int64_t h = gh * cfg.window, w = gw * cfg.window;
      const auto params = EsaParams::seeded(cfg, rng.next_u64());
      const Tensor f = ref::random_tensor(rng, {cfg.channels, h, w});
      const Tensor offset = ref::random_tensor(rng, {2, h, w}, -2.0, 2.0);
      EntropyMaskSet masks;
      for (int64_t n = 0; n < gh * gw; ++n) {
        (rng.next_u64() & 1 ? masks.fore_idx : masks.back_idx).push_back(n);
      }
      if (masks.fore_idx.empty()) masks.fore_idx.push_back(0);
      const Tensor got = foreground_attention(f, offset, masks, params, cfg);
      const Tensor want = ref::fore_attention_direct(f, offset, masks, params, cfg);
      require(ref::max_abs_diff(got, want) < 1e-9,
              "foreground_attention oracle mismatch at iteration " +
                  std::to_string(iter));
    }
  }
  // esa_forward, 1e-8
  {
    Rng rng(1009);
    for (int iter = 0; iter < 50; ++iter) {
      EsaConfig cfg;
      cfg.window = iter < 2 ? 8 : (int64_t{1} << rng.uniform_int(1, 2));
      cfg.merge = rng.uniform_int(1, 2);
      cfg.channels = rng.uniform_int(2, 8);
      cfg.entropy_reduce = (iter % 7) == 3;
      if ((iter % 5) == 4) cfg.entropy_mode = EntropyMode::MeanFirst;
      const int64_t unit = cfg.window * cfg.merge;
      const int64_t h = iter < 2 ? 64 : unit * rng.uniform_int(1, 24 / unit > 0 ? 24 / unit : 1);
      const int64_t w = iter < 2 ? 64 : unit * rng.uniform_int(1, 24 / unit > 0 ? 24 / unit : 1);
      const auto params = EsaParams::seeded(cfg, rng.next_u64());
      IntensityMap imap;
      imap.values = ref::random_tensor(rng, {1, h, w}, 0.0, 1.0);
      const Tensor got = esa_forward(imap, params, cfg);
      const Tensor want = ref::esa_direct(imap.values, params, cfg);
      require(ref::max_abs_diff(got, want) < 1e-8,
              "esa oracle mismatch at iteration " + std::to_string(iter));
    }
  }
}

void degeneracy_checks() {
  // Zero offsets + identity 1x1 deformable kernel: equals plain window
  // attention over F within 1e-9.
  Rng rng(2001);
  EsaConfig cfg;
  cfg.window = 8;
  cfg.merge = 1;
  cfg.channels = 6;
  auto params = EsaParams::seeded(cfg, 2002);
  params.deform_w = Tensor({6, 6, 1, 1});
  for (int64_t i = 0; i < 6; ++i) params.deform_w[i * 6 + i] = 1.0;
  params.deform_b = Tensor({6});
  const Tensor f = ref::random_tensor(rng, {6, 32, 32});
  const Tensor zero_offset({2, 32, 32});
  EntropyMaskSet masks;
  for (int64_t n = 0; n < 16; ++n) {
    (n % 3 ? masks.fore_idx : masks.back_idx).push_back(n);
  }
  const Tensor got = foreground_attention(f, zero_offset, masks, params, cfg);
  const Tensor x = ref::gather_direct(f, masks.fore_idx, 8);
  const Tensor plain = ref::attention_direct(x, x, params.wq, params.wk);
  require(ref::max_abs_diff(got, plain) < 1e-9,
          "zero-offset attention does not match plain window attention");

  // Zero W_q/W_k: every attention row is uniform, outputs are window means,
  // 1e-12.
  auto uniform_params = EsaParams::seeded(cfg, 2003);
  uniform_params.wq = Tensor({6, 6});
  uniform_params.wk = Tensor({6, 6});
  const Tensor offset = ref::random_tensor(rng, {2, 32, 32}, -1.0, 1.0);
  const Tensor out = foreground_attention(f, offset, masks, uniform_params, cfg);
  const Tensor v = ref::gather_direct(f, masks.fore_idx, 8);
  const int64_t kwin = out.dim(0);
  for (int64_t b = 0; b < kwin; ++b) {
    for (int64_t ch = 0; ch < 6; ++ch) {
      double mean = 0.0;
      for (int64_t i = 0; i < 64; ++i) mean += v[(b * 64 + i) * 6 + ch];
      mean /= 64.0;
      for (int64_t i = 0; i < 64; ++i) {
        require(std::abs(out[(b * 64 + i) * 6 + ch] - mean) < 1e-12,
                "uniform attention row is not the window mean");
      }
    }
  }
}

void end_to_end_determinism() {
  require(!g_cli.empty(), "needs --cli <binary>");
  const fs::path frames = g_work / "frames";
  fs::create_directories(frames);
  Rng rng(3001);
  for (int i = 0; i < 41; ++i) {
    Tensor frame({64, 64});
    for (double& v : frame.values()) v = rng.uniform01();
    char name[32];
    std::snprintf(name, sizeof(name), "f_%03d.pgm", i);
    write_pgm((frames / name).string(), frame);
  }
  // 41 frames x 20 hold steps = 820-step scene.
  std::ofstream(g_work / "e2e.cfg") << "sim.hold_steps = 20\n"
                                    << "model.channels = 32\n"
                                    << "tbtm.c_mid = 8\n"
                                    << "tbtm.c_b = 8\n";
  auto sim = run_cli("simulate frames -o scene.spk --config e2e.cfg --seed 9");
  require(sim.exit_code == 0, "simulate failed: " + sim.output);
  const SpikeStream s = read_stream_file((g_work / "scene.spk").string());
  require(s.t_len == 820, "scene length " + std::to_string(s.t_len) + " != 820");

  auto r1 = run_cli("forward scene.spk --config e2e.cfg -o r1.bin --threads 1");
  require(r1.exit_code == 0, "forward run 1 failed: " + r1.output);
  auto r2 = run_cli("forward scene.spk --config e2e.cfg -o r2.bin --threads 1");
  require(r2.exit_code == 0, "forward run 2 failed: " + r2.output);
  auto r3 = run_cli("forward scene.spk --config e2e.cfg -o r3.bin --threads 2");
  require(r3.exit_code == 0, "forward run 3 failed: " + r3.output);
  auto r4 = run_cli("forward scene.spk --config e2e.cfg -o r4.bin --threads 4");
  require(r4.exit_code == 0, "forward run 4 failed: " + r4.output);

  const std::string b1 = read_file(g_work / "r1.bin");
  require(!b1.empty(), "empty feature blob");
  require(b1 == read_file(g_work / "r2.bin"), "repeat run differs byte-wise");
  require(b1 == read_file(g_work / "r3.bin"), "2-thread run differs byte-wise");
  require(b1 == read_file(g_work / "r4.bin"), "4-thread run differs byte-wise");
}

void bench_smoke() {
  require(!g_cli.empty(), "needs --cli <binary>");
  const double t0 = now_seconds();
  auto r = run_cli("bench --sizes 256x256x1024");
  const double elapsed = now_seconds() - t0;
  require(r.exit_code == 0, "bench failed: " + r.output);
  require(elapsed < 60.0, "bench took " + std::to_string(elapsed) + "s (>= 60s)");

  // Parse the data row: size pack packn unpack unpackn sim esa roundtrip.
  std::istringstream ss(r.output);
  std::string line;
  bool found = false;
  while (std::getline(ss, line)) {
    if (line.rfind("256x256x1024", 0) != 0) continue;
    std::istringstream row(line);
    std::string size, roundtrip;
    double pack = 0, pack_naive = 0, unpack = 0, unpack_naive = 0, sim = 0, esa = 0;
    row >> size >> pack >> pack_naive >> unpack >> unpack_naive >> sim >> esa >>
        roundtrip;
    require(roundtrip == "ok", "bench round trip check failed");
    require(pack >= pack_naive, "pack throughput " + std::to_string(pack) +
                                    " below naive " + std::to_string(pack_naive));
    require(unpack >= unpack_naive,
            "unpack throughput " + std::to_string(unpack) + " below naive " +
                std::to_string(unpack_naive));
    found = true;
  }
  require(found, "bench report is missing the requested size row:\n" + r.output);
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") {
      std::error_code ec;
      const fs::path resolved = fs::weakly_canonical(argv[i + 1], ec);
      g_cli = ec ? argv[i + 1] : resolved.string();
    }
  }
  g_work = fs::temp_directory_path() /
           ("spikekit_accept_" + std::to_string(::getpid()));
  fs::create_directories(g_work);

  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"spike-count identity (200 configs, exact floor law)", spike_count_identity},
      {"rate law (20 configs, T=10000, within 1/T)", rate_law},
      {"tfi inversion (I in 0.2..1.0, T=1000, err <= 1/ISI)", tfi_inversion},
      {"codec round trip + corruption detection (1000 streams)", codec_roundtrip},
      {"entropy bounds (10000 windows, M=8)", entropy_bounds},
      {"mask partition (1000 grids) + shipped defaults", mask_partition_and_defaults},
      {"kernel oracles (9 ops, >=50 instances each)", kernel_oracles},
      {"degeneracy checks (zero-offset, uniform attention)", degeneracy_checks},
      {"end-to-end determinism (64x64x820, across thread counts)",
       end_to_end_determinism},
      {"benchmark smoke (256x256x1024 < 60s, codec >= naive)", bench_smoke},
  };

  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const double t0 = now_seconds();
    try {
      fn();
      std::printf("[PASS] %s (%.2fs)\n", name.c_str(), now_seconds() - t0);
    } catch (const std::exception& e) {
      std::printf("[FAIL] %s: %s\n", name.c_str(), e.what());
      ++failures;
    }
    std::fflush(stdout);
  }
  std::error_code ec;
  fs::remove_all(g_work, ec);

  if (failures == 0) {
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
  } else {
    std::printf("%d of %zu acceptance criteria FAILED\n", failures, criteria.size());
  }
  return failures == 0 ? 0 : 1;
}
