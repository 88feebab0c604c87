// spikekit command-line front end: simulation, codec, reconstruction, entropy
// masks, dual-branch forward pass and a benchmark harness. Every command is
// deterministic given (inputs, config, seed).

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "spikekit/annotations.hpp"
#include "spikekit/codec.hpp"
#include "spikekit/config.hpp"
#include "spikekit/esa.hpp"
#include "spikekit/params_io.hpp"
#include "spikekit/parallel.hpp"
#include "spikekit/pgm.hpp"
#include "spikekit/pipeline.hpp"
#include "spikekit/recon.hpp"
#include "spikekit/rng.hpp"
#include "spikekit/sim.hpp"

namespace fs = std::filesystem;
using namespace spikekit;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

struct CommonOpts {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  int64_t threads = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "key=value config file");
  cmd->add_option("--seed", opts.seed, "override the config seed")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
}

PipelineConfig resolve_config(const CommonOpts& opts) {
  PipelineConfig cfg;
  if (!opts.config_path.empty()) cfg = load_config_file(opts.config_path);
  if (opts.seed_set) {
    cfg.seed = opts.seed;
    // A fresh master seed also reseeds the simulator noise.
    cfg.sensor.noise.seed = mix_seed(opts.seed, 4);
  }
  if (opts.threads >= 0) cfg.threads = opts.threads;
  set_thread_count(static_cast<int>(cfg.threads));
  return cfg;
}

// Pads a stream on the right/bottom so ESA's window grid divides it. Returns
// the original when it already fits.
SpikeStream pad_for_windows(const SpikeStream& stream, const PipelineConfig& cfg,
                            bool* padded) {
  const int64_t unit = cfg.esa_window * cfg.esa_merge;
  const int64_t h = (stream.height + unit - 1) / unit * unit;
  const int64_t w = (stream.width + unit - 1) / unit * unit;
  *padded = h != stream.height || w != stream.width;
  return *padded ? pad_spatial(stream, h, w) : stream;
}

std::string replace_ext(const std::string& path, const std::string& ext) {
  fs::path p(path);
  p.replace_extension(ext);
  return p.string();
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const std::string& frames_dir, const CommonOpts& opts,
                 const std::string& out_path, const std::string& ann_src,
                 std::string ann_out) {
  const PipelineConfig cfg = resolve_config(opts);

  std::vector<fs::path> frame_files;
  if (!fs::is_directory(frames_dir)) {
    throw InputError("simulate: " + frames_dir + " is not a directory");
  }
  for (const auto& entry : fs::directory_iterator(frames_dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm") frame_files.push_back(entry.path());
  }
  if (frame_files.empty()) {
    throw InputError("simulate: no .pgm frames in " + frames_dir);
  }
  std::sort(frame_files.begin(), frame_files.end());

  FrameSequence seq;
  seq.hold_steps = cfg.hold_steps;
  for (const auto& p : frame_files) {
    Tensor frame;
    try {
      frame = read_pgm(p.string());
    } catch (const Error& e) {
      throw InputError("simulate: " + p.string() + ": " + e.what());
    }
    if (!seq.frames.empty() && !frame.same_shape(seq.frames.front())) {
      throw InputError("simulate: " + p.string() + " has resolution " +
                       frame.shape_str() + ", expected " +
                       seq.frames.front().shape_str());
    }
    seq.frames.push_back(std::move(frame));
  }

  const SpikeStream stream = simulate(seq, cfg.sensor);
  const int64_t bytes = write_stream_file(stream, out_path);

  std::vector<BBoxAnnotation> boxes;
  if (!ann_src.empty()) {
    boxes = read_annotations_file(ann_src);
    for (auto& b : boxes) b.t_step *= cfg.hold_steps;  // frame index -> step
    validate_annotations(boxes, stream.t_len, stream.width, stream.height);
  }
  if (ann_out.empty()) ann_out = replace_ext(out_path, ".ann");
  write_annotations_file(boxes, ann_out);

  const double rate = static_cast<double>(stream.count_spikes()) /
                      static_cast<double>(stream.t_len * stream.height * stream.width);
  std::cout << "simulate: " << frame_files.size() << " frames -> " << out_path
            << " (" << stream.width << "x" << stream.height << "x" << stream.t_len
            << ", " << bytes << " bytes, mean rate " << rate << "), labels -> "
            << ann_out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// reconstruct
// ---------------------------------------------------------------------------

int cmd_reconstruct(const std::string& spike_path, const std::string& mode,
                    const std::string& window, int64_t at, const std::string& out_path) {
  const SpikeStream stream = read_stream_file(spike_path);

  IntensityMap map;
  std::string note;
  if (mode == "tfp") {
    int64_t start = 0, len = stream.t_len;
    if (!window.empty()) {
      const auto colon = window.find(':');
      if (colon == std::string::npos) {
        throw InputError("reconstruct: --window expects start:len");
      }
      start = std::stoll(window.substr(0, colon));
      len = std::stoll(window.substr(colon + 1));
    }
    map = tfp(stream, start, len);
    note = "tfp window " + std::to_string(start) + ":" + std::to_string(len);
  } else if (mode == "tfi") {
    SensorConfig sensor;
    sensor.theta = stream.theta;
    sensor.lambda = stream.lambda;
    sensor.dt_us = stream.dt_us;
    const int64_t t = at >= 0 ? at : stream.t_len / 2;
    map = tfi(stream, t, sensor);
    note = "tfi at step " + std::to_string(t);
  } else if (mode == "imap") {
    map = intensity_map(stream);
    note = "intensity map over " + std::to_string(stream.t_len) + " steps";
  } else {
    throw InputError("reconstruct: unknown mode '" + mode + "'");
  }

  write_pgm(out_path, map.values, {note, "source " + spike_path});
  double lo = 1.0, hi = 0.0, mean = 0.0;
  for (double v : map.values.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    mean += v;
  }
  mean /= static_cast<double>(map.values.numel());
  std::cout << "reconstruct: " << note << " -> " << out_path << " (min " << lo
            << ", max " << hi << ", mean " << mean << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// mask
// ---------------------------------------------------------------------------

int cmd_mask(const std::string& spike_path, const CommonOpts& opts,
             const std::string& out_path, std::string csv_path,
             bool on_features, const std::string& imap_mode) {
  PipelineConfig cfg = resolve_config(opts);
  if (imap_mode == "tfp") cfg.imap_mode = ImapMode::Tfp;
  else if (imap_mode == "tfi") cfg.imap_mode = ImapMode::Tfi;
  else if (!imap_mode.empty()) {
    throw InputError("mask: unknown --imap mode '" + imap_mode + "'");
  }

  bool padded = false;
  const SpikeStream stream = pad_for_windows(read_stream_file(spike_path), cfg, &padded);
  const IntensityMap imap = branch_intensity_map(stream, cfg);
  const EsaConfig esa_cfg = cfg.esa_config();

  Tensor features = imap.values;  // default: entropy of the raw intensity map
  if (on_features) {
    const EsaParams params = EsaParams::seeded(esa_cfg, mix_seed(cfg.seed, 3));
    features = preprocess(imap, params, esa_cfg).f_prime;
  }
  const EntropyGrid grid = window_entropy(features, esa_cfg);
  const EntropyMaskSet masks = generate_masks(grid, esa_cfg);

  // Binary mask image: foreground windows white.
  Tensor mask_img({stream.height, stream.width});
  const int64_t m = esa_cfg.window;
  for (int64_t n : masks.fore_idx) {
    const int64_t y0 = (n / grid.cols) * m, x0 = (n % grid.cols) * m;
    for (int64_t iy = 0; iy < m; ++iy) {
      for (int64_t ix = 0; ix < m; ++ix) {
        mask_img[(y0 + iy) * stream.width + (x0 + ix)] = 1.0;
      }
    }
  }
  std::vector<std::string> comments = {
      "foreground windows " + std::to_string(masks.fore_idx.size()) + " of " +
      std::to_string(grid.values.size()),
      "mean entropy " + std::to_string(masks.e_avg) + " bits"};
  if (padded) {
    comments.push_back("padded to " + std::to_string(stream.width) + "x" +
                       std::to_string(stream.height) + " for window divisibility");
  }
  write_pgm(out_path, mask_img, comments);

  // Per-window entropy table, one row per window:
  // index,row,col,entropy_bits,merged_mean_bits,foreground
  if (csv_path.empty()) csv_path = replace_ext(out_path, ".csv");
  {
    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) throw IoError("cannot open " + csv_path + " for writing");
    const int64_t mb = esa_cfg.merge;
    std::vector<bool> fore(grid.values.size(), false);
    for (int64_t n : masks.fore_idx) fore[static_cast<size_t>(n)] = true;
    for (int64_t wy = 0; wy < grid.rows; ++wy) {
      for (int64_t wx = 0; wx < grid.cols; ++wx) {
        const int64_t n = wy * grid.cols + wx;
        double block = 0.0;
        const int64_t br = wy / mb * mb, bc = wx / mb * mb;
        for (int64_t iy = 0; iy < mb; ++iy) {
          for (int64_t ix = 0; ix < mb; ++ix) {
            block += grid.values[static_cast<size_t>((br + iy) * grid.cols + bc + ix)];
          }
        }
        block /= static_cast<double>(mb * mb);
        csv << n << "," << wy << "," << wx << "," << grid.values[static_cast<size_t>(n)]
            << "," << block << "," << (fore[static_cast<size_t>(n)] ? 1 : 0) << "\n";
      }
    }
  }
  std::cout << "mask: " << masks.fore_idx.size() << " of " << grid.values.size()
            << " windows foreground (mean entropy " << masks.e_avg << " bits) -> "
            << out_path << ", " << csv_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// forward
// ---------------------------------------------------------------------------

int cmd_forward(const std::string& spike_path, const CommonOpts& opts,
                const std::string& out_path, const std::string& branch) {
  const PipelineConfig cfg = resolve_config(opts);
  bool padded = false;
  const SpikeStream stream = pad_for_windows(read_stream_file(spike_path), cfg, &padded);
  if (padded) {
    std::cout << "forward: padded to " << stream.width << "x" << stream.height
              << " for window divisibility\n";
  }

  Tensor out;
  if (branch == "both") out = forward_full(stream, cfg);
  else if (branch == "upper") out = forward_upper(stream, cfg);
  else if (branch == "lower") out = forward_lower(stream, cfg);
  else throw InputError("forward: unknown branch '" + branch + "'");

  write_tensor_file(out_path, out);
  double lo = out[0], hi = out[0], mean = 0.0;
  for (double v : out.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    mean += v;
  }
  mean /= static_cast<double>(out.numel());
  std::cout << "forward(" << branch << "): shape " << out.dim(0) << "x"
            << out.dim(1) << "x" << out.dim(2) << " min " << lo << " max " << hi
            << " mean " << mean << " -> " << out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchSize {
  int64_t w = 0, h = 0, t = 0;
};

BenchSize parse_size(const std::string& text) {
  BenchSize s;
  int consumed = 0;
  if (std::sscanf(text.c_str(), "%ldx%ldx%ld%n", &s.w, &s.h, &s.t, &consumed) != 3 ||
      consumed != static_cast<int>(text.size()) || s.w < 1 || s.h < 1 || s.t < 1) {
    throw InputError("bench: bad size '" + text + "', expected WxHxT");
  }
  return s;
}

int cmd_bench(const std::vector<std::string>& sizes, int64_t channels,
              uint64_t seed) {
  std::printf("%-16s %12s %12s %12s %12s %12s %10s %10s\n", "size", "pack_mspk",
              "pack_naive", "unpack_mspk", "unpack_naive", "sim_msteps", "esa_s",
              "roundtrip");
  bool all_ok = true;
  for (const auto& size_text : sizes) {
    const BenchSize s = parse_size(size_text);
    const int64_t plane = s.w * s.h;
    const int64_t total = plane * s.t;

    // Random dense 0/1 volume.
    Rng rng(mix_seed(seed, 11));
    std::vector<uint8_t> dense(static_cast<size_t>(total));
    for (auto& v : dense) v = static_cast<uint8_t>(rng.next_u64() & 1);
    const int64_t plane_bytes = (plane + 7) / 8;
    std::vector<uint8_t> packed(static_cast<size_t>(plane_bytes * s.t));
    std::vector<uint8_t> packed_ref(packed.size());
    std::vector<uint8_t> restored(dense.size());

    double t0 = now_seconds();
    for (int64_t t = 0; t < s.t; ++t) {
      pack_plane(dense.data() + t * plane, plane, packed.data() + t * plane_bytes);
    }
    const double pack_fast = now_seconds() - t0;

    t0 = now_seconds();
    for (int64_t t = 0; t < s.t; ++t) {
      pack_plane_naive(dense.data() + t * plane, plane,
                       packed_ref.data() + t * plane_bytes);
    }
    const double pack_naive = now_seconds() - t0;

    t0 = now_seconds();
    for (int64_t t = 0; t < s.t; ++t) {
      unpack_plane(packed.data() + t * plane_bytes, plane,
                   restored.data() + t * plane);
    }
    const double unpack_fast = now_seconds() - t0;

    bool ok = packed == packed_ref;
    for (int64_t i = 0; ok && i < total; ++i) {
      ok = restored[static_cast<size_t>(i)] == (dense[static_cast<size_t>(i)] ? 1 : 0);
    }

    t0 = now_seconds();
    for (int64_t t = 0; t < s.t; ++t) {
      unpack_plane_naive(packed.data() + t * plane_bytes, plane,
                         restored.data() + t * plane);
    }
    const double unpack_naive = now_seconds() - t0;

    // Simulator steps/second on a random frame held for the full duration.
    FrameSequence seq;
    seq.hold_steps = s.t;
    Tensor frame({s.h, s.w});
    for (double& v : frame.values()) v = rng.uniform01();
    seq.frames.push_back(std::move(frame));
    SensorConfig sensor;  // library defaults
    t0 = now_seconds();
    const SpikeStream sim_out = simulate(seq, sensor);
    const double sim_time = now_seconds() - t0;
    ok = ok && sim_out.t_len == s.t;

    // One ESA pass at this spatial size (time axis is compressed first).
    EsaConfig esa_cfg;
    esa_cfg.channels = channels;
    const int64_t unit = esa_cfg.window * esa_cfg.merge;
    const int64_t eh = (s.h + unit - 1) / unit * unit;
    const int64_t ew = (s.w + unit - 1) / unit * unit;
    IntensityMap imap;
    imap.values = Tensor({1, eh, ew});
    for (double& v : imap.values.values()) v = rng.uniform01();
    imap.window_len = s.t;
    const EsaParams esa_params = EsaParams::seeded(esa_cfg, mix_seed(seed, 13));
    t0 = now_seconds();
    const Tensor esa_out = esa_forward(imap, esa_params, esa_cfg);
    const double esa_time = now_seconds() - t0;
    ok = ok && esa_out.dim(0) == channels;

    const double mspk = static_cast<double>(total) / 1e6;
    std::printf("%-16s %12.1f %12.1f %12.1f %12.1f %12.1f %10.3f %10s\n",
                size_text.c_str(), mspk / pack_fast, mspk / pack_naive,
                mspk / unpack_fast, mspk / unpack_naive,
                static_cast<double>(total) / 1e6 / sim_time, esa_time,
                ok ? "ok" : "FAIL");
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spikekit: spike-camera simulation, codec, reconstruction and "
               "feature pipelines"};
  app.require_subcommand(1);

  // simulate
  auto* sim_cmd = app.add_subcommand(
      "simulate", "integrate-and-fire simulation of a grayscale frame directory");
  std::string frames_dir, sim_out = "out.spk", ann_src, ann_out;
  CommonOpts sim_opts;
  sim_cmd->add_option("frames", frames_dir, "directory of PGM frames")->required();
  sim_cmd->add_option("-o,--out", sim_out, "output spike stream (SPK1)");
  sim_cmd->add_option("--ann", ann_src, "per-frame source annotations to remap");
  sim_cmd->add_option("--ann-out", ann_out, "output annotation file");
  add_common(sim_cmd, sim_opts);

  // reconstruct
  auto* rec_cmd = app.add_subcommand("reconstruct", "spike stream to PGM image");
  std::string rec_spike, rec_mode = "imap", rec_window, rec_out = "recon.pgm";
  int64_t rec_at = -1;
  rec_cmd->add_option("spike", rec_spike, "SPK1 stream")->required();
  rec_cmd->add_option("--mode", rec_mode, "tfp | tfi | imap");
  rec_cmd->add_option("--window", rec_window, "start:len window for tfp");
  rec_cmd->add_option("--at", rec_at, "step for tfi (default: middle)");
  rec_cmd->add_option("-o,--out", rec_out, "output PGM");

  // mask
  auto* mask_cmd = app.add_subcommand(
      "mask", "entropy-based foreground windows as PGM mask + CSV table");
  std::string mask_spike, mask_out = "mask.pgm", mask_csv, mask_imap;
  bool mask_features = false;
  CommonOpts mask_opts;
  mask_cmd->add_option("spike", mask_spike, "SPK1 stream")->required();
  mask_cmd->add_option("-o,--out", mask_out, "output PGM mask");
  mask_cmd->add_option("--csv", mask_csv, "entropy table output");
  mask_cmd->add_flag("--features", mask_features,
                     "compute entropy on preprocessed features instead of the raw map");
  mask_cmd->add_option("--imap", mask_imap, "intensity map mode: tfp | tfi");
  add_common(mask_cmd, mask_opts);

  // forward
  auto* fwd_cmd = app.add_subcommand(
      "forward", "dual-branch forward pass to a feature blob");
  std::string fwd_spike, fwd_out = "features.bin", fwd_branch = "both";
  CommonOpts fwd_opts;
  fwd_cmd->add_option("spike", fwd_spike, "SPK1 stream")->required();
  fwd_cmd->add_option("-o,--out", fwd_out, "output tensor blob");
  fwd_cmd->add_option("--branch", fwd_branch, "both | upper | lower");
  add_common(fwd_cmd, fwd_opts);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "throughput report");
  std::vector<std::string> bench_sizes = {"256x256x1024"};
  int64_t bench_channels = 32;
  uint64_t bench_seed = 42;
  bench_cmd->add_option("--sizes", bench_sizes, "stream sizes as WxHxT")
      ->delimiter(',');
  bench_cmd->add_option("--channels", bench_channels, "ESA channels for the timing");
  bench_cmd->add_option("--seed", bench_seed, "data seed");

  CLI11_PARSE(app, argc, argv);

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (sim_cmd->parsed()) {
      return cmd_simulate(frames_dir, sim_opts, sim_out, ann_src, ann_out);
    }
    if (rec_cmd->parsed()) {
      return cmd_reconstruct(rec_spike, rec_mode, rec_window, rec_at, rec_out);
    }
    if (mask_cmd->parsed()) {
      return cmd_mask(mask_spike, mask_opts, mask_out, mask_csv, mask_features,
                      mask_imap);
    }
    if (fwd_cmd->parsed()) {
      return cmd_forward(fwd_spike, fwd_opts, fwd_out, fwd_branch);
    }
    if (bench_cmd->parsed()) {
      return cmd_bench(bench_sizes, bench_channels, bench_seed);
    }
  } catch (const Error& e) {
    std::cerr << "spikekit " << cmd << ": error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "spikekit " << cmd << ": error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
