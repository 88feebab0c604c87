#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <unistd.h>

#include "oracles.hpp"
#include "spikekit/ffm.hpp"
#include "spikekit/tbtm.hpp"

using namespace spikekit;

namespace {

TbtmConfig small_cfg() {
  TbtmConfig cfg;
  cfg.t_prime = 13;
  cfg.delta = 2;
  cfg.c_mid = 3;
  cfg.c_b = 4;
  cfg.channels = 6;
  cfg.se_reduction = 4;
  return cfg;
}

void zero_biases(TbtmParams& p) {
  for (int k = 0; k < 4; ++k) {
    for (double& v : p.conv1_b[static_cast<size_t>(k)].values()) v = 0.0;
    for (double& v : p.conv2_b[static_cast<size_t>(k)].values()) v = 0.0;
  }
  for (double& v : p.se.b1.values()) v = 0.0;
  for (double& v : p.se.b2.values()) v = 0.0;
  for (double& v : p.out_b.values()) v = 0.0;
}

}  // namespace

TEST_CASE("slice_branches: channel counts 41/31/21/11 at T'=41, delta=5") {
  Rng rng(1);
  const Tensor block = ref::random_tensor(rng, {41, 4, 4});
  const auto branches = slice_branches(block, 5);
  CHECK(branches[0].dim(0) == 41);
  CHECK(branches[1].dim(0) == 31);
  CHECK(branches[2].dim(0) == 21);
  CHECK(branches[3].dim(0) == 11);
  // branch 0 is the block itself, untouched
  CHECK(ref::max_abs_diff(branches[0], block) == 0.0);
  // nesting: branch k+1's window sits strictly inside branch k's
  for (int k = 1; k < 4; ++k) {
    const Tensor& outer = branches[static_cast<size_t>(k - 1)];
    const Tensor& inner = branches[static_cast<size_t>(k)];
    const Tensor expect = slice_axis0(outer, 5, outer.dim(0) - 10);
    CHECK(ref::max_abs_diff(inner, expect) == 0.0);
  }
}

TEST_CASE("slice_branches boundary: T'-6*delta == 1 is legal, below is not") {
  Rng rng(2);
  const Tensor ok = ref::random_tensor(rng, {13, 3, 3});
  const auto branches = slice_branches(ok, 2);  // 13 - 12 = 1
  CHECK(branches[3].dim(0) == 1);

  const Tensor bad = ref::random_tensor(rng, {12, 3, 3});
  CHECK_THROWS_AS(slice_branches(bad, 2), ConfigError);
}

TEST_CASE("se_attention: zero weights halve the input") {
  const int64_t c = 8;
  SeParams p;
  p.w1 = Tensor({2, c});
  p.b1 = Tensor({2});
  p.w2 = Tensor({c, 2});
  p.b2 = Tensor({c});
  Rng rng(3);
  const Tensor input = ref::random_tensor(rng, {c, 5, 5});
  const Tensor out = se_attention(input, p);
  for (int64_t i = 0; i < input.numel(); ++i) {
    CHECK(out[i] == doctest::Approx(0.5 * input[i]).epsilon(1e-15));
  }
}

TEST_CASE("se_attention never increases magnitude and matches the reference") {
  Rng rng(4);
  for (int iter = 0; iter < 20; ++iter) {
    const int64_t c = rng.uniform_int(2, 10);
    const int64_t mid = rng.uniform_int(1, c);
    SeParams p;
    p.w1 = ref::random_tensor(rng, {mid, c});
    p.b1 = ref::random_tensor(rng, {mid});
    p.w2 = ref::random_tensor(rng, {c, mid});
    p.b2 = ref::random_tensor(rng, {c});
    const Tensor input =
        ref::random_tensor(rng, {c, rng.uniform_int(2, 9), rng.uniform_int(2, 9)});
    const Tensor out = se_attention(input, p);
    for (int64_t i = 0; i < input.numel(); ++i) {
      CHECK(std::abs(out[i]) <= std::abs(input[i]));
    }
    CHECK(ref::max_abs_diff(out, ref::se_direct(input, p)) < 1e-12);
  }
  SeParams p;
  p.w1 = Tensor({2, 4});
  p.b1 = Tensor({2});
  p.w2 = Tensor({4, 2});
  p.b2 = Tensor({4});
  CHECK_THROWS_AS(se_attention(Tensor({3, 2, 2}), p), ShapeError);
}

TEST_CASE("tbtm_forward: zero block with zero biases gives zero output") {
  auto params = TbtmParams::seeded(small_cfg(), 7);
  zero_biases(params);
  const Tensor out = tbtm_forward(Tensor({13, 6, 6}), params);
  CHECK(out.shape() == std::vector<int64_t>{6, 6, 6});
  for (double v : out.values()) CHECK(v == 0.0);
}

TEST_CASE("tbtm_forward: output shape is channels x H x W") {
  TbtmConfig cfg = small_cfg();
  for (int64_t t_prime : {13, 20, 41}) {
    cfg.t_prime = t_prime;
    cfg.delta = (t_prime - 1) / 6;
    const auto params = TbtmParams::seeded(cfg, 11);
    Rng rng(12);
    const Tensor block = ref::random_tensor(rng, {t_prime, 8, 10}, 0.0, 1.0);
    const Tensor out = tbtm_forward(block, params);
    CHECK(out.shape() == std::vector<int64_t>{cfg.channels, 8, 10});
  }
}

TEST_CASE("tbtm_forward matches the step-by-step reference, seed 42") {
  TbtmConfig cfg;
  cfg.t_prime = 41;
  cfg.delta = 5;
  cfg.c_mid = 4;
  cfg.c_b = 4;
  cfg.channels = 8;
  const auto params = TbtmParams::seeded(cfg, 42);
  Rng rng(42);
  const Tensor block = ref::random_tensor(rng, {41, 16, 16}, 0.0, 1.0);
  const Tensor got = tbtm_forward(block, params);
  const Tensor want = ref::tbtm_direct(block, params);
  CHECK(ref::max_abs_diff(got, want) < 1e-9);
}

TEST_CASE("parameter sharing: one set serves many blocks; copies are isolated") {
  const auto cfg = small_cfg();
  const auto params = TbtmParams::seeded(cfg, 21);
  Rng rng(22);
  const Tensor block_a = ref::random_tensor(rng, {13, 6, 6}, 0.0, 1.0);
  const Tensor block_b = ref::random_tensor(rng, {13, 6, 6}, 0.0, 1.0);

  const Tensor out_a1 = tbtm_forward(block_a, params);
  TbtmParams mutated = params;  // value copy
  for (double& v : mutated.out_w.values()) v = -v;
  const Tensor out_b_mut = tbtm_forward(block_b, mutated);
  const Tensor out_a2 = tbtm_forward(block_a, params);  // interleaved reuse
  CHECK(ref::max_abs_diff(out_a1, out_a2) == 0.0);
  CHECK(ref::max_abs_diff(out_b_mut, tbtm_forward(block_b, params)) > 0.0);
}

TEST_CASE("tbtm params: deterministic seeding and blob round trip") {
  const auto cfg = small_cfg();
  const auto a = TbtmParams::seeded(cfg, 5);
  const auto b = TbtmParams::seeded(cfg, 5);
  CHECK(ref::max_abs_diff(a.out_w, b.out_w) == 0.0);
  const auto c = TbtmParams::seeded(cfg, 6);
  CHECK(ref::max_abs_diff(a.out_w, c.out_w) > 0.0);

  namespace fs = std::filesystem;
  const auto path = fs::temp_directory_path() /
                    ("spikekit_tbtm_" + std::to_string(::getpid()) + ".bin");
  a.save(path.string());
  const auto back = TbtmParams::load(cfg, path.string());
  CHECK(ref::max_abs_diff(a.conv1_w[2], back.conv1_w[2]) == 0.0);
  CHECK(ref::max_abs_diff(a.se.w2, back.se.w2) == 0.0);
  fs::remove(path);
}

TEST_CASE("tbtm shape errors propagate") {
  const auto params = TbtmParams::seeded(small_cfg(), 1);
  CHECK_THROWS_AS(tbtm_forward(Tensor({12, 6, 6}), params), ShapeError);
  CHECK_THROWS_AS(TbtmParams::seeded(TbtmConfig{.t_prime = 12, .delta = 2}, 1),
                  ConfigError);
}

// ---------------------------------------------------------------------------
// feature fusion
// ---------------------------------------------------------------------------

TEST_CASE("ffm: single block with zero logit weights returns half the input") {
  FfmParams p = FfmParams::seeded(3, 1, 9);
  for (double& v : p.w1.values()) v = 0.0;
  for (double& v : p.b1.values()) v = 0.0;
  for (double& v : p.w2.values()) v = 0.0;
  for (double& v : p.b2.values()) v = 0.0;
  Rng rng(10);
  const Tensor f = ref::random_tensor(rng, {3, 4, 4});
  const Tensor out = ffm_forward({f}, p);
  for (int64_t i = 0; i < f.numel(); ++i) {
    CHECK(out[i] == doctest::Approx(0.5 * f[i]).epsilon(1e-15));
  }
}

TEST_CASE("ffm: all-zero features give zero output for any params") {
  const auto p = FfmParams::seeded(4, 3, 77);
  const std::vector<Tensor> feats(3, Tensor({4, 6, 6}));
  const Tensor out = ffm_forward(feats, p);
  for (double v : out.values()) CHECK(v == 0.0);
}

TEST_CASE("ffm matches the pool/concat/mlp/weighted-sum reference, seed 7") {
  const auto p = FfmParams::seeded(5, 4, 7);
  Rng rng(7);
  std::vector<Tensor> feats;
  for (int i = 0; i < 4; ++i) feats.push_back(ref::random_tensor(rng, {5, 8, 8}));
  const Tensor got = ffm_forward(feats, p);
  const Tensor want = ref::ffm_direct(feats, p);
  CHECK(ref::max_abs_diff(got, want) < 1e-12);

  const auto alpha = ffm_weights(feats, p);
  const auto alpha_ref = ref::ffm_alpha_direct(feats, p);
  for (size_t i = 0; i < alpha.size(); ++i) {
    CHECK(std::abs(alpha[i] - alpha_ref[i]) < 1e-12);
    CHECK(alpha[i] > 0.0);
    CHECK(alpha[i] < 1.0);
  }
}

TEST_CASE("ffm weight-permutation equivariance") {
  const int64_t c = 3, n = 4;
  const auto p = FfmParams::seeded(c, n, 101);
  Rng rng(102);
  std::vector<Tensor> feats;
  for (int i = 0; i < n; ++i) feats.push_back(ref::random_tensor(rng, {c, 5, 5}));
  const auto alpha = ffm_weights(feats, p);

  const std::vector<int64_t> perm = {2, 0, 3, 1};  // new position i <- old perm[i]
  std::vector<Tensor> feats_p;
  for (int64_t i = 0; i < n; ++i) feats_p.push_back(feats[static_cast<size_t>(perm[i])]);

  FfmParams q = p;
  const int64_t hidden = p.w1.dim(0);
  // permute the input blocks of w1 and the output units of w2/b2
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t hcol = 0; hcol < hidden; ++hcol) {
      for (int64_t ch = 0; ch < c; ++ch) {
        q.w1[hcol * (c * n) + i * c + ch] =
            p.w1[hcol * (c * n) + perm[static_cast<size_t>(i)] * c + ch];
      }
    }
    for (int64_t hcol = 0; hcol < hidden; ++hcol) {
      q.w2[i * hidden + hcol] = p.w2[perm[static_cast<size_t>(i)] * hidden + hcol];
    }
    q.b2[i] = p.b2[perm[static_cast<size_t>(i)]];
  }
  const auto alpha_p = ffm_weights(feats_p, q);
  for (int64_t i = 0; i < n; ++i) {
    CHECK(alpha_p[static_cast<size_t>(i)] ==
          doctest::Approx(alpha[static_cast<size_t>(perm[i])]).epsilon(1e-12));
  }
}

TEST_CASE("ffm: optional normalization makes the weights sum to one") {
  auto p = FfmParams::seeded(3, 5, 55);
  p.normalize = true;
  Rng rng(56);
  std::vector<Tensor> feats;
  for (int i = 0; i < 5; ++i) feats.push_back(ref::random_tensor(rng, {3, 4, 4}));
  const auto alpha = ffm_weights(feats, p);
  double sum = 0.0;
  for (double a : alpha) sum += a;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ffm params blob round trip") {
  namespace fs = std::filesystem;
  const auto p = FfmParams::seeded(4, 3, 8);
  const auto path = fs::temp_directory_path() /
                    ("spikekit_ffm_" + std::to_string(::getpid()) + ".bin");
  p.save(path.string());
  const auto back = FfmParams::load(4, 3, path.string());
  CHECK(ref::max_abs_diff(back.w1, p.w1) == 0.0);
  CHECK(ref::max_abs_diff(back.b2, p.b2) == 0.0);
  fs::remove(path);
}

TEST_CASE("ffm shape errors") {
  const auto p = FfmParams::seeded(3, 2, 1);
  Rng rng(1);
  const Tensor good = ref::random_tensor(rng, {3, 4, 4});
  CHECK_THROWS_AS(ffm_forward({good}, p), ShapeError);  // N mismatch
  CHECK_THROWS_AS(ffm_forward({good, ref::random_tensor(rng, {3, 4, 5})}, p),
                  ShapeError);
  CHECK_THROWS_AS(ffm_forward({ref::random_tensor(rng, {2, 4, 4}), good}, p),
                  ShapeError);
}
