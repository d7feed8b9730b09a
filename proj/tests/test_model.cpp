/* Copyright 2026 The Delta-DiT Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "deltadit/error.hpp"
#include "deltadit/model.hpp"
#include "deltadit/rng.hpp"

using namespace deltadit;
namespace fs = std::filesystem;

namespace {

ModelSpec toy_spec() { return ModelSpec{}; }

Tensor random_tensor(Shape shape, std::uint64_t seed, float scale = 1.0f) {
  Rng rng(seed);
  return randn(rng, shape) * scale;
}

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("deltadit_test_model_" + name); }

// Frozen from the first run whose oracle checks passed.
constexpr std::uint64_t kGoldenEmbedT5 = 6523920146824179200ULL;
constexpr std::uint64_t kGoldenBlock = 6817116743941488695ULL;
constexpr std::uint64_t kGoldenPredict = 16117724626841936735ULL;

}  // namespace

TEST_CASE("spec validation") {
  ModelSpec s;
  CHECK_NOTHROW(s.validate());
  CHECK(s.n_tokens() == 16);
  CHECK(s.mlp_hidden() == 128);
  s.image_size = 7;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = ModelSpec{};
  s.n_heads = 5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = ModelSpec{};
  s.n_blocks = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("patches") {
  ModelSpec s;
  s.image_size = 4;
  SUBCASE("token count") { CHECK(extract_patches(Tensor({1, 4, 4}), s).shape() == Shape{4, 4}); }
  SUBCASE("impulse placement") {
    for (std::int64_t y = 0; y < 4; ++y) {
      for (std::int64_t x = 0; x < 4; ++x) {
        Tensor img({1, 4, 4});
        img[static_cast<std::size_t>(y * 4 + x)] = 1.0f;
        const Tensor p = extract_patches(img, s);
        const auto token = (y / 2) * 2 + x / 2;
        const auto within = (y % 2) * 2 + x % 2;
        for (std::int64_t t = 0; t < 4; ++t)
          for (std::int64_t k = 0; k < 4; ++k) CHECK(p.at(t, k) == ((t == token && k == within) ? 1.0f : 0.0f));
      }
    }
  }
  SUBCASE("round trip, 3 channels") {
    ModelSpec c3;
    c3.channels = 3;
    c3.image_size = 8;
    const Tensor img = random_tensor({3, 8, 8}, 1);
    CHECK(fold_patches(extract_patches(img, c3), c3) == img);
  }
  SUBCASE("identity projection") {
    ModelSpec sp;
    sp.image_size = 4;
    sp.d_model = 4;
    sp.n_heads = 1;
    ModelWeights w = init_weights(sp, 0);
    w.patch_w = Tensor::identity(4);
    w.patch_b = Tensor::zeros({4});
    w.out_w = Tensor::identity(4);
    w.out_b = Tensor::zeros({4});
    const Tensor img = random_tensor({1, 4, 4}, 2);
    CHECK(unpatchify(patchify(img, w), w) == img);
  }
  SUBCASE("wrong shape") { CHECK_THROWS_AS(extract_patches(Tensor({1, 6, 6}), s), ShapeError); }
}

TEST_CASE("conditioning embedding") {
  const ModelWeights w = init_weights(toy_spec(), 0);
  SUBCASE("sinusoid closed form") {
    const Tensor f = timestep_features(7, 8);
    for (int i = 0; i < 4; ++i) {
      const double freq = std::exp(-std::log(10000.0) * i / 4.0);
      CHECK(f[static_cast<std::size_t>(i)] == doctest::Approx(std::cos(7 * freq)).epsilon(1e-6));
      CHECK(f[static_cast<std::size_t>(i + 4)] == doctest::Approx(std::sin(7 * freq)).epsilon(1e-6));
    }
  }
  SUBCASE("distinct timesteps") {
    CHECK(l2_distance(embed_conditioning({0, {}}, w), embed_conditioning({1, {}}, w)) > 0.0);
    std::vector<std::uint64_t> prints;
    for (std::int64_t t = 0; t <= 1000; ++t) prints.push_back(fingerprint(embed_conditioning({t, {}}, w)));
    std::sort(prints.begin(), prints.end());
    CHECK(std::adjacent_find(prints.begin(), prints.end()) == prints.end());
  }
  SUBCASE("unconditional ignores class") {
    CHECK(embed_conditioning({3, 2}, w) == embed_conditioning({3, {}}, w));
  }
  SUBCASE("class range") {
    ModelSpec s = toy_spec();
    s.n_classes = 3;
    const ModelWeights wc = init_weights(s, 0);
    CHECK(embed_conditioning({3, 1}, wc) != embed_conditioning({3, 2}, wc));
    CHECK_THROWS_AS(embed_conditioning({3, 3}, wc), ConfigError);
    CHECK_THROWS_AS(embed_conditioning({3, -1}, wc), ConfigError);
  }
  SUBCASE("golden t=5") {
    const Tensor e = embed_conditioning({5, {}}, w);
    CHECK(e.shape() == Shape{32});
    CHECK(fingerprint(e) == kGoldenEmbedT5);
  }
}

TEST_CASE("block_forward") {
  const ModelSpec s = toy_spec();
  const ModelWeights w = init_weights(s, 0);
  const Tensor h = random_tensor(s.stream_shape(), 3);
  const Tensor c = embed_conditioning({10, {}}, w);
  SUBCASE("isotropic") {
    for (const auto& bw : w.blocks) CHECK(block_forward(h, c, bw, s).shape() == h.shape());
  }
  SUBCASE("zeroed residual branches are the identity") {
    BlockWeights bw = w.blocks[0];
    bw.proj_w = Tensor::zeros(bw.proj_w.shape());
    bw.fc2_w = Tensor::zeros(bw.fc2_w.shape());
    CHECK(block_forward(h, c, bw, s) == h);
  }
  SUBCASE("shape mismatch") { CHECK_THROWS_AS(block_forward(Tensor({4, 32}), c, w.blocks[0], s), ShapeError); }
  SUBCASE("golden, 4-token input") {
    ModelSpec s4 = toy_spec();
    s4.image_size = 4;
    const ModelWeights w4 = init_weights(s4, 0);
    const Tensor h4 = random_tensor(s4.stream_shape(), 0);
    CHECK(h4.dim(0) == 4);
    CHECK(fingerprint(block_forward(h4, embed_conditioning({5, {}}, w4), w4.blocks[0], s4)) == kGoldenBlock);
  }
  SUBCASE("counts calls") {
    ExecStats st;
    block_forward(h, c, w.blocks[1], s, &st);
    CHECK(st.block_calls == 1);
  }
}

TEST_CASE("forward_range composition law") {
  for (std::int64_t nb = 1; nb <= 6; ++nb) {
    ModelSpec s = toy_spec();
    s.n_blocks = nb;
    const ModelWeights w = init_weights(s, static_cast<std::uint64_t>(nb));
    const Tensor h = random_tensor(s.stream_shape(), 11);
    const Tensor c = embed_conditioning({40, {}}, w);
    Tensor seq = h;
    for (const auto& bw : w.blocks) seq = block_forward(seq, c, bw, s);
    CHECK(forward_range(h, 1, nb, c, w) == seq);
    for (std::int64_t a = 1; a <= nb; ++a) {
      CHECK(forward_range(h, a, a, c, w) == block_forward(h, c, w.blocks[static_cast<std::size_t>(a - 1)], s));
      for (std::int64_t b = a; b <= nb; ++b) {
        for (std::int64_t e = b + 1; e <= nb; ++e) {
          CHECK(forward_range(forward_range(h, a, b, c, w), b + 1, e, c, w) == forward_range(h, a, e, c, w));
        }
      }
    }
    CHECK(forward_range(h, 1, 0, c, w) == h);
    CHECK_THROWS_AS(forward_range(h, 0, 1, c, w), ConfigError);
    CHECK_THROWS_AS(forward_range(h, 1, nb + 1, c, w), ConfigError);
    CHECK_THROWS_AS(forward_range(h, 3, 1, c, w), ConfigError);
  }
}

TEST_CASE("predict_noise") {
  const ModelSpec s = toy_spec();
  const ModelWeights w = init_weights(s, 0);
  const Tensor x = random_tensor(s.image_shape(), 5);
  const Tensor eps = predict_noise(x, {5, {}}, w);
  CHECK(eps.shape() == x.shape());
  CHECK(eps.all_finite());
  CHECK(eps.bit_equal(predict_noise(x, {5, {}}, w)));
  CHECK(fingerprint(eps) == kGoldenPredict);
  SUBCASE("composition of public pieces") {
    const Tensor c = embed_conditioning({5, {}}, w);
    CHECK(decode_output(forward_range(embed_input(x, c, w), 1, s.n_blocks, c, w), c, w) == eps);
  }
  SUBCASE("every block is evaluated") {
    ExecStats st;
    predict_noise(x, {5, {}}, w, &st);
    CHECK(st.block_calls == 4);
  }
  SUBCASE("wrong image shape") { CHECK_THROWS_AS(predict_noise(Tensor({1, 4, 4}), {5, {}}, w), ShapeError); }
}

TEST_CASE("block MAC count") {
  // 4 d^2 modulation + n (3 d^2 qkv + d^2 proj + 2 d hidden) + 2 n^2 d attention.
  ModelSpec s;
  CHECK(block_macs(s) == 4.0 * 32 * 32 + 16 * (4.0 * 32 * 32 + 2.0 * 32 * 128) + 2.0 * 16 * 16 * 32);
}

TEST_CASE("weights") {
  ModelSpec s = toy_spec();
  s.n_classes = 2;
  const ModelWeights w = init_weights(s, 7);
  SUBCASE("deterministic init") {
    const ModelWeights again = init_weights(s, 7);
    const auto a = w.parameters();
    const auto b = again.parameters();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i]->bit_equal(*b[i]));
    CHECK(fingerprint(init_weights(s, 8).blocks[0].qkv_w) != fingerprint(w.blocks[0].qkv_w));
  }
  SUBCASE("init statistics") {
    double sq = 0.0;
    for (float v : w.blocks[0].fc1_w.data()) sq += static_cast<double>(v) * v;
    CHECK(std::sqrt(sq / static_cast<double>(w.blocks[0].fc1_w.size())) == doctest::Approx(0.02).epsilon(0.05));
    CHECK(w.blocks[0].ln1_gain == Tensor::full({32}, 1.0f));
    CHECK(w.blocks[0].qkv_b == Tensor::zeros({96}));
  }
  SUBCASE("shapes are a function of the spec") {
    const auto shapes = ModelWeights::parameter_shapes(s);
    const auto params = w.parameters();
    REQUIRE(shapes.size() == params.size());
    for (std::size_t i = 0; i < shapes.size(); ++i) CHECK(params[i]->shape() == shapes[i]);
    ModelWeights bad = w;
    bad.blocks[1].fc1_b = Tensor::zeros({3});
    CHECK_THROWS_AS(bad.check_shapes(), ShapeError);
  }
  SUBCASE("save/load round trip") {
    const auto p = temp_path("rt.ddit");
    save_weights(w, p);
    const ModelWeights back = load_weights(p);
    CHECK(back.spec == s);
    const auto a = w.parameters();
    const auto b = back.parameters();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i]->bit_equal(*b[i]));
    ModelSpec wrong = s;
    wrong.n_blocks = 5;
    CHECK_THROWS_AS(load_weights(p, wrong), ShapeError);
    fs::remove(p);
  }
  SUBCASE("corrupt files") {
    const auto p = temp_path("bad.ddit");
    save_weights(w, p);
    const auto size = fs::file_size(p);
    fs::resize_file(p, size - 4);
    CHECK_THROWS_AS(load_weights(p), FormatError);
    {
      std::ofstream out(p, std::ios::binary | std::ios::trunc);
      out << "NOPE and some more bytes to read";
    }
    CHECK_THROWS_AS(load_weights(p), FormatError);
    save_weights(w, p);
    {
      std::ofstream out(p, std::ios::binary | std::ios::app);
      out << "x";
    }
    CHECK_THROWS_AS(load_weights(p), FormatError);
    CHECK_THROWS_AS(load_weights(temp_path("missing.ddit")), FormatError);
    fs::remove(p);
  }
  SUBCASE("tensor dump") {
    const auto p = temp_path("t.ddtn");
    const Tensor t = random_tensor({3, 5, 2}, 4);
    save_tensor(t, p);
    CHECK(load_tensor(p).bit_equal(t));
    fs::remove(p);
  }
}
