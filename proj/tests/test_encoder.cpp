#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "attnret/encoder.hpp"
#include "oracles/encoder_oracle.hpp"
#include "support.hpp"

using namespace attnret;
using namespace attnret::testing;

namespace {

EncoderConfig small_config(std::size_t heads = 2) {
  EncoderConfig cfg;
  cfg.d_in = 5;
  cfg.d_hidden = 4 * heads;
  cfg.num_layers = 2;
  cfg.num_heads = heads;
  cfg.d_g = 3 * heads;
  cfg.d_llm = 7;
  cfg.expansion = 2;
  cfg.seed = 42;
  return cfg;
}

EncoderConfig random_config(Rng& rng) {
  EncoderConfig cfg;
  cfg.num_heads = 1 + rng.below(3);
  cfg.d_in = 1 + rng.below(6);
  cfg.d_hidden = cfg.num_heads * (1 + rng.below(3));
  cfg.num_layers = 1 + rng.below(3);
  cfg.d_g = cfg.num_heads * (1 + rng.below(3));
  cfg.d_llm = 1 + rng.below(5);
  cfg.expansion = 1 + rng.below(4);
  cfg.seed = rng.next_u64();
  return cfg;
}

}  // namespace

TEST_CASE("init_params: determinism and shapes") {
  const auto cfg = small_config();
  const auto a = init_params(cfg);
  const auto b = init_params(cfg);
  CHECK(a == b);
  auto other = cfg;
  other.seed = 43;
  CHECK_FALSE(init_params(other) == a);

  CHECK(a.edge_w1.rows() == cfg.d_hidden);
  CHECK(a.edge_w1.cols() == cfg.d_in);
  CHECK(a.edge_w2.rows() == cfg.d_hidden);
  CHECK(a.edge_w2.cols() == cfg.d_hidden);
  CHECK(a.edge_b1.size() == cfg.d_hidden);
  CHECK(a.w_rel.rows() == cfg.d_hidden);
  CHECK(a.w_rel.cols() == cfg.d_in);
  REQUIRE(a.layers.size() == cfg.num_layers);
  for (const auto& l : a.layers) {
    CHECK(l.w_query.rows() == cfg.d_hidden);
    CHECK(l.w_query.cols() == cfg.d_in);
    CHECK(l.w_edge.rows() == cfg.d_hidden);
    CHECK(l.w_edge.cols() == cfg.d_hidden);
    CHECK(l.w_out.rows() == cfg.d_in);
    CHECK(l.w_out.cols() == cfg.d_hidden);
    CHECK(l.b_out == std::vector<double>(cfg.d_in, 0.0));
  }
  REQUIRE(a.pool_proj.size() == cfg.num_heads);
  CHECK(a.pool_proj[0].rows() == cfg.pool_head_dim());
  CHECK(a.pool_proj[0].cols() == cfg.d_in);
  CHECK(a.pool_score[1].size() == cfg.pool_head_dim());
  CHECK(a.ln_gamma == std::vector<double>(cfg.d_g, 1.0));
  CHECK(a.ln_beta == std::vector<double>(cfg.d_g, 0.0));
  CHECK(a.proj_w1.rows() == cfg.expansion * cfg.d_llm);
  CHECK(a.proj_w1.cols() == cfg.d_g);
  CHECK(a.proj_w2.rows() == cfg.d_llm);
  CHECK(a.proj_w2.cols() == cfg.expansion * cfg.d_llm);
  CHECK_NOTHROW(a.validate());
}

TEST_CASE("init_params: d_g = 8 with 3 heads is a shape error") {
  EncoderConfig cfg;
  cfg.d_g = 8;
  cfg.num_heads = 3;
  cfg.d_hidden = 9;
  CHECK_THROWS_AS(init_params(cfg), std::invalid_argument);
  cfg.d_g = 9;
  CHECK_NOTHROW(init_params(cfg));
}

TEST_CASE("validate catches a bad shape and a non-finite entry") {
  auto p = init_params(small_config());
  p.layers[0].b_out.pop_back();
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = init_params(small_config());
  p.proj_w2(0, 0) = NAN;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("encode_edges: equal endpoints leave only the FFN term") {
  Rng rng(1);
  auto p = init_params(small_config());
  randomize(p, rng);
  auto in = random_input(rng, 3, 2, 5);
  in.edges = {{1, 1}, {0, 2}};
  for (std::size_t c = 0; c < 5; ++c) in.node_features(2, c) = in.node_features(0, c);
  const auto out = encode_edges(p, in);
  auto ffn_only = p;
  for (double& x : ffn_only.w_rel.data()) x = 0.0;
  CHECK(out == encode_edges(ffn_only, in));
}

TEST_CASE("encode_edges: zero attributes and zero biases leave only the relative term") {
  Rng rng(2);
  auto p = init_params(small_config());
  randomize(p, rng);
  std::fill(p.edge_b1.begin(), p.edge_b1.end(), 0.0);
  std::fill(p.edge_b2.begin(), p.edge_b2.end(), 0.0);
  auto in = random_input(rng, 4, 3, 5);
  std::fill(in.edge_features.data().begin(), in.edge_features.data().end(), 0.0);
  const Mat got = to_eigen(encode_edges(p, in));
  const Incidence inc = incidence(in);
  const Mat want = (inc.dst - inc.src) * to_eigen(in.node_features) * to_eigen(p.w_rel).transpose();
  CHECK(rel_error(got, want) <= 1e-12);
}

TEST_CASE("every forward op matches the dense oracle") {
  Rng rng(2718);
  for (int trial = 0; trial < 150; ++trial) {
    const auto cfg = random_config(rng);
    auto p = init_params(cfg);
    randomize(p, rng, rng.uniform(0.1, 1.5));
    const std::size_t n = 1 + rng.below(7);
    const auto in = random_input(rng, n, rng.below(12), cfg.d_in, rng.uniform(0.1, 3.0));

    const Matrix edges = encode_edges(p, in);
    const Mat want_edges = oracle_encode_edges(p, in);
    CHECK(rel_error(to_eigen(edges), want_edges) <= 1e-9);

    const Matrix nodes = encode_nodes(p, in, edges);
    const Mat want_nodes = oracle_encode_nodes(p, in, want_edges);
    CHECK(rel_error(to_eigen(nodes), want_nodes) <= 1e-9);

    const auto pooled = mha_pool(p, nodes);
    const auto want_pool = oracle_mha_pool(p, want_nodes);
    CHECK(rel_error(to_eigen(pooled.h_g), want_pool.h_g) <= 1e-9);
    for (std::size_t h = 0; h < cfg.num_heads; ++h) {
      CHECK(rel_error(to_eigen(pooled.weights[h]), want_pool.weights[h]) <= 1e-9);
      const double sum = std::accumulate(pooled.weights[h].begin(), pooled.weights[h].end(), 0.0);
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }

    const auto projected = project(p, pooled.h_g);
    CHECK(projected.size() == cfg.d_llm);
    CHECK(rel_error(to_eigen(projected), oracle_project(p, want_pool.h_g)) <= 1e-9);

    const auto full = encode_graph(p, in);
    CHECK(full.h_g == pooled.h_g);
    CHECK(full.projected == projected);
  }
}

TEST_CASE("3-node path, one layer, one head") {
  auto cfg = small_config(1);
  cfg.num_layers = 1;
  Rng rng(5);
  auto p = init_params(cfg);
  randomize(p, rng);
  auto in = random_input(rng, 3, 2, cfg.d_in);
  in.edges = {{0, 1}, {1, 2}};
  const Matrix e = encode_edges(p, in);
  CHECK(rel_error(to_eigen(encode_nodes(p, in, e)), oracle_encode_nodes(p, in, to_eigen(e))) <= 1e-10);
}

TEST_CASE("residual identity: zero output weights give the input back exactly") {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto cfg = random_config(rng);
    auto p = init_params(cfg);
    randomize(p, rng);
    for (auto& l : p.layers) {
      std::fill(l.w_out.data().begin(), l.w_out.data().end(), 0.0);
      std::fill(l.b_out.begin(), l.b_out.end(), 0.0);
    }
    const auto in = random_input(rng, 1 + rng.below(6), rng.below(10), cfg.d_in);
    CHECK(encode_nodes(p, in, encode_edges(p, in)) == in.node_features);
  }
}

TEST_CASE("isolated node passes through unchanged") {
  Rng rng(7);
  auto p = init_params(small_config());
  randomize(p, rng);
  const auto in = random_input(rng, 1, 0, 5);
  CHECK(encode_nodes(p, in, encode_edges(p, in)) == in.node_features);

  // a node with outgoing but no incoming edges is also unchanged
  auto two = random_input(rng, 2, 1, 5);
  two.edges = {{0, 1}};
  const auto out = encode_nodes(p, two, encode_edges(p, two));
  for (std::size_t c = 0; c < 5; ++c) CHECK(out(0, c) == two.node_features(0, c));
}

TEST_CASE("mha_pool: single node and identical nodes") {
  Rng rng(8);
  auto p = init_params(small_config(3));
  randomize(p, rng);
  Matrix one(1, 5);
  for (double& x : one.data()) x = rng.uniform(-1, 1);
  const auto single = mha_pool(p, one);
  for (const auto& w : single.weights) CHECK(w == std::vector<double>{1.0});
  const Mat z = to_eigen(one);
  const std::size_t dh = p.config.pool_head_dim();
  for (std::size_t h = 0; h < 3; ++h) {
    const Vec head = to_eigen(p.pool_proj[h]) * z.row(0).transpose();
    for (std::size_t c = 0; c < dh; ++c) CHECK(single.h_g[h * dh + c] == doctest::Approx(head(c)).epsilon(1e-14));
  }

  Matrix many(4, 5);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 5; ++c) many(r, c) = one(0, c);
  const auto repeated = mha_pool(p, many);
  CHECK(rel_error(to_eigen(repeated.h_g), to_eigen(single.h_g)) <= 1e-12);
  for (const auto& w : repeated.weights)
    for (double x : w) CHECK(x == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("empty node set is an error") {
  const auto p = init_params(small_config());
  CHECK_THROWS_WITH_AS(mha_pool(p, Matrix(0, 5)), "empty node set", std::invalid_argument);
  const auto g = TextualGraph::from_records(5, true, {}, {});
  CHECK_THROWS_WITH_AS(encode_graph(p, g, Subgraph{g.identity(), {}, {}}), "empty node set",
                       std::invalid_argument);
}

TEST_CASE("project: output length, zero weights, LayerNorm statistics") {
  Rng rng(9);
  auto p = init_params(small_config());
  std::vector<double> h(p.config.d_g);
  for (double& x : h) x = rng.uniform(-5, 5);
  CHECK(project(p, h).size() == p.config.d_llm);
  CHECK_THROWS_AS(project(p, std::vector<double>(3)), std::invalid_argument);

  auto zero = p;
  for (double& x : zero.proj_w1.data()) x = 0.0;
  for (double& x : zero.proj_w2.data()) x = 0.0;
  CHECK(project(zero, h) == std::vector<double>(p.config.d_llm, 0.0));

  // eps pulls the variance to var / (var + eps), so the 1e-5 band needs
  // inputs whose spread is at least unit scale.
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(2 + rng.below(64));
    const double scale = std::pow(10.0, rng.uniform(0.1, 6));
    const double shift = rng.uniform(-1e3, 1e3);
    for (double& v : x) v = shift + scale * rng.normal();
    const auto y = layer_norm(x);
    double mean = 0.0, var = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    for (double v : y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(y.size());
    CHECK(std::abs(mean) <= 1e-7);
    CHECK(std::abs(var - 1.0) <= 1e-5);
  }
}

TEST_CASE("h_g is invariant under node relabeling") {
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const auto cfg = random_config(rng);
    auto p = init_params(cfg);
    randomize(p, rng);
    const auto in = random_input(rng, 1 + rng.below(8), rng.below(14), cfg.d_in);
    const auto shuffled = relabeled(rng, in);
    const auto a = encode_graph(p, in);
    const auto b = encode_graph(p, shuffled);
    CHECK(rel_error(to_eigen(b.h_g), to_eigen(a.h_g)) <= 1e-9);
  }
}

TEST_CASE("extreme magnitudes stay finite") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cfg = random_config(rng);
    auto p = init_params(cfg);
    randomize(p, rng);
    const auto in = random_input(rng, 1 + rng.below(6), rng.below(10), cfg.d_in, 1e6);
    const auto out = encode_graph(p, in);
    for (double x : out.h_g) CHECK(std::isfinite(x));
    for (double x : out.projected) CHECK(std::isfinite(x));
  }
}

TEST_CASE("make_encoder_input: local ids and undirected doubling") {
  std::vector<NodeRecord> nodes{{5, "a", {1, 0}}, {6, "b", {0, 1}}, {7, "c", {1, 1}}};
  std::vector<EdgeRecord> edges{{5, 7, "x", {1, 2}}, {7, 7, "loop", {3, 4}}, {5, 6, "y", {5, 6}}};
  const auto directed = TextualGraph::from_records(2, true, nodes, edges);
  const Subgraph sub{directed.identity(), {0, 2}, {0, 1}};
  const auto in = make_encoder_input(directed, sub);
  CHECK(in.node_features.rows() == 2);
  REQUIRE(in.edges.size() == 2);
  CHECK(in.edges[0].src == 0);
  CHECK(in.edges[0].dst == 1);
  CHECK(in.edge_features(1, 0) == 3.0);

  const auto undirected = TextualGraph::from_records(2, false, nodes, edges);
  const auto both = make_encoder_input(undirected, sub);
  REQUIRE(both.edges.size() == 3);
  CHECK(both.edges[2].src == 1);
  CHECK(both.edges[2].dst == 0);
  CHECK(both.edge_features(2, 1) == 2.0);

  CHECK_THROWS_AS(make_encoder_input(directed, Subgraph{"", {0}, {0}}), std::invalid_argument);
}

TEST_CASE("dimension mismatch is reported") {
  const auto p = init_params(small_config());
  Rng rng(12);
  const auto in = random_input(rng, 3, 2, 4);
  CHECK_THROWS_AS(encode_edges(p, in), std::invalid_argument);
  CHECK_THROWS_AS(encode_graph(p, in), std::invalid_argument);
}

TEST_CASE("parameter files round-trip and reject damage") {
  TempDir dir;
  Rng rng(13);
  auto p = init_params(small_config());
  randomize(p, rng);
  save_params(p, dir / "p.bin");
  CHECK(load_params(dir / "p.bin") == p);

  auto bytes = read_file(dir / "p.bin");
  write_file(dir / "long.bin", bytes + "x");
  CHECK_THROWS_AS(load_params(dir / "long.bin"), DataError);
  write_file(dir / "short.bin", bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(load_params(dir / "short.bin"), DataError);
  bytes[0] = 'X';
  write_file(dir / "magic.bin", bytes);
  CHECK_THROWS_AS(load_params(dir / "magic.bin"), DataError);
  CHECK_THROWS_AS(load_params(dir / "none.bin"), DataError);
}

TEST_CASE("embedding JSON") {
  const GraphEmbedding e{{0.5, -1.0}, {2.0}};
  const auto j = nlohmann::json::parse(embedding_to_json(e));
  CHECK(j["h_g"] == nlohmann::json::array({0.5, -1.0}));
  CHECK(j["projected"] == nlohmann::json::array({2.0}));
}
