#include "attnret/encoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "attnret/random.hpp"
#include "json_util.hpp"

namespace attnret {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* name) {
  require(m.rows() == rows && m.cols() == cols && m.data().size() == rows * cols,
          std::string("parameter ") + name + " has shape " + std::to_string(m.rows()) + "x" +
              std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
              std::to_string(cols));
}

void require_size(const std::vector<double>& v, std::size_t n, const char* name) {
  require(v.size() == n, std::string("parameter ") + name + " has length " +
                             std::to_string(v.size()) + ", expected " + std::to_string(n));
}

Matrix xavier(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& x : m.data()) x = rng.uniform(-a, a);
  return m;
}

// y = W x (+ b)
void affine(const Matrix& w, std::span<const double> x, std::span<const double> bias,
            std::span<double> y) {
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const auto row = w.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * x[c];
    y[r] = bias.empty() ? acc : acc + bias[r];
  }
}

// Row-wise X W^T.
Matrix rows_times(const Matrix& x, const Matrix& w) {
  Matrix out(x.rows(), w.rows());
  const auto n = static_cast<std::int64_t>(x.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    affine(w, x.row(r), {}, out.row(r));
  }
  return out;
}

template <typename Params, typename F>
void for_each_tensor(Params& p, F&& f) {
  f(p.edge_w1.data());
  f(p.edge_b1);
  f(p.edge_w2.data());
  f(p.edge_b2);
  f(p.w_rel.data());
  for (auto& layer : p.layers) {
    f(layer.w_query.data());
    f(layer.w_key.data());
    f(layer.w_value.data());
    f(layer.w_edge.data());
    f(layer.w_out.data());
    f(layer.b_out);
  }
  for (auto& m : p.pool_proj) f(m.data());
  for (auto& v : p.pool_score) f(v);
  f(p.ln_gamma);
  f(p.ln_beta);
  f(p.proj_w1.data());
  f(p.proj_b1);
  f(p.proj_w2.data());
  f(p.proj_b2);
}

// Zero-filled parameters with every shape implied by the config.
EncoderParams shaped(const EncoderConfig& cfg) {
  EncoderParams p;
  p.config = cfg;
  p.edge_w1 = Matrix(cfg.d_hidden, cfg.d_in);
  p.edge_b1.assign(cfg.d_hidden, 0.0);
  p.edge_w2 = Matrix(cfg.d_hidden, cfg.d_hidden);
  p.edge_b2.assign(cfg.d_hidden, 0.0);
  p.w_rel = Matrix(cfg.d_hidden, cfg.d_in);
  p.layers.resize(cfg.num_layers);
  for (auto& layer : p.layers) {
    layer.w_query = Matrix(cfg.d_hidden, cfg.d_in);
    layer.w_key = Matrix(cfg.d_hidden, cfg.d_in);
    layer.w_value = Matrix(cfg.d_hidden, cfg.d_in);
    layer.w_edge = Matrix(cfg.d_hidden, cfg.d_hidden);
    layer.w_out = Matrix(cfg.d_in, cfg.d_hidden);
    layer.b_out.assign(cfg.d_in, 0.0);
  }
  p.pool_proj.assign(cfg.num_heads, Matrix(cfg.pool_head_dim(), cfg.d_in));
  p.pool_score.assign(cfg.num_heads, std::vector<double>(cfg.pool_head_dim(), 0.0));
  p.ln_gamma.assign(cfg.d_g, 1.0);
  p.ln_beta.assign(cfg.d_g, 0.0);
  p.proj_w1 = Matrix(cfg.expansion * cfg.d_llm, cfg.d_g);
  p.proj_b1.assign(cfg.expansion * cfg.d_llm, 0.0);
  p.proj_w2 = Matrix(cfg.d_llm, cfg.expansion * cfg.d_llm);
  p.proj_b2.assign(cfg.d_llm, 0.0);
  return p;
}

void softmax_inplace(std::span<double> v) {
  if (v.empty()) return;
  const double top = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - top);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

void check_input(const EncoderParams& params, const EncoderInput& input) {
  const auto& cfg = params.config;
  require(input.node_features.cols() == cfg.d_in,
          "dimension mismatch: node features have " + std::to_string(input.node_features.cols()) +
              " columns, encoder expects " + std::to_string(cfg.d_in));
  require(input.edge_features.rows() == input.edges.size(),
          "edge feature rows do not match the edge count");
  require(input.edges.empty() || input.edge_features.cols() == cfg.d_in,
          "dimension mismatch: edge features have " + std::to_string(input.edge_features.cols()) +
              " columns, encoder expects " + std::to_string(cfg.d_in));
  for (const Edge& e : input.edges) {
    require(e.src < input.node_features.rows() && e.dst < input.node_features.rows(),
            "encoder edge endpoint out of range");
  }
}

}  // namespace

double activation(double x) { return x / (1.0 + std::exp(-x)); }

void EncoderConfig::validate() const {
  require(d_in > 0 && d_hidden > 0 && num_layers > 0 && num_heads > 0 && d_g > 0 && d_llm > 0 &&
              expansion > 0,
          "encoder dimensions must be positive");
  require(d_g % num_heads == 0, "d_g (" + std::to_string(d_g) + ") is not divisible by " +
                                    std::to_string(num_heads) + " heads");
  require(d_hidden % num_heads == 0, "d_hidden (" + std::to_string(d_hidden) +
                                         ") is not divisible by " + std::to_string(num_heads) +
                                         " heads");
}

void EncoderParams::validate() const {
  config.validate();
  const auto& c = config;
  require_shape(edge_w1, c.d_hidden, c.d_in, "edge_w1");
  require_size(edge_b1, c.d_hidden, "edge_b1");
  require_shape(edge_w2, c.d_hidden, c.d_hidden, "edge_w2");
  require_size(edge_b2, c.d_hidden, "edge_b2");
  require_shape(w_rel, c.d_hidden, c.d_in, "w_rel");
  require(layers.size() == c.num_layers, "layer count does not match the config");
  for (const auto& layer : layers) {
    require_shape(layer.w_query, c.d_hidden, c.d_in, "w_query");
    require_shape(layer.w_key, c.d_hidden, c.d_in, "w_key");
    require_shape(layer.w_value, c.d_hidden, c.d_in, "w_value");
    require_shape(layer.w_edge, c.d_hidden, c.d_hidden, "w_edge");
    require_shape(layer.w_out, c.d_in, c.d_hidden, "w_out");
    require_size(layer.b_out, c.d_in, "b_out");
  }
  require(pool_proj.size() == c.num_heads && pool_score.size() == c.num_heads,
          "pooling head count does not match the config");
  for (const auto& m : pool_proj) require_shape(m, c.pool_head_dim(), c.d_in, "pool_proj");
  for (const auto& v : pool_score) require_size(v, c.pool_head_dim(), "pool_score");
  require_size(ln_gamma, c.d_g, "ln_gamma");
  require_size(ln_beta, c.d_g, "ln_beta");
  require_shape(proj_w1, c.expansion * c.d_llm, c.d_g, "proj_w1");
  require_size(proj_b1, c.expansion * c.d_llm, "proj_b1");
  require_shape(proj_w2, c.d_llm, c.expansion * c.d_llm, "proj_w2");
  require_size(proj_b2, c.d_llm, "proj_b2");
  for_each_tensor(*this, [](const std::vector<double>& v) {
    for (double x : v) require(std::isfinite(x), "encoder parameters contain a non-finite value");
  });
}

EncoderParams init_params(const EncoderConfig& cfg) {
  cfg.validate();
  EncoderParams p = shaped(cfg);
  Rng rng(cfg.seed);
  p.edge_w1 = xavier(rng, cfg.d_hidden, cfg.d_in);
  p.edge_w2 = xavier(rng, cfg.d_hidden, cfg.d_hidden);
  p.w_rel = xavier(rng, cfg.d_hidden, cfg.d_in);
  for (auto& layer : p.layers) {
    layer.w_query = xavier(rng, cfg.d_hidden, cfg.d_in);
    layer.w_key = xavier(rng, cfg.d_hidden, cfg.d_in);
    layer.w_value = xavier(rng, cfg.d_hidden, cfg.d_in);
    layer.w_edge = xavier(rng, cfg.d_hidden, cfg.d_hidden);
    layer.w_out = xavier(rng, cfg.d_in, cfg.d_hidden);
  }
  for (auto& m : p.pool_proj) m = xavier(rng, cfg.pool_head_dim(), cfg.d_in);
  for (auto& v : p.pool_score) v = xavier(rng, 1, cfg.pool_head_dim()).data();
  p.proj_w1 = xavier(rng, cfg.expansion * cfg.d_llm, cfg.d_g);
  p.proj_w2 = xavier(rng, cfg.d_llm, cfg.expansion * cfg.d_llm);
  return p;
}

EncoderInput make_encoder_input(const TextualGraph& graph, const Subgraph& sub) {
  if (!is_closed(graph, sub)) {
    throw std::invalid_argument("subgraph is not closed over the graph (edge endpoint missing)");
  }
  const std::size_t d = graph.dimension();
  std::vector<std::size_t> local(graph.num_nodes(), 0);
  EncoderInput input;
  input.node_features = Matrix(sub.nodes.size(), d);
  for (std::size_t i = 0; i < sub.nodes.size(); ++i) {
    local[sub.nodes[i]] = i;
    const auto f = graph.node_embedding(sub.nodes[i]);
    std::copy(f.begin(), f.end(), input.node_features.row(i).begin());
  }

  std::vector<std::pair<Edge, EdgeIndex>> edges;
  for (EdgeIndex e : sub.edges) {
    const Edge& edge = graph.edge(e);
    edges.push_back({{local[edge.src], local[edge.dst]}, e});
  }
  if (!graph.directed()) {
    for (EdgeIndex e : sub.edges) {
      const Edge& edge = graph.edge(e);
      if (edge.src != edge.dst) edges.push_back({{local[edge.dst], local[edge.src]}, e});
    }
  }
  input.edge_features = Matrix(edges.size(), d);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    input.edges.push_back(edges[k].first);
    const auto f = graph.edge_embedding(edges[k].second);
    std::copy(f.begin(), f.end(), input.edge_features.row(k).begin());
  }
  return input;
}

Matrix encode_edges(const EncoderParams& params, const EncoderInput& input) {
  check_input(params, input);
  const auto& cfg = params.config;
  const std::size_t m = input.edges.size();
  Matrix out(m, cfg.d_hidden);
  const auto count = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < count; ++k) {
    const auto e = static_cast<std::size_t>(k);
    std::vector<double> hidden(cfg.d_hidden);
    affine(params.edge_w1, input.edge_features.row(e), params.edge_b1, hidden);
    for (double& h : hidden) h = activation(h);
    auto row = out.row(e);
    affine(params.edge_w2, hidden, params.edge_b2, row);

    const auto x_dst = input.node_features.row(input.edges[e].dst);
    const auto x_src = input.node_features.row(input.edges[e].src);
    std::vector<double> diff(cfg.d_in);
    for (std::size_t c = 0; c < cfg.d_in; ++c) diff[c] = x_dst[c] - x_src[c];
    std::vector<double> rel(cfg.d_hidden);
    affine(params.w_rel, diff, {}, rel);
    for (std::size_t c = 0; c < cfg.d_hidden; ++c) row[c] += rel[c];
  }
  return out;
}

Matrix encode_nodes(const EncoderParams& params, const EncoderInput& input,
                    const Matrix& edge_repr) {
  check_input(params, input);
  const auto& cfg = params.config;
  require(edge_repr.rows() == input.edges.size() &&
              (input.edges.empty() || edge_repr.cols() == cfg.d_hidden),
          "edge representations do not match the edge list");
  const std::size_t n = input.node_features.rows();
  const std::size_t heads = cfg.num_heads;
  const std::size_t dh = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  std::vector<std::vector<std::size_t>> incoming(n);
  for (std::size_t e = 0; e < input.edges.size(); ++e) incoming[input.edges[e].dst].push_back(e);

  Matrix z = input.node_features;
  for (const auto& layer : params.layers) {
    const Matrix q = rows_times(z, layer.w_query);
    const Matrix k = rows_times(z, layer.w_key);
    const Matrix v = rows_times(z, layer.w_value);
    const Matrix edge_term = rows_times(edge_repr, layer.w_edge);
    Matrix next = z;
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < count; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      const auto& in = incoming[i];
      if (in.empty()) continue;
      std::vector<double> message(cfg.d_hidden, 0.0);
      std::vector<double> logits(in.size());
      for (std::size_t h = 0; h < heads; ++h) {
        const std::size_t lo = h * dh;
        for (std::size_t t = 0; t < in.size(); ++t) {
          const std::size_t e = in[t];
          const std::size_t j = input.edges[e].src;
          double dot = 0.0;
          for (std::size_t c = lo; c < lo + dh; ++c) dot += q(i, c) * (k(j, c) + edge_term(e, c));
          logits[t] = dot * scale;
        }
        softmax_inplace(logits);
        for (std::size_t t = 0; t < in.size(); ++t) {
          const std::size_t e = in[t];
          const std::size_t j = input.edges[e].src;
          for (std::size_t c = lo; c < lo + dh; ++c) {
            message[c] += logits[t] * (v(j, c) + edge_term(e, c));
          }
        }
      }
      std::vector<double> update(cfg.d_in);
      affine(layer.w_out, message, layer.b_out, update);
      auto row = next.row(i);
      for (std::size_t c = 0; c < cfg.d_in; ++c) row[c] += update[c];
    }
    z = std::move(next);
  }
  return z;
}

PoolResult mha_pool(const EncoderParams& params, const Matrix& node_embeddings) {
  const auto& cfg = params.config;
  const std::size_t n = node_embeddings.rows();
  require(n > 0, "empty node set");
  require(node_embeddings.cols() == cfg.d_in,
          "dimension mismatch: node embeddings have " + std::to_string(node_embeddings.cols()) +
              " columns, encoder expects " + std::to_string(cfg.d_in));
  const std::size_t dh = cfg.pool_head_dim();
  PoolResult out;
  out.h_g.assign(cfg.d_g, 0.0);
  out.weights.resize(cfg.num_heads);
  for (std::size_t h = 0; h < cfg.num_heads; ++h) {
    const Matrix projected = rows_times(node_embeddings, params.pool_proj[h]);
    auto& w = out.weights[h];
    w.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < dh; ++c) s += params.pool_score[h][c] * projected(i, c);
      w[i] = s;
    }
    softmax_inplace(w);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < dh; ++c) out.h_g[h * dh + c] += w[i] * projected(i, c);
    }
  }
  return out;
}

std::vector<double> layer_norm(std::span<const double> x, double eps) {
  require(!x.empty(), "layer_norm of an empty vector");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  const double inv = 1.0 / std::sqrt(var + eps);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) * inv;
  return out;
}

std::vector<double> project(const EncoderParams& params, std::span<const double> h_g) {
  const auto& cfg = params.config;
  require(h_g.size() == cfg.d_g, "dimension mismatch: h_g has " + std::to_string(h_g.size()) +
                                     " components, expected " + std::to_string(cfg.d_g));
  auto normed = layer_norm(h_g);
  for (std::size_t i = 0; i < normed.size(); ++i) {
    normed[i] = params.ln_gamma[i] * normed[i] + params.ln_beta[i];
  }
  std::vector<double> wide(cfg.expansion * cfg.d_llm);
  affine(params.proj_w1, normed, params.proj_b1, wide);
  for (double& x : wide) x = activation(x);
  std::vector<double> out(cfg.d_llm);
  affine(params.proj_w2, wide, params.proj_b2, out);
  return out;
}

GraphEmbedding encode_graph(const EncoderParams& params, const EncoderInput& input) {
  require(input.node_features.rows() > 0, "empty node set");
  const Matrix edges = encode_edges(params, input);
  const Matrix nodes = encode_nodes(params, input, edges);
  GraphEmbedding out;
  out.h_g = mha_pool(params, nodes).h_g;
  out.projected = project(params, out.h_g);
  return out;
}

GraphEmbedding encode_graph(const EncoderParams& params, const TextualGraph& graph,
                            const Subgraph& sub) {
  return encode_graph(params, make_encoder_input(graph, sub));
}

namespace {

constexpr char kMagic[8] = {'A', 'T', 'R', 'N', 'E', 'N', 'C', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T read_le(std::istream& in, const std::string& where) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof value);
  if (!in) throw DataError(where + ": truncated encoder parameter file");
  return value;
}

}  // namespace

void save_params(const EncoderParams& params, const std::filesystem::path& path) {
  params.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  write_le<std::uint32_t>(out, kVersion);
  const auto& c = params.config;
  for (std::uint64_t v : {c.d_in, c.d_hidden, c.num_layers, c.num_heads, c.d_g, c.d_llm,
                          c.expansion}) {
    write_le<std::uint64_t>(out, v);
  }
  write_le<std::uint64_t>(out, c.seed);
  for_each_tensor(params, [&](const std::vector<double>& v) {
    for (double x : v) write_le<double>(out, x);
  });
  out.flush();
  if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

EncoderParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing file " + path.string());
  const std::string where = path.filename().string();
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw DataError(where + ": not an encoder parameter file");
  }
  const auto version = read_le<std::uint32_t>(in, where);
  if (version != kVersion) {
    throw DataError(where + ": unsupported parameter file version " + std::to_string(version));
  }
  EncoderConfig c;
  for (std::size_t* field : {&c.d_in, &c.d_hidden, &c.num_layers, &c.num_heads, &c.d_g, &c.d_llm,
                             &c.expansion}) {
    *field = static_cast<std::size_t>(read_le<std::uint64_t>(in, where));
  }
  c.seed = read_le<std::uint64_t>(in, where);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(where + ": " + e.what());
  }
  EncoderParams p = shaped(c);
  for_each_tensor(p, [&](std::vector<double>& v) {
    for (double& x : v) x = read_le<double>(in, where);
  });
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError(where + ": trailing bytes after encoder parameters");
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(where + ": " + e.what());
  }
  return p;
}

std::string embedding_to_json(const GraphEmbedding& embedding) {
  detail::json rec = {{"h_g", detail::to_json_array(embedding.h_g)},
                      {"projected", detail::to_json_array(embedding.projected)}};
  return rec.dump();
}

}  // namespace attnret
