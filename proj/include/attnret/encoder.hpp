#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "attnret/graph.hpp"

namespace attnret {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct EncoderConfig {
  std::size_t d_in = 64;
  std::size_t d_hidden = 64;
  std::size_t num_layers = 2;
  std::size_t num_heads = 4;
  std::size_t d_g = 64;
  std::size_t d_llm = 128;
  std::size_t expansion = 4;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument. d_g and d_hidden must both split evenly
  /// across the heads.
  void validate() const;
  std::size_t head_dim() const { return d_hidden / num_heads; }
  std::size_t pool_head_dim() const { return d_g / num_heads; }

  bool operator==(const EncoderConfig&) const = default;
};

struct AttentionLayerParams {
  Matrix w_query;  // d_hidden x d_in
  Matrix w_key;    // d_hidden x d_in
  Matrix w_value;  // d_hidden x d_in
  Matrix w_edge;   // d_hidden x d_hidden, applied to the augmented edge feature
  Matrix w_out;    // d_in x d_hidden
  std::vector<double> b_out;  // d_in

  bool operator==(const AttentionLayerParams&) const = default;
};

struct EncoderParams {
  EncoderConfig config;

  // Edge feed-forward network: d_in -> d_hidden -> d_hidden.
  Matrix edge_w1;
  std::vector<double> edge_b1;
  Matrix edge_w2;
  std::vector<double> edge_b2;
  Matrix w_rel;  // d_hidden x d_in, applied to x_dst - x_src

  std::vector<AttentionLayerParams> layers;

  // Pooling: per head a (d_g/H) x d_in projection and a d_g/H score vector.
  std::vector<Matrix> pool_proj;
  std::vector<std::vector<double>> pool_score;

  // Projection: LayerNorm(d_g) -> expansion*d_llm -> d_llm.
  std::vector<double> ln_gamma;
  std::vector<double> ln_beta;
  Matrix proj_w1;
  std::vector<double> proj_b1;
  Matrix proj_w2;
  std::vector<double> proj_b2;

  /// Throws std::invalid_argument when a shape disagrees with `config` or an
  /// entry is not finite.
  void validate() const;

  bool operator==(const EncoderParams&) const = default;
};

/// Nodes, edges and features of the graph handed to the encoder. Edges are
/// directed src -> dst with local ids; node i attends over the sources of
/// its incoming edges.
struct EncoderInput {
  Matrix node_features;  // n x d_in
  std::vector<Edge> edges;
  Matrix edge_features;  // m x d_in
};

struct GraphEmbedding {
  std::vector<double> h_g;        // d_g
  std::vector<double> projected;  // d_llm
};

struct PoolResult {
  std::vector<double> h_g;
  std::vector<std::vector<double>> weights;  // per head, one weight per node
};

inline constexpr double kLayerNormEps = 1e-5;

/// The single nonlinearity used by the edge FFN and the projection: SiLU.
double activation(double x);

/// Xavier-uniform weights, zero biases, unit LayerNorm gain; a pure function
/// of the config (seed included).
EncoderParams init_params(const EncoderConfig& cfg);

/// Local view of a subgraph: nodes renumbered in ascending parent order,
/// edges kept in ascending parent order. Undirected parents contribute both
/// directions of every edge.
EncoderInput make_encoder_input(const TextualGraph& graph, const Subgraph& sub);

/// e_aug(e) = FFN(edge_attr(e)) + W_rel (x_dst - x_src); m x d_hidden.
Matrix encode_edges(const EncoderParams& params, const EncoderInput& input);

/// Residual graph-transformer layers. Per layer and head, node i attends over
/// incoming edges j -> i with logits <W_q z_i, W_k z_j + W_e e_aug> / sqrt(d_head)
/// and messages W_v z_j + W_e e_aug; heads are concatenated and
/// z_i <- z_i + W_out m_i + b_out. Nodes with no incoming edge are unchanged.
Matrix encode_nodes(const EncoderParams& params, const EncoderInput& input,
                    const Matrix& edge_repr);

/// Multi-head attention pooling. Throws std::invalid_argument on an empty
/// node set.
PoolResult mha_pool(const EncoderParams& params, const Matrix& node_embeddings);

/// (x - mean) / sqrt(var + eps), without the affine part.
std::vector<double> layer_norm(std::span<const double> x, double eps = kLayerNormEps);

/// LayerNorm -> expand -> activation -> contract.
std::vector<double> project(const EncoderParams& params, std::span<const double> h_g);

GraphEmbedding encode_graph(const EncoderParams& params, const EncoderInput& input);
GraphEmbedding encode_graph(const EncoderParams& params, const TextualGraph& graph,
                            const Subgraph& sub);

/// Binary layout: magic "ATRNENC1", u32 version, u64 dims and seed, then every
/// matrix and vector as little-endian f64 in declaration order.
void save_params(const EncoderParams& params, const std::filesystem::path& path);
EncoderParams load_params(const std::filesystem::path& path);

/// `{"h_g": [...], "projected": [...]}`.
std::string embedding_to_json(const GraphEmbedding& embedding);

}  // namespace attnret
