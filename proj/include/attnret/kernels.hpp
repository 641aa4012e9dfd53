#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace attnret {

enum class Execution { serial, parallel };

/// Row-major block of feature vectors.
struct FeatureRows {
  std::span<const float> data;
  std::size_t dim = 0;

  std::size_t rows() const { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const float> row(std::size_t i) const { return data.subspan(i * dim, dim); }
};

namespace kernels {

/// Reference loop. out[i] = <q, f_i> / (|q| |f_i|), 0 when either norm is 0.
void cosine_scores_serial(std::span<const double> query, FeatureRows features,
                          std::span<double> out);

/// Same arithmetic per row as the serial loop, rows split across OpenMP
/// threads. Bit-identical to the serial result for any thread count.
void cosine_scores_omp(std::span<const double> query, FeatureRows features,
                       std::span<double> out);

}  // namespace kernels

/// Checked entry point: throws std::invalid_argument on dimension mismatch.
std::vector<double> cosine_scores(std::span<const double> query, FeatureRows features,
                                  Execution exec = Execution::parallel);

/// {i | scores[i] >= threshold} ∪ top-k by score, sorted ascending. Ties in
/// the top-k are broken by smaller index; k is clamped to the input size.
/// Uses partial selection, not a full sort. NaN scores are rejected.
std::vector<std::size_t> select_topk_union(std::span<const double> scores, std::size_t k,
                                           double threshold);

}  // namespace attnret
