#include "attnret/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace attnret {

namespace {

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// Identical arithmetic for both kernels; the result for a row depends only
// on that row, which is what makes the OpenMP variant bit-exact.
inline double cosine_row(std::span<const double> q, double q_norm, std::span<const float> f) {
  double dot = 0.0;
  double ff = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double x = static_cast<double>(f[j]);
    dot += q[j] * x;
    ff += x * x;
  }
  if (q_norm == 0.0 || ff == 0.0) return 0.0;
  return dot / (q_norm * std::sqrt(ff));
}

}  // namespace

namespace kernels {

void cosine_scores_serial(std::span<const double> query, FeatureRows features,
                          std::span<double> out) {
  const double q_norm = std::sqrt(squared_norm(query));
  const std::size_t n = features.rows();
  for (std::size_t i = 0; i < n; ++i) out[i] = cosine_row(query, q_norm, features.row(i));
}

void cosine_scores_omp(std::span<const double> query, FeatureRows features,
                       std::span<double> out) {
  const double q_norm = std::sqrt(squared_norm(query));
  const auto n = static_cast<std::int64_t>(features.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    out[r] = cosine_row(query, q_norm, features.row(r));
  }
}

}  // namespace kernels

std::vector<double> cosine_scores(std::span<const double> query, FeatureRows features,
                                  Execution exec) {
  if (features.dim != query.size()) {
    throw std::invalid_argument("dimension mismatch: query has " + std::to_string(query.size()) +
                                " components, features have " + std::to_string(features.dim));
  }
  if (features.dim == 0 ? !features.data.empty() : features.data.size() % features.dim != 0) {
    throw std::invalid_argument("feature block is not a whole number of rows");
  }
  std::vector<double> out(features.rows());
  if (exec == Execution::parallel) {
    kernels::cosine_scores_omp(query, features, out);
  } else {
    kernels::cosine_scores_serial(query, features, out);
  }
  return out;
}

std::vector<std::size_t> select_topk_union(std::span<const double> scores, std::size_t k,
                                           double threshold) {
  const std::size_t n = scores.size();
  k = std::min(k, n);
  std::vector<char> chosen(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(scores[i])) throw std::invalid_argument("score vector contains NaN");
    if (scores[i] >= threshold) chosen[i] = 1;
  }
  if (k > 0) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto better = [&](std::size_t a, std::size_t b) {
      return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
    };
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k - 1), idx.end(),
                     better);
    for (std::size_t j = 0; j < k; ++j) chosen[idx[j]] = 1;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (chosen[i]) out.push_back(i);
  }
  return out;
}

}  // namespace attnret
