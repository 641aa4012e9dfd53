#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "attnret/graph.hpp"
#include "attnret/pcst.hpp"
#include "attnret/random.hpp"
#include "attnret/retrieval.hpp"

namespace attnret {

struct SyntheticSpec {
  std::size_t num_nodes = 1000;
  std::size_t num_edges = 3000;
  std::size_t dimension = 32;
  std::size_t gold_size = 5;
  double sigma = 0.1;  // norm scale of the noise added to gold embeddings
  std::size_t num_queries = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticData {
  TextualGraph graph;
  std::vector<Query> queries;
};

/// Each query gets a random unit embedding and its own disjoint gold set;
/// gold node embeddings are q + sigma * g / sqrt(d), g ~ N(0, I). Every
/// other node and every edge gets an independent random unit vector. Edges
/// join uniformly random endpoints. Query embeddings are float-representable
/// so gold nodes at sigma = 0 match them exactly.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

enum class Method { attention, pcst };
std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct BenchOptions {
  std::vector<Method> methods{Method::attention, Method::pcst};
  RetrievalConfig attention;
  PcstConfig pcst;
  std::size_t jobs = 1;  // > 1 runs queries concurrently
};

struct QueryRecord {
  Method method = Method::attention;
  std::string query_id;
  double latency_ms = 0.0;
  std::size_t num_nodes = 0;
  std::size_t num_edges = 0;
  std::optional<double> recall;
  std::optional<std::string> error;
};

struct MethodSummary {
  Method method = Method::attention;
  std::size_t queries = 0;
  std::size_t failures = 0;
  std::optional<double> latency_mean_ms;
  std::optional<double> latency_median_ms;
  std::optional<double> latency_p95_ms;
  std::optional<double> mean_nodes;
  std::optional<double> mean_edges;
  std::optional<double> recall;  // mean over queries with a gold set
};

struct BenchReport {
  BenchOptions options;
  std::size_t graph_nodes = 0;
  std::size_t graph_edges = 0;
  std::vector<MethodSummary> methods;
  std::vector<QueryRecord> records;
};

/// |V* ∩ gold| / |gold|; both inputs sorted.
double gold_recall(std::span<const NodeId> retrieved, std::span<const NodeId> gold);

/// Times each retrieval call alone (graph already in memory). Retrieval
/// kernels run serially; `jobs` only controls query-level concurrency.
/// Failures are recorded per query.
BenchReport run_bench(const TextualGraph& graph, const std::vector<Query>& queries,
                      const BenchOptions& options);

/// Nearest-rank percentile of an unsorted sample, p in (0, 100].
double percentile(std::vector<double> values, double p);

/// Pretty-printed report. With `include_timing` false every latency field
/// and the machine block are omitted, leaving a run-independent document.
std::string report_to_json(const BenchReport& report, bool include_timing = true);
std::string report_to_csv(const BenchReport& report);

}  // namespace attnret
