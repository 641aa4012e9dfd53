#include "attnret/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "attnret/io.hpp"
#include "json_util.hpp"

namespace attnret {

void SyntheticSpec::validate() const {
  if (dimension == 0) throw std::invalid_argument("synthetic dimension must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("synthetic sigma must be finite and >= 0");
  }
  if (num_edges > 0 && num_nodes == 0) {
    throw std::invalid_argument("synthetic graph has edges but no nodes");
  }
  if (num_nodes < (std::size_t{1} << 32) && num_edges > num_nodes * num_nodes) {
    throw std::invalid_argument("synthetic num_edges exceeds num_nodes^2");
  }
  if (gold_size > num_nodes || num_queries * gold_size > num_nodes) {
    throw std::invalid_argument("synthetic gold sets (" + std::to_string(num_queries) + " x " +
                                std::to_string(gold_size) + ") do not fit in " +
                                std::to_string(num_nodes) + " nodes");
  }
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t d = spec.dimension;

  // Disjoint gold sets: a partial Fisher-Yates shuffle of the node ids.
  std::vector<NodeId> pool(spec.num_nodes);
  std::iota(pool.begin(), pool.end(), NodeId{0});
  const std::size_t planted = spec.num_queries * spec.gold_size;
  for (std::size_t i = 0; i < planted; ++i) {
    std::swap(pool[i], pool[i + rng.below(spec.num_nodes - i)]);
  }

  std::vector<Query> queries(spec.num_queries);
  std::vector<std::size_t> owner(spec.num_nodes, spec.num_queries);
  for (std::size_t qi = 0; qi < spec.num_queries; ++qi) {
    Query& q = queries[qi];
    q.id = "q" + std::to_string(qi);
    q.text = "synthetic query " + std::to_string(qi);
    for (double x : rng.unit_vector(d)) q.embedding.push_back(static_cast<float>(x));
    std::vector<NodeId> gold(pool.begin() + static_cast<std::ptrdiff_t>(qi * spec.gold_size),
                             pool.begin() + static_cast<std::ptrdiff_t>((qi + 1) * spec.gold_size));
    std::sort(gold.begin(), gold.end());
    for (NodeId v : gold) owner[v] = qi;
    q.gold_nodes = std::move(gold);
  }

  const double noise_scale = spec.sigma / std::sqrt(static_cast<double>(d));
  std::vector<NodeRecord> nodes(spec.num_nodes);
  for (NodeId v = 0; v < spec.num_nodes; ++v) {
    NodeRecord& rec = nodes[v];
    rec.id = static_cast<std::int64_t>(v);
    rec.text = "entity " + std::to_string(v);
    rec.embedding.resize(d);
    if (owner[v] < spec.num_queries) {
      const auto& q = queries[owner[v]].embedding;
      for (std::size_t c = 0; c < d; ++c) {
        const double noise = spec.sigma > 0.0 ? noise_scale * rng.normal() : 0.0;
        rec.embedding[c] = static_cast<float>(q[c] + noise);
      }
    } else {
      const auto u = rng.unit_vector(d);
      std::copy(u.begin(), u.end(), rec.embedding.begin());
    }
  }

  std::vector<EdgeRecord> edges(spec.num_edges);
  for (std::size_t e = 0; e < spec.num_edges; ++e) {
    EdgeRecord& rec = edges[e];
    rec.src = static_cast<std::int64_t>(rng.below(spec.num_nodes));
    rec.dst = static_cast<std::int64_t>(rng.below(spec.num_nodes));
    rec.text = "relation " + std::to_string(e % 97);
    const auto u = rng.unit_vector(d);
    rec.embedding.assign(u.begin(), u.end());
  }

  SyntheticData out;
  out.graph = TextualGraph::from_records(d, true, std::move(nodes), std::move(edges));
  out.queries = std::move(queries);
  return out;
}

std::string_view to_string(Method method) {
  return method == Method::attention ? "attention" : "pcst";
}

Method parse_method(std::string_view name) {
  if (name == "attention") return Method::attention;
  if (name == "pcst") return Method::pcst;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

double gold_recall(std::span<const NodeId> retrieved, std::span<const NodeId> gold) {
  if (gold.empty()) return 1.0;
  std::size_t hit = 0;
  auto it = retrieved.begin();
  for (NodeId g : gold) {
    it = std::lower_bound(it, retrieved.end(), g);
    if (it != retrieved.end() && *it == g) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(gold.size());
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double rank = std::ceil(p / 100.0 * static_cast<double>(values.size()));
  const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, static_cast<double>(values.size())));
  return values[idx - 1];
}

namespace {

QueryRecord run_one(const TextualGraph& graph, const Query& query, Method method,
                    const BenchOptions& options) {
  QueryRecord rec;
  rec.method = method;
  rec.query_id = query.id;
  try {
    Subgraph sub;
    const auto start = std::chrono::steady_clock::now();
    if (method == Method::attention) {
      sub = retrieve_attention(graph, query, options.attention, Execution::serial).subgraph;
    } else {
      sub = retrieve_pcst(graph, query, options.pcst, Execution::serial).subgraph;
    }
    const auto stop = std::chrono::steady_clock::now();
    rec.latency_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    rec.num_nodes = sub.nodes.size();
    rec.num_edges = sub.edges.size();
    if (query.gold_nodes && !query.gold_nodes->empty()) {
      rec.recall = gold_recall(sub.nodes, *query.gold_nodes);
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

MethodSummary summarize(Method method, const std::vector<QueryRecord>& records) {
  MethodSummary s;
  s.method = method;
  std::vector<double> latency;
  double nodes = 0.0;
  double edges = 0.0;
  double recall = 0.0;
  std::size_t with_gold = 0;
  for (const auto& r : records) {
    if (r.method != method) continue;
    ++s.queries;
    if (r.error) {
      ++s.failures;
      continue;
    }
    latency.push_back(r.latency_ms);
    nodes += static_cast<double>(r.num_nodes);
    edges += static_cast<double>(r.num_edges);
    if (r.recall) {
      recall += *r.recall;
      ++with_gold;
    }
  }
  if (!latency.empty()) {
    const double count = static_cast<double>(latency.size());
    s.latency_mean_ms = std::accumulate(latency.begin(), latency.end(), 0.0) / count;
    s.latency_median_ms = percentile(latency, 50.0);
    s.latency_p95_ms = percentile(latency, 95.0);
    s.mean_nodes = nodes / count;
    s.mean_edges = edges / count;
  }
  if (with_gold > 0) s.recall = recall / static_cast<double>(with_gold);
  return s;
}

}  // namespace

BenchReport run_bench(const TextualGraph& graph, const std::vector<Query>& queries,
                      const BenchOptions& options) {
  BenchReport report;
  report.options = options;
  report.graph_nodes = graph.num_nodes();
  report.graph_edges = graph.num_edges();

  const std::size_t per_method = queries.size();
  report.records.resize(options.methods.size() * per_method);
  for (std::size_t m = 0; m < options.methods.size(); ++m) {
    const auto count = static_cast<std::int64_t>(per_method);
    const int jobs = static_cast<int>(std::max<std::size_t>(1, options.jobs));
#pragma omp parallel for schedule(dynamic) num_threads(jobs) if (jobs > 1)
    for (std::int64_t i = 0; i < count; ++i) {
      const auto q = static_cast<std::size_t>(i);
      report.records[m * per_method + q] = run_one(graph, queries[q], options.methods[m], options);
    }
  }
  for (Method m : options.methods) report.methods.push_back(summarize(m, report.records));
  return report;
}

namespace {

detail::json optional_number(const std::optional<double>& v) {
  return v ? detail::json(*v) : detail::json(nullptr);
}

detail::json machine_block() {
  detail::json m;
  m["hardware_threads"] = std::thread::hardware_concurrency();
#ifdef _OPENMP
  m["openmp_max_threads"] = omp_get_max_threads();
#else
  m["openmp_max_threads"] = 1;
#endif
#if defined(__clang__)
  m["compiler"] = "clang " __clang_version__;
#elif defined(__GNUC__)
  m["compiler"] = "gcc " __VERSION__;
#else
  m["compiler"] = "unknown";
#endif
#ifdef NDEBUG
  m["optimized"] = true;
#else
  m["optimized"] = false;
#endif
  return m;
}

std::string csv_field(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

std::string report_to_json(const BenchReport& report, bool include_timing) {
  using detail::json;
  const auto& o = report.options;
  json cfg;
  cfg["attention"] = {{"edge_policy", std::string(to_string(o.attention.edge_policy))},
                      {"k_edges", o.attention.k_edges},
                      {"k_nodes", o.attention.k_nodes},
                      {"threshold_edge", o.attention.threshold_edge},
                      {"threshold_node", o.attention.threshold_node}};
  cfg["pcst"] = {{"edge_cost", o.pcst.edge_cost},
                 {"k_prize", o.pcst.k_prize},
                 {"solver", o.pcst.solver == PcstSolver::exact ? "exact" : "greedy"}};
  json methods = json::object();
  for (const auto& s : report.methods) {
    json m = {{"failures", s.failures},
              {"mean_edges", optional_number(s.mean_edges)},
              {"mean_nodes", optional_number(s.mean_nodes)},
              {"queries", s.queries},
              {"recall", optional_number(s.recall)}};
    if (include_timing) {
      m["latency_mean_ms"] = optional_number(s.latency_mean_ms);
      m["latency_median_ms"] = optional_number(s.latency_median_ms);
      m["latency_p95_ms"] = optional_number(s.latency_p95_ms);
    }
    methods[std::string(to_string(s.method))] = std::move(m);
  }
  json doc = {{"config", cfg},
              {"graph", {{"num_edges", report.graph_edges}, {"num_nodes", report.graph_nodes}}},
              {"methods", methods},
              {"mode", o.jobs > 1 ? "parallel(" + std::to_string(o.jobs) + " jobs)" : "sequential"}};
  if (include_timing) doc["machine"] = machine_block();
  return doc.dump(2) + "\n";
}

std::string report_to_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "method,query,latency_ms,num_nodes,num_edges,recall,error\n";
  for (const auto& r : report.records) {
    out << to_string(r.method) << ',' << csv_field(r.query_id) << ',' << format_number(r.latency_ms)
        << ',' << r.num_nodes << ',' << r.num_edges << ','
        << (r.recall ? format_number(*r.recall) : std::string{}) << ',' << csv_field(r.error.value_or("")) << '\n';
  }
  return out.str();
}

}  // namespace attnret
