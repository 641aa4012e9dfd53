// attnret: command-line front end for retrieval, textualization, encoding
// and benchmarking. Exit codes: 0 ok, 1 usage error, 2 data error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "attnret/bench.hpp"
#include "attnret/encoder.hpp"
#include "attnret/io.hpp"
#include "attnret/pcst.hpp"
#include "attnret/retrieval.hpp"
#include "attnret/textualize.hpp"

namespace fs = std::filesystem;
using namespace attnret;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string graph;
  std::string query;
  std::string subgraph;
  std::string out;
  std::string trace;
  std::string csv;
  std::string params;
  std::string save_params;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool no_timing = false;

  RetrievalConfig retrieval;
  std::string edge_policy = "induced";
  std::string method = "attention";
  std::vector<std::string> methods;

  PcstConfig pcst;
  std::string solver = "greedy";

  std::string style = "triples";
  std::size_t max_chars = 0;

  EncoderConfig encoder;
  SyntheticSpec synthetic;
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  out.close();
  if (!out) throw DataError("I/O error writing " + path);
}

TextualGraph load(const Options& o) {
  LoadOptions lo;
  lo.embedder = EmbedderConfig{0, o.seed, 3};
  return load_graph(o.graph, lo);
}

std::vector<Query> queries_for(const Options& o, const TextualGraph& g) {
  return load_queries(o.query, g, EmbedderConfig{g.dimension(), o.seed, 3});
}

std::vector<Subgraph> subgraphs_for(const Options& o, const TextualGraph& g) {
  auto subs = load_subgraphs(o.subgraph);
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i].graph.empty() && subs[i].graph != g.identity()) {
      throw DataError(o.subgraph + ":" + std::to_string(i + 1) + ": subgraph belongs to graph " +
                      subs[i].graph + ", not " + g.identity());
    }
    if (!is_closed(g, subs[i])) {
      throw DataError(o.subgraph + ":" + std::to_string(i + 1) +
                      ": subgraph references unknown ids or an edge without its endpoints");
    }
  }
  return subs;
}

PcstConfig pcst_config(const Options& o) {
  PcstConfig cfg = o.pcst;
  cfg.solver = parse_pcst_solver(o.solver);
  cfg.validate();
  return cfg;
}

void run_retrieve(const Options& o, bool force_pcst) {
  const Method method = force_pcst ? Method::pcst : parse_method(o.method);
  RetrievalConfig rcfg = o.retrieval;
  rcfg.edge_policy = parse_edge_policy(o.edge_policy);
  rcfg.validate();
  const PcstConfig pcfg = pcst_config(o);

  const auto graph = load(o);
  const auto queries = queries_for(o, graph);
  std::string out, trace;
  for (const auto& q : queries) {
    if (method == Method::attention) {
      const auto r = retrieve_attention(graph, q, rcfg);
      out += subgraph_to_json(r.subgraph) + "\n";
      trace += trace_to_json(r.trace, r.subgraph) + "\n";
    } else {
      const auto s = retrieve_pcst(graph, q, pcfg);
      out += subgraph_to_json(s.subgraph, s.objective) + "\n";
    }
  }
  if (!o.trace.empty()) {
    if (method != Method::attention) throw UsageError("--trace is only available for attention retrieval");
    write_output(o.trace, trace);
  }
  write_output(o.out, out);
}

void run_textualize(const Options& o) {
  TextualizationStyle style;
  style.style = parse_text_style(o.style);
  if (o.max_chars > 0) style.max_chars = o.max_chars;
  const auto graph = load(o);
  const auto subs = subgraphs_for(o, graph);
  std::string out;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (i > 0) out += "\n";
    out += textualize(graph, subs[i], style);
  }
  write_output(o.out, out);
}

void run_encode(const Options& o) {
  const auto graph = load(o);
  EncoderParams params;
  if (!o.params.empty()) {
    params = load_params(o.params);
    if (params.config.d_in != graph.dimension()) {
      throw DataError(o.params + ": encoder expects d_in " + std::to_string(params.config.d_in) +
                      ", graph dimension is " + std::to_string(graph.dimension()));
    }
  } else {
    EncoderConfig cfg = o.encoder;
    cfg.d_in = graph.dimension();
    cfg.seed = o.seed;
    params = init_params(cfg);
  }
  if (!o.save_params.empty()) save_params(params, o.save_params);
  std::string out;
  for (const auto& sub : subgraphs_for(o, graph)) {
    out += embedding_to_json(encode_graph(params, graph, sub)) + "\n";
  }
  write_output(o.out, out);
}

void run_bench_command(const Options& o) {
  BenchOptions options;
  options.attention = o.retrieval;
  options.attention.edge_policy = parse_edge_policy(o.edge_policy);
  options.attention.validate();
  options.pcst = pcst_config(o);
  options.jobs = o.jobs;
  if (!o.methods.empty()) {
    options.methods.clear();
    for (const auto& m : o.methods) options.methods.push_back(parse_method(m));
  }

  TextualGraph graph;
  std::vector<Query> queries;
  if (!o.graph.empty()) {
    if (o.query.empty()) throw UsageError("--graph needs --query in bench mode");
    graph = load(o);
    queries = queries_for(o, graph);
  } else {
    SyntheticSpec spec = o.synthetic;
    spec.seed = o.seed;
    auto data = generate_synthetic(spec);
    graph = std::move(data.graph);
    queries = std::move(data.queries);
  }
  const auto report = run_bench(graph, queries, options);
  if (!o.csv.empty()) write_output(o.csv, report_to_csv(report));
  write_output(o.out, report_to_json(report, !o.no_timing));
}

void run_gen(const Options& o) {
  SyntheticSpec spec = o.synthetic;
  spec.seed = o.seed;
  const auto data = generate_synthetic(spec);
  save_graph(data.graph, o.out);
  save_queries(data.queries, data.graph, fs::path(o.out) / "queries.jsonl");
}

void add_retrieval_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--k-nodes", o.retrieval.k_nodes, "Top-k nodes")->capture_default_str();
  cmd->add_option("--k-edges", o.retrieval.k_edges, "Top-k edges")->capture_default_str();
  cmd->add_option("--threshold-node", o.retrieval.threshold_node, "Node score threshold")
      ->capture_default_str();
  cmd->add_option("--threshold-edge", o.retrieval.threshold_edge, "Edge score threshold")
      ->capture_default_str();
  cmd->add_option("--edge-policy", o.edge_policy, "induced|selected")
      ->check(CLI::IsMember({"induced", "selected", "selected-only"}))
      ->capture_default_str();
}

void add_pcst_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--k-prize", o.pcst.k_prize, "Number of prized nodes")->capture_default_str();
  cmd->add_option("--edge-cost", o.pcst.edge_cost, "Cost per edge")->capture_default_str();
  cmd->add_option("--solver", o.solver, "greedy|exact")
      ->check(CLI::IsMember({"greedy", "exact"}))
      ->capture_default_str();
}

void add_synthetic_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--nodes", o.synthetic.num_nodes, "Synthetic node count")->capture_default_str();
  cmd->add_option("--edges", o.synthetic.num_edges, "Synthetic edge count")->capture_default_str();
  cmd->add_option("--dim", o.synthetic.dimension, "Embedding dimension")->capture_default_str();
  cmd->add_option("--gold", o.synthetic.gold_size, "Gold nodes per query")->capture_default_str();
  cmd->add_option("--sigma", o.synthetic.sigma, "Gold noise scale")->capture_default_str();
  cmd->add_option("--queries", o.synthetic.num_queries, "Number of queries")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Query-aware subgraph retrieval over textual graphs", "attnret"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  auto* retrieve = app.add_subcommand("retrieve", "Retrieve one subgraph per query (JSONL)");
  auto* pcst = app.add_subcommand("pcst", "Prize-collecting Steiner tree retrieval (JSONL)");
  auto* text = app.add_subcommand("textualize", "Render subgraphs as prompt text");
  auto* encode = app.add_subcommand("encode", "Graph-level embeddings of subgraphs (JSONL)");
  auto* bench = app.add_subcommand("bench", "Compare attention retrieval with PCST");
  auto* gen = app.add_subcommand("gen", "Write a synthetic graph and queries");

  for (auto* cmd : {retrieve, pcst, text, encode, bench, gen}) {
    cmd->add_option("--seed", o.seed, "Seed for the embedder, encoder init and generator")
        ->capture_default_str();
  }
  for (auto* cmd : {retrieve, pcst}) {
    cmd->add_option("--graph", o.graph, "Graph directory")->required();
    cmd->add_option("--query", o.query, "Query JSONL")->required();
    cmd->add_option("--out", o.out, "Output path (default stdout)");
    add_pcst_flags(cmd, o);
  }
  add_retrieval_flags(retrieve, o);
  retrieve->add_option("--method", o.method, "attention|pcst")
      ->check(CLI::IsMember({"attention", "pcst"}))
      ->capture_default_str();
  retrieve->add_option("--trace", o.trace, "Selection trace JSONL");

  for (auto* cmd : {text, encode}) {
    cmd->add_option("--graph", o.graph, "Graph directory")->required();
    cmd->add_option("--subgraph", o.subgraph, "Subgraph JSON or JSONL")->required();
    cmd->add_option("--out", o.out, "Output path (default stdout)");
  }
  text->add_option("--style", o.style, "triples|lists")
      ->check(CLI::IsMember({"triples", "lists", "node-edge-lists"}))
      ->capture_default_str();
  text->add_option("--max-chars", o.max_chars, "Truncate at a line boundary")
      ->check(CLI::PositiveNumber);

  encode->add_option("--params", o.params, "Load encoder parameters");
  encode->add_option("--save-params", o.save_params, "Write the parameters used");
  encode->add_option("--hidden", o.encoder.d_hidden, "Layer width")->capture_default_str();
  encode->add_option("--layers", o.encoder.num_layers, "Transformer layers")->capture_default_str();
  encode->add_option("--heads", o.encoder.num_heads, "Attention heads")->capture_default_str();
  encode->add_option("--d-g", o.encoder.d_g, "Pooled dimension")->capture_default_str();
  encode->add_option("--d-llm", o.encoder.d_llm, "Projection dimension")->capture_default_str();
  encode->add_option("--expansion", o.encoder.expansion, "Projection widening")->capture_default_str();

  bench->add_option("--graph", o.graph, "Graph directory (default: synthetic)");
  bench->add_option("--query", o.query, "Query JSONL for --graph");
  bench->add_option("--method", o.methods, "attention|pcst, repeatable (default both)")
      ->check(CLI::IsMember({"attention", "pcst"}));
  bench->add_option("--jobs", o.jobs, "Concurrent queries")->check(CLI::PositiveNumber);
  bench->add_option("--out", o.out, "report.json path (default stdout)");
  bench->add_option("--csv", o.csv, "Per-query CSV path");
  bench->add_flag("--no-timing", o.no_timing, "Omit latency and machine fields");
  add_retrieval_flags(bench, o);
  add_pcst_flags(bench, o);
  add_synthetic_flags(bench, o);

  gen->add_option("--out", o.out, "Output directory")->required();
  add_synthetic_flags(gen, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }

  try {
    if (*retrieve) run_retrieve(o, false);
    if (*pcst) run_retrieve(o, true);
    if (*text) run_textualize(o);
    if (*encode) run_encode(o);
    if (*bench) run_bench_command(o);
    if (*gen) run_gen(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
