#include "attnret/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json_util.hpp"

namespace attnret {

namespace fs = std::filesystem;
using detail::json;

namespace {

std::ifstream open_input(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("missing file " + path.string());
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

std::string read_file(const fs::path& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<float> record_embedding(const json& obj, std::size_t dimension, const std::string& text,
                                    const std::string& where,
                                    const std::optional<EmbeddingSource>& source) {
  if (obj.contains("embedding") || !source) {
    return detail::require_embedding(obj, "embedding", dimension, where);
  }
  return source->lookup(text);
}

std::string optional_text(const json& obj, const std::string& where) {
  return obj.contains("text") ? detail::require_string(obj, "text", where) : std::string{};
}

std::vector<NodeId> parse_id_array(const json& obj, const char* key, const std::string& where) {
  const json& v = detail::require(obj, key, where);
  if (!v.is_array()) throw DataError(where + ": \"" + key + "\" must be an array");
  std::vector<NodeId> out;
  out.reserve(v.size());
  for (const json& x : v) {
    if (!x.is_number_unsigned()) {
      throw DataError(where + ": \"" + key + "\" must hold non-negative integers");
    }
    out.push_back(x.get<NodeId>());
  }
  if (std::adjacent_find(out.begin(), out.end(), std::greater_equal<>()) != out.end()) {
    throw DataError(where + ": \"" + key + "\" must be strictly ascending");
  }
  return out;
}

}  // namespace

TextualGraph load_graph(const fs::path& dir, const LoadOptions& options) {
  const auto header_path = dir / "graph.json";
  const json header = detail::parse_object(read_file(header_path), "graph.json");
  const std::int64_t dim = detail::require_int(header, "dimension", "graph.json");
  if (dim <= 0) throw DataError("graph.json: dimension must be positive");
  const std::size_t dimension = static_cast<std::size_t>(dim);
  bool directed = true;
  if (header.contains("directed")) {
    if (!header["directed"].is_boolean()) throw DataError("graph.json: \"directed\" must be a bool");
    directed = header["directed"].get<bool>();
  }
  const std::int64_t declared_nodes = detail::require_int(header, "num_nodes", "graph.json");
  const std::int64_t declared_edges = detail::require_int(header, "num_edges", "graph.json");

  std::optional<EmbeddingSource> source;
  if (options.embedder) {
    source.emplace();
    source->config = *options.embedder;
    source->config.dimension = dimension;
    source->config.validate();
    if (fs::exists(dir / "embeddings.jsonl")) {
      source->table = EmbeddingTable::load(dir / "embeddings.jsonl", dimension);
    }
  }

  std::vector<NodeRecord> nodes;
  std::unordered_map<std::int64_t, std::size_t> seen;  // id -> line
  {
    auto in = open_input(dir / "nodes.jsonl");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::is_blank(line)) continue;
      const std::string where = "nodes.jsonl:" + std::to_string(lineno);
      const json obj = detail::parse_object(line, where);
      NodeRecord rec;
      rec.id = detail::require_int(obj, "id", where);
      if (rec.id < 0) throw DataError(where + ": node id must be non-negative");
      rec.text = optional_text(obj, where);
      rec.embedding = record_embedding(obj, dimension, rec.text, where, source);
      if (auto [it, fresh] = seen.emplace(rec.id, lineno); !fresh) {
        throw DataError(where + ": duplicate node id " + std::to_string(rec.id) +
                        " (first seen on line " + std::to_string(it->second) + ")");
      }
      nodes.push_back(std::move(rec));
    }
  }

  std::vector<EdgeRecord> edges;
  {
    auto in = open_input(dir / "edges.jsonl");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::is_blank(line)) continue;
      const std::string where = "edges.jsonl:" + std::to_string(lineno);
      const json obj = detail::parse_object(line, where);
      EdgeRecord rec;
      rec.src = detail::require_int(obj, "src", where);
      rec.dst = detail::require_int(obj, "dst", where);
      for (auto endpoint : {rec.src, rec.dst}) {
        if (!seen.contains(endpoint)) {
          throw DataError(where + ": dangling edge endpoint " + std::to_string(endpoint));
        }
      }
      rec.text = optional_text(obj, where);
      rec.embedding = record_embedding(obj, dimension, rec.text, where, source);
      edges.push_back(std::move(rec));
    }
  }

  if (static_cast<std::int64_t>(nodes.size()) != declared_nodes) {
    throw DataError("graph.json: num_nodes is " + std::to_string(declared_nodes) +
                    " but nodes.jsonl has " + std::to_string(nodes.size()) + " records");
  }
  if (static_cast<std::int64_t>(edges.size()) != declared_edges) {
    throw DataError("graph.json: num_edges is " + std::to_string(declared_edges) +
                    " but edges.jsonl has " + std::to_string(edges.size()) + " records");
  }
  return TextualGraph::from_records(dimension, directed, std::move(nodes), std::move(edges));
}

void save_graph(const TextualGraph& graph, const fs::path& dir) {
  fs::create_directories(dir);
  {
    const auto path = dir / "graph.json";
    auto out = open_output(path);
    json header = {{"dimension", graph.dimension()},
                   {"directed", graph.directed()},
                   {"num_edges", graph.num_edges()},
                   {"num_nodes", graph.num_nodes()}};
    out << header.dump() << '\n';
    finish(out, path);
  }
  {
    const auto path = dir / "nodes.jsonl";
    auto out = open_output(path);
    for (NodeId v = 0; v < graph.num_nodes(); ++v) {
      json rec = {{"embedding", detail::float_array(graph.node_embedding(v))},
                  {"id", graph.original_id(v)},
                  {"text", graph.node_text(v)}};
      out << rec.dump() << '\n';
    }
    finish(out, path);
  }
  {
    const auto path = dir / "edges.jsonl";
    auto out = open_output(path);
    for (EdgeIndex e = 0; e < graph.num_edges(); ++e) {
      const Edge& edge = graph.edge(e);
      json rec = {{"dst", graph.original_id(edge.dst)},
                  {"embedding", detail::float_array(graph.edge_embedding(e))},
                  {"src", graph.original_id(edge.src)},
                  {"text", graph.edge_text(e)}};
      out << rec.dump() << '\n';
    }
    finish(out, path);
  }
}

std::vector<Query> load_queries(const fs::path& path, const TextualGraph& graph,
                                const std::optional<EmbedderConfig>& embedder) {
  auto in = open_input(path);
  const std::string name = path.filename().string();
  std::vector<Query> queries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank(line)) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    const json obj = detail::parse_object(line, where);
    Query q;
    q.id = detail::require_string(obj, "id", where);
    q.text = optional_text(obj, where);
    if (obj.contains("embedding") || !embedder) {
      q.embedding = detail::parse_real_array(detail::require(obj, "embedding", where), "embedding",
                                             graph.dimension(), where);
    } else {
      EmbedderConfig cfg = *embedder;
      cfg.dimension = graph.dimension();
      q.embedding = embed_text(cfg, q.text);
    }
    if (obj.contains("gold_nodes") && !obj["gold_nodes"].is_null()) {
      const json& gold = obj["gold_nodes"];
      if (!gold.is_array()) throw DataError(where + ": \"gold_nodes\" must be an array");
      std::vector<NodeId> dense;
      for (const json& g : gold) {
        if (!g.is_number_integer()) throw DataError(where + ": gold node ids must be integers");
        auto id = graph.find_original(g.get<std::int64_t>());
        if (!id) throw DataError(where + ": gold node " + g.dump() + " is not in the graph");
        dense.push_back(*id);
      }
      std::sort(dense.begin(), dense.end());
      dense.erase(std::unique(dense.begin(), dense.end()), dense.end());
      q.gold_nodes = std::move(dense);
    }
    queries.push_back(std::move(q));
  }
  return queries;
}

void save_queries(const std::vector<Query>& queries, const TextualGraph& graph,
                  const fs::path& path) {
  auto out = open_output(path);
  for (const Query& q : queries) {
    json rec = {{"embedding", detail::to_json_array(q.embedding)}, {"id", q.id}, {"text", q.text}};
    if (q.gold_nodes) {
      json gold = json::array();
      for (NodeId v : *q.gold_nodes) gold.push_back(graph.original_id(v));
      rec["gold_nodes"] = std::move(gold);
    }
    out << rec.dump() << '\n';
  }
  finish(out, path);
}

std::string subgraph_to_json(const Subgraph& sub, std::optional<double> objective) {
  json rec = {{"edges", detail::to_json_array(sub.edges)},
              {"graph", sub.graph},
              {"nodes", detail::to_json_array(sub.nodes)}};
  if (objective) rec["objective"] = *objective;
  return rec.dump();
}

Subgraph subgraph_from_json(const std::string& line) {
  const json obj = detail::parse_object(line, "subgraph");
  Subgraph sub;
  sub.graph = detail::require_string(obj, "graph", "subgraph");
  sub.nodes = parse_id_array(obj, "nodes", "subgraph");
  sub.edges = parse_id_array(obj, "edges", "subgraph");
  return sub;
}

void save_subgraph(const Subgraph& sub, const fs::path& path, std::optional<double> objective) {
  auto out = open_output(path);
  out << subgraph_to_json(sub, objective) << '\n';
  finish(out, path);
}

Subgraph load_subgraph(const fs::path& path) {
  auto subs = load_subgraphs(path);
  if (subs.empty()) throw DataError(path.string() + ": no subgraph record");
  return subs.front();
}

std::vector<Subgraph> load_subgraphs(const fs::path& path) {
  auto in = open_input(path);
  std::vector<Subgraph> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank(line)) continue;
    try {
      out.push_back(subgraph_from_json(line));
    } catch (const DataError& e) {
      throw DataError(path.filename().string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string format_number(double value) { return json(value).dump(); }

}  // namespace attnret
