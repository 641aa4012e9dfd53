#include "attnret/pcst.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>

#include "attnret/kernels.hpp"

namespace attnret {

PcstSolver parse_pcst_solver(std::string_view name) {
  if (name == "greedy") return PcstSolver::greedy;
  if (name == "exact") return PcstSolver::exact;
  throw std::invalid_argument("unknown PCST solver '" + std::string(name) + "'");
}

void PcstConfig::validate() const {
  if (k_prize < 1) throw std::invalid_argument("k_prize must be at least 1");
  if (!(edge_cost > 0.0) || !std::isfinite(edge_cost)) {
    throw std::invalid_argument("edge cost must be positive and finite");
  }
}

void PcstInstance::validate(const TextualGraph& graph) const {
  if (prizes.size() != graph.num_nodes() || costs.size() != graph.num_edges()) {
    throw std::invalid_argument("PCST instance does not match the graph size");
  }
  for (double p : prizes) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("prizes must be finite and >= 0");
  }
  for (double c : costs) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("edge costs must be finite and > 0");
  }
}

PcstInstance assign_prizes(const TextualGraph& graph, const Query& query, const PcstConfig& cfg,
                           Execution exec) {
  cfg.validate();
  if (query.embedding.size() != graph.dimension()) {
    throw std::invalid_argument("dimension mismatch: query '" + query.id + "' has " +
                                std::to_string(query.embedding.size()) +
                                " components, graph has " + std::to_string(graph.dimension()));
  }
  const auto scores =
      cosine_scores(query.embedding, {graph.node_features(), graph.dimension()}, exec);

  PcstInstance inst;
  inst.prizes.assign(graph.num_nodes(), 0.0);
  inst.costs.assign(graph.num_edges(), cfg.edge_cost);

  const std::size_t top = std::min(cfg.k_prize, graph.num_nodes());
  std::vector<NodeId> order(graph.num_nodes());
  std::iota(order.begin(), order.end(), NodeId{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                    [&](NodeId a, NodeId b) {
                      return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
                    });
  for (std::size_t rank = 0; rank < top; ++rank) {
    inst.prizes[order[rank]] = static_cast<double>(cfg.k_prize - rank);
  }
  return inst;
}

double pcst_objective(const PcstInstance& inst, const Subgraph& sub) {
  double prize = 0.0;
  for (NodeId v : sub.nodes) prize += inst.prizes.at(v);
  double cost = 0.0;
  for (EdgeIndex e : sub.edges) cost += inst.costs.at(e);
  return prize - cost;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { reset(); }
  void reset() { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

PcstSolution make_solution(const TextualGraph& graph, const PcstInstance& inst,
                           std::vector<NodeId> nodes, std::vector<EdgeIndex> edges) {
  PcstSolution sol;
  sol.subgraph.graph = graph.identity();
  std::sort(nodes.begin(), nodes.end());
  std::sort(edges.begin(), edges.end());
  sol.subgraph.nodes = std::move(nodes);
  sol.subgraph.edges = std::move(edges);
  sol.objective = pcst_objective(inst, sol.subgraph);
  return sol;
}

// Every node subset, each connected by a minimum spanning tree of the edges
// it induces. Ties prefer fewer nodes, then the smaller bit mask.
PcstSolution solve_exact(const TextualGraph& graph, const PcstInstance& inst) {
  const std::size_t n = graph.num_nodes();
  if (n > kExactPcstMaxNodes) {
    throw std::invalid_argument("exact PCST solver supports at most " +
                                std::to_string(kExactPcstMaxNodes) + " nodes, graph has " +
                                std::to_string(n));
  }
  std::vector<EdgeIndex> by_cost;
  for (EdgeIndex e = 0; e < graph.num_edges(); ++e) {
    if (graph.edge(e).src != graph.edge(e).dst) by_cost.push_back(e);
  }
  std::stable_sort(by_cost.begin(), by_cost.end(),
                   [&](EdgeIndex a, EdgeIndex b) { return inst.costs[a] < inst.costs[b]; });

  double best_value = 0.0;
  int best_size = 0;
  std::uint32_t best_mask = 0;
  DisjointSets sets(n);
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
    const int size = std::popcount(mask);
    double prize = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (mask >> v & 1U) prize += inst.prizes[v];
    }
    if (prize < best_value) continue;  // edge costs only lower it
    sets.reset();
    double cost = 0.0;
    int joined = 0;
    for (EdgeIndex e : by_cost) {
      const Edge& edge = graph.edge(e);
      if (!(mask >> edge.src & 1U) || !(mask >> edge.dst & 1U)) continue;
      if (sets.unite(edge.src, edge.dst)) {
        cost += inst.costs[e];
        if (++joined == size - 1) break;
      }
    }
    if (joined != size - 1) continue;  // not connected
    const double value = prize - cost;
    if (value > best_value || (value == best_value && size < best_size)) {
      best_value = value;
      best_size = size;
      best_mask = mask;
    }
  }

  std::vector<NodeId> nodes;
  for (std::size_t v = 0; v < n; ++v) {
    if (best_mask >> v & 1U) nodes.push_back(v);
  }
  std::vector<EdgeIndex> edges;
  sets.reset();
  for (EdgeIndex e : by_cost) {
    const Edge& edge = graph.edge(e);
    if ((best_mask >> edge.src & 1U) && (best_mask >> edge.dst & 1U) &&
        sets.unite(edge.src, edge.dst)) {
      edges.push_back(e);
    }
  }
  return make_solution(graph, inst, std::move(nodes), std::move(edges));
}

// Moat growing over clusters. A cluster's moat grows at unit rate while it
// still has slack (its prize total minus the moat grown so far); an edge
// goes tight when the moats around its endpoints sum to its cost, merging
// the two clusters. Node potentials d(v) live in a weighted union-find:
// d(v) = Σ offsets on the path to the root + the root's own potential.
class MoatGrowth {
 public:
  MoatGrowth(const TextualGraph& graph, const PcstInstance& inst)
      : graph_(graph), inst_(inst), n_(graph.num_nodes()) {
    parent_.resize(n_);
    std::iota(parent_.begin(), parent_.end(), NodeId{0});
    offset_.assign(n_, 0.0);
    potential_.assign(n_, 0.0);
    slack_.assign(n_, 0.0);
    last_.assign(n_, 0.0);
    active_.assign(n_, 0);
    version_.assign(n_, 0);
    members_.resize(n_);
    for (NodeId v = 0; v < n_; ++v) members_[v] = {v};

    incident_start_.assign(n_ + 1, 0);
    for (const Edge& e : graph.edges()) {
      if (e.src == e.dst) continue;
      ++incident_start_[e.src + 1];
      ++incident_start_[e.dst + 1];
    }
    std::partial_sum(incident_start_.begin(), incident_start_.end(), incident_start_.begin());
    incident_.resize(incident_start_.back());
    std::vector<std::size_t> fill(incident_start_.begin(), incident_start_.end() - 1);
    for (EdgeIndex e = 0; e < graph.num_edges(); ++e) {
      const Edge& edge = graph.edge(e);
      if (edge.src == edge.dst) continue;
      incident_[fill[edge.src]++] = e;
      incident_[fill[edge.dst]++] = e;
    }
  }

  std::vector<EdgeIndex> run() {
    for (NodeId v = 0; v < n_; ++v) {
      if (inst_.prizes[v] > kEps) {
        active_[v] = 1;
        slack_[v] = inst_.prizes[v];
        ++active_count_;
        events_.push({slack_[v], kDeactivate, v, version_[v]});
      }
    }
    for (NodeId v = 0; v < n_; ++v) {
      if (active_[v]) push_incident(v);
    }

    std::vector<EdgeIndex> forest;
    while (!events_.empty() && active_count_ > 0) {
      const Event ev = events_.top();
      events_.pop();
      if (ev.kind == kDeactivate) {
        const NodeId r = ev.id;
        if (parent_[r] != r || version_[r] != ev.version || !active_[r]) continue;
        now_ = std::max(now_, ev.time);
        settle(r);
        active_[r] = 0;
        slack_[r] = 0.0;
        ++version_[r];
        --active_count_;
        continue;
      }

      const EdgeIndex e = ev.id;
      const Edge& edge = graph_.edge(e);
      const NodeId ru = find(edge.src);
      const NodeId rv = find(edge.dst);
      if (ru == rv) continue;
      const auto when = tight_time(e);
      if (!when) continue;  // both sides inactive; re-pushed on activation
      if (*when > ev.time + kEps * (1.0 + std::abs(ev.time))) {
        events_.push({*when, kEdge, e, 0});
        continue;
      }
      now_ = std::max(now_, ev.time);
      forest.push_back(e);
      merge(ru, rv);
    }
    return forest;
  }

 private:
  static constexpr double kEps = 1e-12;
  static constexpr int kDeactivate = 0;
  static constexpr int kEdge = 1;

  struct Event {
    double time;
    int kind;
    std::size_t id;
    std::uint64_t version;
    bool operator>(const Event& o) const {
      if (time != o.time) return time > o.time;
      if (kind != o.kind) return kind > o.kind;
      return id > o.id;
    }
  };

  NodeId find(NodeId v) {
    NodeId root = v;
    while (parent_[root] != root) root = parent_[root];
    // Compress while folding offsets so each node points at the root.
    std::vector<NodeId>& path = scratch_;
    path.clear();
    for (NodeId x = v; parent_[x] != x; x = parent_[x]) path.push_back(x);
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      const NodeId x = *it;
      if (parent_[x] != root) {
        offset_[x] += offset_[parent_[x]];
        parent_[x] = root;
      }
    }
    return root;
  }

  double root_potential(NodeId r) const {
    return potential_[r] + (active_[r] ? now_ - last_[r] : 0.0);
  }

  double node_potential(NodeId v) {
    const NodeId r = find(v);
    return (v == r ? 0.0 : offset_[v]) + root_potential(r);
  }

  void settle(NodeId r) {
    if (active_[r]) {
      const double dt = now_ - last_[r];
      potential_[r] += dt;
      slack_[r] -= dt;
    }
    last_[r] = now_;
  }

  std::optional<double> tight_time(EdgeIndex e) {
    const Edge& edge = graph_.edge(e);
    const NodeId ru = find(edge.src);
    const NodeId rv = find(edge.dst);
    const int rate = active_[ru] + active_[rv];
    if (rate == 0) return std::nullopt;
    const double remaining =
        inst_.costs[e] - node_potential(edge.src) - node_potential(edge.dst);
    return now_ + std::max(0.0, remaining) / rate;
  }

  void push_incident(NodeId v) {
    for (std::size_t i = incident_start_[v]; i < incident_start_[v + 1]; ++i) {
      const EdgeIndex e = incident_[i];
      if (auto when = tight_time(e)) events_.push({*when, kEdge, e, 0});
    }
  }

  void merge(NodeId x, NodeId y) {
    settle(x);
    settle(y);
    const bool x_active = active_[x];
    const bool y_active = active_[y];
    const bool x_is_root = members_[x].size() > members_[y].size() ||
                           (members_[x].size() == members_[y].size() && x < y);
    const NodeId a = x_is_root ? x : y;
    const NodeId b = x_is_root ? y : x;
    const bool a_was_active = x_is_root ? x_active : y_active;
    const bool b_was_active = x_is_root ? y_active : x_active;

    // b goes under a; every member keeps its current potential.
    offset_[b] = potential_[b] - potential_[a];
    parent_[b] = a;
    slack_[a] += slack_[b];
    slack_[b] = 0.0;
    active_[b] = 0;
    active_count_ -= static_cast<std::size_t>(a_was_active) + static_cast<std::size_t>(b_was_active);
    active_[a] = slack_[a] > kEps;
    if (!active_[a]) slack_[a] = 0.0;
    active_count_ += static_cast<std::size_t>(active_[a]);
    ++version_[a];
    ++version_[b];

    if (active_[a]) {
      events_.push({now_ + slack_[a], kDeactivate, a, version_[a]});
      // Members that were not growing now are: their edges may go tight
      // earlier than any queued prediction.
      if (!b_was_active) {
        for (NodeId v : members_[b]) push_incident(v);
      }
      if (!a_was_active) {
        for (NodeId v : members_[a]) push_incident(v);
      }
    }
    members_[a].insert(members_[a].end(), members_[b].begin(), members_[b].end());
    members_[b] = {};
  }

  const TextualGraph& graph_;
  const PcstInstance& inst_;
  std::size_t n_;
  std::vector<NodeId> parent_;
  std::vector<double> offset_;
  std::vector<double> potential_;
  std::vector<double> slack_;
  std::vector<double> last_;
  std::vector<char> active_;
  std::vector<std::uint64_t> version_;
  std::vector<std::vector<NodeId>> members_;
  std::vector<std::size_t> incident_start_;
  std::vector<EdgeIndex> incident_;
  std::vector<NodeId> scratch_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::size_t active_count_ = 0;
  double now_ = 0.0;
};

}  // namespace

namespace {

// Best connected subtree of a forest: rooting each tree at its smallest node,
// gain(v) = prize(v) + Σ_children max(0, gain(c) - cost(v, c)); the optimum
// is the subtree hanging from the node with the largest gain.
PcstSolution best_subtree(const TextualGraph& graph, const PcstInstance& inst,
                          const std::vector<EdgeIndex>& forest) {
  const std::size_t n = graph.num_nodes();
  std::vector<std::vector<EdgeIndex>> adj(n);
  for (EdgeIndex e : forest) {
    adj[graph.edge(e).src].push_back(e);
    adj[graph.edge(e).dst].push_back(e);
  }
  auto other = [&](EdgeIndex e, NodeId v) {
    return graph.edge(e).src == v ? graph.edge(e).dst : graph.edge(e).src;
  };

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> up_edge(n, kNone);
  std::vector<char> seen(n, 0);
  std::vector<NodeId> order;
  order.reserve(n);
  for (NodeId root = 0; root < n; ++root) {
    if (seen[root]) continue;
    seen[root] = 1;
    const std::size_t begin = order.size();
    order.push_back(root);
    for (std::size_t i = begin; i < order.size(); ++i) {
      const NodeId v = order[i];
      for (EdgeIndex e : adj[v]) {
        const NodeId w = other(e, v);
        if (seen[w]) continue;
        seen[w] = 1;
        up_edge[w] = e;
        order.push_back(w);
      }
    }
  }

  std::vector<double> gain(inst.prizes);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId v = *it;
    if (up_edge[v] == kNone) continue;
    const NodeId p = other(up_edge[v], v);
    gain[p] += std::max(0.0, gain[v] - inst.costs[up_edge[v]]);
  }

  std::size_t top = kNone;
  double top_gain = 0.0;
  for (NodeId v = 0; v < n; ++v) {
    if (gain[v] > top_gain) {
      top_gain = gain[v];
      top = v;
    }
  }
  std::vector<NodeId> nodes;
  std::vector<EdgeIndex> edges;
  if (top != kNone) {
    nodes.push_back(top);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const NodeId v = nodes[i];
      for (EdgeIndex e : adj[v]) {
        const NodeId w = other(e, v);
        if (up_edge[w] != e) continue;  // only descend
        if (gain[w] - inst.costs[e] > 0.0) {
          nodes.push_back(w);
          edges.push_back(e);
        }
      }
    }
  }
  return make_solution(graph, inst, std::move(nodes), std::move(edges));
}

}  // namespace

PcstSolution solve_pcst(const TextualGraph& graph, const PcstInstance& inst, PcstSolver solver) {
  inst.validate(graph);
  if (solver == PcstSolver::exact) return solve_exact(graph, inst);
  MoatGrowth growth(graph, inst);
  return best_subtree(graph, inst, growth.run());
}

PcstSolution retrieve_pcst(const TextualGraph& graph, const Query& query, const PcstConfig& cfg,
                           Execution exec) {
  return solve_pcst(graph, assign_prizes(graph, query, cfg, exec), cfg.solver);
}

}  // namespace attnret
