#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "attnret/graph.hpp"
#include "attnret/kernels.hpp"

namespace attnret {

enum class PcstSolver { greedy, exact };

PcstSolver parse_pcst_solver(std::string_view name);

struct PcstConfig {
  std::size_t k_prize = 4;
  double edge_cost = 0.5;
  PcstSolver solver = PcstSolver::greedy;

  void validate() const;
};

struct PcstInstance {
  std::vector<double> prizes;  // per node, >= 0
  std::vector<double> costs;   // per edge, > 0

  void validate(const TextualGraph& graph) const;
};

struct PcstSolution {
  Subgraph subgraph;
  double objective = 0.0;
};

/// The exact solver enumerates node subsets; larger graphs are refused.
inline constexpr std::size_t kExactPcstMaxNodes = 16;

/// prize(v) = max(0, k_prize - rank(v)), rank being the 0-based position of
/// v in descending cosine order (ties by smaller index). Every edge costs
/// `edge_cost`.
PcstInstance assign_prizes(const TextualGraph& graph, const Query& query, const PcstConfig& cfg,
                           Execution exec = Execution::parallel);

/// Σ prizes(nodes) - Σ costs(edges).
double pcst_objective(const PcstInstance& inst, const Subgraph& sub);

/// Returns a single tree (or the empty subgraph) maximizing prize minus
/// cost. `greedy` grows Goemans-Williamson style moats and then keeps the
/// best connected subtree of the resulting forest; `exact` enumerates every
/// node subset and connects it with a minimum spanning tree.
PcstSolution solve_pcst(const TextualGraph& graph, const PcstInstance& inst, PcstSolver solver);

PcstSolution retrieve_pcst(const TextualGraph& graph, const Query& query, const PcstConfig& cfg,
                           Execution exec = Execution::parallel);

}  // namespace attnret
