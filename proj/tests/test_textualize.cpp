#include <doctest.h>

#include <algorithm>
#include <string>

#include "attnret/textualize.hpp"
#include "oracles/fixtures.hpp"

using namespace attnret;

namespace {

TextualGraph people() {
  std::vector<NodeRecord> nodes{{0, "A", {1}}, {1, "B", {1}}, {2, "C", {1}}};
  std::vector<EdgeRecord> edges{{0, 1, "born_in", {1}}, {2, 0, "spouse_of", {1}}, {1, 2, "lives_near", {1}}};
  return TextualGraph::from_records(1, true, nodes, edges);
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("empty subgraph gives empty text in both styles") {
  const auto g = people();
  CHECK(textualize(g, Subgraph{}) == "");
  CHECK(textualize(g, Subgraph{}, {TextStyle::lists, {}}) == "");
}

TEST_CASE("one edge is one triple line") {
  const auto g = people();
  CHECK(textualize(g, Subgraph{"", {0, 1}, {0}}) == "A, born_in, B\n");
}

TEST_CASE("isolated nodes follow the triples") {
  const auto g = people();
  CHECK(textualize(g, Subgraph{"", {0, 1, 2}, {0}}) == "A, born_in, B\nnode: C\n");
  CHECK(textualize(g, Subgraph{"", {0, 1, 2}, {0, 1}}) ==
        "A, born_in, B\nC, spouse_of, A\n");
}

TEST_CASE("lists style") {
  const auto g = people();
  CHECK(textualize(g, Subgraph{"", {0, 1}, {0}}, {TextStyle::lists, {}}) ==
        "node_id,node_attr\n0,A\n1,B\nsrc,edge_attr,dst\n0,born_in,1\n");
  CHECK(parse_text_style("node-edge-lists") == TextStyle::lists);
  CHECK_THROWS_AS(parse_text_style("xml"), std::invalid_argument);
}

TEST_CASE("unknown ids are rejected") {
  const auto g = people();
  CHECK_THROWS_AS(textualize(g, Subgraph{"", {9}, {}}), std::out_of_range);
  CHECK_THROWS_AS(textualize(g, Subgraph{"", {0}, {5}}), std::out_of_range);
}

TEST_CASE("truncation keeps whole lines and reports the rest") {
  const auto g = people();
  const Subgraph sub{"", {0, 1, 2}, {0, 1, 2}};
  const auto full = textualize(g, sub);
  const auto cut = textualize(g, sub, {TextStyle::triples, 40});
  CHECK(cut == "A, born_in, B\n... (2 more lines)\n");
  CHECK(textualize(g, sub, {TextStyle::triples, full.size()}) == full);
  CHECK(textualize(g, sub, {TextStyle::triples, 5}) == "");
  CHECK_THROWS_AS(textualize(g, sub, {TextStyle::triples, 0}), std::invalid_argument);
}

TEST_CASE("properties: determinism, line count, length bound") {
  attnret::Rng rng(15);
  for (int trial = 0; trial < 300; ++trial) {
    const auto g = attnret::testing::random_graph(rng, 12, 20, 1);
    std::vector<NodeId> nodes;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
      if (rng.uniform() < 0.6) nodes.push_back(v);
    const Subgraph sub{g.identity(), nodes, induced_edges(g, nodes)};
    const auto a = textualize(g, sub);
    CHECK(a == textualize(g, sub));

    std::vector<char> covered(g.num_nodes(), 0);
    for (EdgeIndex e : sub.edges) covered[g.edge(e).src] = covered[g.edge(e).dst] = 1;
    std::size_t isolated = 0;
    for (NodeId v : nodes) isolated += !covered[v];
    CHECK(count_lines(a) == sub.edges.size() + isolated);

    const std::size_t limit = 1 + rng.below(80);
    for (auto style : {TextStyle::triples, TextStyle::lists}) {
      const auto t = textualize(g, sub, {style, limit});
      CHECK(t.size() <= limit);
      CHECK((t.empty() || t.back() == '\n'));
    }
  }
}
