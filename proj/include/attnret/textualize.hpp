#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "attnret/graph.hpp"

namespace attnret {

enum class TextStyle {
  triples,  // "src, relation, dst" per edge, then "node: text" per isolated node
  lists,    // "node_id,node_attr" table followed by "src,edge_attr,dst" table
};

TextStyle parse_text_style(std::string_view name);

struct TextualizationStyle {
  TextStyle style = TextStyle::triples;
  std::optional<std::size_t> max_chars;
};

/// Every line ends with '\n'. Edges come in ascending index order, isolated
/// nodes in ascending id order. When `max_chars` is set and exceeded, output
/// stops at a line boundary and ends with "... (N more lines)\n"; the total
/// never exceeds max_chars.
std::string textualize(const TextualGraph& graph, const Subgraph& sub,
                       const TextualizationStyle& style = {});

}  // namespace attnret
