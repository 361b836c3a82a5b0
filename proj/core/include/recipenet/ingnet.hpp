#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "recipenet/common.hpp"
#include "recipenet/recommend.hpp"
#include "recipenet/simcanon.hpp"

/// Ingredient co-occurrence network over a recommendation result.
namespace recipenet::ingnet {

struct Node {
  IngredientId id;
  std::string label;
  std::size_t degree = 0;
  bool in_base = false;

  bool operator==(const Node&) const = default;
};

/// Undirected edge stored with a < b.
struct Edge {
  IngredientId a;
  IngredientId b;
  std::size_t weight = 0;

  bool operator==(const Edge&) const = default;
};

struct IngredientGraph {
  std::vector<Node> nodes;                  ///< sorted by id
  std::vector<Edge> edges;                  ///< sorted by (a, b)
  std::vector<std::vector<IngredientId>> clusters;  ///< each sorted; ordered by first id

  bool operator==(const IngredientGraph&) const = default;
};

/// Nodes are every ingredient of the given recipes; edge weight is the number
/// of those recipes containing both ends. Edges lighter than `min_edge_weight`
/// are dropped but their endpoints stay as nodes. Clusters are the connected
/// components of what remains.
IngredientGraph build_graph(std::span<const ItemSet> recipes, const ItemSet& base,
                            const simcanon::IngredientLexicon& lexicon, std::size_t min_edge_weight = 1);

IngredientGraph build_graph(std::span<const recommend::Recommendation> recommendations, const ItemSet& base,
                            const simcanon::IngredientLexicon& lexicon, std::size_t min_edge_weight = 1);

/// Node-link document:
/// {"clusters":[[id...]...],"links":[{"source","target","weight"}...],
///  "nodes":[{"degree","id","in_base","label"}...]}
nlohmann::json export_graph(const IngredientGraph& graph);
IngredientGraph import_graph(const nlohmann::json& doc);

}  // namespace recipenet::ingnet
