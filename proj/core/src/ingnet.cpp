#include "recipenet/ingnet.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace recipenet::ingnet {

IngredientGraph build_graph(std::span<const ItemSet> recipes, const ItemSet& base,
                            const simcanon::IngredientLexicon& lexicon, std::size_t min_edge_weight) {
  IngredientGraph graph;
  std::vector<IngredientId> all;
  std::map<std::pair<IngredientId, IngredientId>, std::size_t> weights;
  for (const auto& r : recipes) {
    const auto items = make_item_set(r);
    all.insert(all.end(), items.begin(), items.end());
    for (std::size_t i = 0; i < items.size(); ++i) {
      for (std::size_t j = i + 1; j < items.size(); ++j) ++weights[{items[i], items[j]}];
    }
  }
  const auto ids = make_item_set(std::move(all));

  std::map<IngredientId, std::size_t> position;
  for (auto id : ids) {
    position[id] = graph.nodes.size();
    graph.nodes.push_back({id, lexicon.name(id), 0, std::binary_search(base.begin(), base.end(), id)});
  }

  // Component labelling by union-find over the surviving edges.
  std::vector<std::size_t> parent(ids.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  for (const auto& [pair, w] : weights) {
    if (w < min_edge_weight) continue;
    graph.edges.push_back({pair.first, pair.second, w});
    auto pa = position[pair.first];
    auto pb = position[pair.second];
    ++graph.nodes[pa].degree;
    ++graph.nodes[pb].degree;
    auto ra = find(pa);
    auto rb = find(pb);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }

  std::map<std::size_t, std::vector<IngredientId>> components;
  for (std::size_t i = 0; i < ids.size(); ++i) components[find(i)].push_back(ids[i]);
  for (auto& [root, members] : components) graph.clusters.push_back(std::move(members));
  std::sort(graph.clusters.begin(), graph.clusters.end());
  return graph;
}

IngredientGraph build_graph(std::span<const recommend::Recommendation> recommendations, const ItemSet& base,
                            const simcanon::IngredientLexicon& lexicon, std::size_t min_edge_weight) {
  std::vector<ItemSet> recipes;
  recipes.reserve(recommendations.size());
  for (const auto& rec : recommendations) recipes.push_back(rec.recipe->ingredient_ids);
  return build_graph(std::span<const ItemSet>(recipes), base, lexicon, min_edge_weight);
}

nlohmann::json export_graph(const IngredientGraph& graph) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : graph.nodes) {
    nodes.push_back({{"id", n.id.value}, {"label", n.label}, {"degree", n.degree}, {"in_base", n.in_base}});
  }
  nlohmann::json links = nlohmann::json::array();
  for (const auto& e : graph.edges) {
    links.push_back({{"source", e.a.value}, {"target", e.b.value}, {"weight", e.weight}});
  }
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : graph.clusters) {
    nlohmann::json members = nlohmann::json::array();
    for (auto id : c) members.push_back(id.value);
    clusters.push_back(std::move(members));
  }
  return {{"nodes", nodes}, {"links", links}, {"clusters", clusters}};
}

IngredientGraph import_graph(const nlohmann::json& doc) {
  IngredientGraph graph;
  try {
    for (const auto& n : doc.at("nodes")) {
      graph.nodes.push_back({IngredientId{n.at("id").get<std::uint32_t>()}, n.at("label").get<std::string>(),
                             n.at("degree").get<std::size_t>(), n.at("in_base").get<bool>()});
    }
    for (const auto& l : doc.at("links")) {
      IngredientId a{l.at("source").get<std::uint32_t>()};
      IngredientId b{l.at("target").get<std::uint32_t>()};
      if (a == b) throw ParseError("node-link document contains a self-loop");
      if (b < a) std::swap(a, b);
      auto w = l.at("weight").get<std::size_t>();
      if (w == 0) throw ParseError("node-link document contains a zero-weight link");
      graph.edges.push_back({a, b, w});
    }
    for (const auto& c : doc.at("clusters")) {
      std::vector<IngredientId> members;
      for (const auto& id : c) members.push_back(IngredientId{id.get<std::uint32_t>()});
      graph.clusters.push_back(make_item_set(std::move(members)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed node-link document: ") + e.what());
  }
  std::sort(graph.nodes.begin(), graph.nodes.end(), [](const Node& x, const Node& y) { return x.id < y.id; });
  std::sort(graph.edges.begin(), graph.edges.end(),
            [](const Edge& x, const Edge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  std::sort(graph.clusters.begin(), graph.clusters.end());
  return graph;
}

}  // namespace recipenet::ingnet
