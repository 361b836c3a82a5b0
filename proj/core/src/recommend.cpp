#include "recipenet/recommend.hpp"

#include <algorithm>
#include <map>

namespace recipenet::recommend {

namespace {

struct Best {
  std::size_t support_count = 0;
  std::size_t antecedent_count = 1;
  std::size_t n = 1;
};

Best of(const rulemine::AssociationRule& r) { return {r.support_count, r.antecedent_count, r.n}; }

// Higher confidence first, then higher support; exact integer comparison.
bool better(const Best& a, const Best& b) {
  const auto lhs = static_cast<u128>(a.support_count) * b.antecedent_count;
  const auto rhs = static_cast<u128>(b.support_count) * a.antecedent_count;
  if (lhs != rhs) return lhs > rhs;
  return static_cast<u128>(a.support_count) * b.n > static_cast<u128>(b.support_count) * a.n;
}

void check_ids(const corpus::Corpus& corpus, const ItemSet& ids) {
  for (auto id : ids) {
    if (!corpus.lexicon().contains(id)) throw ValidationError("unknown ingredient id " + std::to_string(id.value));
  }
}

}  // namespace

ItemSet consequents_for(std::span<const rulemine::AssociationRule> rules, const ItemSet& base) {
  std::vector<IngredientId> out;
  for (const auto& r : rules) {
    if (r.antecedent.empty() || !is_subset(r.antecedent, base)) continue;
    out.insert(out.end(), r.consequent.begin(), r.consequent.end());
  }
  return set_difference(make_item_set(std::move(out)), base);
}

std::vector<IngredientId> ranked_consequents(std::span<const rulemine::AssociationRule> rules, const ItemSet& base) {
  std::map<IngredientId, Best> best;
  for (const auto& r : rules) {
    if (r.antecedent.empty() || !is_subset(r.antecedent, base)) continue;
    for (auto item : r.consequent) {
      if (std::binary_search(base.begin(), base.end(), item)) continue;
      auto [it, inserted] = best.try_emplace(item, of(r));
      if (!inserted && better(of(r), it->second)) it->second = of(r);
    }
  }
  std::vector<std::pair<IngredientId, Best>> items(best.begin(), best.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (better(a.second, b.second)) return true;
    if (better(b.second, a.second)) return false;
    return a.first < b.first;
  });
  std::vector<IngredientId> out;
  out.reserve(items.size());
  for (const auto& [id, _] : items) out.push_back(id);
  return out;
}

std::vector<ItemSet> expand_combinations(const ItemSet& base, std::span<const IngredientId> consequents,
                                         std::size_t cap) {
  std::vector<IngredientId> chosen(consequents.begin(),
                                   consequents.begin() + static_cast<std::ptrdiff_t>(std::min(cap, consequents.size())));
  auto pool = make_item_set(std::move(chosen));
  if (intersects(pool, base)) throw ValidationError("consequents overlap the base set");
  if (pool.size() > 20) throw ConfigError("consequent cap too large for combination expansion");

  std::vector<ItemSet> subsets;
  const std::size_t k = pool.size();
  subsets.reserve(std::size_t{1} << k);
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    ItemSet s;
    for (std::size_t b = 0; b < k; ++b) {
      if ((mask >> b) & 1U) s.push_back(pool[b]);
    }
    subsets.push_back(std::move(s));
  }
  std::sort(subsets.begin(), subsets.end(), [](const ItemSet& a, const ItemSet& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });

  std::vector<ItemSet> combos;
  combos.reserve(subsets.size());
  for (const auto& s : subsets) combos.push_back(set_union(base, s));
  return combos;
}

std::vector<Recommendation> recommend(const corpus::Corpus& corpus, std::span<const rulemine::AssociationRule> rules,
                                      const RecommendQuery& query) {
  const auto include = make_item_set(query.include);
  const auto exclude = make_item_set(query.exclude);
  if (include.empty()) throw ValidationError("recommendation query needs at least one ingredient");
  check_ids(corpus, include);
  check_ids(corpus, exclude);
  if (intersects(include, exclude)) throw ValidationError("an ingredient cannot be both included and excluded");

  // The largest combination a recipe contains is base ∪ (pool ∩ recipe), where
  // pool is the capped consequent list used for expansion.
  auto ranked = ranked_consequents(rules, include);
  if (ranked.size() > query.consequent_cap) ranked.resize(query.consequent_cap);
  const auto pool = make_item_set(std::move(ranked));

  std::vector<Recommendation> out;
  for (const auto& recipe : corpus.recipes()) {
    if (!is_subset(include, recipe.ingredient_ids) || intersects(recipe.ingredient_ids, exclude)) continue;
    Recommendation rec;
    rec.recipe = &recipe;
    rec.matched_consequents = set_intersection(pool, recipe.ingredient_ids);
    rec.matched_combination_size = include.size() + rec.matched_consequents.size();
    out.push_back(std::move(rec));
  }
  std::sort(out.begin(), out.end(), [](const Recommendation& a, const Recommendation& b) {
    if (a.matched_combination_size != b.matched_combination_size) {
      return a.matched_combination_size > b.matched_combination_size;
    }
    if (a.recipe->ingredient_ids.size() != b.recipe->ingredient_ids.size()) {
      return a.recipe->ingredient_ids.size() < b.recipe->ingredient_ids.size();
    }
    if (a.recipe->title != b.recipe->title) return a.recipe->title < b.recipe->title;
    return a.recipe->id < b.recipe->id;
  });
  if (out.size() > query.max_results) out.resize(query.max_results);
  return out;
}

}  // namespace recipenet::recommend
