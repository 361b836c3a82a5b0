#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "recipenet/common.hpp"
#include "recipenet/corpus.hpp"
#include "recipenet/rulemine.hpp"

/// Rule-driven recipe recommendation.
///
/// The user's ingredients form the base. Every rule whose antecedent lies inside
/// the base contributes its consequent items; all subsets of those consequents,
/// each joined with the base, form the candidate combinations. A recipe
/// qualifies when it contains the base (the smallest combination) and none of
/// the excluded ingredients. Recipes that contain a larger combination rank
/// higher.
namespace recipenet::recommend {

inline constexpr std::size_t kDefaultMaxResults = 20;
inline constexpr std::size_t kDefaultConsequentCap = 8;

struct RecommendQuery {
  ItemSet include;
  ItemSet exclude;
  std::size_t max_results = kDefaultMaxResults;
  std::size_t consequent_cap = kDefaultConsequentCap;
};

/// Union of consequents of every rule whose antecedent is a subset of `base`,
/// minus the base itself.
ItemSet consequents_for(std::span<const rulemine::AssociationRule> rules, const ItemSet& base);

/// The same items ordered by the best confidence of any firing rule that
/// produces them (descending, exact), then by the best support, then by id.
std::vector<IngredientId> ranked_consequents(std::span<const rulemine::AssociationRule> rules, const ItemSet& base);

/// base ∪ S for every subset S of the first `cap` consequents (given in
/// priority order). Ordered by |S| ascending, then lexicographically.
/// Throws ValidationError when a consequent is already in the base.
std::vector<ItemSet> expand_combinations(const ItemSet& base, std::span<const IngredientId> consequents,
                                         std::size_t cap = kDefaultConsequentCap);

struct Recommendation {
  const corpus::Recipe* recipe = nullptr;
  std::size_t matched_combination_size = 0;
  ItemSet matched_consequents;
};

/// Ranks by matched combination size desc, ingredient count asc, title, id.
/// Throws ValidationError for ids missing from the corpus lexicon, an empty
/// include set, or include ∩ exclude ≠ ∅.
std::vector<Recommendation> recommend(const corpus::Corpus& corpus, std::span<const rulemine::AssociationRule> rules,
                                      const RecommendQuery& query);

}  // namespace recipenet::recommend
