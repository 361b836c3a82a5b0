#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "recipenet/common.hpp"

/// String similarity scores and near-duplicate ingredient merging.
namespace recipenet::simcanon {

enum class Metric { jaccard_tokens, cosine_tokens, jaro_winkler };

std::string_view to_string(Metric metric);
/// Accepts "jaccard", "jaccard_tokens", "cosine", "cosine_tokens", "jaro_winkler".
Metric parse_metric(std::string_view text);

/// Token-set Jaccard index. Two empty token sets score 1.
double jaccard(std::string_view a, std::string_view b);

/// Cosine of word-count vectors; 0 when either side has no tokens.
double cosine(std::string_view a, std::string_view b);

/// Character-level Jaro similarity with the Winkler prefix boost
/// (scaling 0.1, prefix capped at 4). An empty string against a non-empty one
/// scores 0; two empty strings score 1.
double jaro_winkler(std::string_view a, std::string_view b);

/// Plain Jaro similarity (no prefix boost).
double jaro(std::string_view a, std::string_view b);

double similarity(Metric metric, std::string_view a, std::string_view b);

/// Bidirectional map between clean ingredient strings and canonical ids.
///
/// Canonical ids are dense: id k names `canon()[k]`. Every canonical name is
/// also an alias of its own id, and the alias map is a function.
class IngredientLexicon {
 public:
  using AliasMap = std::map<std::string, IngredientId, std::less<>>;

  IngredientLexicon() = default;
  /// Throws ValidationError when the closure or target invariants fail.
  IngredientLexicon(std::vector<std::string> canon, AliasMap alias, Metric metric, double threshold);

  std::size_t size() const { return canon_.size(); }
  bool contains(IngredientId id) const { return id.value < canon_.size(); }
  const std::string& name(IngredientId id) const;
  const std::vector<std::string>& canon() const { return canon_; }
  const AliasMap& aliases() const { return alias_; }
  Metric metric() const { return metric_; }
  double threshold() const { return threshold_; }

  /// Exact alias lookup.
  std::optional<IngredientId> find(std::string_view clean_text) const;

  /// Exact alias lookup, falling back to the best-scoring known name under the
  /// lexicon's metric when that score reaches the threshold. Ties go to the
  /// lexicographically smallest name.
  std::optional<IngredientId> resolve(std::string_view clean_text) const;

  /// Looks up the id of a canonical name.
  std::optional<IngredientId> id_of(std::string_view canonical_name) const;

  nlohmann::json to_json() const;
  static IngredientLexicon from_json(const nlohmann::json& doc);

 private:
  std::vector<std::string> canon_;
  AliasMap alias_;
  Metric metric_ = Metric::cosine_tokens;
  double threshold_ = 0.85;
};

struct WeightedIngredient {
  std::string text;
  std::size_t count = 1;
};

inline constexpr double kDefaultMergeThreshold = 0.85;

/// Clusters ingredients whose pairwise similarity reaches `threshold`
/// (transitive closure via union-find) and names each cluster.
///
/// Cluster name: the tokens shared by every member, in the order they appear in
/// the most frequent member; when nothing is shared, the most frequent member
/// itself (ties broken lexicographically). A shared-token name that is already
/// claimed by another cluster falls back to the most frequent member.
IngredientLexicon canonicalize(std::span<const WeightedIngredient> ingredients, Metric metric,
                               double threshold = kDefaultMergeThreshold);

/// Same, with every ingredient weighted equally.
IngredientLexicon canonicalize(std::span<const std::string> ingredients, Metric metric,
                               double threshold = kDefaultMergeThreshold);

std::vector<std::string> split_tokens(std::string_view text);

}  // namespace recipenet::simcanon
