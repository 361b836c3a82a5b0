#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "recipenet/common.hpp"
#include "recipenet/simcanon.hpp"

/// Frequent itemset mining (Apriori and FP-Growth) and association rules.
namespace recipenet::rulemine {

/// One transaction per recipe. Every transaction is a non-empty ItemSet.
class TransactionDB {
 public:
  TransactionDB() = default;
  /// Normalizes each transaction to an ItemSet; throws ValidationError on an
  /// empty transaction.
  explicit TransactionDB(std::vector<ItemSet> transactions);

  const std::vector<ItemSet>& transactions() const { return transactions_; }
  std::size_t size() const { return transactions_.size(); }
  bool empty() const { return transactions_.empty(); }

  /// Number of transactions containing every item of `items`.
  std::size_t count(const ItemSet& items) const;

 private:
  std::vector<ItemSet> transactions_;
};

/// Support is kept as an exact transaction count; the ratio is derived.
struct FrequentItemset {
  ItemSet items;
  std::size_t count = 0;
  std::size_t n = 0;

  double support() const { return static_cast<double>(count) / static_cast<double>(n); }
  bool operator==(const FrequentItemset&) const = default;
};

/// Sorted by items; equality of two results is plain vector equality.
using FrequentSet = std::vector<FrequentItemset>;

enum class Algorithm { apriori, fp_growth };

std::string_view to_string(Algorithm algorithm);
/// Accepts "apriori", "fp_growth", "fp-growth", "fpgrowth".
Algorithm parse_algorithm(std::string_view text);

inline constexpr double kDefaultMinSupport = 0.02;
inline constexpr double kDefaultMinConfidence = 0.2;
inline constexpr std::size_t kDefaultMaxItemsetSize = 6;

struct MiningParams {
  double min_support = kDefaultMinSupport;
  double min_confidence = kDefaultMinConfidence;
  Algorithm algorithm = Algorithm::apriori;
  /// nullopt mines itemsets of any size.
  std::optional<std::size_t> max_itemset_size = kDefaultMaxItemsetSize;

  /// Throws ConfigError unless 0 < min_support <= 1 and 0 < min_confidence <= 1.
  void validate() const;
};

/// Smallest count c with c / n >= min_support.
std::size_t min_support_count(double min_support, std::size_t n);

/// Level-wise Apriori. Candidates with an infrequent (k-1)-subset are pruned
/// before counting. Throws ValidationError on an empty database.
FrequentSet mine_frequent_apriori(const TransactionDB& db, double min_support,
                                  std::optional<std::size_t> max_size = std::nullopt);

/// FP-tree construction (items ordered by descending count, ties by ascending
/// id) and recursive conditional-tree projection. Same output as Apriori.
FrequentSet mine_frequent_fpgrowth(const TransactionDB& db, double min_support,
                                   std::optional<std::size_t> max_size = std::nullopt);

FrequentSet mine_frequent(const TransactionDB& db, const MiningParams& params);

struct AssociationRule {
  ItemSet antecedent;
  ItemSet consequent;
  std::size_t support_count = 0;     ///< transactions containing antecedent and consequent
  std::size_t antecedent_count = 0;  ///< transactions containing the antecedent
  std::size_t n = 0;

  double support() const { return static_cast<double>(support_count) / static_cast<double>(n); }
  double confidence() const { return static_cast<double>(support_count) / static_cast<double>(antecedent_count); }
  bool operator==(const AssociationRule&) const = default;
};

/// Emits A -> F\A for every frequent F (|F| >= 2) and non-empty proper subset A
/// whose confidence reaches `min_confidence`. Sorted by confidence desc, support
/// desc, antecedent then consequent ascending. Throws ValidationError when
/// `frequents` is not downward closed.
std::vector<AssociationRule> generate_rules(const FrequentSet& frequents, double min_confidence);

std::vector<AssociationRule> mine_rules(const TransactionDB& db, const MiningParams& params);

/// Strict weak order used by generate_rules; exposed for re-sorting imports.
bool rule_order(const AssociationRule& a, const AssociationRule& b);

/// Maps item ids to display names for rule export and back.
class ItemNames {
 public:
  explicit ItemNames(std::vector<std::string> names);
  explicit ItemNames(const simcanon::IngredientLexicon& lexicon);

  const std::string& name(IngredientId id) const;
  IngredientId id(std::string_view name) const;
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::map<std::string, IngredientId, std::less<>> ids_;
};

/// Columns: antecedent, consequent, support_count, n, support, confidence,
/// antecedent_count. Item names are pipe-joined.
void write_rules_csv(std::ostream& out, std::span<const AssociationRule> rules, const ItemNames& names);
std::vector<AssociationRule> read_rules_csv(std::istream& in, const ItemNames& names);

nlohmann::json rules_to_json(std::span<const AssociationRule> rules, const ItemNames& names);
std::vector<AssociationRule> rules_from_json(const nlohmann::json& doc, const ItemNames& names);

/// Plain-text transactions: one per line, item names separated by '|'.
/// Blank lines and lines starting with '#' are skipped.
struct NamedTransactions {
  TransactionDB db;
  std::vector<std::string> names;  ///< id -> name, ids assigned in name order
};
NamedTransactions read_transactions(std::istream& in);
NamedTransactions load_transactions(const std::filesystem::path& path);
void write_transactions(std::ostream& out, const TransactionDB& db, const ItemNames& names);

}  // namespace recipenet::rulemine
