#include "recipenet/rulemine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "recipenet/corpus.hpp"

namespace recipenet::rulemine {

namespace {

bool size_allowed(std::size_t size, std::optional<std::size_t> max_size) {
  return !max_size || size <= *max_size;
}

void require_db(const TransactionDB& db, double min_support) {
  if (db.empty()) throw ValidationError("cannot mine an empty transaction database");
  if (!(min_support > 0.0 && min_support <= 1.0)) {
    throw ConfigError("min_support must lie in (0, 1], got " + std::to_string(min_support));
  }
}

// Vertical layout: one bitset of transaction indices per item.
class TidSets {
 public:
  explicit TidSets(const TransactionDB& db) : words_((db.size() + 63) / 64) {
    for (std::size_t t = 0; t < db.size(); ++t) {
      for (auto item : db.transactions()[t]) {
        auto& bits = sets_[item];
        if (bits.empty()) bits.assign(words_, 0);
        bits[t / 64] |= std::uint64_t{1} << (t % 64);
      }
    }
  }

  const std::map<IngredientId, std::vector<std::uint64_t>>& items() const { return sets_; }

  std::size_t count(const ItemSet& items) const {
    std::vector<std::uint64_t> acc(words_, ~std::uint64_t{0});
    for (auto item : items) {
      auto it = sets_.find(item);
      if (it == sets_.end()) return 0;
      for (std::size_t w = 0; w < words_; ++w) acc[w] &= it->second[w];
    }
    std::size_t total = 0;
    for (auto w : acc) total += static_cast<std::size_t>(std::popcount(w));
    return total;
  }

  std::size_t words() const { return words_; }

 private:
  std::size_t words_;
  std::map<IngredientId, std::vector<std::uint64_t>> sets_;
};

struct FpNode {
  IngredientId item;
  std::size_t count = 0;
  std::size_t parent = 0;
  std::vector<std::pair<IngredientId, std::size_t>> children;
};

struct HeaderEntry {
  std::size_t count = 0;
  std::vector<std::size_t> nodes;
};

struct WeightedPath {
  std::vector<IngredientId> items;
  std::size_t weight = 0;
};

class FpTree {
 public:
  FpTree(const std::vector<WeightedPath>& paths, std::size_t min_count) {
    std::map<IngredientId, std::size_t> counts;
    for (const auto& p : paths) {
      for (auto item : p.items) counts[item] += p.weight;
    }
    for (const auto& [item, c] : counts) {
      if (c >= min_count) order_.push_back({item, c});
    }
    std::sort(order_.begin(), order_.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    std::map<IngredientId, std::size_t> rank;
    for (std::size_t r = 0; r < order_.size(); ++r) rank[order_[r].first] = r;

    nodes_.push_back(FpNode{});
    std::vector<IngredientId> kept;
    for (const auto& p : paths) {
      kept.clear();
      for (auto item : p.items) {
        if (rank.count(item) != 0) kept.push_back(item);
      }
      std::sort(kept.begin(), kept.end(), [&](IngredientId a, IngredientId b) { return rank[a] < rank[b]; });
      insert(kept, p.weight);
    }
  }

  /// Items in descending-frequency order with their counts in this tree.
  const std::vector<std::pair<IngredientId, std::size_t>>& order() const { return order_; }

  std::vector<WeightedPath> conditional_base(IngredientId item) const {
    std::vector<WeightedPath> base;
    auto it = header_.find(item);
    if (it == header_.end()) return base;
    for (auto idx : it->second.nodes) {
      WeightedPath path;
      path.weight = nodes_[idx].count;
      for (auto up = nodes_[idx].parent; up != 0; up = nodes_[up].parent) path.items.push_back(nodes_[up].item);
      if (!path.items.empty()) base.push_back(std::move(path));
    }
    return base;
  }

 private:
  void insert(const std::vector<IngredientId>& items, std::size_t weight) {
    std::size_t cur = 0;
    for (auto item : items) {
      std::size_t next = 0;
      for (const auto& [child_item, child] : nodes_[cur].children) {
        if (child_item == item) {
          next = child;
          break;
        }
      }
      if (next == 0) {
        next = nodes_.size();
        FpNode node;
        node.item = item;
        node.parent = cur;
        nodes_.push_back(std::move(node));
        nodes_[cur].children.emplace_back(item, next);
        header_[item].nodes.push_back(next);
      }
      nodes_[next].count += weight;
      header_[item].count += weight;
      cur = next;
    }
  }

  std::vector<FpNode> nodes_;
  std::map<IngredientId, HeaderEntry> header_;
  std::vector<std::pair<IngredientId, std::size_t>> order_;
};

void fp_mine(const FpTree& tree, std::vector<IngredientId>& suffix, std::size_t min_count, std::size_t n,
             std::optional<std::size_t> max_size, FrequentSet& out) {
  const auto& order = tree.order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto [item, count] = *it;
    suffix.push_back(item);
    out.push_back({make_item_set(suffix), count, n});
    if (size_allowed(suffix.size() + 1, max_size)) {
      auto base = tree.conditional_base(item);
      if (!base.empty()) {
        FpTree conditional(base, min_count);
        if (!conditional.order().empty()) fp_mine(conditional, suffix, min_count, n, max_size, out);
      }
    }
    suffix.pop_back();
  }
}

bool by_items(const FrequentItemset& a, const FrequentItemset& b) { return a.items < b.items; }

std::string join_names(const ItemSet& items, const ItemNames& names) {
  std::string out;
  for (auto id : items) {
    if (!out.empty()) out += '|';
    out += names.name(id);
  }
  return out;
}

ItemSet parse_names(std::string_view field, const ItemNames& names) {
  std::vector<IngredientId> ids;
  std::size_t start = 0;
  while (start <= field.size()) {
    auto bar = field.find('|', start);
    if (bar == std::string_view::npos) bar = field.size();
    auto piece = field.substr(start, bar - start);
    if (!piece.empty()) ids.push_back(names.id(piece));
    start = bar + 1;
  }
  return make_item_set(std::move(ids));
}

std::string fixed6(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << v;
  return s.str();
}

void check_rule(const AssociationRule& r, const std::string& where) {
  if (r.antecedent.empty() || r.consequent.empty()) throw ParseError(where + ": empty rule side");
  if (intersects(r.antecedent, r.consequent)) throw ParseError(where + ": antecedent and consequent overlap");
  if (r.n == 0 || r.support_count == 0 || r.antecedent_count < r.support_count || r.antecedent_count > r.n) {
    throw ParseError(where + ": inconsistent rule counts");
  }
}

std::size_t parse_count(const std::string& text, const std::string& where) {
  try {
    std::size_t pos = 0;
    auto v = std::stoull(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError(where + ": expected a non-negative integer, got '" + text + "'");
  }
}

}  // namespace

TransactionDB::TransactionDB(std::vector<ItemSet> transactions) : transactions_(std::move(transactions)) {
  for (std::size_t i = 0; i < transactions_.size(); ++i) {
    transactions_[i] = make_item_set(std::move(transactions_[i]));
    if (transactions_[i].empty()) throw ValidationError("transaction " + std::to_string(i) + " is empty");
  }
}

std::size_t TransactionDB::count(const ItemSet& items) const {
  return static_cast<std::size_t>(std::count_if(transactions_.begin(), transactions_.end(),
                                                [&](const ItemSet& t) { return is_subset(items, t); }));
}

std::string_view to_string(Algorithm algorithm) {
  return algorithm == Algorithm::apriori ? "apriori" : "fp_growth";
}

Algorithm parse_algorithm(std::string_view text) {
  if (text == "apriori") return Algorithm::apriori;
  if (text == "fp_growth" || text == "fp-growth" || text == "fpgrowth") return Algorithm::fp_growth;
  throw ConfigError("unknown mining algorithm '" + std::string(text) + "'");
}

void MiningParams::validate() const {
  if (!(min_support > 0.0 && min_support <= 1.0)) {
    throw ConfigError("min_support must lie in (0, 1], got " + std::to_string(min_support));
  }
  if (!(min_confidence > 0.0 && min_confidence <= 1.0)) {
    throw ConfigError("min_confidence must lie in (0, 1], got " + std::to_string(min_confidence));
  }
  if (max_itemset_size && *max_itemset_size == 0) throw ConfigError("max_itemset_size must be positive");
}

std::size_t min_support_count(double min_support, std::size_t n) {
  const double nd = static_cast<double>(n);
  auto c = static_cast<std::size_t>(std::ceil(min_support * nd));
  while (c > 1 && static_cast<double>(c - 1) / nd >= min_support) --c;
  while (static_cast<double>(c) / nd < min_support) ++c;
  return std::max<std::size_t>(c, 1);
}

FrequentSet mine_frequent_apriori(const TransactionDB& db, double min_support, std::optional<std::size_t> max_size) {
  require_db(db, min_support);
  const std::size_t n = db.size();
  const std::size_t min_count = min_support_count(min_support, n);
  TidSets tids(db);

  FrequentSet out;
  std::vector<ItemSet> level;
  for (const auto& [item, bits] : tids.items()) {
    std::size_t c = 0;
    for (auto w : bits) c += static_cast<std::size_t>(std::popcount(w));
    if (c >= min_count) {
      level.push_back({item});
      out.push_back({{item}, c, n});
    }
  }

  for (std::size_t k = 2; !level.empty() && size_allowed(k, max_size); ++k) {
    std::set<ItemSet> previous(level.begin(), level.end());
    std::vector<ItemSet> next;
    // level is sorted, so itemsets sharing a (k-2)-prefix are contiguous.
    for (std::size_t i = 0; i < level.size(); ++i) {
      for (std::size_t j = i + 1; j < level.size(); ++j) {
        if (!std::equal(level[i].begin(), level[i].end() - 1, level[j].begin())) break;
        ItemSet candidate = level[i];
        candidate.push_back(level[j].back());

        bool pruned = false;
        ItemSet subset;
        for (std::size_t drop = 0; drop + 2 < candidate.size() && !pruned; ++drop) {
          subset.assign(candidate.begin(), candidate.end());
          subset.erase(subset.begin() + static_cast<std::ptrdiff_t>(drop));
          pruned = previous.count(subset) == 0;
        }
        if (pruned) continue;

        std::size_t c = tids.count(candidate);
        if (c >= min_count) {
          out.push_back({candidate, c, n});
          next.push_back(std::move(candidate));
        }
      }
    }
    level = std::move(next);
  }
  std::sort(out.begin(), out.end(), by_items);
  return out;
}

FrequentSet mine_frequent_fpgrowth(const TransactionDB& db, double min_support, std::optional<std::size_t> max_size) {
  require_db(db, min_support);
  const std::size_t n = db.size();
  const std::size_t min_count = min_support_count(min_support, n);

  std::vector<WeightedPath> paths;
  paths.reserve(n);
  for (const auto& t : db.transactions()) paths.push_back({t, 1});
  FpTree tree(paths, min_count);

  FrequentSet out;
  std::vector<IngredientId> suffix;
  if (size_allowed(1, max_size)) fp_mine(tree, suffix, min_count, n, max_size, out);
  std::sort(out.begin(), out.end(), by_items);
  return out;
}

FrequentSet mine_frequent(const TransactionDB& db, const MiningParams& params) {
  params.validate();
  return params.algorithm == Algorithm::apriori
             ? mine_frequent_apriori(db, params.min_support, params.max_itemset_size)
             : mine_frequent_fpgrowth(db, params.min_support, params.max_itemset_size);
}

bool rule_order(const AssociationRule& a, const AssociationRule& b) {
  // Confidence compared exactly: a.s / a.c vs b.s / b.c.
  const auto lhs = static_cast<u128>(a.support_count) * b.antecedent_count;
  const auto rhs = static_cast<u128>(b.support_count) * a.antecedent_count;
  if (lhs != rhs) return lhs > rhs;
  const auto sa = static_cast<u128>(a.support_count) * b.n;
  const auto sb = static_cast<u128>(b.support_count) * a.n;
  if (sa != sb) return sa > sb;
  if (a.antecedent != b.antecedent) return a.antecedent < b.antecedent;
  return a.consequent < b.consequent;
}

std::vector<AssociationRule> generate_rules(const FrequentSet& frequents, double min_confidence) {
  if (!(min_confidence > 0.0 && min_confidence <= 1.0)) {
    throw ConfigError("min_confidence must lie in (0, 1], got " + std::to_string(min_confidence));
  }
  std::map<ItemSet, std::size_t> counts;
  for (const auto& f : frequents) counts.emplace(f.items, f.count);

  std::vector<AssociationRule> rules;
  ItemSet antecedent;
  ItemSet consequent;
  for (const auto& f : frequents) {
    const std::size_t k = f.items.size();
    if (k < 2) continue;
    if (k > 62) throw ValidationError("itemset too large for rule generation");
    const std::uint64_t full = (std::uint64_t{1} << k) - 1;
    for (std::uint64_t mask = 1; mask < full; ++mask) {
      antecedent.clear();
      consequent.clear();
      for (std::size_t b = 0; b < k; ++b) {
        ((mask >> b) & 1U ? antecedent : consequent).push_back(f.items[b]);
      }
      auto it = counts.find(antecedent);
      if (it == counts.end()) {
        throw ValidationError("frequent itemsets are not downward closed: a subset of a size-" +
                              std::to_string(k) + " itemset is missing");
      }
      AssociationRule rule{antecedent, consequent, f.count, it->second, f.n};
      if (rule.confidence() >= min_confidence) rules.push_back(std::move(rule));
    }
  }
  std::sort(rules.begin(), rules.end(), rule_order);
  return rules;
}

std::vector<AssociationRule> mine_rules(const TransactionDB& db, const MiningParams& params) {
  return generate_rules(mine_frequent(db, params), params.min_confidence);
}

ItemNames::ItemNames(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!ids_.emplace(names_[i], IngredientId{static_cast<std::uint32_t>(i)}).second) {
      throw ValidationError("duplicate item name '" + names_[i] + "'");
    }
  }
}

ItemNames::ItemNames(const simcanon::IngredientLexicon& lexicon) : ItemNames(lexicon.canon()) {}

const std::string& ItemNames::name(IngredientId id) const {
  if (id.value >= names_.size()) throw ValidationError("unknown item id " + std::to_string(id.value));
  return names_[id.value];
}

IngredientId ItemNames::id(std::string_view name) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) throw ParseError("unknown item name '" + std::string(name) + "'");
  return it->second;
}

void write_rules_csv(std::ostream& out, std::span<const AssociationRule> rules, const ItemNames& names) {
  out << "antecedent,consequent,support_count,n,support,confidence,antecedent_count\n";
  for (const auto& r : rules) {
    out << corpus::csv_escape(join_names(r.antecedent, names)) << ','
        << corpus::csv_escape(join_names(r.consequent, names)) << ',' << r.support_count << ',' << r.n << ','
        << fixed6(r.support()) << ',' << fixed6(r.confidence()) << ',' << r.antecedent_count << '\n';
  }
}

std::vector<AssociationRule> read_rules_csv(std::istream& in, const ItemNames& names) {
  std::vector<AssociationRule> rules;
  std::vector<std::string> fields;
  std::size_t lines = 0;
  if (!corpus::read_csv_record(in, fields, lines)) return rules;
  const std::vector<std::string> expected{"antecedent", "consequent", "support_count", "n",
                                          "support",    "confidence", "antecedent_count"};
  if (fields != expected) throw ParseError("rules CSV: unexpected header");
  std::size_t record = 0;
  while (corpus::read_csv_record(in, fields, lines)) {
    ++record;
    if (fields.size() == 1 && fields[0].empty()) continue;
    const std::string where = "rules CSV record " + std::to_string(record);
    if (fields.size() != expected.size()) throw ParseError(where + ": wrong field count");
    AssociationRule r;
    r.antecedent = parse_names(fields[0], names);
    r.consequent = parse_names(fields[1], names);
    r.support_count = parse_count(fields[2], where);
    r.n = parse_count(fields[3], where);
    r.antecedent_count = parse_count(fields[6], where);
    check_rule(r, where);
    rules.push_back(std::move(r));
  }
  return rules;
}

nlohmann::json rules_to_json(std::span<const AssociationRule> rules, const ItemNames& names) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rules) {
    std::vector<std::string> ante;
    std::vector<std::string> cons;
    for (auto id : r.antecedent) ante.push_back(names.name(id));
    for (auto id : r.consequent) cons.push_back(names.name(id));
    arr.push_back({{"antecedent", ante},
                   {"consequent", cons},
                   {"support_count", r.support_count},
                   {"antecedent_count", r.antecedent_count},
                   {"n", r.n},
                   {"support", r.support()},
                   {"confidence", r.confidence()}});
  }
  return {{"rules", arr}};
}

std::vector<AssociationRule> rules_from_json(const nlohmann::json& doc, const ItemNames& names) {
  std::vector<AssociationRule> rules;
  try {
    std::size_t index = 0;
    for (const auto& item : doc.at("rules")) {
      AssociationRule r;
      std::vector<IngredientId> ante;
      std::vector<IngredientId> cons;
      for (const auto& a : item.at("antecedent")) ante.push_back(names.id(a.get<std::string>()));
      for (const auto& c : item.at("consequent")) cons.push_back(names.id(c.get<std::string>()));
      r.antecedent = make_item_set(std::move(ante));
      r.consequent = make_item_set(std::move(cons));
      r.support_count = item.at("support_count").get<std::size_t>();
      r.antecedent_count = item.at("antecedent_count").get<std::size_t>();
      r.n = item.at("n").get<std::size_t>();
      check_rule(r, "rules JSON entry " + std::to_string(index++));
      rules.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed rules document: ") + e.what());
  }
  return rules;
}

NamedTransactions read_transactions(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::set<std::string> vocabulary;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<std::string> items;
    std::size_t start = 0;
    while (start <= line.size()) {
      auto bar = line.find('|', start);
      if (bar == std::string::npos) bar = line.size();
      auto piece = line.substr(start, bar - start);
      auto b = piece.find_first_not_of(" \t");
      if (b != std::string::npos) {
        piece = piece.substr(b, piece.find_last_not_of(" \t") - b + 1);
        vocabulary.insert(piece);
        items.push_back(std::move(piece));
      }
      start = bar + 1;
    }
    rows.push_back(std::move(items));
  }

  NamedTransactions out;
  out.names.assign(vocabulary.begin(), vocabulary.end());
  ItemNames lookup(out.names);
  std::vector<ItemSet> transactions;
  for (const auto& row : rows) {
    std::vector<IngredientId> ids;
    for (const auto& name : row) ids.push_back(lookup.id(name));
    transactions.push_back(make_item_set(std::move(ids)));
  }
  out.db = TransactionDB(std::move(transactions));
  return out;
}

NamedTransactions load_transactions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open transactions file '" + path.string() + "'");
  return read_transactions(in);
}

void write_transactions(std::ostream& out, const TransactionDB& db, const ItemNames& names) {
  for (const auto& t : db.transactions()) out << join_names(t, names) << '\n';
}

}  // namespace recipenet::rulemine
