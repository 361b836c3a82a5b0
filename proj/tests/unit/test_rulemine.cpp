#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "recipenet/rulemine.hpp"

using namespace recipenet;
using namespace recipenet::rulemine;

namespace {

ItemSet items(std::initializer_list<std::uint32_t> v) {
  std::vector<IngredientId> out;
  for (auto x : v) out.push_back(IngredientId{x});
  return make_item_set(out);
}

// A=0, B=1, C=2
TransactionDB abc_db() { return TransactionDB({items({0, 1, 2}), items({0, 1}), items({0, 2}), items({1, 2})}); }

std::map<ItemSet, std::size_t> as_map(const FrequentSet& fs) {
  std::map<ItemSet, std::size_t> out;
  for (const auto& f : fs) out[f.items] = f.count;
  return out;
}

}  // namespace

TEST(MinSupportCount, MatchesScan) {
  for (std::size_t n : {1u, 2u, 3u, 7u, 10u, 100u, 261u, 1000u}) {
    for (double s : {0.001, 0.02, 0.1, 0.2, 1.0 / 3.0, 0.5, 0.7, 0.9999, 1.0}) {
      EXPECT_EQ(min_support_count(s, n), oracle::min_count_scan(s, n)) << s << " " << n;
    }
  }
}

TEST(MiningParams, Validation) {
  MiningParams p;
  EXPECT_NO_THROW(p.validate());
  p.min_support = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p.min_support = 1.5;
  EXPECT_THROW(p.validate(), ConfigError);
  p.min_support = 0.5;
  p.min_confidence = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p.min_confidence = 1.0;
  EXPECT_NO_THROW(p.validate());
}

TEST(Mining, HandExampleHalfSupport) {
  auto db = abc_db();
  std::map<ItemSet, std::size_t> want{{items({0}), 3},    {items({1}), 3},    {items({2}), 3},
                                      {items({0, 1}), 2}, {items({0, 2}), 2}, {items({1, 2}), 2}};
  EXPECT_EQ(as_map(mine_frequent_apriori(db, 0.5)), want);
  EXPECT_EQ(as_map(mine_frequent_fpgrowth(db, 0.5)), want);
}

TEST(Mining, IdenticalTransactions) {
  TransactionDB db(std::vector<ItemSet>(10, items({0, 1})));
  auto fs = mine_frequent_apriori(db, 1.0);
  ASSERT_EQ(fs.size(), 3u);
  for (const auto& f : fs) EXPECT_EQ(f.count, 10u);
  auto rules = generate_rules(fs, 0.2);
  ASSERT_EQ(rules.size(), 2u);
  for (const auto& r : rules) EXPECT_DOUBLE_EQ(r.confidence(), 1.0);
}

TEST(Mining, DisjointTransactionsGiveNoRules) {
  TransactionDB db({items({0}), items({1}), items({2}), items({3})});
  auto fs = mine_frequent_apriori(db, 0.25);
  EXPECT_EQ(fs.size(), 4u);
  EXPECT_TRUE(generate_rules(fs, 0.01).empty());
}

TEST(Mining, EmptyDatabaseAndEmptyTransaction) {
  EXPECT_THROW(mine_frequent_apriori(TransactionDB{}, 0.5), ValidationError);
  EXPECT_THROW(mine_frequent_fpgrowth(TransactionDB{}, 0.5), ValidationError);
  EXPECT_THROW(TransactionDB({items({0}), ItemSet{}}), ValidationError);
}

TEST(Mining, MaxSizeTruncates) {
  auto db = abc_db();
  for (auto algo : {Algorithm::apriori, Algorithm::fp_growth}) {
    MiningParams p{0.25, 0.2, algo, 1};
    for (const auto& f : mine_frequent(db, p)) EXPECT_EQ(f.items.size(), 1u);
    p.max_itemset_size = std::nullopt;
    EXPECT_EQ(mine_frequent(db, p).size(), 7u);
  }
}

TEST(Mining, BruteForceEquivalenceRandom) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> sup(0.05, 0.6);
  for (int trial = 0; trial < 60; ++trial) {
    auto txs = oracle::random_db(rng, 10, 40);
    TransactionDB db(txs);
    double s = sup(rng);
    auto want = oracle::brute_force_frequent(txs, min_support_count(s, txs.size()));
    auto a = mine_frequent_apriori(db, s);
    auto f = mine_frequent_fpgrowth(db, s);
    EXPECT_EQ(as_map(a), want) << "trial " << trial;
    EXPECT_EQ(a, f) << "trial " << trial;
    for (const auto& fi : a) EXPECT_EQ(fi.n, txs.size());
  }
}

TEST(Rules, ConfidenceTwoThirds) {
  // A in 3 transactions, A and B together in 2.
  TransactionDB db({items({0, 1}), items({0, 1}), items({0}), items({2})});
  auto rules = mine_rules(db, {0.25, 0.5, Algorithm::apriori, std::nullopt});
  auto it = std::find_if(rules.begin(), rules.end(),
                         [](const auto& r) { return r.antecedent == items({0}) && r.consequent == items({1}); });
  ASSERT_NE(it, rules.end());
  EXPECT_EQ(it->support_count, 2u);
  EXPECT_EQ(it->antecedent_count, 3u);
  EXPECT_DOUBLE_EQ(it->confidence(), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(it->support(), 0.5);
}

TEST(Rules, ExactReverificationRandom) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    auto txs = oracle::random_db(rng, 8, 30);
    TransactionDB db(txs);
    MiningParams p{0.1, 0.4, Algorithm::fp_growth, std::nullopt};
    auto rules = mine_rules(db, p);
    std::size_t min_count = min_support_count(p.min_support, db.size());
    for (const auto& r : rules) {
      ASSERT_FALSE(r.antecedent.empty());
      ASSERT_FALSE(r.consequent.empty());
      ASSERT_FALSE(intersects(r.antecedent, r.consequent));
      std::size_t both = 0;
      std::size_t ante = 0;
      for (const auto& t : txs) {
        bool has_a = is_subset(r.antecedent, t);
        ante += has_a;
        both += has_a && is_subset(r.consequent, t);
      }
      EXPECT_EQ(r.support_count, both);
      EXPECT_EQ(r.antecedent_count, ante);
      EXPECT_GE(both, min_count);
      // conf >= c without floating error: both >= c * ante
      EXPECT_GE(static_cast<double>(both), p.min_confidence * static_cast<double>(ante) - 1e-12);
    }
    EXPECT_TRUE(std::is_sorted(rules.begin(), rules.end(), rule_order));
    // Completeness against brute force.
    auto freq = oracle::brute_force_frequent(txs, min_count);
    std::size_t expected = 0;
    for (const auto& [set, count] : freq) {
      if (set.size() < 2) continue;
      std::size_t m = set.size();
      for (std::uint32_t mask = 1; mask + 1 < (1u << m); ++mask) {
        ItemSet a;
        for (std::size_t i = 0; i < m; ++i)
          if (mask & (1u << i)) a.push_back(set[i]);
        if (static_cast<double>(count) / static_cast<double>(freq.at(a)) >= p.min_confidence) ++expected;
      }
    }
    EXPECT_EQ(rules.size(), expected) << "trial " << trial;
  }
}

TEST(Rules, RejectsNonClosedInput) {
  FrequentSet fs{{items({0, 1}), 2, 4}};
  EXPECT_THROW(generate_rules(fs, 0.5), ValidationError);
}

TEST(Algorithm, Parse) {
  EXPECT_EQ(parse_algorithm("apriori"), Algorithm::apriori);
  EXPECT_EQ(parse_algorithm("fp-growth"), Algorithm::fp_growth);
  EXPECT_EQ(parse_algorithm("fpgrowth"), Algorithm::fp_growth);
  EXPECT_EQ(parse_algorithm("fp_growth"), Algorithm::fp_growth);
  EXPECT_THROW(parse_algorithm("eclat"), ConfigError);
}

TEST(Export, CsvAndJsonRoundTrip) {
  std::mt19937_64 rng(3);
  auto txs = oracle::random_db(rng, 6, 25);
  auto rules = mine_rules(TransactionDB(txs), {0.1, 0.3, Algorithm::apriori, std::nullopt});
  ASSERT_FALSE(rules.empty());
  ItemNames names({"a b", "c,d", "e\"f", "g", "h", "i"});
  std::stringstream csv;
  write_rules_csv(csv, rules, names);
  EXPECT_EQ(read_rules_csv(csv, names), rules);
  EXPECT_EQ(rules_from_json(rules_to_json(rules, names), names), rules);
}

TEST(Export, CsvHeaderAndRow) {
  TransactionDB db({items({0, 1}), items({0, 1}), items({0}), items({2})});
  auto rules = mine_rules(db, {0.5, 0.6, Algorithm::apriori, std::nullopt});
  ItemNames names({"A", "B", "C"});
  std::ostringstream out;
  write_rules_csv(out, rules, names);
  EXPECT_EQ(out.str(),
            "antecedent,consequent,support_count,n,support,confidence,antecedent_count\n"
            "B,A,2,4,0.500000,1.000000,2\n"
            "A,B,2,4,0.500000,0.666667,3\n");
}

TEST(Transactions, ParseNamesAndSkipComments) {
  std::istringstream in("# header\nbread|milk\n\nmilk|eggs|bread\n");
  auto nt = read_transactions(in);
  EXPECT_EQ(nt.names, (std::vector<std::string>{"bread", "eggs", "milk"}));
  ASSERT_EQ(nt.db.size(), 2u);
  EXPECT_EQ(nt.db.transactions()[0], items({0, 2}));
  EXPECT_EQ(nt.db.transactions()[1], items({0, 1, 2}));
  std::ostringstream out;
  write_transactions(out, nt.db, ItemNames(nt.names));
  EXPECT_EQ(out.str(), "bread|milk\nbread|eggs|milk\n");
}
