// Acceptance checks: one PASS/FAIL line per primary criterion. Exit status is
// the number of failed criteria.

#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "recipenet/classify.hpp"
#include "recipenet/ingnet.hpp"
#include "recipenet/pipeline.hpp"
#include "recipenet/recommend.hpp"
#include "recipenet/rulemine.hpp"
#include "recipenet/simcanon.hpp"

using namespace recipenet;
namespace fs = std::filesystem;

namespace {

/// Collects the first few problems of one criterion.
struct Check {
  std::size_t failures = 0;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures < 3) detail << (failures ? "; " : "") << what;
    ++failures;
  }
};

int failed = 0;

void report(int n, const std::string& name, const std::function<std::string(Check&)>& body) {
  Check c;
  std::string summary;
  try {
    summary = body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  bool ok = c.failures == 0;
  failed += !ok;
  std::cout << (ok ? "PASS" : "FAIL") << "  [" << n << "] " << name;
  if (!summary.empty()) std::cout << " (" << summary << ")";
  if (!ok) std::cout << " :: " << c.failures << " problem(s): " << c.detail.str();
  std::cout << std::endl;
}

ItemSet ids(std::initializer_list<std::uint32_t> v) {
  std::vector<IngredientId> out;
  for (auto x : v) out.push_back(IngredientId{x});
  return make_item_set(out);
}

std::map<ItemSet, std::size_t> as_map(const rulemine::FrequentSet& fs) {
  std::map<ItemSet, std::size_t> out;
  for (const auto& f : fs) out[f.items] = f.count;
  return out;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(precision);
  s << v;
  return s.str();
}

std::string mining_oracle(Check& c) {
  std::mt19937_64 rng(20240611);
  const int dbs = 250;
  for (int trial = 0; trial < dbs; ++trial) {
    auto txs = oracle::random_db(rng, 10, 50);
    double s = 0.1 * (1 + trial % 9);
    rulemine::TransactionDB db(txs);
    auto want = oracle::brute_force_frequent(txs, rulemine::min_support_count(s, txs.size()));
    auto a = as_map(rulemine::mine_frequent_apriori(db, s));
    auto f = as_map(rulemine::mine_frequent_fpgrowth(db, s));
    c.expect(a == want, "apriori differs from brute force on db " + std::to_string(trial));
    c.expect(f == want, "fp-growth differs from brute force on db " + std::to_string(trial));
  }
  return std::to_string(dbs) + " databases";
}

std::string rule_correctness(Check& c) {
  pipeline::PipelineConfig cfg = fixtures::sample_config(fs::temp_directory_path());
  auto raw = corpus::load_corpus(cfg.corpus_path, corpus::Format::jsonl, cfg.taxonomies);
  auto built = pipeline::build_corpus(raw, cfg.prep_config(), cfg.metric, cfg.merge_threshold, cfg.taxonomies);
  std::vector<ItemSet> txs;
  for (const auto& r : built.recipes()) txs.push_back(r.ingredient_ids);
  rulemine::MiningParams params{0.02, 0.2, rulemine::Algorithm::fp_growth, std::nullopt};
  auto rules = rulemine::mine_rules(rulemine::TransactionDB(txs), params);
  const std::size_t n = txs.size();
  const std::size_t min_count = oracle::min_count_scan(params.min_support, n);
  c.expect(!rules.empty(), "no rules mined");
  for (const auto& r : rules) {
    std::size_t both = 0;
    std::size_t ante = 0;
    for (const auto& t : txs) {
      if (!is_subset(r.antecedent, t)) continue;
      ++ante;
      both += is_subset(r.consequent, t);
    }
    oracle::Rational conf(static_cast<long long>(both), static_cast<long long>(ante));
    c.expect(r.n == n && r.support_count == both && r.antecedent_count == ante, "count mismatch");
    c.expect(both >= min_count, "rule below min support");
    c.expect(conf >= oracle::Rational(1, 5), "rule below min confidence");
    c.expect(!intersects(r.antecedent, r.consequent), "antecedent meets consequent");
  }
  return std::to_string(rules.size()) + " rules over " + std::to_string(n) + " recipes";
}

std::string worked_example(Check& c) {
  // garlic=0 basil=1 onions=2 tomatoes=3
  std::vector<rulemine::AssociationRule> rules{{ids({0}), ids({2}), 2, 3, 10}, {ids({1}), ids({3}), 2, 3, 10}};
  auto base = ids({0, 1});
  auto combos = recommend::expand_combinations(base, recommend::ranked_consequents(rules, base));
  std::set<ItemSet> got(combos.begin(), combos.end());
  std::set<ItemSet> want{ids({0, 1}), ids({0, 1, 2}), ids({0, 1, 3}), ids({0, 1, 2, 3})};
  c.expect(combos.size() == 4 && got == want, "worked example does not give the four combinations");
  c.expect(combos.front() == base && combos.back() == ids({0, 1, 2, 3}), "combination order");
  for (std::uint32_t k = 0; k <= 8; ++k) {
    std::vector<IngredientId> cons;
    for (std::uint32_t i = 0; i < k; ++i) cons.push_back(IngredientId{100 + i});
    auto out = recommend::expand_combinations(base, cons, 8);
    std::set<ItemSet> distinct(out.begin(), out.end());
    c.expect(out.size() == (std::size_t{1} << k) && distinct.size() == out.size(),
             "2^k law fails at k=" + std::to_string(k));
  }
  return "k = 0..8";
}

std::string recommendation_contract(Check& c) {
  std::mt19937_64 rng(77);
  const int cases = 1200;
  std::uniform_int_distribution<std::uint32_t> item(0, 13);
  for (int trial = 0; trial < cases; ++trial) {
    auto corp = fixtures::random_corpus(rng, 14, 50, 7);
    std::vector<ItemSet> txs;
    for (const auto& r : corp.recipes()) txs.push_back(r.ingredient_ids);
    auto rules = rulemine::mine_rules(rulemine::TransactionDB(txs), {0.05, 0.2, rulemine::Algorithm::fp_growth, 3});
    ItemSet base = make_item_set({IngredientId{item(rng)}, IngredientId{item(rng)}});
    if (trial % 2) base = {IngredientId{item(rng)}};
    ItemSet exclude = set_difference(make_item_set({IngredientId{item(rng)}, IngredientId{item(rng)}}), base);
    auto recs = recommend::recommend(corp, rules, {base, exclude, 1000, 8});
    std::set<std::uint32_t> seen;
    for (const auto& r : recs) {
      c.expect(is_subset(base, r.recipe->ingredient_ids), "result misses base");
      c.expect(!intersects(exclude, r.recipe->ingredient_ids), "result contains excluded");
      seen.insert(r.recipe->id.value);
    }
    ItemSet more = set_difference(set_union(exclude, {IngredientId{item(rng)}}), base);
    for (const auto& r : recommend::recommend(corp, rules, {base, more, 1000, 8}))
      c.expect(seen.count(r.recipe->id.value) == 1, "exclusion not monotone");
  }
  return std::to_string(cases) + " cases";
}

std::string similarity_metrics(Check& c) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> words{"chicken", "breast", "thigh", "salt", "olive", "oil", "red", "pepper", "a",
                                       "sauce",   "hot",    "chili", "",     "x"};
  std::uniform_int_distribution<std::size_t> w(0, words.size() - 1), len(0, 3);
  auto text = [&] {
    std::string out;
    for (std::size_t n = len(rng); n > 0; --n) out += (out.empty() ? "" : " ") + words[w(rng)];
    return out;
  };
  const int pairs = 10000;
  for (int i = 0; i < pairs; ++i) {
    auto a = text();
    auto b = text();
    for (auto m : {simcanon::Metric::jaccard_tokens, simcanon::Metric::cosine_tokens, simcanon::Metric::jaro_winkler}) {
      double ab = simcanon::similarity(m, a, b);
      double ba = simcanon::similarity(m, b, a);
      c.expect(std::abs(ab - ba) < 1e-12, "asymmetric " + a + " / " + b);
      c.expect(ab >= 0.0 && ab <= 1.0, "out of range " + a + " / " + b);
      if (!a.empty()) c.expect(simcanon::similarity(m, a, a) == 1.0, "identity fails for " + a);
    }
    c.expect(std::abs(simcanon::jaro_winkler(a, b) - oracle::jaro_winkler(a, b)) < 1e-12, "jaro-winkler vs oracle");
  }
  double martha = simcanon::jaro_winkler("martha", "marhta");
  c.expect(std::abs(martha - 0.9611) <= 1e-4, "martha = " + fmt(martha));
  c.expect(simcanon::cosine("chicken breast", "chicken thighs") == 0.5, "cosine chicken != 0.5");
  std::vector<std::string> chicken{"chicken breast", "chicken thighs"};
  auto lex = simcanon::canonicalize(chicken, simcanon::Metric::cosine_tokens, 0.5);
  c.expect(lex.size() == 1 && lex.name(IngredientId{0}) == "chicken", "chicken example does not merge");
  return std::to_string(pairs) + " pairs, jw(martha, marhta) = " + fmt(martha);
}

std::string classifier_checks(Check& c) {
  using namespace classify;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution on(0.5);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t v = 5;
    std::vector<double> w(v);
    for (auto& x : w) x = g(rng);
    double b = g(rng);
    FeatureVector x{v, {}};
    for (std::uint32_t i = 0; i < v; ++i)
      if (on(rng)) x.active.push_back(i);
    double y = on(rng);
    double l2 = 0.01;
    auto grad = example_gradient(w, b, x, y, l2);
    const double h = 1e-6;
    for (std::size_t i = 0; i <= v; ++i) {
      auto up = w;
      auto down = w;
      double bu = b, bd = b;
      if (i < v) {
        up[i] += h;
        down[i] -= h;
      } else {
        bu += h;
        bd -= h;
      }
      double fd = (example_loss(up, bu, x, y, l2) - example_loss(down, bd, x, y, l2)) / (2 * h);
      double an = i < v ? grad.weights[i] : grad.bias;
      double rel = std::abs(an - fd) / std::max(1.0, std::max(std::abs(an), std::abs(fd)));
      worst = std::max(worst, rel);
    }
  }
  c.expect(worst < 1e-5, "gradient relative error " + std::to_string(worst));

  Dataset toy;
  toy.classes = {"A", "B"};
  auto fv = [](std::vector<std::uint32_t> a) { return FeatureVector{5, std::move(a)}; };
  toy.examples = {{fv({0, 1, 2}), {0}}, {fv({0, 3}), {0}}, {fv({0, 1, 4}), {0}}, {fv({0, 2, 3}), {0}},
                  {fv({1, 2}), {1}},    {fv({3, 4}), {1}}, {fv({1, 4}), {1}},    {fv({2, 3, 4}), {1}}};
  auto model = train_sgd(toy, "toy", Vocabulary::dense(5), {0.5, 0.0, 50, 1});
  c.expect(evaluate(model, toy).accuracy == 1.0, "separable toy set not fit in 50 epochs");

  std::size_t instances = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t k = 2 + trial % 2, v = 1 + trial % 4;
    Dataset d;
    for (std::size_t i = 0; i < k; ++i) d.classes.push_back("c" + std::to_string(i));
    std::uniform_int_distribution<std::size_t> cls(0, k - 1);
    for (std::size_t i = 0; i < k + 4; ++i) {
      FeatureVector x{v, {}};
      for (std::uint32_t f = 0; f < v; ++f)
        if (on(rng)) x.active.push_back(f);
      d.examples.push_back({x, {i < k ? i : cls(rng)}});
    }
    auto nb = train_nb(d, "t", Vocabulary::dense(v), 1.0);
    for (std::uint32_t mask = 0; mask < (1u << v); ++mask) {
      FeatureVector x{v, {}};
      for (std::uint32_t f = 0; f < v; ++f)
        if (mask & (1u << f)) x.active.push_back(f);
      auto exact = oracle::nb_posterior(d, v, 1, x);
      auto got = nb.probabilities(x);
      for (std::size_t i = 0; i < k; ++i)
        c.expect(std::abs(got[i] - static_cast<double>(exact[i])) < 1e-12, "naive Bayes vs exact posterior");
      ++instances;
    }
  }
  std::ostringstream out;
  out << "max gradient error " << std::scientific << std::setprecision(2) << worst << ", " << instances
      << " NB queries";
  return out.str();
}

std::string threshold_semantics(Check& c) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int maps = 20000;
  std::size_t fallbacks = 0;
  for (int i = 0; i < maps; ++i) {
    std::vector<double> p(1 + i % 8);
    for (auto& x : p) x = i % 4 == 0 ? 0.3 * u(rng) : u(rng);
    auto got = classify::assign_classes(p, 0.3);
    std::vector<std::size_t> want;
    for (std::size_t j = 0; j < p.size(); ++j)
      if (p[j] >= 0.3) want.push_back(j);
    if (want.empty()) {
      ++fallbacks;
      want.push_back(static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin()));
    }
    c.expect(got == want, "assignment differs from the threshold rule");
  }
  std::vector<double> example{0.5, 0.35, 0.15};
  c.expect(classify::assign_classes(example, 0.3) == std::vector<std::size_t>{0, 1}, "0.5/0.35/0.15 example");
  return std::to_string(maps) + " maps, " + std::to_string(fallbacks) + " fallbacks";
}

class ConstantModel final : public classify::ProbabilisticClassifier {
 public:
  explicit ConstantModel(std::vector<std::string> classes)
      : classes_(std::move(classes)), vocab_(classify::Vocabulary::dense(1)) {}
  const std::string& taxonomy() const override { return tax_; }
  const std::vector<std::string>& classes() const override { return classes_; }
  const classify::Vocabulary& vocabulary() const override { return vocab_; }
  std::vector<double> probabilities(const classify::FeatureVector&) const override {
    std::vector<double> p(classes_.size(), 0.1);
    p[0] = 0.9;
    return p;
  }
  using ProbabilisticClassifier::probabilities;

 private:
  std::string tax_ = "t";
  std::vector<std::string> classes_;
  classify::Vocabulary vocab_;
};

std::string evaluation_identities(Check& c) {
  for (std::size_t k = 2; k <= 6; ++k) {
    classify::Dataset d;
    for (std::size_t i = 0; i < k; ++i) d.classes.push_back("c" + std::to_string(i));
    for (std::size_t i = 0; i < 10 * k; ++i) d.examples.push_back({{1, {}}, {i % k}});
    auto e = classify::evaluate(ConstantModel(d.classes), d);
    c.expect(e.correct * k == e.total, "constant predictor on " + std::to_string(k) + " classes");
  }
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    auto corp = fixtures::random_corpus(rng, 12, 80, 5);
    auto model = classify::train_sgd(corp, "cuisines", {0.1, 1e-4, 5, static_cast<std::uint64_t>(trial)});
    auto e = classify::evaluate(model, corp.recipes());
    std::vector<std::size_t> truth(e.classes.size(), 0);
    for (const auto& r : corp.recipes()) {
      auto it = std::find(e.classes.begin(), e.classes.end(), r.labels_for("cuisines").front());
      truth[static_cast<std::size_t>(it - e.classes.begin())]++;
    }
    std::size_t trace = 0, total = 0;
    for (std::size_t i = 0; i < e.classes.size(); ++i) {
      std::size_t row = 0;
      for (auto x : e.confusion[i]) row += x;
      c.expect(row == truth[i], "row sum differs from true count");
      trace += e.confusion[i][i];
      total += row;
    }
    c.expect(total == e.total && trace == e.correct, "trace/total bookkeeping");
    c.expect(e.accuracy == static_cast<double>(trace) / static_cast<double>(total), "accuracy != trace/total");
  }
  return "k = 2..6 constant predictors, 20 trained models";
}

/// Share of `test` whose primary label is the most common primary label of `train`.
double train_majority_on_test(const classify::Dataset& train, const classify::Dataset& test) {
  std::vector<std::size_t> counts(train.classes.size(), 0);
  for (const auto& ex : train.examples) counts[ex.classes.front()]++;
  auto majority = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  std::size_t hits = 0;
  for (const auto& ex : test.examples) hits += ex.classes.front() == majority;
  return static_cast<double>(hits) / static_cast<double>(test.examples.size());
}

std::string golden_pipeline(Check& c) {
  fixtures::TempDir tmp("acceptance-golden");
  auto t0 = std::chrono::steady_clock::now();
  auto first = pipeline::run_pipeline(fixtures::sample_config(tmp / "one"));
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto second = pipeline::run_pipeline(fixtures::sample_config(tmp / "two"));
  c.expect(first.artifacts.manifest_hash == second.artifacts.manifest_hash, "manifest hashes differ across runs");
  for (const auto& [rel, sha] : first.artifacts.manifest.at("files").items())
    c.expect(pipeline::sha256_file(tmp / "two" / rel) == sha.get<std::string>(), rel + " differs across runs");
  c.expect(seconds < 60.0, "pipeline took " + fmt(seconds, 1) + " s");

  auto cfg = pipeline::PipelineConfig::load(fixtures::source_dir() / "config" / "train_split.json");
  cfg.output_dir = tmp / "train";
  pipeline::run_pipeline(cfg);
  auto bundle = pipeline::load_artifacts(cfg.output_dir);
  auto train_raw = corpus::load_corpus(fixtures::sample_dir() / "train.jsonl", corpus::Format::jsonl);
  auto test_raw = corpus::load_corpus(fixtures::sample_dir() / "test.jsonl", corpus::Format::jsonl);
  auto train = pipeline::bind_recipes(bundle, train_raw);
  auto test = pipeline::bind_recipes(bundle, test_raw);
  std::ostringstream summary;
  summary << "run " << fmt(seconds, 2) << " s";
  for (const auto& model : bundle.models) {
    const auto* tax = bundle.corpus.find_taxonomy(model.taxonomy());
    auto train_data = classify::make_dataset(train, *tax, model.vocabulary());
    auto test_data = classify::make_dataset(test, *tax, model.vocabulary());
    double acc = classify::evaluate(model, test_data).accuracy;
    double base = train_majority_on_test(train_data, test_data);
    c.expect(acc > base, model.taxonomy() + " accuracy " + fmt(acc) + " <= baseline " + fmt(base));
    summary << "; " << model.taxonomy() << " " << fmt(acc, 3) << " vs " << fmt(base, 3);
  }
  return summary.str();
}

std::string network_oracle(Check& c) {
  std::mt19937_64 rng(100);
  std::uniform_int_distribution<std::uint32_t> item(0, 11);
  const int lists = 100;
  for (int trial = 0; trial < lists; ++trial) {
    auto corp = fixtures::random_corpus(rng, 12, 30, 6);
    std::vector<ItemSet> txs;
    for (const auto& r : corp.recipes()) txs.push_back(r.ingredient_ids);
    auto rules = rulemine::mine_rules(rulemine::TransactionDB(txs), {0.1, 0.3, rulemine::Algorithm::apriori, 3});
    ItemSet base{IngredientId{item(rng)}};
    auto recs = recommend::recommend(corp, rules, {base, {}, 1000, 8});
    std::size_t min_w = 1 + trial % 2;
    auto g = ingnet::build_graph(recs, base, corp.lexicon(), min_w);
    std::vector<ItemSet> sets;
    ItemSet all;
    for (const auto& r : recs) {
      sets.push_back(r.recipe->ingredient_ids);
      all = set_union(all, r.recipe->ingredient_ids);
    }
    std::vector<ingnet::Edge> want;
    std::vector<std::pair<IngredientId, IngredientId>> kept;
    for (const auto& [pair, w] : oracle::pair_counts(sets)) {
      if (w < min_w) continue;
      want.push_back({pair.first, pair.second, w});
      kept.push_back(pair);
    }
    c.expect(g.edges == want, "edge weights differ on list " + std::to_string(trial));
    c.expect(g.clusters == oracle::components(all, kept), "clusters differ on list " + std::to_string(trial));
    c.expect(g.nodes.size() == all.size(), "node set differs on list " + std::to_string(trial));
  }
  return std::to_string(lists) + " lists";
}

}  // namespace

int main() {
  report(1, "mining oracle equivalence", mining_oracle);
  report(2, "rule correctness on the sample corpus", rule_correctness);
  report(3, "combination expansion worked example and 2^k law", worked_example);
  report(4, "recommendation contract", recommendation_contract);
  report(5, "similarity metrics", similarity_metrics);
  report(6, "classifier gradient, separable fit, naive Bayes oracle", classifier_checks);
  report(7, "multi-label threshold semantics", threshold_semantics);
  report(8, "evaluation identities", evaluation_identities);
  report(9, "golden pipeline on the sample corpus", golden_pipeline);
  report(10, "network oracle", network_oracle);
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed;
}
