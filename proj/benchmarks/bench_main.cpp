#include <benchmark/benchmark.h>

#include <random>

#include "recipenet/classify.hpp"
#include "recipenet/pipeline.hpp"
#include "recipenet/recommend.hpp"
#include "recipenet/rulemine.hpp"
#include "recipenet/simcanon.hpp"

using namespace recipenet;

namespace {

const std::vector<corpus::RawRecipe>& sample_raw() {
  static const auto raw = corpus::load_corpus(RECIPENET_SAMPLE_DIR "/recipes.jsonl", corpus::Format::jsonl);
  return raw;
}

const corpus::Corpus& sample_corpus() {
  static const auto built = [] {
    pipeline::PipelineConfig cfg;
    return pipeline::build_corpus(sample_raw(), cfg.prep_config(), cfg.metric, cfg.merge_threshold, cfg.taxonomies);
  }();
  return built;
}

rulemine::TransactionDB sample_db() {
  std::vector<ItemSet> txs;
  for (const auto& r : sample_corpus().recipes()) txs.push_back(r.ingredient_ids);
  return rulemine::TransactionDB(std::move(txs));
}

rulemine::TransactionDB random_db(std::size_t n, std::uint32_t items, std::size_t len) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint32_t> pick(0, items - 1);
  std::vector<ItemSet> txs;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<IngredientId> t;
    for (std::size_t k = 0; k < len; ++k) t.push_back(IngredientId{pick(rng)});
    txs.push_back(make_item_set(std::move(t)));
  }
  return rulemine::TransactionDB(std::move(txs));
}

void BM_MineSample(benchmark::State& state) {
  auto db = sample_db();
  auto algo = state.range(0) ? rulemine::Algorithm::fp_growth : rulemine::Algorithm::apriori;
  for (auto _ : state) {
    auto fs = rulemine::mine_frequent(db, {0.02, 0.2, algo, std::nullopt});
    benchmark::DoNotOptimize(fs.data());
  }
  state.SetLabel(state.range(0) ? "fp-growth" : "apriori");
}
BENCHMARK(BM_MineSample)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MineRandom(benchmark::State& state) {
  auto db = random_db(static_cast<std::size_t>(state.range(0)), 200, 10);
  for (auto _ : state) {
    auto fs = rulemine::mine_frequent_fpgrowth(db, 0.01, std::nullopt);
    benchmark::DoNotOptimize(fs.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MineRandom)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Canonicalize(benchmark::State& state) {
  std::vector<std::string> names;
  for (const auto& r : sample_corpus().recipes())
    for (auto id : r.ingredient_ids) names.push_back(sample_corpus().lexicon().name(id));
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  auto metric = static_cast<simcanon::Metric>(state.range(0));
  for (auto _ : state) {
    auto lex = simcanon::canonicalize(names, metric, 0.85);
    benchmark::DoNotOptimize(lex.size());
  }
  state.SetLabel(std::string(simcanon::to_string(metric)));
}
BENCHMARK(BM_Canonicalize)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_BuildCorpus(benchmark::State& state) {
  pipeline::PipelineConfig cfg;
  for (auto _ : state) {
    auto c = pipeline::build_corpus(sample_raw(), cfg.prep_config(), cfg.metric, cfg.merge_threshold, cfg.taxonomies);
    benchmark::DoNotOptimize(c.size());
  }
}
BENCHMARK(BM_BuildCorpus)->Unit(benchmark::kMillisecond);

void BM_TrainSgd(benchmark::State& state) {
  classify::SgdHyper hyper;
  hyper.epochs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto m = classify::train_sgd(sample_corpus(), "cuisines", hyper);
    benchmark::DoNotOptimize(m.biases().data());
  }
}
BENCHMARK(BM_TrainSgd)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_Recommend(benchmark::State& state) {
  auto db = sample_db();
  auto rules = rulemine::mine_rules(db, {0.02, 0.2, rulemine::Algorithm::fp_growth, std::nullopt});
  const auto& lex = sample_corpus().lexicon();
  ItemSet base = make_item_set({*lex.id_of("garlic"), *lex.id_of("basil")});
  for (auto _ : state) {
    auto recs = recommend::recommend(sample_corpus(), rules, {base, {}, 20, 8});
    benchmark::DoNotOptimize(recs.data());
  }
}
BENCHMARK(BM_Recommend)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
