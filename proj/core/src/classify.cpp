#include "recipenet/classify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

namespace recipenet::classify {

namespace {

constexpr double kProbabilityFloor = 1e-12;

void check_version(const nlohmann::json& doc, std::string_view kind) {
  if (!doc.contains("format_version") || doc["format_version"] != kModelFormatVersion) {
    throw VersionError("model format_version mismatch: expected " + std::to_string(kModelFormatVersion));
  }
  if (doc.value("kind", std::string()) != kind) {
    throw ParseError("model document kind is not '" + std::string(kind) + "'");
  }
}

nlohmann::json vocab_json(const Vocabulary& vocab) {
  nlohmann::json ids = nlohmann::json::array();
  for (auto id : vocab.ids()) ids.push_back(id.value);
  return ids;
}

Vocabulary vocab_from_json(const nlohmann::json& doc) {
  std::vector<IngredientId> ids;
  for (const auto& v : doc) ids.push_back(IngredientId{v.get<std::uint32_t>()});
  return Vocabulary(std::move(ids));
}

void check_trainable(const Dataset& data, const std::string& taxonomy) {
  if (data.classes.size() < 2) {
    throw ValidationError("taxonomy '" + taxonomy + "' is degenerate: needs at least two classes" +
                          (data.classes.empty() ? std::string() : ", only '" + data.classes.front() + "' present"));
  }
  std::vector<std::size_t> members(data.classes.size(), 0);
  for (const auto& ex : data.examples) {
    for (auto c : ex.classes) ++members[c];
  }
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c] == 0) {
      throw ValidationError("taxonomy '" + taxonomy + "' class '" + data.classes[c] + "' has no training examples");
    }
  }
}

const corpus::Taxonomy& require_taxonomy(const corpus::Corpus& corpus, const std::string& taxonomy) {
  const auto* t = corpus.find_taxonomy(taxonomy);
  if (t == nullptr) throw ValidationError("unknown taxonomy '" + taxonomy + "'");
  return *t;
}

double sparse_dot(std::span<const double> w, const FeatureVector& x) {
  double s = 0.0;
  for (auto i : x.active) s += w[i];
  return s;
}

Dataset subset(const Dataset& data, const std::vector<std::size_t>& fold_of, std::size_t fold, bool inside) {
  Dataset out;
  out.classes = data.classes;
  for (std::size_t i = 0; i < data.examples.size(); ++i) {
    if ((fold_of[i] == fold) == inside) out.examples.push_back(data.examples[i]);
  }
  return out;
}

std::string fmt(double v, int precision) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

}  // namespace

Vocabulary::Vocabulary(std::vector<IngredientId> ids) : ids_(std::move(ids)) {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], static_cast<std::uint32_t>(i)).second) {
      throw ValidationError("duplicate vocabulary id " + std::to_string(ids_[i].value));
    }
  }
}

Vocabulary Vocabulary::dense(std::size_t size) {
  std::vector<IngredientId> ids(size);
  for (std::size_t i = 0; i < size; ++i) ids[i] = IngredientId{static_cast<std::uint32_t>(i)};
  return Vocabulary(std::move(ids));
}

std::optional<std::uint32_t> Vocabulary::index_of(IngredientId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FeatureVector featurize(const ItemSet& ingredients, const Vocabulary& vocab) {
  FeatureVector fv;
  fv.vocab_size = vocab.size();
  for (auto id : ingredients) {
    if (auto idx = vocab.index_of(id)) fv.active.push_back(*idx);
  }
  std::sort(fv.active.begin(), fv.active.end());
  fv.active.erase(std::unique(fv.active.begin(), fv.active.end()), fv.active.end());
  return fv;
}

Dataset make_dataset(std::span<const corpus::Recipe> recipes, const corpus::Taxonomy& taxonomy,
                     const Vocabulary& vocab) {
  Dataset data;
  data.classes = taxonomy.classes;
  for (const auto& r : recipes) {
    Example ex;
    for (const auto& label : r.labels_for(taxonomy.name)) {
      auto it = std::find(data.classes.begin(), data.classes.end(), label);
      if (it != data.classes.end()) ex.classes.push_back(static_cast<std::size_t>(it - data.classes.begin()));
    }
    if (ex.classes.empty()) continue;
    ex.features = featurize(r.ingredient_ids, vocab);
    data.examples.push_back(std::move(ex));
  }
  return data;
}

nlohmann::json to_json(const SgdHyper& hyper) {
  return {{"learning_rate", hyper.learning_rate}, {"l2", hyper.l2}, {"epochs", hyper.epochs}, {"seed", hyper.seed}};
}

SgdHyper sgd_hyper_from_json(const nlohmann::json& doc, const SgdHyper& defaults) {
  SgdHyper h = defaults;
  h.learning_rate = doc.value("learning_rate", h.learning_rate);
  h.l2 = doc.value("l2", h.l2);
  h.epochs = doc.value("epochs", h.epochs);
  h.seed = doc.value("seed", h.seed);
  if (!(h.learning_rate > 0.0) || !std::isfinite(h.learning_rate)) throw ConfigError("learning_rate must be positive");
  if (!(h.l2 >= 0.0) || !std::isfinite(h.l2)) throw ConfigError("l2 must be non-negative");
  return h;
}

std::size_t ProbabilisticClassifier::argmax(const FeatureVector& x) const {
  auto p = probabilities(x);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LinearModel::LinearModel(std::string taxonomy, std::vector<std::string> classes, Vocabulary vocab,
                         std::vector<std::vector<double>> weights, std::vector<double> biases, SgdHyper hyper)
    : taxonomy_(std::move(taxonomy)),
      classes_(std::move(classes)),
      vocab_(std::move(vocab)),
      weights_(std::move(weights)),
      biases_(std::move(biases)),
      hyper_(hyper) {
  if (weights_.size() != classes_.size() || biases_.size() != classes_.size()) {
    throw ValidationError("linear model needs one weight vector and bias per class");
  }
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    if (weights_[c].size() != vocab_.size()) throw ValidationError("weight vector length differs from vocabulary");
    if (!std::isfinite(biases_[c]) ||
        !std::all_of(weights_[c].begin(), weights_[c].end(), [](double w) { return std::isfinite(w); })) {
      throw ValidationError("linear model for class '" + classes_[c] + "' has non-finite parameters");
    }
  }
}

double LinearModel::score(std::size_t cls, const FeatureVector& x) const {
  return sparse_dot(weights_.at(cls), x) + biases_.at(cls);
}

std::vector<double> LinearModel::probabilities(const FeatureVector& x) const {
  std::vector<double> p(classes_.size());
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    p[c] = std::clamp(sigmoid(score(c, x)), kProbabilityFloor, 1.0 - kProbabilityFloor);
  }
  return p;
}

nlohmann::json LinearModel::to_json() const {
  return {{"format_version", kModelFormatVersion},
          {"kind", "sgd_logistic_ovr"},
          {"taxonomy", taxonomy_},
          {"classes", classes_},
          {"vocab", vocab_json(vocab_)},
          {"weights", weights_},
          {"biases", biases_},
          {"hyper", classify::to_json(hyper_)}};
}

LinearModel LinearModel::from_json(const nlohmann::json& doc) {
  check_version(doc, "sgd_logistic_ovr");
  try {
    return LinearModel(doc.at("taxonomy").get<std::string>(), doc.at("classes").get<std::vector<std::string>>(),
                       vocab_from_json(doc.at("vocab")), doc.at("weights").get<std::vector<std::vector<double>>>(),
                       doc.at("biases").get<std::vector<double>>(), sgd_hyper_from_json(doc.at("hyper")));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed linear model document: ") + e.what());
  }
}

NBModel::NBModel(std::string taxonomy, std::vector<std::string> classes, Vocabulary vocab,
                 std::vector<double> log_prior, std::vector<std::vector<double>> log_likelihood, double alpha)
    : taxonomy_(std::move(taxonomy)),
      classes_(std::move(classes)),
      vocab_(std::move(vocab)),
      log_prior_(std::move(log_prior)),
      log_likelihood_(std::move(log_likelihood)),
      alpha_(alpha) {
  if (log_prior_.size() != classes_.size() || log_likelihood_.size() != classes_.size()) {
    throw ValidationError("naive Bayes model needs one prior and likelihood row per class");
  }
  for (const auto& row : log_likelihood_) {
    if (row.size() != vocab_.size()) throw ValidationError("likelihood row length differs from vocabulary");
  }
}

std::vector<double> NBModel::probabilities(const FeatureVector& x) const {
  std::vector<double> joint(classes_.size());
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    joint[c] = log_prior_[c] + sparse_dot(log_likelihood_[c], x);
  }
  const double top = *std::max_element(joint.begin(), joint.end());
  double total = 0.0;
  for (auto& j : joint) {
    j = std::exp(j - top);
    total += j;
  }
  for (auto& j : joint) j /= total;
  return joint;
}

nlohmann::json NBModel::to_json() const {
  return {{"format_version", kModelFormatVersion},
          {"kind", "multinomial_nb"},
          {"taxonomy", taxonomy_},
          {"classes", classes_},
          {"vocab", vocab_json(vocab_)},
          {"log_prior", log_prior_},
          {"log_likelihood", log_likelihood_},
          {"alpha", alpha_}};
}

NBModel NBModel::from_json(const nlohmann::json& doc) {
  check_version(doc, "multinomial_nb");
  try {
    return NBModel(doc.at("taxonomy").get<std::string>(), doc.at("classes").get<std::vector<std::string>>(),
                   vocab_from_json(doc.at("vocab")), doc.at("log_prior").get<std::vector<double>>(),
                   doc.at("log_likelihood").get<std::vector<std::vector<double>>>(), doc.at("alpha").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed naive Bayes document: ") + e.what());
  }
}

double example_loss(std::span<const double> weights, double bias, const FeatureVector& x, double y, double l2) {
  const double z = sparse_dot(weights, x) + bias;
  // log(1 + e^z) - y z, written to avoid overflow.
  const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  double norm = 0.0;
  for (double w : weights) norm += w * w;
  return softplus - y * z + 0.5 * l2 * norm;
}

Gradient example_gradient(std::span<const double> weights, double bias, const FeatureVector& x, double y, double l2) {
  const double residual = sigmoid(sparse_dot(weights, x) + bias) - y;
  Gradient g;
  g.weights.resize(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) g.weights[i] = l2 * weights[i];
  for (auto i : x.active) g.weights[i] += residual;
  g.bias = residual;
  return g;
}

LinearModel train_sgd(const Dataset& data, const std::string& taxonomy, const Vocabulary& vocab,
                      const SgdHyper& hyper) {
  const std::size_t k = data.classes.size();
  const std::size_t v = vocab.size();
  std::vector<std::vector<double>> weights(k, std::vector<double>(v, 0.0));
  std::vector<double> biases(k, 0.0);

  std::vector<std::size_t> order(data.examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(hyper.seed);
  const double lr = hyper.learning_rate;
  const double decay = 1.0 - lr * hyper.l2;

  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    // Fisher-Yates with raw engine output keeps the order identical across
    // standard library implementations.
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    for (auto idx : order) {
      const auto& ex = data.examples[idx];
      for (std::size_t c = 0; c < k; ++c) {
        auto& w = weights[c];
        const double y = std::find(ex.classes.begin(), ex.classes.end(), c) != ex.classes.end() ? 1.0 : 0.0;
        const double residual = sigmoid(sparse_dot(w, ex.features) + biases[c]) - y;
        if (decay != 1.0) {
          for (auto& wi : w) wi *= decay;
        }
        for (auto i : ex.features.active) w[i] -= lr * residual;
        biases[c] -= lr * residual;
      }
    }
  }
  return LinearModel(taxonomy, data.classes, vocab, std::move(weights), std::move(biases), hyper);
}

LinearModel train_sgd(const corpus::Corpus& corpus, const std::string& taxonomy, const SgdHyper& hyper) {
  const auto& tax = require_taxonomy(corpus, taxonomy);
  auto vocab = Vocabulary::dense(corpus.lexicon().size());
  auto data = make_dataset(corpus.recipes(), tax, vocab);
  check_trainable(data, taxonomy);
  return train_sgd(data, taxonomy, vocab, hyper);
}

NBModel train_nb(const Dataset& data, const std::string& taxonomy, const Vocabulary& vocab, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("naive Bayes alpha must be positive");
  const std::size_t k = data.classes.size();
  const std::size_t v = vocab.size();
  std::vector<double> docs(k, 0.0);
  std::vector<std::vector<double>> counts(k, std::vector<double>(v, 0.0));
  double total_docs = 0.0;
  for (const auto& ex : data.examples) {
    for (auto c : ex.classes) {
      docs[c] += 1.0;
      total_docs += 1.0;
      for (auto i : ex.features.active) counts[c][i] += 1.0;
    }
  }
  std::vector<double> log_prior(k);
  std::vector<std::vector<double>> log_likelihood(k, std::vector<double>(v));
  for (std::size_t c = 0; c < k; ++c) {
    log_prior[c] = std::log(docs[c] / total_docs);
    const double denom = std::accumulate(counts[c].begin(), counts[c].end(), 0.0) + alpha * static_cast<double>(v);
    for (std::size_t i = 0; i < v; ++i) log_likelihood[c][i] = std::log((counts[c][i] + alpha) / denom);
  }
  return NBModel(taxonomy, data.classes, vocab, std::move(log_prior), std::move(log_likelihood), alpha);
}

NBModel train_nb(const corpus::Corpus& corpus, const std::string& taxonomy, double alpha) {
  const auto& tax = require_taxonomy(corpus, taxonomy);
  auto vocab = Vocabulary::dense(corpus.lexicon().size());
  auto data = make_dataset(corpus.recipes(), tax, vocab);
  check_trainable(data, taxonomy);
  return train_nb(data, taxonomy, vocab, alpha);
}

std::vector<std::size_t> assign_classes(std::span<const double> probabilities, double threshold) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < probabilities.size(); ++c) {
    if (probabilities[c] >= threshold) out.push_back(c);
  }
  if (out.empty() && !probabilities.empty()) {
    out.push_back(static_cast<std::size_t>(std::max_element(probabilities.begin(), probabilities.end()) -
                                           probabilities.begin()));
  }
  return out;
}

MultiLabelResult predict_multilabel(const ProbabilisticClassifier& model, const ItemSet& ingredients,
                                    double threshold) {
  MultiLabelResult result;
  result.classes = model.classes();
  result.probabilities = model.probabilities(ingredients);
  for (auto c : assign_classes(result.probabilities, threshold)) result.assigned.push_back(result.classes[c]);
  return result;
}

Evaluation evaluate(const ProbabilisticClassifier& model, const Dataset& data) {
  if (data.examples.empty()) throw ValidationError("evaluation set has no labeled recipes");
  Evaluation eval;
  eval.classes = model.classes();
  const std::size_t k = eval.classes.size();
  eval.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (const auto& ex : data.examples) {
    const auto truth = ex.classes.front();
    const auto predicted = model.argmax(ex.features);
    ++eval.confusion[truth][predicted];
    ++eval.total;
    if (truth == predicted) ++eval.correct;
  }
  eval.accuracy = static_cast<double>(eval.correct) / static_cast<double>(eval.total);
  return eval;
}

Evaluation evaluate(const ProbabilisticClassifier& model, std::span<const corpus::Recipe> held_out) {
  corpus::Taxonomy tax{model.taxonomy(), model.classes()};
  return evaluate(model, make_dataset(held_out, tax, model.vocabulary()));
}

void write_evaluation_csv(std::ostream& out, const Evaluation& eval) {
  out << "accuracy," << fmt(eval.accuracy, 6) << '\n';
  out << "correct," << eval.correct << '\n';
  out << "total," << eval.total << '\n';
  out << "true\\predicted";
  for (const auto& c : eval.classes) out << ',' << corpus::csv_escape(c);
  out << '\n';
  for (std::size_t i = 0; i < eval.classes.size(); ++i) {
    out << corpus::csv_escape(eval.classes[i]);
    for (auto n : eval.confusion[i]) out << ',' << n;
    out << '\n';
  }
}

double majority_baseline(const Dataset& data) {
  if (data.examples.empty()) return 0.0;
  std::vector<std::size_t> counts(data.classes.size(), 0);
  for (const auto& ex : data.examples) ++counts[ex.classes.front()];
  return static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
         static_cast<double>(data.examples.size());
}

std::vector<std::size_t> stratified_folds(const Dataset& data, std::size_t folds) {
  std::vector<std::size_t> dealt(data.classes.size(), 0);
  std::vector<std::size_t> fold_of(data.examples.size());
  for (std::size_t i = 0; i < data.examples.size(); ++i) {
    auto c = data.examples[i].classes.front();
    fold_of[i] = dealt[c]++ % folds;
  }
  return fold_of;
}

GridResult grid_search(const Dataset& data, const std::string& taxonomy, const Vocabulary& vocab,
                       const GridSpec& grid, std::size_t folds) {
  if (folds < 2) throw ConfigError("grid search needs at least 2 folds");
  if (grid.learning_rates.empty() || grid.l2s.empty() || grid.epochs.empty()) {
    throw ConfigError("grid search needs at least one value per hyperparameter");
  }
  check_trainable(data, taxonomy);

  GridResult result;
  std::vector<std::size_t> members(data.classes.size(), 0);
  for (const auto& ex : data.examples) ++members[ex.classes.front()];
  std::size_t smallest = std::numeric_limits<std::size_t>::max();
  std::string smallest_name;
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c] > 0 && members[c] < smallest) {
      smallest = members[c];
      smallest_name = data.classes[c];
    }
  }
  result.folds = folds;
  if (smallest < folds) {
    result.folds = std::max<std::size_t>(2, smallest);
    result.warning = "class '" + smallest_name + "' has " + std::to_string(smallest) + " members; folds reduced from " +
                     std::to_string(folds) + " to " + std::to_string(result.folds);
  }

  const auto fold_of = stratified_folds(data, result.folds);
  for (auto lr : grid.learning_rates) {
    for (auto l2 : grid.l2s) {
      for (auto epochs : grid.epochs) {
        CvRow row;
        row.hyper = SgdHyper{lr, l2, epochs, grid.seed};
        for (std::size_t f = 0; f < result.folds; ++f) {
          auto train = subset(data, fold_of, f, false);
          auto test = subset(data, fold_of, f, true);
          if (test.examples.empty()) continue;
          auto model = train_sgd(train, taxonomy, vocab, row.hyper);
          row.fold_accuracy.push_back(evaluate(model, test).accuracy);
        }
        row.mean_accuracy = std::accumulate(row.fold_accuracy.begin(), row.fold_accuracy.end(), 0.0) /
                            static_cast<double>(row.fold_accuracy.size());
        result.table.push_back(std::move(row));
      }
    }
  }

  const CvRow* best = &result.table.front();
  for (const auto& row : result.table) {
    const auto key = [](const CvRow& r) {
      return std::make_tuple(-r.mean_accuracy, r.hyper.l2, r.hyper.learning_rate, r.hyper.epochs);
    };
    if (key(row) < key(*best)) best = &row;
  }
  result.best = best->hyper;
  return result;
}

GridResult grid_search(const corpus::Corpus& corpus, const std::string& taxonomy, const GridSpec& grid,
                       std::size_t folds) {
  const auto& tax = require_taxonomy(corpus, taxonomy);
  auto vocab = Vocabulary::dense(corpus.lexicon().size());
  return grid_search(make_dataset(corpus.recipes(), tax, vocab), taxonomy, vocab, grid, folds);
}

void write_grid_csv(std::ostream& out, const GridResult& result) {
  out << "learning_rate,l2,epochs,seed,mean_accuracy";
  for (std::size_t f = 0; f < result.folds; ++f) out << ",fold" << f;
  out << '\n';
  for (const auto& row : result.table) {
    out << fmt(row.hyper.learning_rate, 10) << ',' << fmt(row.hyper.l2, 10) << ',' << row.hyper.epochs << ','
        << row.hyper.seed << ',' << fmt(row.mean_accuracy, 6);
    for (auto a : row.fold_accuracy) out << ',' << fmt(a, 6);
    out << '\n';
  }
}

}  // namespace recipenet::classify
