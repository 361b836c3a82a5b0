#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "recipenet/common.hpp"
#include "recipenet/corpus.hpp"

/// Per-taxonomy multi-label classifiers over binary bag-of-ingredient features.
///
/// Two models ship: a one-vs-rest logistic model trained by plain SGD (the
/// serving model) and multinomial naive Bayes (closed-form baseline). Both sit
/// behind ProbabilisticClassifier, which is what evaluation and the service
/// consume; other model families can be added the same way.
namespace recipenet::classify {

inline constexpr double kAssignThreshold = 0.3;
inline constexpr int kModelFormatVersion = 1;

/// Ordered ingredient vocabulary; position = feature index.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<IngredientId> ids);
  /// Every id of a lexicon, in id order.
  static Vocabulary dense(std::size_t size);

  std::size_t size() const { return ids_.size(); }
  const std::vector<IngredientId>& ids() const { return ids_; }
  std::optional<std::uint32_t> index_of(IngredientId id) const;

 private:
  std::vector<IngredientId> ids_;
  std::unordered_map<IngredientId, std::uint32_t> index_;
};

struct FeatureVector {
  std::size_t vocab_size = 0;
  std::vector<std::uint32_t> active;  ///< sorted, distinct, < vocab_size

  bool operator==(const FeatureVector&) const = default;
};

/// Binary indicators; ingredients outside the vocabulary are ignored.
FeatureVector featurize(const ItemSet& ingredients, const Vocabulary& vocab);

struct Example {
  FeatureVector features;
  std::vector<std::size_t> classes;  ///< class indices; front() is the primary label
};

struct Dataset {
  std::vector<std::string> classes;
  std::vector<Example> examples;
};

/// One example per recipe that carries at least one known class of `taxonomy`.
Dataset make_dataset(std::span<const corpus::Recipe> recipes, const corpus::Taxonomy& taxonomy,
                     const Vocabulary& vocab);

struct SgdHyper {
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::size_t epochs = 30;
  std::uint64_t seed = 42;

  bool operator==(const SgdHyper&) const = default;
};

nlohmann::json to_json(const SgdHyper& hyper);
SgdHyper sgd_hyper_from_json(const nlohmann::json& doc, const SgdHyper& defaults = {});

class ProbabilisticClassifier {
 public:
  virtual ~ProbabilisticClassifier() = default;

  virtual const std::string& taxonomy() const = 0;
  virtual const std::vector<std::string>& classes() const = 0;
  virtual const Vocabulary& vocabulary() const = 0;
  /// One probability per class, in class order.
  virtual std::vector<double> probabilities(const FeatureVector& x) const = 0;

  std::vector<double> probabilities(const ItemSet& ingredients) const {
    return probabilities(featurize(ingredients, vocabulary()));
  }
  /// Index of the most probable class; ties go to the lower index.
  std::size_t argmax(const FeatureVector& x) const;
};

/// One-vs-rest logistic model. Probabilities are independent per-class
/// sigmoids and do not sum to one.
class LinearModel final : public ProbabilisticClassifier {
 public:
  LinearModel(std::string taxonomy, std::vector<std::string> classes, Vocabulary vocab,
              std::vector<std::vector<double>> weights, std::vector<double> biases, SgdHyper hyper);

  const std::string& taxonomy() const override { return taxonomy_; }
  const std::vector<std::string>& classes() const override { return classes_; }
  const Vocabulary& vocabulary() const override { return vocab_; }
  std::vector<double> probabilities(const FeatureVector& x) const override;
  using ProbabilisticClassifier::probabilities;

  double score(std::size_t cls, const FeatureVector& x) const;
  const std::vector<std::vector<double>>& weights() const { return weights_; }
  const std::vector<double>& biases() const { return biases_; }
  const SgdHyper& hyper() const { return hyper_; }

  nlohmann::json to_json() const;
  /// Throws VersionError on a format_version mismatch.
  static LinearModel from_json(const nlohmann::json& doc);

 private:
  std::string taxonomy_;
  std::vector<std::string> classes_;
  Vocabulary vocab_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> biases_;
  SgdHyper hyper_;
};

/// Multinomial naive Bayes with additive smoothing over binary counts.
/// Probabilities are the softmax of the joint log-probabilities.
class NBModel final : public ProbabilisticClassifier {
 public:
  NBModel(std::string taxonomy, std::vector<std::string> classes, Vocabulary vocab, std::vector<double> log_prior,
          std::vector<std::vector<double>> log_likelihood, double alpha);

  const std::string& taxonomy() const override { return taxonomy_; }
  const std::vector<std::string>& classes() const override { return classes_; }
  const Vocabulary& vocabulary() const override { return vocab_; }
  std::vector<double> probabilities(const FeatureVector& x) const override;
  using ProbabilisticClassifier::probabilities;

  const std::vector<double>& log_prior() const { return log_prior_; }
  const std::vector<std::vector<double>>& log_likelihood() const { return log_likelihood_; }
  double alpha() const { return alpha_; }

  nlohmann::json to_json() const;
  static NBModel from_json(const nlohmann::json& doc);

 private:
  std::string taxonomy_;
  std::vector<std::string> classes_;
  Vocabulary vocab_;
  std::vector<double> log_prior_;
  std::vector<std::vector<double>> log_likelihood_;
  double alpha_;
};

/// Numerically stable logistic function.
double sigmoid(double z);

/// Regularized log-loss of one binary example:
/// -[y log s + (1-y) log(1-s)] + (l2/2)|w|^2 with s = sigmoid(w.x + b).
double example_loss(std::span<const double> weights, double bias, const FeatureVector& x, double y, double l2);

struct Gradient {
  std::vector<double> weights;
  double bias = 0.0;
};

/// Analytic gradient of example_loss: ((s - y) x + l2 w, s - y).
Gradient example_gradient(std::span<const double> weights, double bias, const FeatureVector& x, double y, double l2);

/// Trains one sigmoid unit per class. Each update is
/// w <- w - lr (s - y) x - lr l2 w,  b <- b - lr (s - y),
/// visiting examples in an order reshuffled every epoch by a seeded RNG.
/// A recipe is a positive example for every class it carries.
LinearModel train_sgd(const Dataset& data, const std::string& taxonomy, const Vocabulary& vocab,
                      const SgdHyper& hyper);

/// Throws ValidationError for an unknown taxonomy, fewer than two classes, or a
/// class without examples (the message names it).
LinearModel train_sgd(const corpus::Corpus& corpus, const std::string& taxonomy, const SgdHyper& hyper = {});

NBModel train_nb(const Dataset& data, const std::string& taxonomy, const Vocabulary& vocab, double alpha = 1.0);
NBModel train_nb(const corpus::Corpus& corpus, const std::string& taxonomy, double alpha = 1.0);

struct MultiLabelResult {
  std::vector<std::string> classes;
  std::vector<double> probabilities;  ///< parallel to classes
  std::vector<std::string> assigned;  ///< in class order
};

/// Classes whose probability reaches `threshold`; when none does, the single
/// most probable class (lowest index on ties). Returns class indices.
std::vector<std::size_t> assign_classes(std::span<const double> probabilities, double threshold = kAssignThreshold);

MultiLabelResult predict_multilabel(const ProbabilisticClassifier& model, const ItemSet& ingredients,
                                    double threshold = kAssignThreshold);

struct Evaluation {
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> confusion;  ///< [true][predicted]
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
};

/// Argmax predictions against each recipe's primary (first listed) label.
/// Recipes without a known label in the model's taxonomy are skipped; throws
/// ValidationError when nothing is left to score.
Evaluation evaluate(const ProbabilisticClassifier& model, std::span<const corpus::Recipe> held_out);
Evaluation evaluate(const ProbabilisticClassifier& model, const Dataset& data);

void write_evaluation_csv(std::ostream& out, const Evaluation& eval);

/// Share of the most common primary label; the accuracy of always guessing it.
double majority_baseline(const Dataset& data);

struct GridSpec {
  std::vector<double> learning_rates{0.1};
  std::vector<double> l2s{1e-4};
  std::vector<std::size_t> epochs{30};
  std::uint64_t seed = 42;
};

struct CvRow {
  SgdHyper hyper;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
};

struct GridResult {
  SgdHyper best;
  std::vector<CvRow> table;  ///< grid order
  std::size_t folds = 0;
  std::optional<std::string> warning;
};

/// Fold index per example: examples are grouped by primary label and dealt
/// round-robin, in dataset order, across `folds` folds.
std::vector<std::size_t> stratified_folds(const Dataset& data, std::size_t folds);

/// Stratified k-fold cross-validation over every grid point. Best = highest
/// mean accuracy, ties to smaller l2, then smaller learning rate, then fewer
/// epochs. When some class has fewer members than `folds`, folds drop to that
/// size (minimum 2) and `warning` says so.
GridResult grid_search(const corpus::Corpus& corpus, const std::string& taxonomy, const GridSpec& grid,
                       std::size_t folds = 5);
GridResult grid_search(const Dataset& data, const std::string& taxonomy, const Vocabulary& vocab,
                       const GridSpec& grid, std::size_t folds = 5);

void write_grid_csv(std::ostream& out, const GridResult& result);

}  // namespace recipenet::classify
