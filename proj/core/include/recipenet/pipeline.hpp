#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "recipenet/classify.hpp"
#include "recipenet/corpus.hpp"
#include "recipenet/rulemine.hpp"
#include "recipenet/simcanon.hpp"
#include "recipenet/textprep.hpp"

/// Batch flow: ingest -> clean -> canonicalize -> mine -> train, with every
/// stage persisted as plain text / JSON / CSV under one output directory and
/// sealed by a content-hash manifest.
namespace recipenet::pipeline {

inline constexpr int kArtifactFormatVersion = 1;

/// A stage failed; what() reads "stage '<name>': <cause>".
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineConfig {
  std::filesystem::path corpus_path;
  std::optional<corpus::Format> corpus_format;  ///< nullopt: by file extension
  std::vector<std::string> taxonomies = corpus::default_taxonomy_names();

  std::optional<std::filesystem::path> stopwords_path;  ///< nullopt: built-in list
  std::optional<std::filesystem::path> units_path;      ///< nullopt: built-in list
  std::size_t min_token_len = 2;

  simcanon::Metric metric = simcanon::Metric::cosine_tokens;
  double merge_threshold = simcanon::kDefaultMergeThreshold;

  rulemine::MiningParams mining;

  classify::SgdHyper default_hyper;
  std::map<std::string, classify::SgdHyper> hyper_by_taxonomy;

  std::filesystem::path output_dir;

  /// The source document, kept verbatim for the manifest snapshot.
  nlohmann::json source = nlohmann::json::object();

  /// Relative paths in `doc` resolve against `base_dir`.
  static PipelineConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
  /// Throws ConfigError when the file is missing or malformed.
  static PipelineConfig load(const std::filesystem::path& file);

  const classify::SgdHyper& hyper_for(const std::string& taxonomy) const;
  textprep::PrepConfig prep_config() const;

  /// Referenced input files exist and every parameter is in range.
  void validate() const;
};

struct StageCounts {
  std::size_t raw_recipes = 0;
  std::size_t dropped_recipes = 0;
  std::size_t recipes = 0;
  std::size_t ingredients = 0;
  std::size_t frequent_itemsets = 0;
  std::size_t rules = 0;
  std::map<std::string, std::size_t> classes;
};

struct PipelineArtifacts {
  std::filesystem::path dir;
  nlohmann::json manifest;
  std::string manifest_hash;
  StageCounts counts;
};

/// In-memory products of a run, alongside what was written.
struct PipelineRun {
  PipelineArtifacts artifacts;
  corpus::Corpus corpus;
  std::vector<rulemine::AssociationRule> rules;
  std::vector<classify::LinearModel> models;
  textprep::PrepConfig prep;
};

/// Clean, canonicalize (each string weighted by the number of recipes using
/// it) and bind. `dropped` receives the count of recipes lost in cleaning.
corpus::Corpus build_corpus(std::span<const corpus::RawRecipe> raw, const textprep::PrepConfig& prep,
                            simcanon::Metric metric, double threshold, std::span<const std::string> taxonomies,
                            std::size_t* dropped = nullptr);

/// Runs every stage in order. Deterministic given the config. On failure the
/// files written so far are removed and a StageError names the stage.
PipelineRun run_pipeline(const PipelineConfig& cfg);

/// Immutable serving bundle.
struct Bundle {
  corpus::Corpus corpus;
  std::vector<rulemine::AssociationRule> rules;
  std::vector<classify::LinearModel> models;  ///< corpus taxonomy order
  textprep::PrepConfig prep;
  nlohmann::json manifest;
  std::string manifest_hash;

  const classify::LinearModel* model_for(std::string_view taxonomy) const;
};

/// Binds raw recipes to the bundle's lexicon the way queries are bound: clean,
/// then resolve. Unresolvable lines are dropped, as are recipes left empty.
/// Ids are assigned densely in input order.
std::vector<corpus::Recipe> bind_recipes(const Bundle& bundle, std::span<const corpus::RawRecipe> raw);

/// Verifies every manifest hash (IntegrityError naming the file) and the
/// format version (VersionError) before loading. Paths are relative to the
/// manifest, so artifact directories can be moved.
Bundle load_artifacts(const std::filesystem::path& dir);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace recipenet::pipeline
