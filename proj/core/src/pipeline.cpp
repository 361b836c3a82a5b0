#include "recipenet/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace recipenet::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.json";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

nlohmann::json parse_json_file(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path), nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("'" + path.filename().string() + "' is not valid JSON: " + e.what());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

/// Writes artifact files and remembers them so a failed run can be undone.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& rel, const std::string& bytes) {
    const auto path = dir_ / rel;
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    written_.push_back(path);
    out << bytes;
    out.close();
    if (!out) throw Error("failed writing '" + path.string() + "'");
    hashes_[rel] = sha256_hex(bytes);
  }

  void rollback() noexcept {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    fs::remove(dir_ / "models", ec);  // only succeeds when empty
  }

  const std::map<std::string, std::string>& hashes() const { return hashes_; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
  std::map<std::string, std::string> hashes_;
};

nlohmann::json token_list_json(const textprep::TokenSet& tokens) {
  return nlohmann::json(std::vector<std::string>(tokens.begin(), tokens.end()));
}

nlohmann::json effective_config(const PipelineConfig& cfg) {
  nlohmann::json hyper = nlohmann::json::object();
  for (const auto& [tax, h] : cfg.hyper_by_taxonomy) hyper[tax] = classify::to_json(h);
  return {
      {"corpus",
       {{"format", cfg.corpus_format ? (*cfg.corpus_format == corpus::Format::csv ? "csv" : "jsonl") : "auto"},
        {"taxonomies", cfg.taxonomies}}},
      {"prep", {{"min_token_len", cfg.min_token_len}}},
      {"similarity", {{"metric", std::string(simcanon::to_string(cfg.metric))}, {"threshold", cfg.merge_threshold}}},
      {"mining",
       {{"min_support", cfg.mining.min_support},
        {"min_confidence", cfg.mining.min_confidence},
        {"algorithm", std::string(rulemine::to_string(cfg.mining.algorithm))},
        {"max_itemset_size", cfg.mining.max_itemset_size ? nlohmann::json(*cfg.mining.max_itemset_size)
                                                         : nlohmann::json(nullptr)}}},
      {"classify", {{"defaults", classify::to_json(cfg.default_hyper)}, {"taxonomies", hyper}}},
  };
}

}  // namespace

corpus::Corpus build_corpus(std::span<const corpus::RawRecipe> raw, const textprep::PrepConfig& prep,
                            simcanon::Metric metric, double threshold, std::span<const std::string> taxonomies,
                            std::size_t* dropped) {
  auto prepared = textprep::prep_corpus(raw, prep);
  if (dropped) *dropped = prepared.dropped;
  std::map<std::string, std::size_t> frequency;
  for (const auto& r : prepared.recipes) {
    for (const auto& ing : r.ingredients) ++frequency[ing];
  }
  std::vector<simcanon::WeightedIngredient> weighted;
  for (const auto& [text, count] : frequency) weighted.push_back({text, count});
  auto lexicon = simcanon::canonicalize(weighted, metric, threshold);
  auto built = corpus::Corpus::build(prepared.recipes, std::move(lexicon), taxonomies);
  if (built.empty()) throw ValidationError("no recipes survived preprocessing");
  return built;
}

StageError::StageError(std::string stage, const std::string& cause)
    : Error("stage '" + stage + "': " + cause), stage_(std::move(stage)) {}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
  return hex.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

PipelineConfig PipelineConfig::from_json(const nlohmann::json& doc, const fs::path& base_dir) {
  PipelineConfig cfg;
  cfg.source = doc;
  try {
    if (!doc.is_object()) throw ConfigError("pipeline config must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
      static const std::vector<std::string> known{"corpus", "prep", "similarity", "mining", "classify", "output_dir"};
      if (std::find(known.begin(), known.end(), key) == known.end() && key.rfind('_', 0) != 0) {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }

    const auto& c = doc.at("corpus");
    cfg.corpus_path = resolve(base_dir, c.at("path").get<std::string>());
    if (c.contains("format") && c["format"] != "auto") {
      cfg.corpus_format = corpus::parse_format(c["format"].get<std::string>());
    }
    if (c.contains("taxonomies")) cfg.taxonomies = c["taxonomies"].get<std::vector<std::string>>();

    if (doc.contains("prep")) {
      const auto& p = doc["prep"];
      if (p.contains("stopwords")) cfg.stopwords_path = resolve(base_dir, p["stopwords"].get<std::string>());
      if (p.contains("units")) cfg.units_path = resolve(base_dir, p["units"].get<std::string>());
      cfg.min_token_len = p.value("min_token_len", cfg.min_token_len);
    }
    if (doc.contains("similarity")) {
      const auto& s = doc["similarity"];
      if (s.contains("metric")) cfg.metric = simcanon::parse_metric(s["metric"].get<std::string>());
      cfg.merge_threshold = s.value("threshold", cfg.merge_threshold);
    }
    if (doc.contains("mining")) {
      const auto& m = doc["mining"];
      cfg.mining.min_support = m.value("min_support", cfg.mining.min_support);
      cfg.mining.min_confidence = m.value("min_confidence", cfg.mining.min_confidence);
      if (m.contains("algorithm")) cfg.mining.algorithm = rulemine::parse_algorithm(m["algorithm"].get<std::string>());
      if (m.contains("max_itemset_size")) {
        cfg.mining.max_itemset_size = m["max_itemset_size"].is_null()
                                          ? std::nullopt
                                          : std::optional<std::size_t>(m["max_itemset_size"].get<std::size_t>());
      }
    }
    if (doc.contains("classify")) {
      const auto& k = doc["classify"];
      if (k.contains("defaults")) cfg.default_hyper = classify::sgd_hyper_from_json(k["defaults"]);
      if (k.contains("taxonomies")) {
        for (const auto& [tax, h] : k["taxonomies"].items()) {
          cfg.hyper_by_taxonomy[tax] = classify::sgd_hyper_from_json(h, cfg.default_hyper);
        }
      }
    }
    cfg.output_dir = resolve(base_dir, doc.at("output_dir").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed pipeline config: ") + e.what());
  }
  return cfg;
}

PipelineConfig PipelineConfig::load(const fs::path& file) {
  if (!fs::is_regular_file(file)) throw ConfigError("config file '" + file.string() + "' does not exist");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(file), nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + file.string() + "' is not valid JSON: " + e.what());
  }
  return from_json(doc, fs::absolute(file).parent_path());
}

const classify::SgdHyper& PipelineConfig::hyper_for(const std::string& taxonomy) const {
  auto it = hyper_by_taxonomy.find(taxonomy);
  return it == hyper_by_taxonomy.end() ? default_hyper : it->second;
}

textprep::PrepConfig PipelineConfig::prep_config() const {
  auto prep = textprep::PrepConfig::defaults();
  if (stopwords_path) prep.stopwords = textprep::load_token_list(*stopwords_path);
  if (units_path) prep.units = textprep::load_token_list(*units_path);
  prep.min_token_len = min_token_len;
  return prep;
}

void PipelineConfig::validate() const {
  if (!fs::is_regular_file(corpus_path)) throw ConfigError("corpus file '" + corpus_path.string() + "' does not exist");
  if (stopwords_path && !fs::is_regular_file(*stopwords_path)) {
    throw ConfigError("stopwords file '" + stopwords_path->string() + "' does not exist");
  }
  if (units_path && !fs::is_regular_file(*units_path)) {
    throw ConfigError("units file '" + units_path->string() + "' does not exist");
  }
  if (!(merge_threshold > 0.0 && merge_threshold <= 1.0)) {
    throw ConfigError("similarity threshold must lie in (0, 1]");
  }
  mining.validate();
  if (output_dir.empty()) throw ConfigError("output_dir is required");
}

PipelineRun run_pipeline(const PipelineConfig& cfg) {
  run_stage("config", [&] {
    cfg.validate();
    return 0;
  });

  const fs::path dir = cfg.output_dir;
  run_stage("output", [&] {
    fs::create_directories(dir);
    fs::remove(dir / kManifest);
    return 0;
  });

  ArtifactWriter writer(dir);
  try {
    StageCounts counts;

    auto raw = run_stage("ingest", [&] {
      auto format = cfg.corpus_format.value_or(corpus::format_for_path(cfg.corpus_path));
      return corpus::load_corpus(cfg.corpus_path, format, cfg.taxonomies);
    });
    counts.raw_recipes = raw.size();

    auto prep = run_stage("prep", [&] {
      auto loaded = cfg.prep_config();
      nlohmann::json doc{{"min_token_len", loaded.min_token_len},
                         {"stopwords", token_list_json(loaded.stopwords)},
                         {"units", token_list_json(loaded.units)}};
      writer.write("prep.json", doc.dump(1) + "\n");
      return loaded;
    });

    auto corpus = run_stage("canonicalize", [&] {
      auto built = build_corpus(raw, prep, cfg.metric, cfg.merge_threshold, cfg.taxonomies, &counts.dropped_recipes);
      writer.write("lexicon.json", built.lexicon().to_json().dump(1) + "\n");
      writer.write("corpus.json", built.to_json().dump() + "\n");
      return built;
    });
    counts.recipes = corpus.size();
    counts.ingredients = corpus.lexicon().size();

    auto rules = run_stage("mine", [&] {
      std::vector<ItemSet> transactions;
      for (const auto& r : corpus.recipes()) transactions.push_back(r.ingredient_ids);
      rulemine::TransactionDB db(std::move(transactions));
      rulemine::ItemNames names(corpus.lexicon());
      std::ostringstream tx;
      rulemine::write_transactions(tx, db, names);
      writer.write("transactions.txt", tx.str());

      auto frequents = rulemine::mine_frequent(db, cfg.mining);
      counts.frequent_itemsets = frequents.size();
      auto mined = rulemine::generate_rules(frequents, cfg.mining.min_confidence);
      std::ostringstream csv;
      rulemine::write_rules_csv(csv, mined, names);
      writer.write("rules.csv", csv.str());
      writer.write("rules.json", rulemine::rules_to_json(mined, names).dump(1) + "\n");
      return mined;
    });
    counts.rules = rules.size();

    auto models = run_stage("classify", [&] {
      std::vector<classify::LinearModel> trained;
      for (const auto& tax : corpus.taxonomies()) {
        auto model = classify::train_sgd(corpus, tax.name, cfg.hyper_for(tax.name));
        writer.write("models/" + tax.name + ".json", model.to_json().dump() + "\n");
        counts.classes[tax.name] = tax.classes.size();
        trained.push_back(std::move(model));
      }
      return trained;
    });

    PipelineArtifacts artifacts;
    artifacts.dir = dir;
    artifacts.counts = counts;
    run_stage("manifest", [&] {
      nlohmann::json inputs{{"corpus", sha256_file(cfg.corpus_path)}};
      if (cfg.stopwords_path) inputs["stopwords"] = sha256_file(*cfg.stopwords_path);
      if (cfg.units_path) inputs["units"] = sha256_file(*cfg.units_path);
      nlohmann::json taxonomy_names = nlohmann::json::array();
      for (const auto& t : corpus.taxonomies()) taxonomy_names.push_back(t.name);
      artifacts.manifest = {
          {"format_version", kArtifactFormatVersion},
          {"config", cfg.source},
          {"effective_config", effective_config(cfg)},
          {"input_sha256", inputs},
          {"files", writer.hashes()},
          {"taxonomies", taxonomy_names},
          {"counts",
           {{"raw_recipes", counts.raw_recipes},
            {"dropped_recipes", counts.dropped_recipes},
            {"recipes", counts.recipes},
            {"ingredients", counts.ingredients},
            {"frequent_itemsets", counts.frequent_itemsets},
            {"rules", counts.rules},
            {"classes", counts.classes}}},
      };
      const auto bytes = artifacts.manifest.dump(2) + "\n";
      writer.write(kManifest, bytes);
      artifacts.manifest_hash = sha256_hex(bytes);
      return 0;
    });

    return PipelineRun{std::move(artifacts), std::move(corpus), std::move(rules), std::move(models), std::move(prep)};
  } catch (...) {
    writer.rollback();
    throw;
  }
}

const classify::LinearModel* Bundle::model_for(std::string_view taxonomy) const {
  for (const auto& m : models) {
    if (m.taxonomy() == taxonomy) return &m;
  }
  return nullptr;
}

std::vector<corpus::Recipe> bind_recipes(const Bundle& bundle, std::span<const corpus::RawRecipe> raw) {
  std::vector<corpus::Recipe> out;
  for (const auto& r : raw) {
    std::vector<IngredientId> ids;
    for (const auto& line : r.ingredients) {
      auto clean = textprep::clean(line, bundle.prep);
      if (!clean) continue;
      if (auto id = bundle.corpus.lexicon().resolve(*clean)) ids.push_back(*id);
    }
    if (ids.empty()) continue;
    out.push_back({corpus::RecipeId{static_cast<std::uint32_t>(out.size())}, r.title, make_item_set(std::move(ids)),
                   r.labels});
  }
  return out;
}

Bundle load_artifacts(const fs::path& dir) {
  const auto manifest_path = dir / kManifest;
  if (!fs::is_regular_file(manifest_path)) {
    throw IntegrityError("no manifest.json in artifact directory '" + dir.string() + "'");
  }
  const auto manifest_bytes = read_file(manifest_path);
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(manifest_bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw IntegrityError(std::string("manifest.json is not valid JSON: ") + e.what());
  }
  if (!manifest.contains("format_version") || manifest["format_version"] != kArtifactFormatVersion) {
    throw VersionError("artifact format_version mismatch: expected " + std::to_string(kArtifactFormatVersion) +
                       ", found " + (manifest.contains("format_version") ? manifest["format_version"].dump() : "none") +
                       "; re-run the pipeline to migrate");
  }
  if (!manifest.contains("files") || !manifest["files"].is_object()) {
    throw IntegrityError("manifest.json has no file table");
  }
  for (const auto& [rel, hash] : manifest["files"].items()) {
    if (rel == kManifest) continue;
    const auto path = dir / rel;
    if (!fs::is_regular_file(path)) throw IntegrityError("artifact file '" + rel + "' is missing");
    if (sha256_file(path) != hash.get<std::string>()) {
      throw IntegrityError("artifact file '" + rel + "' does not match its manifest hash");
    }
  }

  try {
    const auto prep_doc = parse_json_file(dir / "prep.json");
    textprep::PrepConfig prep;
    for (const auto& s : prep_doc.at("stopwords")) prep.stopwords.insert(s.get<std::string>());
    for (const auto& u : prep_doc.at("units")) prep.units.insert(u.get<std::string>());
    prep.min_token_len = prep_doc.at("min_token_len").get<std::size_t>();

    auto lexicon = simcanon::IngredientLexicon::from_json(parse_json_file(dir / "lexicon.json"));
    auto corpus = corpus::Corpus::from_json(parse_json_file(dir / "corpus.json"), lexicon);

    rulemine::ItemNames names(corpus.lexicon());
    std::ifstream rules_in(dir / "rules.csv");
    auto rules = rulemine::read_rules_csv(rules_in, names);

    std::vector<classify::LinearModel> models;
    for (const auto& tax : corpus.taxonomies()) {
      models.push_back(classify::LinearModel::from_json(parse_json_file(dir / "models" / (tax.name + ".json"))));
    }
    return Bundle{std::move(corpus), std::move(rules), std::move(models), std::move(prep), std::move(manifest),
                  sha256_hex(manifest_bytes)};
  } catch (const VersionError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed artifact: ") + e.what());
  }
}

}  // namespace recipenet::pipeline
