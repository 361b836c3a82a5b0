#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "recipenet/common.hpp"
#include "recipenet/simcanon.hpp"

/// Recipe data model and on-disk corpus ingestion.
namespace recipenet::corpus {

/// Taxonomy name -> class names. Class lists behave as ordered sets: the first
/// listed class is the recipe's primary label for that taxonomy.
using LabelMap = std::map<std::string, std::vector<std::string>>;

struct RawRecipe {
  std::string title;
  std::vector<std::string> ingredients;
  LabelMap labels;

  bool operator==(const RawRecipe&) const = default;
};

enum class Format { jsonl, csv };

Format parse_format(std::string_view text);
/// Picks the format from the file extension (.csv -> csv, anything else jsonl).
Format format_for_path(const std::filesystem::path& path);

const std::vector<std::string>& default_taxonomy_names();

/// Reads one recipe per JSONL line or CSV row. Unknown JSON fields are ignored;
/// a label key outside `taxonomies` is an error naming the key. Errors carry the
/// 1-based line (JSONL) or record (CSV) number.
std::vector<RawRecipe> load_corpus(const std::filesystem::path& path, Format format,
                                   std::span<const std::string> taxonomies = default_taxonomy_names());
std::vector<RawRecipe> read_jsonl(std::istream& in,
                                  std::span<const std::string> taxonomies = default_taxonomy_names());
std::vector<RawRecipe> read_csv(std::istream& in,
                                std::span<const std::string> taxonomies = default_taxonomy_names());

void write_jsonl(std::ostream& out, std::span<const RawRecipe> recipes);
/// Writes a header row then one row per recipe; one column per taxonomy name.
void write_csv(std::ostream& out, std::span<const RawRecipe> recipes,
               std::span<const std::string> taxonomies = default_taxonomy_names());

struct Taxonomy {
  std::string name;
  std::vector<std::string> classes;

  bool operator==(const Taxonomy&) const = default;
};

struct RecipeId {
  std::uint32_t value = 0;
  auto operator<=>(const RecipeId&) const = default;
};

struct Recipe {
  RecipeId id;
  std::string title;
  ItemSet ingredient_ids;
  LabelMap labels;

  /// Class names for one taxonomy, empty when the recipe carries none.
  const std::vector<std::string>& labels_for(const std::string& taxonomy) const;
};

/// Keeps the first recipe of each (title, ingredient set) pair and folds the
/// labels of later copies into it. Survivor order is preserved.
std::vector<Recipe> dedup_recipes(std::vector<Recipe> recipes);

/// Recipe with clean ingredient strings, ready to be bound to a lexicon.
struct PreparedRecipe {
  std::string title;
  std::vector<std::string> ingredients;
  LabelMap labels;
};

class Corpus {
 public:
  Corpus() = default;

  /// Binds clean ingredient strings to lexicon ids (exact alias lookup,
  /// dropping strings the lexicon does not know), removes recipes left without
  /// ingredients, deduplicates, and renumbers recipe ids densely from zero.
  /// Taxonomy classes are collected from the labels in sorted order.
  static Corpus build(std::span<const PreparedRecipe> recipes, simcanon::IngredientLexicon lexicon,
                      std::span<const std::string> taxonomy_names = default_taxonomy_names());

  /// Wraps already-bound recipes; validates ids against the lexicon.
  Corpus(std::vector<Recipe> recipes, simcanon::IngredientLexicon lexicon, std::vector<Taxonomy> taxonomies);

  const std::vector<Recipe>& recipes() const { return recipes_; }
  const simcanon::IngredientLexicon& lexicon() const { return lexicon_; }
  const std::vector<Taxonomy>& taxonomies() const { return taxonomies_; }
  const Taxonomy* find_taxonomy(std::string_view name) const;
  const Recipe& recipe(RecipeId id) const { return recipes_.at(id.value); }
  std::size_t size() const { return recipes_.size(); }
  bool empty() const { return recipes_.empty(); }

  nlohmann::json to_json() const;
  static Corpus from_json(const nlohmann::json& doc, simcanon::IngredientLexicon lexicon);

 private:
  std::vector<Recipe> recipes_;
  simcanon::IngredientLexicon lexicon_;
  std::vector<Taxonomy> taxonomies_;
};

struct ClassStats {
  std::string taxonomy;
  std::string class_name;
  std::size_t recipe_count = 0;
  double mean_ingredients = 0.0;
};

/// One row per (taxonomy, class) carried by at least one recipe, in taxonomy
/// then class order.
std::vector<ClassStats> corpus_stats(const Corpus& corpus);

void write_stats_csv(std::ostream& out, std::span<const ClassStats> rows);

/// RFC 4180 field quoting for CSV writers.
std::string csv_escape(std::string_view field);
/// Splits one logical CSV record; `in` may yield embedded newlines inside quotes.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& physical_lines);

}  // namespace recipenet::corpus
