#include "recipenet/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace recipenet::corpus {

namespace {

std::string trim(std::string_view s) {
  const char* ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_pipes(std::string_view field) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= field.size()) {
    auto bar = field.find('|', start);
    if (bar == std::string_view::npos) bar = field.size();
    auto piece = trim(field.substr(start, bar - start));
    if (!piece.empty()) out.push_back(std::move(piece));
    start = bar + 1;
  }
  return out;
}

std::string join_pipes(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += '|';
    out += item;
  }
  return out;
}

void append_distinct(std::vector<std::string>& into, const std::string& value) {
  if (std::find(into.begin(), into.end(), value) == into.end()) into.push_back(value);
}

bool known_taxonomy(std::span<const std::string> taxonomies, const std::string& key) {
  return std::find(taxonomies.begin(), taxonomies.end(), key) != taxonomies.end();
}

void validate_raw(const RawRecipe& recipe, const std::string& where) {
  if (recipe.title.empty()) throw ParseError(where + ": recipe title is empty");
  if (recipe.ingredients.empty()) throw ParseError(where + ": recipe '" + recipe.title + "' has no ingredients");
}

const std::vector<std::string> kNoLabels;

}  // namespace

Format parse_format(std::string_view text) {
  if (text == "jsonl") return Format::jsonl;
  if (text == "csv") return Format::csv;
  throw ConfigError("unknown corpus format '" + std::string(text) + "' (expected jsonl or csv)");
}

Format format_for_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv" ? Format::csv : Format::jsonl;
}

const std::vector<std::string>& default_taxonomy_names() {
  static const std::vector<std::string> names{"cuisines", "dietary", "course"};
  return names;
}

std::vector<RawRecipe> load_corpus(const std::filesystem::path& path, Format format,
                                   std::span<const std::string> taxonomies) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open corpus file '" + path.string() + "'");
  try {
    return format == Format::jsonl ? read_jsonl(in, taxonomies) : read_csv(in, taxonomies);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<RawRecipe> read_jsonl(std::istream& in, std::span<const std::string> taxonomies) {
  std::vector<RawRecipe> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where + ": invalid JSON (" + e.what() + ")");
    }
    if (!doc.is_object()) throw ParseError(where + ": record is not a JSON object");

    RawRecipe recipe;
    try {
      recipe.title = trim(doc.at("title").get<std::string>());
      for (const auto& ing : doc.at("ingredients")) recipe.ingredients.push_back(ing.get<std::string>());
      if (auto it = doc.find("labels"); it != doc.end() && !it->is_null()) {
        if (!it->is_object()) throw ParseError(where + ": 'labels' must be an object");
        for (const auto& [key, classes] : it->items()) {
          if (!known_taxonomy(taxonomies, key)) throw ParseError(where + ": unknown taxonomy label key '" + key + "'");
          std::vector<std::string> values;
          for (const auto& c : classes) {
            auto name = trim(c.get<std::string>());
            if (!name.empty()) append_distinct(values, name);
          }
          if (!values.empty()) recipe.labels[key] = std::move(values);
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": malformed record (" + e.what() + ")");
    }
    validate_raw(recipe, where);
    out.push_back(std::move(recipe));
  }
  return out;
}

bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& physical_lines) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++physical_lines;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      continue;
    } else if (c == '\n') {
      ++physical_lines;
      fields.push_back(std::move(field));
      return true;
    } else {
      field += c;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted CSV field");
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

std::vector<RawRecipe> read_csv(std::istream& in, std::span<const std::string> taxonomies) {
  std::vector<RawRecipe> out;
  std::vector<std::string> fields;
  std::size_t lines = 0;
  if (!read_csv_record(in, fields, lines)) return out;

  std::vector<std::string> header;
  for (auto& f : fields) header.push_back(trim(f));
  if (header.size() < 2 || header[0] != "title" || header[1] != "ingredients") {
    throw ParseError("record 0 (header): expected columns 'title,ingredients,...'");
  }
  for (std::size_t c = 2; c < header.size(); ++c) {
    if (!known_taxonomy(taxonomies, header[c])) {
      throw ParseError("record 0 (header): unknown taxonomy label key '" + header[c] + "'");
    }
  }

  std::size_t record = 0;
  while (true) {
    std::size_t first_line = lines + 1;
    if (!read_csv_record(in, fields, lines)) break;
    ++record;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    const std::string where = "record " + std::to_string(record) + " (line " + std::to_string(first_line) + ")";
    if (fields.size() != header.size()) {
      throw ParseError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    RawRecipe recipe;
    recipe.title = trim(fields[0]);
    recipe.ingredients = split_pipes(fields[1]);
    for (std::size_t c = 2; c < header.size(); ++c) {
      std::vector<std::string> values;
      for (auto& v : split_pipes(fields[c])) append_distinct(values, v);
      if (!values.empty()) recipe.labels[header[c]] = std::move(values);
    }
    validate_raw(recipe, where);
    out.push_back(std::move(recipe));
  }
  return out;
}

void write_jsonl(std::ostream& out, std::span<const RawRecipe> recipes) {
  for (const auto& r : recipes) {
    nlohmann::json labels = nlohmann::json::object();
    for (const auto& [tax, classes] : r.labels) labels[tax] = classes;
    nlohmann::json doc{{"title", r.title}, {"ingredients", r.ingredients}, {"labels", labels}};
    out << doc.dump() << '\n';
  }
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv(std::ostream& out, std::span<const RawRecipe> recipes, std::span<const std::string> taxonomies) {
  out << "title,ingredients";
  for (const auto& t : taxonomies) out << ',' << csv_escape(t);
  out << '\n';
  for (const auto& r : recipes) {
    out << csv_escape(r.title) << ',' << csv_escape(join_pipes(r.ingredients));
    for (const auto& t : taxonomies) {
      auto it = r.labels.find(t);
      out << ',' << csv_escape(it == r.labels.end() ? std::string() : join_pipes(it->second));
    }
    out << '\n';
  }
}

const std::vector<std::string>& Recipe::labels_for(const std::string& taxonomy) const {
  auto it = labels.find(taxonomy);
  return it == labels.end() ? kNoLabels : it->second;
}

std::vector<Recipe> dedup_recipes(std::vector<Recipe> recipes) {
  std::vector<Recipe> out;
  std::map<std::pair<std::string, ItemSet>, std::size_t> seen;
  for (auto& r : recipes) {
    auto key = std::make_pair(r.title, r.ingredient_ids);
    auto [it, inserted] = seen.emplace(std::move(key), out.size());
    if (inserted) {
      out.push_back(std::move(r));
      continue;
    }
    auto& survivor = out[it->second];
    for (const auto& [tax, classes] : r.labels) {
      auto& into = survivor.labels[tax];
      for (const auto& c : classes) append_distinct(into, c);
    }
  }
  return out;
}

Corpus Corpus::build(std::span<const PreparedRecipe> recipes, simcanon::IngredientLexicon lexicon,
                     std::span<const std::string> taxonomy_names) {
  std::vector<Recipe> bound;
  bound.reserve(recipes.size());
  for (const auto& pr : recipes) {
    std::vector<IngredientId> ids;
    for (const auto& ing : pr.ingredients) {
      if (auto id = lexicon.find(ing)) ids.push_back(*id);
    }
    if (ids.empty()) continue;
    Recipe r;
    r.title = pr.title;
    r.ingredient_ids = make_item_set(std::move(ids));
    for (const auto& [tax, classes] : pr.labels) {
      if (known_taxonomy(taxonomy_names, tax) && !classes.empty()) r.labels[tax] = classes;
    }
    bound.push_back(std::move(r));
  }
  auto unique = dedup_recipes(std::move(bound));
  for (std::size_t i = 0; i < unique.size(); ++i) unique[i].id = RecipeId{static_cast<std::uint32_t>(i)};

  std::vector<Taxonomy> taxonomies;
  for (const auto& name : taxonomy_names) {
    std::set<std::string> classes;
    for (const auto& r : unique) {
      for (const auto& c : r.labels_for(name)) classes.insert(c);
    }
    if (!classes.empty()) taxonomies.push_back({name, {classes.begin(), classes.end()}});
  }
  return Corpus(std::move(unique), std::move(lexicon), std::move(taxonomies));
}

Corpus::Corpus(std::vector<Recipe> recipes, simcanon::IngredientLexicon lexicon, std::vector<Taxonomy> taxonomies)
    : recipes_(std::move(recipes)), lexicon_(std::move(lexicon)), taxonomies_(std::move(taxonomies)) {
  for (std::size_t i = 0; i < recipes_.size(); ++i) {
    const auto& r = recipes_[i];
    const std::string where = "recipe " + std::to_string(i) + " ('" + r.title + "')";
    if (r.id.value != i) throw ValidationError(where + ": recipe ids must be dense and ordered");
    if (r.ingredient_ids.empty()) throw ValidationError(where + ": empty ingredient set");
    if (make_item_set(r.ingredient_ids) != r.ingredient_ids) {
      throw ValidationError(where + ": ingredient ids must be sorted and distinct");
    }
    for (auto id : r.ingredient_ids) {
      if (!lexicon_.contains(id)) {
        throw ValidationError(where + ": ingredient id " + std::to_string(id.value) + " not in lexicon");
      }
    }
    for (const auto& [tax, classes] : r.labels) {
      const auto* t = find_taxonomy(tax);
      if (t == nullptr) throw ValidationError(where + ": unknown taxonomy '" + tax + "'");
      for (const auto& c : classes) {
        if (std::find(t->classes.begin(), t->classes.end(), c) == t->classes.end()) {
          throw ValidationError(where + ": class '" + c + "' missing from taxonomy '" + tax + "'");
        }
      }
    }
  }
}

const Taxonomy* Corpus::find_taxonomy(std::string_view name) const {
  for (const auto& t : taxonomies_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

nlohmann::json Corpus::to_json() const {
  nlohmann::json taxonomies = nlohmann::json::array();
  for (const auto& t : taxonomies_) taxonomies.push_back({{"name", t.name}, {"classes", t.classes}});
  nlohmann::json recipes = nlohmann::json::array();
  for (const auto& r : recipes_) {
    std::vector<std::uint32_t> ids;
    for (auto id : r.ingredient_ids) ids.push_back(id.value);
    nlohmann::json labels = nlohmann::json::object();
    for (const auto& [tax, classes] : r.labels) labels[tax] = classes;
    recipes.push_back({{"id", r.id.value}, {"title", r.title}, {"ingredients", ids}, {"labels", labels}});
  }
  return {{"taxonomies", taxonomies}, {"recipes", recipes}};
}

Corpus Corpus::from_json(const nlohmann::json& doc, simcanon::IngredientLexicon lexicon) {
  try {
    std::vector<Taxonomy> taxonomies;
    for (const auto& t : doc.at("taxonomies")) {
      taxonomies.push_back({t.at("name").get<std::string>(), t.at("classes").get<std::vector<std::string>>()});
    }
    std::vector<Recipe> recipes;
    for (const auto& r : doc.at("recipes")) {
      Recipe recipe;
      recipe.id = RecipeId{r.at("id").get<std::uint32_t>()};
      recipe.title = r.at("title").get<std::string>();
      for (const auto& id : r.at("ingredients")) recipe.ingredient_ids.push_back(IngredientId{id.get<std::uint32_t>()});
      for (const auto& [tax, classes] : r.at("labels").items()) {
        recipe.labels[tax] = classes.get<std::vector<std::string>>();
      }
      recipes.push_back(std::move(recipe));
    }
    return Corpus(std::move(recipes), std::move(lexicon), std::move(taxonomies));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed corpus document: ") + e.what());
  }
}

std::vector<ClassStats> corpus_stats(const Corpus& corpus) {
  std::vector<ClassStats> rows;
  for (const auto& tax : corpus.taxonomies()) {
    for (const auto& cls : tax.classes) {
      std::size_t count = 0;
      std::size_t total = 0;
      for (const auto& r : corpus.recipes()) {
        const auto& labels = r.labels_for(tax.name);
        if (std::find(labels.begin(), labels.end(), cls) == labels.end()) continue;
        ++count;
        total += r.ingredient_ids.size();
      }
      if (count == 0) continue;
      rows.push_back({tax.name, cls, count, static_cast<double>(total) / static_cast<double>(count)});
    }
  }
  return rows;
}

void write_stats_csv(std::ostream& out, std::span<const ClassStats> rows) {
  out << "taxonomy,class,recipe_count,mean_ingredients\n";
  for (const auto& row : rows) {
    std::ostringstream mean;
    mean << std::fixed << std::setprecision(4) << row.mean_ingredients;
    out << csv_escape(row.taxonomy) << ',' << csv_escape(row.class_name) << ',' << row.recipe_count << ','
        << mean.str() << '\n';
  }
}

}  // namespace recipenet::corpus
