#include "recipenet/textprep.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

namespace recipenet::textprep {

namespace {

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool is_lower_alpha(char c) { return c >= 'a' && c <= 'z'; }

std::string_view trim_view(std::string_view s) {
  const char* ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

// English stopwords (the alphabetic entries of the NLTK list). Contractions are
// omitted: apostrophes never survive cleaning, so their pieces are covered by
// the bare entries ("don", "t", ...).
const std::vector<std::string_view>& builtin_stopwords() {
  static const std::vector<std::string_view> words{
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours", "yourself",
      "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself", "it", "its", "itself",
      "they", "them", "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that", "these",
      "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has", "had", "having", "do",
      "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or", "because", "as", "until", "while",
      "of", "at", "by", "for", "with", "about", "against", "between", "into", "through", "during", "before",
      "after", "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over", "under", "again",
      "further", "then", "once", "here", "there", "when", "where", "why", "how", "all", "any", "both", "each",
      "few", "more", "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than",
      "too", "very", "s", "t", "can", "will", "just", "don", "should", "now", "d", "ll", "m", "o", "re", "ve",
      "y", "ain", "aren", "couldn", "didn", "doesn", "hadn", "hasn", "haven", "isn", "ma", "mightn", "mustn",
      "needn", "shan", "shouldn", "wasn", "weren", "won", "wouldn"};
  return words;
}

const std::vector<std::string_view>& builtin_units() {
  static const std::vector<std::string_view> units{
      "cup",    "cups",     "teaspoon", "teaspoons", "tsp",     "tablespoon", "tablespoons", "tbsp",
      "ounce",  "ounces",   "oz",       "pound",     "pounds",  "lb",         "lbs",         "gram",
      "grams",  "g",        "kg",       "ml",        "liter",   "liters",     "l",           "pinch",
      "pinches", "dash",    "dashes",   "can",       "cans",    "package",    "packages",    "slice",
      "slices", "clove",    "cloves"};
  return units;
}

PrepConfig PrepConfig::defaults() {
  PrepConfig cfg;
  for (auto w : builtin_stopwords()) cfg.stopwords.emplace(w);
  for (auto u : builtin_units()) cfg.units.emplace(u);
  return cfg;
}

PrepConfig PrepConfig::from_files(const std::filesystem::path& stopwords, const std::filesystem::path& units,
                                  std::size_t min_token_len) {
  PrepConfig cfg;
  cfg.stopwords = load_token_list(stopwords);
  cfg.units = load_token_list(units);
  cfg.min_token_len = min_token_len;
  return cfg;
}

TokenSet read_token_list(std::istream& in) {
  TokenSet out;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto tok = trim_view(line);
    if (tok.empty()) continue;
    std::string lowered(tok);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(), ascii_lower);
    if (lowered.find_first_of(" \t") != std::string::npos) {
      throw ParseError("token list entry '" + lowered + "' contains whitespace");
    }
    out.insert(std::move(lowered));
  }
  return out;
}

TokenSet load_token_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open token list '" + path.string() + "'");
  return read_token_list(in);
}

std::vector<std::string> segment_ingredient_line(std::string_view line) {
  auto head = trim_view(line.substr(0, line.find(',')));
  if (head.empty()) return {};
  return {std::string(head)};
}

std::string strip_parentheticals(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t depth = 0;
  for (char c : text) {
    if (c == '(') {
      ++depth;
    } else if (c == ')' && depth > 0) {
      --depth;
    } else if (depth == 0) {
      out += c;
    }
  }
  return out;
}

std::optional<std::string> clean(std::string_view line, const PrepConfig& cfg) {
  std::string lowered(line);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(), ascii_lower);
  auto segments = segment_ingredient_line(strip_parentheticals(lowered));
  if (segments.empty()) return std::nullopt;

  std::string letters = std::move(segments.front());
  for (auto& c : letters) {
    if (!is_lower_alpha(c)) c = ' ';
  }

  std::string out;
  std::size_t i = 0;
  while (i < letters.size()) {
    while (i < letters.size() && letters[i] == ' ') ++i;
    std::size_t start = i;
    while (i < letters.size() && letters[i] != ' ') ++i;
    if (i == start) continue;
    std::string_view token(letters.data() + start, i - start);
    if (token.size() < cfg.min_token_len) continue;
    if (cfg.stopwords.count(token) != 0 || cfg.units.count(token) != 0) continue;
    if (!out.empty()) out += ' ';
    out += token;
  }
  if (out.empty()) return std::nullopt;
  return out;
}

bool is_clean_text(std::string_view text) {
  if (text.empty() || text.front() == ' ' || text.back() == ' ') return false;
  char prev = 'a';
  for (char c : text) {
    if (c == ' ') {
      if (prev == ' ') return false;
    } else if (!is_lower_alpha(c)) {
      return false;
    }
    prev = c;
  }
  return true;
}

PrepResult prep_corpus(std::span<const corpus::RawRecipe> raw, const PrepConfig& cfg) {
  PrepResult result;
  for (const auto& recipe : raw) {
    corpus::PreparedRecipe prepared;
    prepared.title = recipe.title;
    prepared.labels = recipe.labels;
    for (const auto& line : recipe.ingredients) {
      auto cleaned = clean(line, cfg);
      if (!cleaned) continue;
      if (std::find(prepared.ingredients.begin(), prepared.ingredients.end(), *cleaned) ==
          prepared.ingredients.end()) {
        prepared.ingredients.push_back(std::move(*cleaned));
      }
    }
    if (prepared.ingredients.empty()) {
      ++result.dropped;
      continue;
    }
    result.recipes.push_back(std::move(prepared));
  }
  return result;
}

}  // namespace recipenet::textprep
