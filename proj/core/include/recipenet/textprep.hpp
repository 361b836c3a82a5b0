#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recipenet/corpus.hpp"

/// Raw ingredient line -> clean ingredient name.
namespace recipenet::textprep {

using TokenSet = std::set<std::string, std::less<>>;

struct PrepConfig {
  TokenSet stopwords;
  TokenSet units;
  std::size_t min_token_len = 2;

  /// Built-in English stopwords and measurement units.
  static PrepConfig defaults();
  static PrepConfig from_files(const std::filesystem::path& stopwords, const std::filesystem::path& units,
                               std::size_t min_token_len = 2);
};

const std::vector<std::string_view>& builtin_stopwords();
const std::vector<std::string_view>& builtin_units();

/// One lowercase token per line; '#' starts a comment; blank lines ignored.
TokenSet read_token_list(std::istream& in);
TokenSet load_token_list(const std::filesystem::path& path);

/// Keeps the text before the first comma. Returns nothing when that head is blank.
std::vector<std::string> segment_ingredient_line(std::string_view line);

/// Removes every "(...)" span including nested pairs; an unbalanced "(" removes
/// through the end of the string.
std::string strip_parentheticals(std::string_view text);

/// lowercase -> drop parentheticals -> comma head -> non-letters to spaces ->
/// drop stopwords, units and short tokens -> single-space join.
/// Empty result is reported as nullopt.
std::optional<std::string> clean(std::string_view line, const PrepConfig& cfg);

/// True when `text` is non-empty lowercase a-z words separated by single spaces.
bool is_clean_text(std::string_view text);

struct PrepResult {
  std::vector<corpus::PreparedRecipe> recipes;
  std::size_t dropped = 0;
};

/// Cleans every ingredient line, deduplicates per recipe (first occurrence
/// wins), and drops recipes left with no ingredients.
PrepResult prep_corpus(std::span<const corpus::RawRecipe> raw, const PrepConfig& cfg);

}  // namespace recipenet::textprep
