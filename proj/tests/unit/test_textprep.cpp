#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "recipenet/textprep.hpp"

using namespace recipenet;
using namespace recipenet::textprep;

namespace {

// Character-class rule for clean text, checked independently of is_clean_text.
bool well_formed(const std::string& s) {
  if (s.empty() || s.front() == ' ' || s.back() == ' ') return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == ' ') {
      if (s[i + 1] == ' ') return false;
    } else if (c < 'a' || c > 'z') {
      return false;
    }
  }
  return true;
}

PrepConfig only(std::initializer_list<const char*> units) {
  PrepConfig cfg;
  for (auto u : units) cfg.units.insert(u);
  return cfg;
}

}  // namespace

TEST(Segment, KeepsHeadSegment) {
  EXPECT_EQ(segment_ingredient_line("tomatoes, diced"), std::vector<std::string>{"tomatoes"});
  EXPECT_EQ(segment_ingredient_line("garlic"), std::vector<std::string>{"garlic"});
  EXPECT_TRUE(segment_ingredient_line(",,").empty());
  EXPECT_TRUE(segment_ingredient_line("  , basil").empty());
}

TEST(StripParentheticals, Examples) {
  EXPECT_EQ(strip_parentheticals("butter (softened)"), "butter ");
  EXPECT_EQ(strip_parentheticals("salt"), "salt");
  EXPECT_EQ(strip_parentheticals("a(b(c)d)e"), "ae");
  EXPECT_EQ(strip_parentheticals("milk (whole"), "milk ");
  EXPECT_EQ(strip_parentheticals("x) y"), "x) y");
}

TEST(Clean, HandTracedFlourLine) {
  // lowercase -> no parens -> head "2 cups all-purpose flour" -> "  cups all purpose flour"
  // -> drop "cups" (unit) and "all" (stopword) -> "purpose flour"
  EXPECT_EQ(clean("2 cups all-purpose flour, sifted", PrepConfig::defaults()), "purpose flour");
}

TEST(Clean, CaseAndWhitespace) { EXPECT_EQ(clean("  Garlic  ", PrepConfig::defaults()), "garlic"); }

TEST(Clean, EverythingFilteredIsAbsent) {
  EXPECT_EQ(clean("1 (14 oz) can", only({"oz", "can"})), std::nullopt);
  EXPECT_EQ(clean("", PrepConfig::defaults()), std::nullopt);
  EXPECT_EQ(clean("3 x", PrepConfig::defaults()), std::nullopt);
}

TEST(Clean, MinTokenLengthIsConfigurable) {
  PrepConfig cfg;
  cfg.min_token_len = 4;
  EXPECT_EQ(clean("red bell pepper", cfg), "bell pepper");
  cfg.min_token_len = 1;
  EXPECT_EQ(clean("x y", cfg), "x y");
}

TEST(Clean, FuzzKeepsInvariantAndIsIdempotent) {
  const auto cfg = PrepConfig::defaults();
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> len(0, 40);
  const std::string alphabet = "abc XYZ,()-123 and cups\t\n";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int i = 0; i < 20000; ++i) {
    std::string s;
    const int n = len(rng);
    for (int k = 0; k < n; ++k) s += (i % 2) ? static_cast<char>(byte(rng)) : alphabet[pick(rng)];
    auto out = clean(s, cfg);
    if (!out) continue;
    ASSERT_TRUE(well_formed(*out)) << "input: " << s;
    ASSERT_TRUE(is_clean_text(*out));
    ASSERT_EQ(clean(*out, cfg), out) << "input: " << s;
  }
}

TEST(IsCleanText, RejectsMalformed) {
  EXPECT_TRUE(is_clean_text("olive oil"));
  EXPECT_FALSE(is_clean_text(""));
  EXPECT_FALSE(is_clean_text(" olive"));
  EXPECT_FALSE(is_clean_text("olive  oil"));
  EXPECT_FALSE(is_clean_text("Olive"));
  EXPECT_FALSE(is_clean_text("oil2"));
}

TEST(PrepCorpus, DeduplicatesAndDrops) {
  std::vector<corpus::RawRecipe> raw{
      {"Syrup", {"1 cup sugar", "sugar"}, {}},
      {"Nothing", {"2 cups", "(optional)"}, {}},
  };
  auto out = prep_corpus(raw, PrepConfig::defaults());
  ASSERT_EQ(out.recipes.size(), 1u);
  EXPECT_EQ(out.recipes[0].ingredients, std::vector<std::string>{"sugar"});
  EXPECT_EQ(out.dropped, 1u);
  EXPECT_TRUE(prep_corpus({}, PrepConfig::defaults()).recipes.empty());
}

TEST(PrepCorpus, NeverGrowsAndNeverEmpty) {
  std::vector<corpus::RawRecipe> raw;
  for (int i = 0; i < 50; ++i) raw.push_back({"r", {std::to_string(i) + " cups", i % 3 ? "basil" : "2 tsp"}, {}});
  auto out = prep_corpus(raw, PrepConfig::defaults());
  EXPECT_LE(out.recipes.size(), raw.size());
  EXPECT_EQ(out.recipes.size() + out.dropped, raw.size());
  for (const auto& r : out.recipes) EXPECT_FALSE(r.ingredients.empty());
}

TEST(TokenLists, ReadCommentsAndCase) {
  std::istringstream in("# units\nCup\n\n  tsp  # teaspoon\n");
  auto tokens = read_token_list(in);
  EXPECT_EQ(tokens, (TokenSet{"cup", "tsp"}));
  std::istringstream bad("two words\n");
  EXPECT_THROW(read_token_list(bad), ParseError);
}

TEST(TokenLists, ShippedFilesMatchBuiltins) {
  const auto dir = fixtures::source_dir() / "core" / "data";
  auto sw = load_token_list(dir / "stopwords.txt");
  auto un = load_token_list(dir / "units.txt");
  EXPECT_EQ(sw, PrepConfig::defaults().stopwords);
  EXPECT_EQ(un, PrepConfig::defaults().units);
  EXPECT_TRUE(sw.count("all"));
  for (const char* u : {"cup", "cups", "teaspoon", "tsp", "tablespoon", "tbsp", "ounce", "oz", "pound", "lb", "gram",
                        "g", "kg", "ml", "liter", "l", "pinch", "dash", "can", "package", "slice", "clove"}) {
    EXPECT_TRUE(un.count(u)) << u;
  }
}
