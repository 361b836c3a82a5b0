#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace fixtures {

namespace fs = std::filesystem;
using namespace recipenet;

fs::path source_dir() { return RECIPENET_SOURCE_DIR; }
fs::path sample_dir() { return RECIPENET_SAMPLE_DIR; }

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("recipenet-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

simcanon::IngredientLexicon numbered_lexicon(std::size_t n) {
  std::vector<std::string> names;
  simcanon::IngredientLexicon::AliasMap alias;
  for (std::size_t i = 0; i < n; ++i) {
    std::string name = (i < 10 ? "i0" : "i") + std::to_string(i);
    alias.emplace(name, IngredientId{static_cast<std::uint32_t>(i)});
    names.push_back(std::move(name));
  }
  return simcanon::IngredientLexicon(std::move(names), std::move(alias), simcanon::Metric::cosine_tokens, 0.85);
}

corpus::Corpus random_corpus(std::mt19937_64& rng, std::size_t items, std::size_t recipes, std::size_t max_len) {
  static const std::vector<std::string> classes{"A", "B", "C"};
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<std::uint32_t> item(0, static_cast<std::uint32_t>(items - 1));
  std::uniform_int_distribution<std::size_t> cls(0, classes.size() - 1);
  std::vector<corpus::Recipe> out;
  for (std::size_t r = 0; r < recipes; ++r) {
    std::vector<IngredientId> ids;
    for (std::size_t k = len(rng); k > 0; --k) ids.push_back(IngredientId{item(rng)});
    out.push_back({corpus::RecipeId{static_cast<std::uint32_t>(r)}, "recipe " + std::to_string(r),
                   make_item_set(std::move(ids)), {{"cuisines", {classes[cls(rng)]}}}});
  }
  return corpus::Corpus(std::move(out), numbered_lexicon(items), {{"cuisines", classes}});
}

pipeline::PipelineConfig sample_config(const fs::path& output_dir) {
  auto cfg = pipeline::PipelineConfig::load(source_dir() / "config" / "default_pipeline.json");
  cfg.output_dir = output_dir;
  return cfg;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace fixtures
