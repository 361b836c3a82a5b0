#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "recipenet/corpus.hpp"
#include "recipenet/pipeline.hpp"
#include "recipenet/simcanon.hpp"

namespace fixtures {

std::filesystem::path source_dir();
std::filesystem::path sample_dir();

/// Fresh empty directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

/// Lexicon over "i00", "i01", ... with no aliases beyond the names.
recipenet::simcanon::IngredientLexicon numbered_lexicon(std::size_t n);

/// Random corpus over a numbered lexicon; each recipe has 1..max_len items and
/// one "cuisines" label drawn from three classes.
recipenet::corpus::Corpus random_corpus(std::mt19937_64& rng, std::size_t items, std::size_t recipes,
                                        std::size_t max_len);

/// The shipped default config, writing to `output_dir`.
recipenet::pipeline::PipelineConfig sample_config(const std::filesystem::path& output_dir);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fixtures
