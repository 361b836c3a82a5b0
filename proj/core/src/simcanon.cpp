#include "recipenet/simcanon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

namespace recipenet::simcanon {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned> rank_;
};

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::jaccard_tokens:
      return "jaccard_tokens";
    case Metric::cosine_tokens:
      return "cosine_tokens";
    case Metric::jaro_winkler:
      return "jaro_winkler";
  }
  return "unknown";
}

Metric parse_metric(std::string_view text) {
  if (text == "jaccard" || text == "jaccard_tokens") return Metric::jaccard_tokens;
  if (text == "cosine" || text == "cosine_tokens") return Metric::cosine_tokens;
  if (text == "jaro_winkler" || text == "jaro-winkler") return Metric::jaro_winkler;
  throw ConfigError("unknown similarity metric '" + std::string(text) + "'");
}

double jaccard(std::string_view a, std::string_view b) {
  auto ta = split_tokens(a);
  auto tb = split_tokens(b);
  std::set<std::string> sa(ta.begin(), ta.end());
  std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  std::size_t uni = sa.size() + sb.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

double cosine(std::string_view a, std::string_view b) {
  std::map<std::string, long> va;
  std::map<std::string, long> vb;
  for (auto& t : split_tokens(a)) ++va[t];
  for (auto& t : split_tokens(b)) ++vb[t];
  if (va.empty() || vb.empty()) return 0.0;
  long dot = 0;
  long na = 0;
  long nb = 0;
  for (const auto& [tok, c] : va) {
    na += c * c;
    if (auto it = vb.find(tok); it != vb.end()) dot += c * it->second;
  }
  for (const auto& [tok, c] : vb) nb += c * c;
  if (dot == 0) return 0.0;
  if (na == nb && dot == na) return 1.0;
  double score = static_cast<double>(dot) / std::sqrt(static_cast<double>(na) * static_cast<double>(nb));
  return std::clamp(score, 0.0, 1.0);
}

double jaro(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  if (a == b) return 1.0;

  const std::size_t longest = std::max(a.size(), b.size());
  const std::size_t window = longest / 2 >= 1 ? longest / 2 - 1 : 0;

  std::vector<bool> a_matched(a.size(), false);
  std::vector<bool> b_matched(b.size(), false);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::size_t lo = i >= window ? i - window : 0;
    std::size_t hi = std::min(b.size(), i + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (b_matched[j] || a[i] != b[j]) continue;
      a_matched[i] = true;
      b_matched[j] = true;
      ++matches;
      break;
    }
  }
  if (matches == 0) return 0.0;

  std::size_t half_transpositions = 0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a_matched[i]) continue;
    while (!b_matched[k]) ++k;
    if (a[i] != b[k]) ++half_transpositions;
    ++k;
  }
  const double m = static_cast<double>(matches);
  const double t = static_cast<double>(half_transpositions) / 2.0;
  return (m / static_cast<double>(a.size()) + m / static_cast<double>(b.size()) + (m - t) / m) / 3.0;
}

double jaro_winkler(std::string_view a, std::string_view b) {
  const double j = jaro(a, b);
  std::size_t prefix = 0;
  const std::size_t limit = std::min<std::size_t>({4, a.size(), b.size()});
  while (prefix < limit && a[prefix] == b[prefix]) ++prefix;
  return std::clamp(j + static_cast<double>(prefix) * 0.1 * (1.0 - j), 0.0, 1.0);
}

double similarity(Metric metric, std::string_view a, std::string_view b) {
  switch (metric) {
    case Metric::jaccard_tokens:
      return jaccard(a, b);
    case Metric::cosine_tokens:
      return cosine(a, b);
    case Metric::jaro_winkler:
      return jaro_winkler(a, b);
  }
  return 0.0;
}

IngredientLexicon::IngredientLexicon(std::vector<std::string> canon, AliasMap alias, Metric metric,
                                     double threshold)
    : canon_(std::move(canon)), alias_(std::move(alias)), metric_(metric), threshold_(threshold) {
  if (!(threshold_ > 0.0 && threshold_ <= 1.0)) {
    throw ConfigError("similarity threshold must lie in (0, 1], got " + std::to_string(threshold_));
  }
  for (const auto& [text, id] : alias_) {
    if (!contains(id)) {
      throw ValidationError("alias '" + text + "' targets unknown canonical id " + std::to_string(id.value));
    }
  }
  for (std::size_t k = 0; k < canon_.size(); ++k) {
    auto it = alias_.find(canon_[k]);
    if (it == alias_.end() || it->second.value != k) {
      throw ValidationError("canonical name '" + canon_[k] + "' is not an alias of its own id");
    }
  }
}

const std::string& IngredientLexicon::name(IngredientId id) const {
  if (!contains(id)) throw ValidationError("unknown ingredient id " + std::to_string(id.value));
  return canon_[id.value];
}

std::optional<IngredientId> IngredientLexicon::find(std::string_view clean_text) const {
  if (auto it = alias_.find(clean_text); it != alias_.end()) return it->second;
  return std::nullopt;
}

std::optional<IngredientId> IngredientLexicon::resolve(std::string_view clean_text) const {
  if (auto hit = find(clean_text)) return hit;
  if (clean_text.empty()) return std::nullopt;
  double best = -1.0;
  std::optional<IngredientId> best_id;
  for (const auto& [text, id] : alias_) {
    double score = similarity(metric_, clean_text, text);
    if (score > best) {
      best = score;
      best_id = id;
    }
  }
  if (best_id && best >= threshold_) return best_id;
  return std::nullopt;
}

std::optional<IngredientId> IngredientLexicon::id_of(std::string_view canonical_name) const {
  auto hit = find(canonical_name);
  if (hit && canon_[hit->value] == canonical_name) return hit;
  return std::nullopt;
}

nlohmann::json IngredientLexicon::to_json() const {
  nlohmann::json canon = nlohmann::json::object();
  for (std::size_t k = 0; k < canon_.size(); ++k) canon[std::to_string(k)] = canon_[k];
  nlohmann::json alias = nlohmann::json::object();
  for (const auto& [text, id] : alias_) alias[text] = id.value;
  return {{"canon", canon},
          {"alias", alias},
          {"metric", std::string(to_string(metric_))},
          {"threshold", threshold_}};
}

IngredientLexicon IngredientLexicon::from_json(const nlohmann::json& doc) {
  try {
    const auto& canon_doc = doc.at("canon");
    std::vector<std::string> canon(canon_doc.size());
    std::vector<bool> seen(canon_doc.size(), false);
    for (const auto& [key, value] : canon_doc.items()) {
      std::size_t pos = 0;
      unsigned long idx = std::stoul(key, &pos);
      if (pos != key.size() || idx >= canon.size() || seen[idx]) {
        throw ParseError("lexicon canon ids must be dense 0..n-1, got '" + key + "'");
      }
      seen[idx] = true;
      canon[idx] = value.get<std::string>();
    }
    AliasMap alias;
    for (const auto& [key, value] : doc.at("alias").items()) {
      alias.emplace(key, IngredientId{value.get<std::uint32_t>()});
    }
    Metric metric = doc.contains("metric") ? parse_metric(doc["metric"].get<std::string>())
                                           : Metric::cosine_tokens;
    double threshold = doc.value("threshold", kDefaultMergeThreshold);
    return IngredientLexicon(std::move(canon), std::move(alias), metric, threshold);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed lexicon document: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ParseError("malformed lexicon document: non-numeric canonical id");
  }
}

IngredientLexicon canonicalize(std::span<const WeightedIngredient> ingredients, Metric metric,
                               double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ConfigError("similarity threshold must lie in (0, 1], got " + std::to_string(threshold));
  }

  // Sorted, merged input keeps ids independent of caller order.
  std::map<std::string, std::size_t> merged;
  for (const auto& ing : ingredients) {
    if (ing.text.empty()) continue;
    merged[ing.text] += std::max<std::size_t>(ing.count, 1);
  }
  std::vector<std::string> texts;
  std::vector<std::size_t> counts;
  for (auto& [text, count] : merged) {
    texts.push_back(text);
    counts.push_back(count);
  }
  const std::size_t n = texts.size();

  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (similarity(metric, texts[i], texts[j]) >= threshold) sets.unite(i, j);
    }
  }

  // Members are pushed in sorted order, so clusters come out ordered by their
  // smallest member.
  std::vector<std::vector<std::size_t>> clusters;
  std::unordered_map<std::size_t, std::size_t> root_to_cluster;
  for (std::size_t i = 0; i < n; ++i) {
    auto root = sets.find(i);
    auto [it, inserted] = root_to_cluster.emplace(root, clusters.size());
    if (inserted) clusters.emplace_back();
    clusters[it->second].push_back(i);
  }

  std::set<std::string> taken;
  std::vector<std::string> names(clusters.size());
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto& members = clusters[c];
    std::size_t rep = members.front();
    for (auto m : members) {
      if (counts[m] > counts[rep]) rep = m;
    }

    std::vector<std::string> shared;
    for (const auto& tok : split_tokens(texts[rep])) {
      if (std::find(shared.begin(), shared.end(), tok) != shared.end()) continue;
      bool everywhere = std::all_of(members.begin(), members.end(), [&](std::size_t m) {
        auto toks = split_tokens(texts[m]);
        return std::find(toks.begin(), toks.end(), tok) != toks.end();
      });
      if (everywhere) shared.push_back(tok);
    }

    std::string name = shared.empty() ? texts[rep] : join(shared);
    bool foreign_member = false;
    if (auto it = merged.find(name); it != merged.end()) {
      auto idx = static_cast<std::size_t>(std::distance(merged.begin(), it));
      foreign_member = sets.find(idx) != sets.find(members.front());
    }
    if (taken.count(name) != 0 || foreign_member) name = texts[rep];
    taken.insert(name);
    names[c] = std::move(name);
  }

  std::vector<std::size_t> order(clusters.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return names[x] < names[y]; });

  std::vector<std::string> canon;
  IngredientLexicon::AliasMap alias;
  for (std::size_t k = 0; k < order.size(); ++k) {
    IngredientId id{static_cast<std::uint32_t>(k)};
    const auto c = order[k];
    canon.push_back(names[c]);
    alias.emplace(names[c], id);
    for (auto m : clusters[c]) alias.emplace(texts[m], id);
  }
  return IngredientLexicon(std::move(canon), std::move(alias), metric, threshold);
}

IngredientLexicon canonicalize(std::span<const std::string> ingredients, Metric metric, double threshold) {
  std::vector<WeightedIngredient> weighted;
  weighted.reserve(ingredients.size());
  for (const auto& text : ingredients) weighted.push_back({text, 1});
  return canonicalize(std::span<const WeightedIngredient>(weighted), metric, threshold);
}

}  // namespace recipenet::simcanon
