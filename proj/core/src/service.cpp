#include "recipenet/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

#include "recipenet/classify.hpp"
#include "recipenet/ingnet.hpp"
#include "recipenet/recommend.hpp"
#include "recipenet/textprep.hpp"

namespace recipenet::service {

using nlohmann::json;

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::bad_request: return "bad_request";
    case ErrorCode::unknown_ingredient: return "unknown_ingredient";
    case ErrorCode::not_ready: return "not_ready";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::bad_request: return 400;
    case ErrorCode::unknown_ingredient: return 422;
    case ErrorCode::not_ready: return 503;
    case ErrorCode::internal: return 500;
  }
  return 500;
}

ApiError::ApiError(ErrorCode code, const std::string& message, json details, int status)
    : Error(message), code_(code), details_(std::move(details)), status_(status ? status : http_status(code)) {}

json ApiError::to_json() const {
  return {{"code", std::string(to_string(code_))}, {"message", what()}, {"details", details_}};
}

namespace {

std::vector<std::string> string_list(const json& body, const char* key, bool required) {
  if (!body.contains(key)) {
    if (required) throw ApiError(ErrorCode::bad_request, std::string("missing field '") + key + "'");
    return {};
  }
  const auto& v = body[key];
  if (!v.is_array()) throw ApiError(ErrorCode::bad_request, std::string("field '") + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string()) {
      throw ApiError(ErrorCode::bad_request, std::string("field '") + key + "' must contain only strings");
    }
    out.push_back(s.get<std::string>());
  }
  return out;
}

void require_object(const json& body) {
  if (!body.is_object()) throw ApiError(ErrorCode::bad_request, "request body must be a JSON object");
}

json named_ids(const simcanon::IngredientLexicon& lexicon, const ItemSet& ids) {
  json out = json::array();
  for (auto id : ids) out.push_back({{"id", id.value}, {"name", lexicon.name(id)}});
  return out;
}

json names_of(const simcanon::IngredientLexicon& lexicon, const ItemSet& ids) {
  json out = json::array();
  for (auto id : ids) out.push_back(lexicon.name(id));
  return out;
}

/// Resolves `raw`; when nothing resolves, fails with the offending strings.
Resolution resolve_required(const pipeline::Bundle& bundle, const std::vector<std::string>& raw) {
  if (raw.empty()) throw ApiError(ErrorCode::bad_request, "ingredients must not be empty");
  auto res = resolve_ingredients(bundle, raw);
  if (res.ids.empty()) {
    throw ApiError(ErrorCode::unknown_ingredient, "none of the ingredients could be resolved",
                   json{{"unresolved", res.unresolved}});
  }
  return res;
}

}  // namespace

Resolution resolve_ingredients(const pipeline::Bundle& bundle, std::span<const std::string> raw) {
  Resolution res;
  std::vector<IngredientId> ids;
  for (const auto& text : raw) {
    std::optional<IngredientId> id;
    if (auto clean = textprep::clean(text, bundle.prep)) id = bundle.corpus.lexicon().resolve(*clean);
    if (id) {
      ids.push_back(*id);
    } else if (std::find(res.unresolved.begin(), res.unresolved.end(), text) == res.unresolved.end()) {
      res.unresolved.push_back(text);
    }
  }
  res.ids = make_item_set(std::move(ids));
  return res;
}

std::string normalize_prefix(std::string_view prefix) {
  std::string out;
  bool space = false;
  for (char ch : prefix) {
    auto c = static_cast<unsigned char>(ch);
    if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    if (c >= 'a' && c <= 'z') {
      if (space && !out.empty()) out.push_back(' ');
      space = false;
      out.push_back(static_cast<char>(c));
    } else {
      space = true;
    }
  }
  return out;
}

Api::Api(std::shared_ptr<const pipeline::Bundle> bundle) { install(std::move(bundle)); }

void Api::install(std::shared_ptr<const pipeline::Bundle> bundle) {
  if (!bundle) throw std::invalid_argument("null bundle");
  if (ready()) throw std::logic_error("artifact bundle already installed");
  owner_ = std::move(bundle);
  bundle_.store(owner_.get(), std::memory_order_release);
}

const pipeline::Bundle& Api::bundle() const {
  const auto* b = bundle_.load(std::memory_order_acquire);
  if (!b) throw ApiError(ErrorCode::not_ready, "artifacts are still loading");
  return *b;
}

json Api::recommend(const json& body) const {
  const auto& b = bundle();
  require_object(body);
  const auto include_raw = string_list(body, "ingredients", true);
  const auto exclude_raw = string_list(body, "exclude", false);

  recipenet::recommend::RecommendQuery query;
  if (body.contains("max_results")) {
    const auto& m = body["max_results"];
    if (!m.is_number_integer() || m.get<long long>() < 1) {
      throw ApiError(ErrorCode::bad_request, "max_results must be a positive integer");
    }
    query.max_results = m.get<std::size_t>();
  }

  auto include = resolve_required(b, include_raw);
  auto exclude = resolve_ingredients(b, exclude_raw);
  const auto& lexicon = b.corpus.lexicon();
  if (auto both = set_intersection(include.ids, exclude.ids); !both.empty()) {
    throw ApiError(ErrorCode::bad_request, "an ingredient cannot be both included and excluded",
                   json{{"conflicting", names_of(lexicon, both)}});
  }
  query.include = include.ids;
  query.exclude = exclude.ids;

  std::vector<recipenet::recommend::Recommendation> recs;
  try {
    recs = recipenet::recommend::recommend(b.corpus, b.rules, query);
  } catch (const ValidationError& e) {
    throw ApiError(ErrorCode::bad_request, e.what());
  }

  json list = json::array();
  std::size_t rank = 1;
  for (const auto& r : recs) {
    json labels = json::object();
    for (const auto& [tax, classes] : r.recipe->labels) labels[tax] = classes;
    list.push_back({
        {"rank", rank++},
        {"recipe_id", r.recipe->id.value},
        {"title", r.recipe->title},
        {"ingredients", names_of(lexicon, r.recipe->ingredient_ids)},
        {"labels", labels},
        {"matched_consequents", names_of(lexicon, r.matched_consequents)},
        {"score",
         {{"matched_combination_size", r.matched_combination_size},
          {"ingredient_count", r.recipe->ingredient_ids.size()}}},
    });
  }

  std::vector<std::string> unresolved = include.unresolved;
  for (const auto& s : exclude.unresolved) {
    if (std::find(unresolved.begin(), unresolved.end(), s) == unresolved.end()) unresolved.push_back(s);
  }
  auto graph = ingnet::build_graph(std::span<const recipenet::recommend::Recommendation>(recs), query.include, lexicon);
  return {
      {"base", named_ids(lexicon, query.include)},
      {"excluded", named_ids(lexicon, query.exclude)},
      {"recommendations", list},
      {"network", ingnet::export_graph(graph)},
      {"unresolved", unresolved},
  };
}

json Api::classify(const json& body, double threshold) const {
  const auto& b = bundle();
  require_object(body);
  auto res = resolve_required(b, string_list(body, "ingredients", true));

  json per = json::object();
  for (const auto& model : b.models) {
    auto result = recipenet::classify::predict_multilabel(model, res.ids, threshold);
    json probs = json::object();
    for (std::size_t i = 0; i < result.classes.size(); ++i) probs[result.classes[i]] = result.probabilities[i];
    per[model.taxonomy()] = {{"probabilities", probs}, {"assigned", result.assigned}};
  }
  return {{"per_taxonomy", per},
          {"resolved", named_ids(b.corpus.lexicon(), res.ids)},
          {"unresolved", res.unresolved}};
}

json Api::ingredients(std::string_view prefix) const {
  const auto& lexicon = bundle().corpus.lexicon();
  const auto want = normalize_prefix(prefix);
  json matches = json::array();
  // Ids follow name order, so a scan by id is already sorted.
  for (std::uint32_t i = 0; i < lexicon.size() && matches.size() < kMaxIngredientMatches; ++i) {
    const auto& name = lexicon.name(IngredientId{i});
    if (name.compare(0, want.size(), want) == 0) matches.push_back({{"id", i}, {"name", name}});
  }
  return {{"matches", matches}};
}

json Api::health() const {
  const auto* b = bundle_.load(std::memory_order_acquire);
  if (!b) return {{"status", "loading"}, {"artifact_manifest_hash", nullptr}, {"counts", nullptr}};
  return {{"status", "ready"},
          {"artifact_manifest_hash", b->manifest_hash},
          {"counts",
           {{"recipes", b->corpus.size()}, {"rules", b->rules.size()}, {"ingredients", b->corpus.lexicon().size()}}}};
}

Response Api::handle(std::string_view method, std::string_view path, const std::map<std::string, std::string>& query,
                     std::string_view body) const {
  auto parse_body = [&] {
    try {
      return json::parse(body);
    } catch (const json::exception&) {
      throw ApiError(ErrorCode::bad_request, "request body is not valid JSON");
    }
  };
  try {
    json out;
    if (path == "/api/health" || path == "/api/ingredients") {
      if (method != "GET") throw ApiError(ErrorCode::bad_request, "method not allowed", nullptr, 405);
      if (path == "/api/health") {
        out = health();
      } else {
        auto it = query.find("prefix");
        out = ingredients(it == query.end() ? std::string_view{} : std::string_view(it->second));
      }
    } else if (path == "/api/recommend" || path == "/api/classify") {
      if (method != "POST") throw ApiError(ErrorCode::bad_request, "method not allowed", nullptr, 405);
      out = path == "/api/recommend" ? recommend(parse_body()) : classify(parse_body());
    } else {
      throw ApiError(ErrorCode::bad_request, "no such endpoint: " + std::string(path), nullptr, 404);
    }
    return {200, out.dump()};
  } catch (const ApiError& e) {
    return {e.status(), e.to_json().dump()};
  } catch (const std::exception& e) {
    return {500, ApiError(ErrorCode::internal, e.what()).to_json().dump()};
  }
}

struct Server::Impl {
  Impl(const Api& a, ServerOptions o) : api(a), options(std::move(o)) {}

  const Api& api;
  ServerOptions options;
  httplib::Server http;
  int bound_port = -1;
  std::mutex run_mutex;
  bool started = false;
  bool stop_requested = false;
};

Server::Server(const Api& api, ServerOptions options) : impl_(std::make_unique<Impl>(api, std::move(options))) {
  auto& http = impl_->http;
  const auto origin = impl_->options.cors_origin;

  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    auto out = impl_->api.handle(req.method, req.path, query, req.body);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  for (const char* path : {"/api/health", "/api/ingredients", "/api/recommend", "/api/classify"}) {
    http.Get(path, dispatch);
    http.Post(path, dispatch);
  }
  http.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  http.set_error_handler([this](const httplib::Request& req, httplib::Response& res) {
    if (res.body.empty()) {
      auto out = impl_->api.handle(req.method, req.path, {}, req.body);
      res.set_content(out.body, "application/json");
    }
  });
  http.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
  http.set_payload_max_length(1 << 20);
  // SO_REUSEPORT (httplib's default) would let a second server share the port.
  http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
}

Server::~Server() { stop(); }

void Server::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    impl_->bound_port = impl_->http.bind_to_any_port(o.host);
  } else if (impl_->http.bind_to_port(o.host, o.port)) {
    impl_->bound_port = o.port;
  }
  if (impl_->bound_port <= 0) {
    throw Error("cannot bind " + o.host + ":" + std::to_string(o.port) + " (port already in use or unavailable)");
  }
}

int Server::port() const { return impl_->bound_port; }

void Server::run() {
  if (impl_->bound_port <= 0) bind();
  {
    std::lock_guard lock(impl_->run_mutex);
    if (impl_->stop_requested) return;
    impl_->started = true;
  }
  impl_->http.listen_after_bind();
}

// A stop that races the start of run() must still end the loop, so wait for
// the listener to come up before shutting it down.
void Server::stop() {
  {
    std::lock_guard lock(impl_->run_mutex);
    impl_->stop_requested = true;
    if (!impl_->started) return;
  }
  impl_->http.wait_until_ready();
  impl_->http.stop();
}

}  // namespace recipenet::service
