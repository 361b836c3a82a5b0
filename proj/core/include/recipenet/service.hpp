#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "recipenet/common.hpp"
#include "recipenet/pipeline.hpp"

/// JSON API over a loaded artifact bundle, plus a small HTTP front end.
namespace recipenet::service {

enum class ErrorCode { bad_request, unknown_ingredient, not_ready, internal };

std::string_view to_string(ErrorCode code);
int http_status(ErrorCode code);

class ApiError : public Error {
 public:
  ApiError(ErrorCode code, const std::string& message, nlohmann::json details = nullptr, int status = 0);

  ErrorCode code() const { return code_; }
  const nlohmann::json& details() const { return details_; }
  int status() const { return status_; }

  /// {"code", "message", "details"}; details is null when absent.
  nlohmann::json to_json() const;

 private:
  ErrorCode code_;
  nlohmann::json details_;
  int status_;
};

struct Resolution {
  ItemSet ids;
  std::vector<std::string> unresolved;  ///< raw strings, input order, no repeats
};

/// Cleans each raw string with the bundle's prep settings and resolves it
/// through the lexicon.
Resolution resolve_ingredients(const pipeline::Bundle& bundle, std::span<const std::string> raw);

/// Lowercase, non-letters to spaces, runs of spaces collapsed, trimmed.
std::string normalize_prefix(std::string_view prefix);

inline constexpr std::size_t kMaxIngredientMatches = 25;

struct Response {
  int status = 200;
  std::string body;
};

/// Transport-free request handlers. The bundle is installed once; until then
/// every data endpoint answers not_ready and health reports "loading".
class Api {
 public:
  Api() = default;
  explicit Api(std::shared_ptr<const pipeline::Bundle> bundle);

  Api(const Api&) = delete;
  Api& operator=(const Api&) = delete;

  /// Throws std::logic_error when a bundle is already installed.
  void install(std::shared_ptr<const pipeline::Bundle> bundle);
  bool ready() const { return bundle_.load(std::memory_order_acquire) != nullptr; }

  nlohmann::json recommend(const nlohmann::json& body) const;
  nlohmann::json classify(const nlohmann::json& body, double threshold = recipenet::classify::kAssignThreshold) const;
  nlohmann::json ingredients(std::string_view prefix) const;
  nlohmann::json health() const;

  /// Routes one request and renders either the result or an ApiError body.
  Response handle(std::string_view method, std::string_view path, const std::map<std::string, std::string>& query,
                  std::string_view body) const;

 private:
  const pipeline::Bundle& bundle() const;

  std::shared_ptr<const pipeline::Bundle> owner_;
  std::atomic<const pipeline::Bundle*> bundle_{nullptr};
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin = "*";
};

class Server {
 public:
  Server(const Api& api, ServerOptions options);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds the socket; throws Error with a readable message when the port is
  /// taken. Port 0 picks a free port.
  void bind();
  int port() const;
  /// Blocks until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace recipenet::service
