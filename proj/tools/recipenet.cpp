#include <CLI11.hpp>
#include <json.hpp>

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "recipenet/classify.hpp"
#include "recipenet/corpus.hpp"
#include "recipenet/pipeline.hpp"
#include "recipenet/rulemine.hpp"
#include "recipenet/service.hpp"
#include "recipenet/textprep.hpp"

namespace {

using namespace recipenet;
using nlohmann::json;

enum Exit { kOk = 0, kRuntime = 1, kUsage = 2 };

/// Thrown for input problems that should exit with the usage code.
struct UsageError : Error {
  using Error::Error;
};

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::shared_ptr<const pipeline::Bundle> load_bundle(const std::string& dir) {
  return std::make_shared<const pipeline::Bundle>(pipeline::load_artifacts(dir));
}

/// Runs an API call and turns its error body into an exit code.
int api_call(const std::function<json()>& call, const std::function<void(const json&)>& print) {
  try {
    print(call());
    return kOk;
  } catch (const service::ApiError& e) {
    std::cerr << "error: " << e.what();
    if (e.details().contains("unresolved")) std::cerr << " (unresolved: " << e.details()["unresolved"].dump() << ")";
    if (e.details().contains("conflicting")) std::cerr << " (" << e.details()["conflicting"].dump() << ")";
    std::cerr << "\n";
    return e.code() == service::ErrorCode::bad_request ? kUsage : kRuntime;
  }
}

double fraction_in_unit_interval(const std::string& text) {
  std::size_t used = 0;
  double v = std::stod(text, &used);
  if (used != text.size() || !(v > 0.0 && v <= 1.0)) throw std::invalid_argument(text);
  return v;
}

CLI::Validator open_unit_interval() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          fraction_in_unit_interval(s);
          return {};
        } catch (const std::exception&) {
          return "value " + s + " is outside (0, 1]";
        }
      },
      "(0,1]");
}

void print_recommend_table(const json& out) {
  std::cout << "rank,recipe_id,title,matched_combination_size,ingredient_count,matched_consequents,ingredients\n";
  for (const auto& r : out["recommendations"]) {
    std::vector<std::string> matched = r["matched_consequents"];
    std::vector<std::string> ingredients = r["ingredients"];
    std::cout << r["rank"].get<std::size_t>() << ',' << r["recipe_id"].get<std::uint32_t>() << ','
              << corpus::csv_escape(r["title"].get<std::string>()) << ','
              << r["score"]["matched_combination_size"].get<std::size_t>() << ','
              << r["score"]["ingredient_count"].get<std::size_t>() << ',' << corpus::csv_escape(join(matched, "|"))
              << ',' << corpus::csv_escape(join(ingredients, "|")) << '\n';
  }
  if (!out["unresolved"].empty()) std::cerr << "unresolved: " << out["unresolved"].dump() << "\n";
}

void print_classify_table(const json& out) {
  std::cout << "taxonomy,class,probability,assigned\n";
  for (const auto& [tax, result] : out["per_taxonomy"].items()) {
    const auto& assigned = result["assigned"];
    for (const auto& [cls, p] : result["probabilities"].items()) {
      bool is_assigned = std::find(assigned.begin(), assigned.end(), cls) != assigned.end();
      std::ostringstream prob;
      prob.setf(std::ios::fixed);
      prob.precision(6);
      prob << p.get<double>();
      std::cout << corpus::csv_escape(tax) << ',' << corpus::csv_escape(cls) << ',' << prob.str() << ','
                << (is_assigned ? 1 : 0) << '\n';
    }
  }
  if (!out["unresolved"].empty()) std::cerr << "unresolved: " << out["unresolved"].dump() << "\n";
}

json evaluation_json(const std::string& taxonomy, const classify::Evaluation& e) {
  return {{"taxonomy", taxonomy}, {"classes", e.classes}, {"confusion", e.confusion},
          {"total", e.total},     {"correct", e.correct}, {"accuracy", e.accuracy}};
}

int run_serve(const std::string& artifacts, const std::string& host, int port, const std::string& cors) {
  // Signals are taken synchronously by a watcher thread; every thread started
  // after this point inherits the blocked mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::Api api;
  service::Server server(api, {host, port, cors});
  try {
    server.bind();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  std::thread http([&] { server.run(); });

  int code = kOk;
  try {
    api.install(load_bundle(artifacts));
    std::cerr << "serving " << artifacts << " on http://" << host << ":" << server.port() << "\n";
    std::thread([&] {
      int sig = 0;
      sigwait(&signals, &sig);
      server.stop();
    }).detach();
  } catch (const std::exception& e) {
    std::cerr << "error: cannot load artifacts: " << e.what() << "\n";
    code = kRuntime;
    server.stop();
  }
  http.join();
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ingredient-driven recipe recommender"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "recipenet 0.3.0");

  // pipeline run
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Batch pipeline");
  pipeline_cmd->require_subcommand(1);
  auto* pipeline_run = pipeline_cmd->add_subcommand("run", "Run every stage and write artifacts");
  std::string config_path;
  std::string output_override;
  pipeline_run->add_option("--config", config_path, "Pipeline config file (JSON, comments allowed)")->required();
  pipeline_run->add_option("--output-dir", output_override, "Write artifacts here instead of the configured directory");

  // mine
  auto* mine_cmd = app.add_subcommand("mine", "Mine association rules from a transactions file");
  std::string transactions_path;
  double min_support = rulemine::kDefaultMinSupport;
  double min_confidence = rulemine::kDefaultMinConfidence;
  std::string algorithm = "apriori";
  std::size_t max_size = 0;
  bool mine_json = false;
  mine_cmd->add_option("--transactions", transactions_path, "One transaction per line, items separated by '|'")
      ->required()
      ->check(CLI::ExistingFile);
  mine_cmd->add_option("--min-support", min_support, "Minimum support")->check(open_unit_interval())
      ->capture_default_str();
  mine_cmd->add_option("--min-confidence", min_confidence, "Minimum confidence")->check(open_unit_interval())
      ->capture_default_str();
  mine_cmd->add_option("--algorithm", algorithm, "apriori | fp-growth")
      ->check(CLI::IsMember({"apriori", "fp-growth", "fp_growth", "fpgrowth"}))
      ->capture_default_str();
  mine_cmd->add_option("--max-size", max_size, "Largest itemset size (0 = unbounded)");
  mine_cmd->add_flag("--json", mine_json, "Emit JSON instead of CSV");

  // recommend
  auto* rec_cmd = app.add_subcommand("recommend", "Recommend recipes for a set of ingredients");
  std::string artifacts;
  std::vector<std::string> include;
  std::vector<std::string> exclude;
  std::size_t max_results = 20;
  bool rec_json = false;
  rec_cmd->add_option("--artifacts", artifacts, "Artifact directory")->envname("RECIPENET_ARTIFACTS")->required();
  rec_cmd->add_option("--ingredients", include, "Comma-separated ingredients")->delimiter(',')->required();
  rec_cmd->add_option("--exclude", exclude, "Comma-separated ingredients to avoid")->delimiter(',');
  rec_cmd->add_option("--max-results", max_results, "Result cap")->check(CLI::PositiveNumber)->capture_default_str();
  rec_cmd->add_flag("--json", rec_json, "Emit the service JSON document");

  // classify
  auto* cls_cmd = app.add_subcommand("classify", "Per-taxonomy class probabilities for an ingredient list");
  double threshold = classify::kAssignThreshold;
  bool cls_json = false;
  cls_cmd->add_option("--artifacts", artifacts, "Artifact directory")->envname("RECIPENET_ARTIFACTS")->required();
  cls_cmd->add_option("--ingredients", include, "Comma-separated ingredients")->delimiter(',')->required();
  cls_cmd->add_option("--threshold", threshold, "Multi-label assignment threshold")->check(open_unit_interval())
      ->capture_default_str();
  cls_cmd->add_flag("--json", cls_json, "Emit the service JSON document");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Accuracy and confusion matrix on a labelled test file");
  std::string taxonomy;
  std::string test_path;
  bool eval_json = false;
  eval_cmd->add_option("--artifacts", artifacts, "Artifact directory")->envname("RECIPENET_ARTIFACTS")->required();
  eval_cmd->add_option("--taxonomy", taxonomy, "cuisines | dietary | course")->required();
  eval_cmd->add_option("--test", test_path, "Labelled recipes (JSONL or CSV)")->required();
  eval_cmd->add_flag("--json", eval_json, "Emit JSON instead of CSV");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Per-class recipe counts and mean ingredient counts");
  std::string corpus_path;
  stats_cmd->add_option("--corpus", corpus_path, "Corpus file (JSONL or CSV)")->required()->check(CLI::ExistingFile);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors = "*";
  serve_cmd->add_option("--artifacts", artifacts, "Artifact directory")->envname("RECIPENET_ARTIFACTS")->required();
  serve_cmd->add_option("--port", port, "Port (0 picks a free one)")->envname("RECIPENET_PORT")
      ->check(CLI::Range(0, 65535))->capture_default_str();
  serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--cors-origin", cors, "Allowed CORS origin")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (pipeline_run->parsed()) {
      pipeline::PipelineConfig cfg;
      try {
        cfg = pipeline::PipelineConfig::load(config_path);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      if (!output_override.empty()) cfg.output_dir = std::filesystem::absolute(output_override);
      auto run = [&] {
        try {
          return pipeline::run_pipeline(cfg);
        } catch (const pipeline::StageError& e) {
          if (e.stage() == "config") throw UsageError(e.what());
          throw;
        }
      }();
      const auto& c = run.artifacts.counts;
      std::cout << "recipes=" << c.recipes << " ingredients=" << c.ingredients << " rules=" << c.rules;
      for (const auto& [tax, n] : c.classes) std::cout << ' ' << tax << "_classes=" << n;
      std::cout << " manifest_sha256=" << run.artifacts.manifest_hash << "\n";
      return kOk;
    }

    if (mine_cmd->parsed()) {
      auto named = rulemine::load_transactions(transactions_path);
      if (named.db.empty()) throw UsageError("transactions file '" + transactions_path + "' is empty");
      rulemine::MiningParams params;
      params.min_support = min_support;
      params.min_confidence = min_confidence;
      params.algorithm = rulemine::parse_algorithm(algorithm);
      if (max_size > 0) params.max_itemset_size = max_size;
      auto rules = rulemine::mine_rules(named.db, params);
      rulemine::ItemNames names(named.names);
      if (mine_json) {
        std::cout << rulemine::rules_to_json(rules, names).dump() << "\n";
      } else {
        rulemine::write_rules_csv(std::cout, rules, names);
      }
      return kOk;
    }

    if (rec_cmd->parsed()) {
      service::Api api(load_bundle(artifacts));
      json body{{"ingredients", include}, {"exclude", exclude}, {"max_results", max_results}};
      return api_call([&] { return api.recommend(body); },
                      [&](const json& out) {
                        if (rec_json) {
                          std::cout << out.dump() << "\n";
                        } else {
                          print_recommend_table(out);
                        }
                      });
    }

    if (cls_cmd->parsed()) {
      service::Api api(load_bundle(artifacts));
      json body{{"ingredients", include}};
      return api_call([&] { return api.classify(body, threshold); },
                      [&](const json& out) {
                        if (cls_json) {
                          std::cout << out.dump() << "\n";
                        } else {
                          print_classify_table(out);
                        }
                      });
    }

    if (eval_cmd->parsed()) {
      if (!std::filesystem::is_regular_file(test_path)) throw UsageError("test file '" + test_path + "' does not exist");
      auto bundle = load_bundle(artifacts);
      const auto* model = bundle->model_for(taxonomy);
      if (!model) throw UsageError("no model for taxonomy '" + taxonomy + "'");
      auto raw = corpus::load_corpus(test_path, corpus::format_for_path(test_path));
      if (raw.empty()) throw UsageError("test file '" + test_path + "' contains no recipes");
      auto held_out = pipeline::bind_recipes(*bundle, raw);
      auto eval = classify::evaluate(*model, held_out);
      if (eval_json) {
        std::cout << evaluation_json(taxonomy, eval).dump() << "\n";
      } else {
        classify::write_evaluation_csv(std::cout, eval);
      }
      return kOk;
    }

    if (stats_cmd->parsed()) {
      pipeline::PipelineConfig defaults;
      auto raw = corpus::load_corpus(corpus_path, corpus::format_for_path(corpus_path), defaults.taxonomies);
      auto built = pipeline::build_corpus(raw, defaults.prep_config(), defaults.metric, defaults.merge_threshold,
                                          defaults.taxonomies);
      corpus::write_stats_csv(std::cout, corpus::corpus_stats(built));
      return kOk;
    }

    if (serve_cmd->parsed()) return run_serve(artifacts, host, port, cors);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
