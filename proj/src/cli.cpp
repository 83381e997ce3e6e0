#include "hallu/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include <json.hpp>

#include "hallu/dataset.hpp"
#include "hallu/error.hpp"
#include "hallu/knowledge.hpp"
#include "hallu/llm.hpp"
#include "hallu/markers.hpp"
#include "hallu/mock_provider.hpp"
#include "hallu/pipeline.hpp"
#include "hallu/scorer.hpp"
#include "hallu/utf8.hpp"

namespace hallu {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct AnnotateFlags {
  std::string input;
  std::string output;
  std::string model;
  std::string provider;
  int runs = kDefaultRuns;
  double threshold = kDefaultThreshold;
  double min_similarity = kDefaultMinSimilarity;
  bool no_roles = false;
  bool no_external = false;
  std::string cache_dir;
  int max_parallel = 1;
  int max_parallel_runs = 4;
  double temperature = 1.0;
  std::string config;
  std::string prompts;
  std::string mock_script;
  std::string wiki_fixture;
  std::string base_url;
  std::string api_key_env;
  int rpm = 0;
  std::size_t max_extract_chars = 8000;
};

struct EvaluateFlags {
  std::string pred;
  std::string gold;
  std::string report;
};

struct InspectFlags {
  std::string pred;
  std::string gold;
  std::string id;
};

// Settings after merging defaults, config file and flags.
struct AnnotateSettings {
  PipelineConfig pipeline;
  std::string input;
  std::string output;
  std::string cache_dir;
  std::string prompts_dir;
  std::string mock_script;
  std::string wiki_fixture;
  std::size_t max_extract_chars = 8000;
};

std::string resolve_path(const std::string& value, const fs::path& base) {
  if (value.empty()) return value;
  fs::path p(value);
  return p.is_relative() ? (base / p).lexically_normal().string() : p.string();
}

// Precedence: flag given on the command line > config file > built-in default.
AnnotateSettings merge_settings(const AnnotateFlags& flags, const CLI::App& cmd) {
  AnnotateSettings s;
  auto& p = s.pipeline;
  std::string provider_name;
  json provider_obj = json::object();

  if (!flags.config.empty()) {
    std::ifstream in(flags.config);
    if (!in) throw ConfigError("cannot open config file " + flags.config);
    const auto doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw ConfigError("config file is not a JSON object");
    const auto base = fs::absolute(flags.config).parent_path();
    static const std::set<std::string> known = {
        "runs_n", "threshold", "min_similarity", "use_roles", "use_external", "model",
        "provider", "max_parallel_items", "max_parallel_runs", "temperature", "max_tokens",
        "cache_dir", "prompts_dir", "mock_script", "wiki_fixture", "max_extract_chars",
        "input", "output"};
    for (const auto& [key, value] : doc.items()) {
      if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    try {
      p.runs_n = doc.value("runs_n", p.runs_n);
      p.threshold = doc.value("threshold", p.threshold);
      p.min_similarity = doc.value("min_similarity", p.min_similarity);
      p.use_roles = doc.value("use_roles", p.use_roles);
      p.use_external = doc.value("use_external", p.use_external);
      p.model = doc.value("model", p.model);
      p.max_parallel_items = doc.value("max_parallel_items", p.max_parallel_items);
      p.max_parallel_runs = doc.value("max_parallel_runs", p.max_parallel_runs);
      p.temperature = doc.value("temperature", p.temperature);
      p.max_tokens = doc.value("max_tokens", p.max_tokens);
      s.max_extract_chars = doc.value("max_extract_chars", s.max_extract_chars);
      s.input = resolve_path(doc.value("input", ""), base);
      s.output = resolve_path(doc.value("output", ""), base);
      s.cache_dir = resolve_path(doc.value("cache_dir", ""), base);
      s.prompts_dir = resolve_path(doc.value("prompts_dir", ""), base);
      s.mock_script = resolve_path(doc.value("mock_script", ""), base);
      s.wiki_fixture = resolve_path(doc.value("wiki_fixture", ""), base);
      if (doc.contains("provider")) {
        if (doc["provider"].is_string()) {
          provider_name = doc["provider"].get<std::string>();
        } else {
          provider_obj = doc["provider"];
          provider_name = provider_obj.value("name", "");
        }
      }
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config file: ") + e.what());
    }
  }

  auto given = [&](const char* name) { return cmd.get_option(name)->count() > 0; };
  if (given("--input")) s.input = flags.input;
  if (given("--output")) s.output = flags.output;
  if (given("--model")) p.model = flags.model;
  if (given("--provider")) provider_name = flags.provider;
  if (given("--runs")) p.runs_n = flags.runs;
  if (given("--threshold")) p.threshold = flags.threshold;
  if (given("--min-similarity")) p.min_similarity = flags.min_similarity;
  if (given("--no-roles")) p.use_roles = false;
  if (given("--no-external")) p.use_external = false;
  if (given("--cache-dir")) s.cache_dir = flags.cache_dir;
  if (given("--max-parallel")) p.max_parallel_items = flags.max_parallel;
  if (given("--max-parallel-runs")) p.max_parallel_runs = flags.max_parallel_runs;
  if (given("--temperature")) p.temperature = flags.temperature;
  if (given("--prompts")) s.prompts_dir = flags.prompts;
  if (given("--mock-script")) s.mock_script = flags.mock_script;
  if (given("--wiki-fixture")) s.wiki_fixture = flags.wiki_fixture;
  if (given("--max-extract-chars")) s.max_extract_chars = flags.max_extract_chars;

  if (s.input.empty()) throw ConfigError("--input is required");
  if (s.output.empty()) throw ConfigError("--output is required");
  if (provider_name.empty()) throw ConfigError("--provider is required");
  if (p.model.empty()) throw ConfigError("--model is required");

  p.provider = provider_preset(provider_name);
  try {
    if (provider_obj.contains("base_url")) p.provider.base_url = provider_obj["base_url"];
    if (provider_obj.contains("api_key_env")) p.provider.api_key_env = provider_obj["api_key_env"];
    if (provider_obj.contains("requests_per_minute")) {
      p.provider.requests_per_minute = provider_obj["requests_per_minute"];
    }
    if (provider_obj.contains("max_retries")) p.provider.max_retries = provider_obj["max_retries"];
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config file provider: ") + e.what());
  }
  if (given("--base-url")) p.provider.base_url = flags.base_url;
  if (given("--api-key-env")) p.provider.api_key_env = flags.api_key_env;
  if (given("--rpm")) p.provider.requests_per_minute = flags.rpm;

  validate(p);
  validate(p.provider);
  if (s.prompts_dir.empty()) s.prompts_dir = default_prompt_dir().string();
  if (provider_name == "mock" && s.mock_script.empty()) {
    throw ConfigError("the mock provider needs --mock-script");
  }
  return s;
}

int cmd_annotate(const AnnotateFlags& flags, const CLI::App& cmd, CliEnvironment& env) {
  const auto settings = merge_settings(flags, cmd);
  const auto& cfg = settings.pipeline;

  // Key check comes before anything touches the network.
  std::string api_key;
  if (cfg.provider.name != "mock") {
    try {
      api_key = resolve_api_key(cfg.provider);
    } catch (const ConfigError& e) {
      env.err << "error: " << e.what() << '\n';
      return exit_code::missing_key;
    }
  }

  const auto prompts = PromptSet::load(settings.prompts_dir);
  const auto items = read_items(settings.input);

  Clock& clock = env.clock ? *env.clock : SystemClock::instance();
  std::unique_ptr<HttpClient> owned_http;
  HttpClient* http = env.http;
  if (!http) {
    owned_http = std::make_unique<HttplibClient>();
    http = owned_http.get();
  }
  std::unique_ptr<ReplayHttpClient> wiki_replay;
  HttpClient* wiki_http = http;
  if (!settings.wiki_fixture.empty()) {
    wiki_replay = std::make_unique<ReplayHttpClient>(settings.wiki_fixture);
    wiki_http = wiki_replay.get();
  }

  auto cache = settings.cache_dir.empty() ? std::make_shared<ResponseCache>()
                                          : std::make_shared<ResponseCache>(settings.cache_dir);
  std::shared_ptr<LlmProvider> provider;
  if (cfg.provider.name == "mock") {
    provider = std::make_shared<MockProvider>(MockScript::load(settings.mock_script));
  } else {
    provider = std::make_shared<OpenAiCompatibleProvider>(cfg.provider, api_key, *http);
  }
  LlmGateway gateway(provider, cfg.provider, cache, clock);

  WikipediaOptions wiki_options;
  wiki_options.max_chars = settings.max_extract_chars;
  WikipediaClient wiki(*wiki_http, wiki_options, clock);

  std::mutex log_mutex;
  LogSink log = [&](const std::string& message) {
    std::lock_guard lock(log_mutex);
    env.err << "warning: " << message << '\n';
  };
  KnowledgeOptions kopts;
  kopts.model = cfg.model;
  KnowledgeService knowledge(gateway, &wiki, prompts, kopts, log);
  Annotator annotator(cfg, gateway, &knowledge, prompts, log);

  std::vector<ItemResult> results;
  try {
    results = annotator.annotate_dataset(items, [&](std::size_t done, std::size_t total,
                                                    const ItemResult& r) {
      std::lock_guard lock(log_mutex);
      env.out << '[' << done << '/' << total << "] " << r.record.id << ": runs_used "
              << r.record.runs_used << '/' << cfg.runs_n << ", " << r.record.hard_labels.size()
              << " hard span(s)\n";
    });
  } catch (const AuthError& e) {
    env.err << "error: " << e.what() << " (check " << cfg.provider.api_key_env << ")\n";
    return exit_code::missing_key;
  }

  std::vector<PredictionRecord> records;
  std::size_t failed = 0;
  double runs_total = 0;
  for (const auto& r : results) {
    records.push_back(r.record);
    runs_total += r.record.runs_used;
    if (r.record.runs_used == 0) ++failed;
  }
  write_predictions(records, fs::path(settings.output));

  char mean[32];
  std::snprintf(mean, sizeof mean, "%.2f", records.empty() ? 0.0 : runs_total / records.size());
  env.out << "items: " << records.size() << ", annotated: " << records.size() - failed
          << ", failures: " << failed << ", mean runs_used: " << mean
          << ", provider calls: " << gateway.provider_calls()
          << ", cache hits: " << gateway.cache_hits() << ", wikipedia requests: " << wiki.calls()
          << '\n';
  if (env.stats) {
    env.stats->provider_calls = gateway.provider_calls();
    env.stats->cache_hits = gateway.cache_hits();
    env.stats->wiki_calls = wiki.calls();
    env.stats->items = records.size();
    env.stats->failed_items = failed;
  }
  return failed ? exit_code::partial : exit_code::ok;
}

int report_mismatch(const InputError& e, CliEnvironment& env) {
  env.err << "error: " << e.what() << ":\n";
  for (const auto& id : e.ids()) env.err << "  " << id << '\n';
  return exit_code::id_mismatch;
}

int cmd_evaluate(const EvaluateFlags& flags, CliEnvironment& env) {
  const auto preds = read_predictions(flags.pred);
  const auto golds = read_gold(flags.gold);
  EvalReport report;
  try {
    report = evaluate(preds, golds);
  } catch (const InputError& e) {
    return report_mismatch(e, env);
  }
  env.out << report.to_table();
  if (!flags.report.empty()) {
    std::ofstream out(flags.report, std::ios::trunc);
    if (!out) throw Error("cannot write " + flags.report);
    out << report.to_json();
  }
  return exit_code::ok;
}

std::string soft_summary(const SpanList& soft) {
  std::string out;
  char buf[64];
  for (const auto& s : soft) {
    std::snprintf(buf, sizeof buf, "%s[%zu,%zu)=%.3f", out.empty() ? "" : " ", s.start, s.end,
                  s.prob.value_or(1.0));
    out += buf;
  }
  return out.empty() ? "(none)" : out;
}

int cmd_inspect(const InspectFlags& flags, CliEnvironment& env) {
  const auto preds = read_predictions(flags.pred);
  const PredictionRecord* pred = nullptr;
  for (const auto& p : preds) {
    if (p.id == flags.id) pred = &p;
  }
  if (!pred) {
    env.err << "error: id '" << flags.id << "' not found in " << flags.pred << '\n';
    return exit_code::id_mismatch;
  }

  std::optional<GoldRecord> gold;
  if (!flags.gold.empty()) {
    for (auto& g : read_gold(flags.gold)) {
      if (g.item.id == flags.id) gold = std::move(g);
    }
    if (!gold) {
      env.err << "error: id '" << flags.id << "' not found in " << flags.gold << '\n';
      return exit_code::id_mismatch;
    }
  }

  std::optional<std::string> answer = pred->answer;
  if (!answer && gold) answer = gold->item.answer;
  if (!answer) {
    env.err << "error: no answer text for '" << flags.id
            << "'; the prediction has no model_output_text, pass --gold\n";
    return exit_code::usage;
  }

  env.out << "id:   " << pred->id << " (" << pred->lang << "), runs_used " << pred->runs_used << '\n';
  env.out << "pred: " << render_marked(*answer, pred->hard_labels) << '\n';
  env.out << "soft: " << soft_summary(pred->soft_labels) << '\n';
  if (gold) {
    env.out << "gold: " << render_marked(gold->item.answer, gold->hard_labels) << '\n';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f",
                  iou(pred->hard_labels, gold->hard_labels, utf8::length(gold->item.answer)));
    env.out << "IoU:  " << buf << '\n';
  }
  return exit_code::ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, CliEnvironment env) {
  CLI::App app{"Multilingual hallucination span annotation and scoring"};
  app.name(args.empty() ? "hallu" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);

  AnnotateFlags af;
  auto* annotate = app.add_subcommand("annotate", "Annotate hallucination spans with an LLM ensemble");
  annotate->add_option("--input", af.input, "Dataset JSONL (id, lang, model_input, model_output_text)");
  annotate->add_option("--output", af.output, "Prediction JSONL to write");
  annotate->add_option("--model", af.model, "Model name sent to the provider");
  annotate->add_option("--provider", af.provider, "mock | openai | deepseek | <name> with --base-url");
  annotate->add_option("--runs", af.runs, "Annotation runs per item")->check(CLI::PositiveNumber);
  annotate->add_option("--threshold", af.threshold, "Hard-label vote threshold in (0, 1]");
  annotate->add_flag("--no-roles", af.no_roles, "Disable expert role assignment");
  annotate->add_flag("--no-external", af.no_external, "Disable Wikipedia knowledge");
  annotate->add_option("--min-similarity", af.min_similarity, "Minimum echo similarity for a run to count");
  annotate->add_option("--cache-dir", af.cache_dir, "Response cache directory (enables resume)");
  annotate->add_option("--max-parallel", af.max_parallel, "Items processed concurrently");
  annotate->add_option("--max-parallel-runs", af.max_parallel_runs, "Runs per item issued concurrently");
  annotate->add_option("--temperature", af.temperature, "Sampling temperature for annotation runs");
  annotate->add_option("--config", af.config, "JSON config file; flags override it")->check(CLI::ExistingFile);
  annotate->add_option("--prompts", af.prompts, "Prompt template directory");
  annotate->add_option("--mock-script", af.mock_script, "Script for the mock provider");
  annotate->add_option("--wiki-fixture", af.wiki_fixture, "Replay Wikipedia from a recorded fixture");
  annotate->add_option("--base-url", af.base_url, "OpenAI-compatible endpoint base URL");
  annotate->add_option("--api-key-env", af.api_key_env, "Environment variable holding the API key");
  annotate->add_option("--rpm", af.rpm, "Provider requests per minute")->check(CLI::PositiveNumber);
  annotate->add_option("--max-extract-chars", af.max_extract_chars, "Wikipedia extract length cap");

  EvaluateFlags ef;
  auto* eval = app.add_subcommand("evaluate", "Score predictions against gold labels (IoU, Spearman)");
  eval->add_option("--pred", ef.pred, "Prediction JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--gold", ef.gold, "Gold JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--report", ef.report, "Write the JSON report here");

  InspectFlags inf;
  auto* inspect = app.add_subcommand("inspect", "Show one item's spans bracketed in the answer");
  inspect->add_option("--pred", inf.pred, "Prediction JSONL")->required()->check(CLI::ExistingFile);
  inspect->add_option("--gold", inf.gold, "Gold JSONL")->check(CLI::ExistingFile);
  inspect->add_option("--id", inf.id, "Item id")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, env.out, env.err);
    return code == 0 ? exit_code::ok : exit_code::usage;
  }

  try {
    if (annotate->parsed()) return cmd_annotate(af, *annotate, env);
    if (eval->parsed()) return cmd_evaluate(ef, env);
    if (inspect->parsed()) return cmd_inspect(inf, env);
  } catch (const Error& e) {
    env.err << "error: " << e.what() << '\n';
    return exit_code::usage;
  }
  return exit_code::usage;
}

}  // namespace hallu
