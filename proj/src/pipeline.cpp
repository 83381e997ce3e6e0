#include "hallu/pipeline.hpp"

#include <mutex>

#include "hallu/error.hpp"
#include "hallu/parallel.hpp"
#include "hallu/utf8.hpp"

namespace hallu {

namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  return std::string(s.substr(first, s.find_last_not_of(ws) - first + 1));
}

}  // namespace

void validate(const PipelineConfig& cfg) {
  if (cfg.runs_n < 1) throw ConfigError("runs must be >= 1");
  if (!(cfg.threshold > 0.0 && cfg.threshold <= 1.0)) throw ConfigError("threshold must be in (0, 1]");
  if (!(cfg.min_similarity >= 0.0 && cfg.min_similarity <= 1.0)) {
    throw ConfigError("min_similarity must be in [0, 1]");
  }
  if (cfg.max_parallel_items < 1 || cfg.max_parallel_runs < 1) {
    throw ConfigError("parallelism bounds must be >= 1");
  }
  if (cfg.model.empty()) throw ConfigError("a model name is required");
  if (!(cfg.temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (cfg.max_tokens <= 0) throw ConfigError("max_tokens must be > 0");
}

std::string build_main_prompt(const PromptSet& prompts, const QAItem& item,
                              const std::optional<std::string>& role,
                              const std::optional<std::string>& knowledge) {
  return prompts.main.render({{"lang", language_name(item.lang)},
                              {"role", role},
                              {"question", item.question},
                              {"answer", item.answer},
                              {"knowledge", knowledge.value_or(kNoKnowledgeSentinel)},
                              {"example", prompts.example_for(item.lang)}});
}

std::string extract_marked_answer(const std::string& reply) {
  constexpr std::string_view label = "Marked answer:";
  const auto pos = reply.rfind(label);
  if (pos == std::string::npos) return trim(reply);
  return trim(std::string_view(reply).substr(pos + label.size()));
}

AnnotationRun interpret_reply(const std::string& reply, const std::string& answer,
                              double min_similarity) {
  AnnotationRun run;
  run.raw = reply;
  const auto parsed = parse_marked(extract_marked_answer(reply));
  const auto alignment = align(parsed.clean_text, answer);
  run.similarity = alignment.similarity;
  run.valid = validate_run(alignment, min_similarity) == RunVerdict::accept;
  if (run.valid) run.spans = project_spans(parsed, alignment);
  return run;
}

Annotator::Annotator(PipelineConfig cfg, LlmGateway& llm, KnowledgeService* knowledge,
                     const PromptSet& prompts, LogSink log)
    : cfg_(std::move(cfg)), llm_(llm), knowledge_(knowledge), prompts_(prompts), log_(std::move(log)) {
  validate(cfg_);
  if (!log_) log_ = [](const std::string&) {};
  if ((cfg_.use_roles || cfg_.use_external) && !knowledge_) {
    throw ConfigError("roles or external knowledge requested without a knowledge service");
  }
}

ItemResult Annotator::annotate_item(const QAItem& item) {
  ItemResult result;
  result.record.id = item.id;
  result.record.lang = item.lang;
  result.record.answer = item.answer;
  result.runs.item_id = item.id;
  result.runs.answer_len = utf8::length(item.answer);

  std::mutex warn_mutex;
  auto warn = [&](const std::string& message) {
    std::lock_guard lock(warn_mutex);
    result.warnings.push_back(message);
    log_(message);
  };

  if (item.answer.empty()) {
    warn(item.id + ": empty answer, nothing to annotate");
    return result;
  }

  if (knowledge_ && (cfg_.use_roles || cfg_.use_external)) {
    result.knowledge = knowledge_->build_bundle(item, cfg_.use_roles, cfg_.use_external);
  }
  const auto& roles = result.knowledge.roles;

  result.runs.runs.resize(static_cast<std::size_t>(cfg_.runs_n));
  parallel_for(result.runs.runs.size(), static_cast<std::size_t>(cfg_.max_parallel_runs),
               [&](std::size_t i) {
                 AnnotationRun& run = result.runs.runs[i];
                 std::optional<std::string> role;
                 if (!roles.empty()) role = roles[i % roles.size()];
                 run.role = role.value_or("");

                 CompletionRequest req;
                 req.model = cfg_.model;
                 req.user_prompt = build_main_prompt(prompts_, item, role, result.knowledge.refined_external);
                 req.temperature = cfg_.temperature;
                 req.max_tokens = cfg_.max_tokens;
                 req.seed_tag = "run-" + std::to_string(i);
                 req.purpose = Purpose::annotate;
                 req.item_id = item.id;

                 std::string reply;
                 try {
                   reply = llm_.complete(req);
                 } catch (const AuthError&) {
                   throw;
                 } catch (const Error& e) {
                   warn(item.id + " run " + std::to_string(i) + ": completion failed: " + e.what());
                   return;
                 }
                 try {
                   auto parsed = interpret_reply(reply, item.answer, cfg_.min_similarity);
                   parsed.role = run.role;
                   run = std::move(parsed);
                   if (!run.valid) {
                     warn(item.id + " run " + std::to_string(i) + ": rejected, similarity " +
                          std::to_string(run.similarity));
                   }
                 } catch (const MarkerError& e) {
                   run.raw = reply;
                   warn(item.id + " run " + std::to_string(i) + ": " + e.what());
                 }
               });

  const auto valid = result.runs.valid_count();
  result.record.runs_used = static_cast<int>(valid);
  if (valid == 0) {
    warn(item.id + ": no valid annotation run; emitting empty labels");
    return result;
  }
  const auto probs = aggregate(result.runs);
  result.record.soft_labels = to_soft_labels(probs);
  result.record.hard_labels = to_hard_labels(probs, cfg_.threshold);
  return result;
}

std::vector<ItemResult> Annotator::annotate_dataset(const std::vector<QAItem>& items,
                                                    const Progress& progress) {
  std::vector<ItemResult> results(items.size());
  std::mutex progress_mutex;
  std::size_t done = 0;
  parallel_for(items.size(), static_cast<std::size_t>(cfg_.max_parallel_items), [&](std::size_t i) {
    results[i] = annotate_item(items[i]);
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(++done, items.size(), results[i]);
    }
  });
  return results;
}

}  // namespace hallu
