#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hallu/aggregate.hpp"
#include "hallu/dataset.hpp"
#include "hallu/knowledge.hpp"
#include "hallu/llm.hpp"
#include "hallu/log.hpp"
#include "hallu/markers.hpp"
#include "hallu/prompt.hpp"

namespace hallu {

struct PipelineConfig {
  int runs_n = kDefaultRuns;
  double threshold = kDefaultThreshold;
  double min_similarity = kDefaultMinSimilarity;
  bool use_roles = true;
  bool use_external = true;
  ProviderConfig provider;
  std::string model;
  int max_parallel_items = 1;
  int max_parallel_runs = 4;
  double temperature = 1.0;
  int max_tokens = 2048;
};

/// Throws ConfigError on out-of-range settings.
void validate(const PipelineConfig& cfg);

/// Main annotation prompt for one run. `role` and `knowledge` may be absent;
/// absent knowledge renders the sentinel line.
std::string build_main_prompt(const PromptSet& prompts, const QAItem& item,
                              const std::optional<std::string>& role,
                              const std::optional<std::string>& knowledge);

/// Text after the last "Marked answer:" label (trimmed), or the whole reply
/// trimmed when the label is missing.
std::string extract_marked_answer(const std::string& reply);

/// Parses, aligns and validates one reply against the original answer.
AnnotationRun interpret_reply(const std::string& reply, const std::string& answer,
                              double min_similarity);

struct ItemResult {
  PredictionRecord record;
  RunSet runs;
  KnowledgeBundle knowledge;
  std::vector<std::string> warnings;
};

class Annotator {
 public:
  /// `knowledge` may be null when both roles and external knowledge are off.
  Annotator(PipelineConfig cfg, LlmGateway& llm, KnowledgeService* knowledge,
            const PromptSet& prompts, LogSink log = stderr_sink());

  /// Runs runs_n completions (seed tags run-0 .. run-(n-1)), role i mod |roles|
  /// for run i. Per-run failures invalidate that run only; an item with no
  /// valid run gets empty labels and runs_used 0. AuthError propagates.
  ItemResult annotate_item(const QAItem& item);

  using Progress = std::function<void(std::size_t done, std::size_t total, const ItemResult&)>;

  /// Results in input order regardless of completion order.
  std::vector<ItemResult> annotate_dataset(const std::vector<QAItem>& items,
                                           const Progress& progress = {});

  const PipelineConfig& config() const { return cfg_; }

 private:
  PipelineConfig cfg_;
  LlmGateway& llm_;
  KnowledgeService* knowledge_;
  const PromptSet& prompts_;
  LogSink log_;
};

}  // namespace hallu
