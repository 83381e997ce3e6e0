#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hallu/span.hpp"

namespace hallu {

/// One question/answer pair. `answer` offsets are scalar-value indices.
struct QAItem {
  std::string id;
  std::string lang;
  std::string question;
  std::string answer;

  friend bool operator==(const QAItem&, const QAItem&) = default;
};

struct PredictionRecord {
  std::string id;
  std::string lang;
  SpanList hard_labels;
  SpanList soft_labels;
  int runs_used = 0;
  // Written as `model_output_text` when present so the file can also serve
  // as a gold file.
  std::optional<std::string> answer;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

/// Reference annotations in the shared-task layout.
struct GoldRecord {
  QAItem item;
  SpanList hard_labels;
  SpanList soft_labels;
};

// Input records use the shared-task keys: id, lang, model_input,
// model_output_text. Blank lines are skipped; line numbers in errors are
// physical, 1-based.
std::vector<QAItem> parse_items(std::istream& in);
std::vector<QAItem> read_items(const std::filesystem::path& path);

std::string prediction_to_json(const PredictionRecord& record);
PredictionRecord prediction_from_json(const std::string& line, std::size_t line_no = 1);

void write_predictions(const std::vector<PredictionRecord>& records, std::ostream& out);
void write_predictions(const std::vector<PredictionRecord>& records,
                       const std::filesystem::path& path);
std::vector<PredictionRecord> parse_predictions(std::istream& in);
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);

/// Gold files need `model_output_text`; `model_input` is optional.
/// `soft_labels` may be absent, in which case hard labels count as prob 1.
std::vector<GoldRecord> parse_gold(std::istream& in);
std::vector<GoldRecord> read_gold(const std::filesystem::path& path);

}  // namespace hallu
