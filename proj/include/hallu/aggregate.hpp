#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hallu/span.hpp"

namespace hallu {

/// One annotator's output after parsing, alignment and validation.
struct AnnotationRun {
  std::string raw;
  SpanList spans;  // over the original answer
  double similarity = 0.0;
  bool valid = false;
  std::string role;
};

/// All runs for one item. Aggregation waits for the complete set.
struct RunSet {
  std::string item_id;
  std::vector<AnnotationRun> runs;
  std::size_t answer_len = 0;

  std::size_t valid_count() const;
};

/// Per-character hallucination probability over the original answer.
using CharProbVector = std::vector<double>;

inline constexpr int kDefaultRuns = 12;
inline constexpr double kDefaultThreshold = 0.5;

/// probs[i] = (valid runs covering i) / (valid runs). Invalid runs count in
/// neither numerator nor denominator. Throws AggregationError when no run is
/// valid and OffsetError when a valid run's span leaves [0, answer_len).
CharProbVector aggregate(const RunSet& runs);

/// Maximal runs of equal nonzero probability, each carrying that probability.
SpanList to_soft_labels(const CharProbVector& probs);

/// Characters with prob >= threshold grouped into maximal spans.
SpanList to_hard_labels(const CharProbVector& probs, double threshold = kDefaultThreshold);

}  // namespace hallu
