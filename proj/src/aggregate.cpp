#include "hallu/aggregate.hpp"

#include <algorithm>

#include "hallu/error.hpp"

namespace hallu {

std::size_t RunSet::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(runs.begin(), runs.end(), [](const AnnotationRun& r) { return r.valid; }));
}

CharProbVector aggregate(const RunSet& set) {
  const auto valid = set.valid_count();
  if (valid == 0) throw AggregationError("item " + set.item_id + " has no valid annotation run");

  std::vector<std::size_t> votes(set.answer_len, 0);
  for (const auto& run : set.runs) {
    if (!run.valid) continue;
    // A run votes once per character even if its spans overlap.
    const auto covered = spans_to_charset(run.spans, set.answer_len);
    for (auto i : covered) ++votes[i];
  }

  CharProbVector probs(set.answer_len, 0.0);
  for (std::size_t i = 0; i < votes.size(); ++i) {
    probs[i] = static_cast<double>(votes[i]) / static_cast<double>(valid);
  }
  return probs;
}

SpanList to_soft_labels(const CharProbVector& probs) {
  SpanList out;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (p == 0.0) continue;
    if (!out.empty() && out.back().end == i && out.back().prob == p) {
      ++out.back().end;
    } else {
      out.push_back({i, i + 1, p});
    }
  }
  return out;
}

SpanList to_hard_labels(const CharProbVector& probs, double threshold) {
  CharSet chars;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] >= threshold) chars.insert(i);
  }
  return charset_to_spans(chars);
}

}  // namespace hallu
