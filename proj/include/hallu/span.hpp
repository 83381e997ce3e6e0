#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <vector>

namespace hallu {

/// Half-open character span [start, end) over an answer, counted in Unicode
/// scalar values. Hard labels leave `prob` empty; soft labels carry it.
struct SpanLabel {
  std::size_t start = 0;
  std::size_t end = 0;
  std::optional<double> prob;

  std::size_t size() const noexcept { return end - start; }
  bool contains(std::size_t i) const noexcept { return start <= i && i < end; }

  friend bool operator==(const SpanLabel&, const SpanLabel&) = default;
};

using SpanList = std::vector<SpanLabel>;
using CharSet = std::set<std::size_t>;

/// Throws OffsetError unless 0 <= start < end <= len for every span.
void check_spans(const SpanList& spans, std::size_t len);

/// Indices covered by any span.
CharSet spans_to_charset(const SpanList& spans, std::size_t len);

/// Maximal runs of consecutive indices, sorted. Probabilities are not set.
SpanList charset_to_spans(const CharSet& chars);

/// Sorted, merged (overlapping or touching) equivalent of `spans`.
/// Equal to charset_to_spans(spans_to_charset(spans, len)) for valid input.
SpanList normalize(SpanList spans);

/// Sorted by start and pairwise disjoint.
bool is_normalized_disjoint(const SpanList& spans);

}  // namespace hallu
