#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hallu/span.hpp"

namespace hallu {

struct MarkerAlphabet {
  std::string_view open;
  std::string_view close;
};

/// Accepted delimiter pairs, in priority order. The first pair with any
/// delimiter present in a reply is used for the whole reply.
inline constexpr MarkerAlphabet kMarkerAlphabets[] = {
    {"⟨⟨", "⟩⟩"},
    {"«", "»"},
    {"<<", ">>"},
};

/// A reply with markers stripped. Spans index `clean_text` scalar values.
struct ParsedMarking {
  std::string clean_text;
  SpanList marked_spans;
};

/// Strips hallucination markers. Empty marked regions are dropped.
/// Throws MarkerError on unbalanced or nested markers.
ParsedMarking parse_marked(std::string_view marked);

/// Character alignment of a reply's clean text against the original answer.
struct AlignmentResult {
  /// One entry per clean-text character: original index, or nullopt for a gap.
  std::vector<std::optional<std::size_t>> mapping;
  std::size_t matches = 0;
  /// matches / max(len(clean), len(original)); 1.0 for two empty strings.
  double similarity = 1.0;
};

/// Global alignment maximizing identical-character matches (match 1,
/// mismatch 0, gap 0). Traceback prefers match, then substitution, then
/// dropping a clean character, then skipping an original character.
/// Substituted characters are mapped, not gapped.
AlignmentResult align(std::u32string_view clean, std::u32string_view original);
AlignmentResult align(std::string_view clean, std::string_view original);

/// Maps spans over the clean text onto the original answer. Each span becomes
/// [min mapped, max mapped + 1); all-gap spans vanish. Output is normalized.
SpanList project_spans(const ParsedMarking& parsed, const AlignmentResult& alignment);

enum class RunVerdict { accept, reject };

inline constexpr double kDefaultMinSimilarity = 0.7;

/// Accepts iff similarity >= min_similarity.
RunVerdict validate_run(const AlignmentResult& alignment,
                        double min_similarity = kDefaultMinSimilarity);

/// Inverse of parse_marked: wraps each span of `text` in the given delimiters.
/// Spans must be valid for `text`; they are normalized first.
std::string render_marked(std::string_view text, const SpanList& spans,
                          MarkerAlphabet alphabet = kMarkerAlphabets[0]);

}  // namespace hallu
