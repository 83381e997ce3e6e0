#include "hallu/span.hpp"

#include <algorithm>
#include <string>

#include "hallu/error.hpp"

namespace hallu {

void check_spans(const SpanList& spans, std::size_t len) {
  for (const auto& s : spans) {
    if (s.start >= s.end || s.end > len) {
      throw OffsetError("span [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                        ") invalid for text of length " + std::to_string(len));
    }
  }
}

CharSet spans_to_charset(const SpanList& spans, std::size_t len) {
  check_spans(spans, len);
  CharSet out;
  for (const auto& s : spans) {
    for (auto i = s.start; i < s.end; ++i) out.insert(i);
  }
  return out;
}

SpanList charset_to_spans(const CharSet& chars) {
  SpanList out;
  for (auto i : chars) {
    if (!out.empty() && out.back().end == i) {
      ++out.back().end;
    } else {
      out.push_back({i, i + 1, std::nullopt});
    }
  }
  return out;
}

SpanList normalize(SpanList spans) {
  std::erase_if(spans, [](const SpanLabel& s) { return s.start >= s.end; });
  std::sort(spans.begin(), spans.end(),
            [](const SpanLabel& a, const SpanLabel& b) { return a.start < b.start; });
  SpanList out;
  for (const auto& s : spans) {
    if (!out.empty() && s.start <= out.back().end) {
      out.back().end = std::max(out.back().end, s.end);
    } else {
      out.push_back({s.start, s.end, std::nullopt});
    }
  }
  return out;
}

bool is_normalized_disjoint(const SpanList& spans) {
  for (std::size_t k = 0; k < spans.size(); ++k) {
    if (spans[k].start >= spans[k].end) return false;
    if (k > 0 && spans[k].start < spans[k - 1].end) return false;
  }
  return true;
}

}  // namespace hallu
