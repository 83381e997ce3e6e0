#include "hallu/markers.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>

#include "hallu/error.hpp"
#include "hallu/utf8.hpp"

namespace hallu {

namespace {

bool starts_at(std::u32string_view text, std::size_t pos, std::u32string_view token) {
  return text.substr(pos, token.size()) == token;
}

}  // namespace

ParsedMarking parse_marked(std::string_view marked) {
  const auto text = utf8::decode(marked);
  const std::u32string_view view(text);

  std::u32string open;
  std::u32string close;
  for (const auto& alphabet : kMarkerAlphabets) {
    auto o = utf8::decode(alphabet.open);
    auto c = utf8::decode(alphabet.close);
    if (view.find(o) != std::u32string_view::npos || view.find(c) != std::u32string_view::npos) {
      open = std::move(o);
      close = std::move(c);
      break;
    }
  }

  std::u32string clean;
  SpanList spans;
  if (open.empty()) return {std::string(marked), {}};

  bool inside = false;
  std::size_t span_start = 0;
  std::size_t pos = 0;
  while (pos < view.size()) {
    if (starts_at(view, pos, open)) {
      if (inside) throw MarkerError("nested marker at character " + std::to_string(pos));
      inside = true;
      span_start = clean.size();
      pos += open.size();
    } else if (starts_at(view, pos, close)) {
      if (!inside) throw MarkerError("closing marker without opening at character " + std::to_string(pos));
      inside = false;
      if (clean.size() > span_start) spans.push_back({span_start, clean.size(), std::nullopt});
      pos += close.size();
    } else {
      clean.push_back(view[pos]);
      ++pos;
    }
  }
  if (inside) throw MarkerError("unterminated marker");
  return {utf8::encode(clean), std::move(spans)};
}

AlignmentResult align(std::u32string_view clean, std::u32string_view original) {
  const std::size_t n = clean.size();
  const std::size_t m = original.size();
  const std::size_t width = m + 1;
  std::vector<std::uint32_t> score((n + 1) * width, 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return score[i * width + j]; };

  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t diag = at(i - 1, j - 1) + (clean[i - 1] == original[j - 1] ? 1u : 0u);
      at(i, j) = std::max({diag, at(i - 1, j), at(i, j - 1)});
    }
  }

  AlignmentResult result;
  result.mapping.assign(n, std::nullopt);
  result.matches = at(n, m);
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = clean[i - 1] == original[j - 1];
      if (same && at(i, j) == at(i - 1, j - 1) + 1) {
        result.mapping[--i] = --j;
        continue;
      }
      if (!same && at(i, j) == at(i - 1, j - 1)) {
        result.mapping[--i] = --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j)) {
      --i;
    } else {
      --j;
    }
  }

  const std::size_t longest = std::max(n, m);
  result.similarity =
      longest == 0 ? 1.0 : static_cast<double>(result.matches) / static_cast<double>(longest);
  return result;
}

AlignmentResult align(std::string_view clean, std::string_view original) {
  const auto a = utf8::decode(clean);
  const auto b = utf8::decode(original);
  return align(std::u32string_view(a), std::u32string_view(b));
}

SpanList project_spans(const ParsedMarking& parsed, const AlignmentResult& alignment) {
  SpanList out;
  for (const auto& span : parsed.marked_spans) {
    std::size_t lo = std::numeric_limits<std::size_t>::max();
    std::size_t hi = 0;
    bool any = false;
    for (auto k = span.start; k < span.end && k < alignment.mapping.size(); ++k) {
      if (const auto& target = alignment.mapping[k]) {
        lo = std::min(lo, *target);
        hi = std::max(hi, *target);
        any = true;
      }
    }
    if (any) out.push_back({lo, hi + 1, std::nullopt});
  }
  return normalize(std::move(out));
}

RunVerdict validate_run(const AlignmentResult& alignment, double min_similarity) {
  return alignment.similarity >= min_similarity ? RunVerdict::accept : RunVerdict::reject;
}

std::string render_marked(std::string_view text, const SpanList& spans, MarkerAlphabet alphabet) {
  const auto chars = utf8::decode(text);
  const auto norm = normalize(spans);
  check_spans(norm, chars.size());
  const std::u32string_view view(chars);
  std::string out;
  std::size_t pos = 0;
  for (const auto& s : norm) {
    out += utf8::encode(view.substr(pos, s.start - pos));
    out += alphabet.open;
    out += utf8::encode(view.substr(s.start, s.size()));
    out += alphabet.close;
    pos = s.end;
  }
  out += utf8::encode(view.substr(pos));
  return out;
}

}  // namespace hallu
