#pragma once

// Test-only reference implementations. Nothing here calls into the library's
// algorithms; each oracle recomputes its quantity by direct enumeration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "hallu/span.hpp"

namespace oracle {

/// Maximum number of identical-character matches over every monotone
/// alignment of a and b, found by enumerating the three moves recursively.
inline std::size_t max_matches_brute(const std::u32string& a, const std::u32string& b,
                                     std::size_t i = 0, std::size_t j = 0) {
  if (i == a.size() || j == b.size()) return 0;
  std::size_t best = (a[i] == b[j] ? 1 : 0) + max_matches_brute(a, b, i + 1, j + 1);
  best = std::max(best, max_matches_brute(a, b, i + 1, j));
  best = std::max(best, max_matches_brute(a, b, i, j + 1));
  return best;
}

/// Same quantity via memoised recursion, for inputs too long to enumerate.
inline std::size_t max_matches_memo(const std::u32string& a, const std::u32string& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  auto rec = [&](auto&& self, std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size() || j == b.size()) return 0;
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::size_t best = a[i] == b[j] ? 1 + self(self, i + 1, j + 1) : 0;
    best = std::max({best, self(self, i + 1, j), self(self, i, j + 1)});
    memo[key] = best;
    return best;
  };
  return rec(rec, 0, 0);
}

/// Same quantity again, bottom-up over a full table; fast enough for sweeps.
inline std::size_t max_matches_table(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = a.size(); i-- > 0;) {
    for (std::size_t j = b.size(); j-- > 0;) {
      t[i][j] = std::max({t[i + 1][j], t[i][j + 1], t[i + 1][j + 1] + (a[i] == b[j] ? 1 : 0)});
    }
  }
  return t[0][0];
}

/// Every string over {a, b, c} of length at most max_len, shortest first.
inline std::vector<std::u32string> all_abc_strings(std::size_t max_len) {
  std::vector<std::u32string> out{U""};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    const auto end = out.size();
    for (auto k = begin; k < end; ++k)
      for (char32_t c : {U'a', U'b', U'c'}) out.push_back(out[k] + c);
    begin = end;
  }
  return out;
}

inline std::vector<bool> covered(const hallu::SpanList& spans, std::size_t len) {
  std::vector<bool> out(len, false);
  for (const auto& s : spans)
    for (auto i = s.start; i < s.end; ++i) out[i] = true;
  return out;
}

inline double iou(const hallu::SpanList& pred, const hallu::SpanList& gold, std::size_t len) {
  const auto p = covered(pred, len);
  const auto g = covered(gold, len);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < len; ++i) {
    inter += p[i] && g[i];
    uni += p[i] || g[i];
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// rank(x_i) = #{x_j < x_i} + (#{x_j == x_i} + 1) / 2, counted pairwise.
inline std::vector<double> avg_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double x : v) {
      less += x < v[i];
      equal += x == v[i];
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline bool constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (constant(a) && constant(b)) return 1.0;
  if (constant(a) || constant(b)) return 0.0;
  return pearson(avg_ranks(a), avg_ranks(b));
}

// ---- generators ----------------------------------------------------------

using Rng = std::mt19937_64;

/// Random valid span list over [0, len): possibly overlapping, unsorted.
inline hallu::SpanList random_spans(Rng& rng, std::size_t len, std::size_t max_spans = 5) {
  hallu::SpanList out;
  if (len == 0) return out;
  std::uniform_int_distribution<std::size_t> count(0, max_spans);
  std::uniform_int_distribution<std::size_t> pos(0, len - 1);
  const auto n = count(rng);
  for (std::size_t k = 0; k < n; ++k) {
    auto a = pos(rng), b = pos(rng);
    if (a > b) std::swap(a, b);
    out.push_back({a, b + 1, std::nullopt});
  }
  return out;
}

/// Sorted spans with at least one unmarked character between neighbours.
inline hallu::SpanList random_separated_spans(Rng& rng, std::size_t len) {
  hallu::SpanList out;
  std::bernoulli_distribution start_here(0.15);
  std::bernoulli_distribution stop_here(0.3);
  std::size_t i = 0;
  while (i < len) {
    if (start_here(rng)) {
      std::size_t end = i + 1;
      while (end < len && !stop_here(rng)) ++end;
      out.push_back({i, end, std::nullopt});
      i = end + 1;
    } else {
      ++i;
    }
  }
  return out;
}

/// Random text mixing Latin, CJK, Devanagari and Arabic letters, digits,
/// spaces and punctuation. Marker delimiter characters never appear.
inline std::u32string random_multilingual(Rng& rng, std::size_t max_len = 60) {
  static const std::u32string pools[] = {
      U"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZéüñçø",
      U"日本語中文漢字北京奥运会银牌年夏季",
      U"हिन्दीभारतकीराजधानीनईदिल्लीहै",
      U"العربيةمدينةالقاهرةعاصمةمصر",
      U"0123456789 ,.;:!?()-'\"",
  };
  std::uniform_int_distribution<std::size_t> len_dist(1, max_len);
  std::uniform_int_distribution<std::size_t> pool_dist(0, std::size(pools) - 1);
  std::u32string out;
  const auto n = len_dist(rng);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& pool = pools[pool_dist(rng)];
    std::uniform_int_distribution<std::size_t> c(0, pool.size() - 1);
    out.push_back(pool[c(rng)]);
  }
  return out;
}

/// Values drawn from a small grid so ties are frequent.
inline std::vector<double> random_tied_vector(Rng& rng, std::size_t len) {
  std::uniform_int_distribution<int> level(0, 6);
  std::vector<double> v(len);
  for (auto& x : v) x = level(rng) / 6.0;
  return v;
}

}  // namespace oracle
