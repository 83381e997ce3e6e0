#include "hallu/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "hallu/error.hpp"
#include "hallu/utf8.hpp"

namespace hallu {

double iou(const SpanList& pred, const SpanList& gold, std::size_t len) {
  const auto p = spans_to_charset(pred, len);
  const auto g = spans_to_charset(gold, len);
  if (p.empty() && g.empty()) return 1.0;
  std::size_t inter = 0;
  for (auto i : p) inter += g.count(i);
  const std::size_t uni = p.size() + g.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t k = 0;
  while (k < order.size()) {
    std::size_t tie_end = k + 1;
    while (tie_end < order.size() && values[order[tie_end]] == values[order[k]]) ++tie_end;
    // positions k..tie_end-1 are ranks k+1..tie_end
    const double rank = (static_cast<double>(k + 1) + static_cast<double>(tie_end)) / 2.0;
    for (auto t = k; t < tie_end; ++t) ranks[order[t]] = rank;
    k = tie_end;
  }
  return ranks;
}

double spearman(const CharProbVector& pred, const CharProbVector& gold) {
  if (pred.size() != gold.size()) {
    throw ShapeError("spearman: length mismatch " + std::to_string(pred.size()) + " vs " +
                     std::to_string(gold.size()));
  }
  if (pred.empty()) throw ShapeError("spearman: empty input");

  const auto rp = average_ranks(pred);
  const auto rg = average_ranks(gold);
  const double n = static_cast<double>(rp.size());
  const double mp = std::accumulate(rp.begin(), rp.end(), 0.0) / n;
  const double mg = std::accumulate(rg.begin(), rg.end(), 0.0) / n;
  double cov = 0.0;
  double vp = 0.0;
  double vg = 0.0;
  for (std::size_t i = 0; i < rp.size(); ++i) {
    const double dp = rp[i] - mp;
    const double dg = rg[i] - mg;
    cov += dp * dg;
    vp += dp * dp;
    vg += dg * dg;
  }
  // Ranks of a constant vector are all equal, so the variance is exactly 0.
  const bool pred_const = vp == 0.0;
  const bool gold_const = vg == 0.0;
  if (pred_const && gold_const) return 1.0;
  if (pred_const || gold_const) return 0.0;
  return std::clamp(cov / std::sqrt(vp * vg), -1.0, 1.0);
}

CharProbVector expand_soft(const SpanList& labels, std::size_t len) {
  check_spans(labels, len);
  CharProbVector out(len, 0.0);
  std::vector<bool> seen(len, false);
  for (const auto& s : labels) {
    for (auto i = s.start; i < s.end; ++i) {
      if (seen[i]) throw FormatError("overlapping soft labels at character " + std::to_string(i));
      seen[i] = true;
      out[i] = s.prob.value_or(1.0);
    }
  }
  return out;
}

namespace {

MeanScore mean_of(const std::vector<const ItemScore*>& items) {
  MeanScore m;
  m.n = items.size();
  if (m.n == 0) return m;
  for (const auto* s : items) {
    m.mean_iou += s->iou;
    m.mean_cor += s->cor;
  }
  m.mean_iou /= static_cast<double>(m.n);
  m.mean_cor /= static_cast<double>(m.n);
  return m;
}

nlohmann::ordered_json mean_json(const MeanScore& m) {
  nlohmann::ordered_json j;
  j["mean_iou"] = m.mean_iou;
  j["mean_cor"] = m.mean_cor;
  j["n"] = m.n;
  return j;
}

}  // namespace

EvalReport evaluate(const std::vector<PredictionRecord>& preds,
                    const std::vector<GoldRecord>& golds) {
  std::unordered_map<std::string, const PredictionRecord*> by_id;
  std::vector<std::string> bad;
  for (const auto& p : preds) {
    if (!by_id.emplace(p.id, &p).second) bad.push_back(p.id + " (duplicate prediction)");
  }
  std::set<std::string> gold_ids;
  for (const auto& g : golds) {
    if (!gold_ids.insert(g.item.id).second) bad.push_back(g.item.id + " (duplicate gold)");
    if (!by_id.count(g.item.id)) bad.push_back(g.item.id + " (no prediction)");
  }
  for (const auto& p : preds) {
    if (!gold_ids.count(p.id)) bad.push_back(p.id + " (no gold)");
  }
  if (!bad.empty()) throw InputError("prediction and gold ids do not align", bad);

  EvalReport report;
  for (const auto& g : golds) {
    const auto& p = *by_id.at(g.item.id);
    const auto len = utf8::length(g.item.answer);
    ItemScore s;
    s.id = g.item.id;
    s.lang = g.item.lang;
    s.iou = iou(p.hard_labels, g.hard_labels, len);
    if (len == 0) {
      s.cor = 1.0;
    } else {
      s.cor = spearman(expand_soft(p.soft_labels, len), expand_soft(g.soft_labels, len));
    }
    report.per_item.push_back(std::move(s));
  }

  std::map<std::string, std::vector<const ItemScore*>> groups;
  std::vector<const ItemScore*> all;
  for (const auto& s : report.per_item) {
    groups[s.lang].push_back(&s);
    all.push_back(&s);
  }
  for (const auto& [lang, items] : groups) report.per_lang[lang] = mean_of(items);
  report.overall = mean_of(all);
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  auto items = nlohmann::ordered_json::array();
  for (const auto& s : per_item) {
    nlohmann::ordered_json row;
    row["id"] = s.id;
    row["lang"] = s.lang;
    row["iou"] = s.iou;
    row["cor"] = s.cor;
    items.push_back(std::move(row));
  }
  j["per_item"] = std::move(items);
  nlohmann::ordered_json langs = nlohmann::ordered_json::object();
  for (const auto& [lang, m] : per_lang) langs[lang] = mean_json(m);
  j["per_lang"] = std::move(langs);
  j["overall"] = mean_json(overall);
  return j.dump(2) + "\n";
}

std::string EvalReport::to_table() const {
  std::size_t width = 4;
  for (const auto& [lang, m] : per_lang) width = std::max(width, lang.size());
  std::ostringstream out;
  char buf[128];
  auto row = [&](const std::string& lang, const std::string& a, const std::string& b,
                 const std::string& n) {
    std::snprintf(buf, sizeof buf, "%-*s  %8s  %8s  %6s\n", static_cast<int>(width),
                  lang.c_str(), a.c_str(), b.c_str(), n.c_str());
    out << buf;
  };
  auto fmt = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4f", v);
    return std::string(b);
  };
  row("Lang", "IoU", "Cor", "N");
  for (const auto& [lang, m] : per_lang) row(lang, fmt(m.mean_iou), fmt(m.mean_cor), std::to_string(m.n));
  row("ALL", fmt(overall.mean_iou), fmt(overall.mean_cor), std::to_string(overall.n));
  return out.str();
}

}  // namespace hallu
