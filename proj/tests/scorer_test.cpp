#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "hallu/aggregate.hpp"
#include "hallu/error.hpp"
#include "hallu/scorer.hpp"
#include "hallu/utf8.hpp"
#include "oracles.hpp"

using namespace hallu;

namespace {

SpanLabel S(std::size_t a, std::size_t b) { return {a, b, std::nullopt}; }

GoldRecord gold(std::string id, std::string lang, std::string answer, SpanList hard) {
  GoldRecord g;
  g.item = {std::move(id), std::move(lang), "q", std::move(answer)};
  g.hard_labels = hard;
  for (auto s : hard) {
    s.prob = 1.0;
    g.soft_labels.push_back(s);
  }
  return g;
}

PredictionRecord pred_from(const GoldRecord& g) {
  return {g.item.id, g.item.lang, g.hard_labels, g.soft_labels, 12, std::nullopt};
}

}  // namespace

TEST(Iou, Examples) {
  // pred chars {5..10}, gold chars {8..12}: intersection {8,9,10}, union {5..12}.
  EXPECT_DOUBLE_EQ(iou({S(5, 11)}, {S(8, 13)}, 20), 3.0 / 8.0);
  EXPECT_EQ(oracle::iou({S(5, 11)}, {S(8, 13)}, 20), 0.375);
  EXPECT_EQ(iou({}, {}, 10), 1.0);
  EXPECT_EQ(iou({S(0, 2)}, {S(5, 7)}, 10), 0.0);
}

TEST(Iou, InvalidSpansThrow) {
  EXPECT_THROW(iou({S(0, 11)}, {}, 10), OffsetError);
}

TEST(Iou, MatchesBruteForceAndIsSymmetric) {
  oracle::Rng rng(17);
  std::uniform_int_distribution<std::size_t> len_dist(1, 50);
  for (int k = 0; k < 1000; ++k) {
    const auto len = len_dist(rng);
    const auto a = oracle::random_spans(rng, len);
    const auto b = oracle::random_spans(rng, len);
    ASSERT_NEAR(iou(a, b, len), oracle::iou(a, b, len), 1e-12);
    ASSERT_EQ(iou(a, b, len), iou(b, a, len));
  }
}

TEST(Spearman, IdenticalAndReversed) {
  const CharProbVector v{0.1, 0.4, 0.2, 0.9};
  EXPECT_DOUBLE_EQ(spearman(v, v), 1.0);
  EXPECT_DOUBLE_EQ(spearman({0.1, 0.2, 0.3, 0.4}, {0.9, 0.5, 0.3, 0.0}), -1.0);
}

TEST(Spearman, TiedExample) {
  const CharProbVector pred{0, 0, 0.5, 1};
  const CharProbVector gold{0, 0.25, 0.25, 1};
  EXPECT_EQ(oracle::avg_ranks(pred), (std::vector<double>{1.5, 1.5, 3, 4}));
  EXPECT_EQ(oracle::avg_ranks(gold), (std::vector<double>{1, 2.5, 2.5, 4}));
  EXPECT_EQ(average_ranks(pred), oracle::avg_ranks(pred));
  const double expected = oracle::pearson(oracle::avg_ranks(pred), oracle::avg_ranks(gold));
  EXPECT_NEAR(expected, 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(spearman(pred, gold), expected, 1e-12);
}

TEST(Spearman, ConstantConventions) {
  EXPECT_EQ(spearman({0, 0, 0}, {0, 0, 0}), 1.0);
  EXPECT_EQ(spearman({0.5, 0.5}, {1, 1}), 1.0);
  EXPECT_EQ(spearman({0, 0, 0}, {0, 1, 0}), 0.0);
  EXPECT_EQ(spearman({0, 1, 0}, {0, 0, 0}), 0.0);
  EXPECT_EQ(spearman({0.3}, {0.7}), 1.0);
}

TEST(Spearman, ShapeErrors) {
  EXPECT_THROW(spearman({0, 1}, {0, 1, 2}), ShapeError);
  EXPECT_THROW(spearman({}, {}), ShapeError);
}

TEST(Spearman, MatchesRankOracleOnTiedVectors) {
  oracle::Rng rng(23);
  std::uniform_int_distribution<std::size_t> len_dist(1, 50);
  for (int k = 0; k < 1000; ++k) {
    const auto len = len_dist(rng);
    const auto a = oracle::random_tied_vector(rng, len);
    const auto b = oracle::random_tied_vector(rng, len);
    ASSERT_NEAR(spearman(a, b), oracle::spearman(a, b), 1e-9);
  }
}

TEST(Spearman, InvariantUnderMonotoneTransform) {
  oracle::Rng rng(29);
  std::uniform_int_distribution<std::size_t> len_dist(2, 50);
  for (int k = 0; k < 1000; ++k) {
    const auto len = len_dist(rng);
    const auto a = oracle::random_tied_vector(rng, len);
    const auto b = oracle::random_tied_vector(rng, len);
    // x -> (2x - 1)^3 rescaled to [0, 1] is strictly increasing on [0, 1].
    auto cubed = a;
    for (auto& x : cubed) x = (std::pow(2 * x - 1, 3) + 1) / 2;
    ASSERT_NEAR(spearman(cubed, b), spearman(a, b), 1e-12);
    ASSERT_NEAR(spearman(b, cubed), spearman(b, a), 1e-12);
  }
}

TEST(ExpandSoft, Examples) {
  EXPECT_EQ(expand_soft({{2, 4, .5}}, 5), (CharProbVector{0, 0, .5, .5, 0}));
  EXPECT_EQ(expand_soft({}, 3), (CharProbVector{0, 0, 0}));
  EXPECT_THROW(expand_soft({{0, 3, .5}, {2, 4, .25}}, 5), FormatError);
  EXPECT_THROW(expand_soft({{0, 6, .5}}, 5), OffsetError);
}

TEST(ExpandSoft, InvertsToSoftLabels) {
  oracle::Rng rng(31);
  std::uniform_int_distribution<std::size_t> len_dist(1, 50);
  for (int k = 0; k < 1000; ++k) {
    const auto len = len_dist(rng);
    const auto probs = oracle::random_tied_vector(rng, len);
    ASSERT_EQ(expand_soft(to_soft_labels(probs), len), probs);
  }
}

TEST(Evaluate, SelfComparisonIsPerfect) {
  std::vector<GoldRecord> golds;
  std::vector<PredictionRecord> preds;
  for (int k = 0; k < 10; ++k) {
    auto g = gold("id" + std::to_string(k), k % 2 ? "EN" : "HI", "abcdefghij",
                  k % 3 ? SpanList{S(k % 5, k % 5 + 3)} : SpanList{});
    preds.push_back(pred_from(g));
    golds.push_back(std::move(g));
  }
  const auto report = evaluate(preds, golds);
  EXPECT_EQ(report.overall.mean_iou, 1.0);
  EXPECT_EQ(report.overall.mean_cor, 1.0);
  EXPECT_EQ(report.overall.n, 10u);
  for (const auto& [lang, m] : report.per_lang) {
    EXPECT_EQ(m.mean_iou, 1.0) << lang;
    EXPECT_EQ(m.mean_cor, 1.0) << lang;
  }
}

TEST(Evaluate, EmptyPredictionAgainstOneSpan) {
  const auto g = gold("a", "EN", "abcdef", {S(1, 3)});
  PredictionRecord p{"a", "EN", {}, {}, 12, std::nullopt};
  const auto report = evaluate({p}, {g});
  EXPECT_EQ(report.per_item.at(0).iou, 0.0);
  EXPECT_EQ(report.per_item.at(0).cor, 0.0);
}

TEST(Evaluate, MissingIdsAreListed) {
  const auto g1 = gold("a", "EN", "abc", {});
  const auto g2 = gold("b", "EN", "abc", {});
  try {
    evaluate({pred_from(g1)}, {g1, g2});
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    ASSERT_EQ(e.ids().size(), 1u);
    EXPECT_NE(e.ids()[0].find("b"), std::string::npos);
  }
  PredictionRecord stray{"zzz", "EN", {}, {}, 1, std::nullopt};
  EXPECT_THROW(evaluate({pred_from(g1), stray}, {g1}), InputError);
}

TEST(Evaluate, MixedLanguageMeansMatchRecomputation) {
  oracle::Rng rng(37);
  const char* langs[] = {"EN", "ZH", "AR"};
  std::vector<GoldRecord> golds;
  std::vector<PredictionRecord> preds;
  for (int k = 0; k < 30; ++k) {
    const auto text = oracle::random_multilingual(rng, 30);
    auto g = gold("m" + std::to_string(k), langs[k % 3], utf8::encode(text),
                  normalize(oracle::random_spans(rng, text.size(), 2)));
    PredictionRecord p{g.item.id, g.item.lang, normalize(oracle::random_spans(rng, text.size(), 2)),
                       to_soft_labels(oracle::random_tied_vector(rng, text.size())), 12,
                       std::nullopt};
    golds.push_back(g);
    preds.push_back(p);
  }
  const auto report = evaluate(preds, golds);

  std::map<std::string, std::tuple<double, double, int>> sums;
  for (std::size_t k = 0; k < golds.size(); ++k) {
    const auto len = utf8::length(golds[k].item.answer);
    const double i = oracle::iou(preds[k].hard_labels, golds[k].hard_labels, len);
    const double c = oracle::spearman(expand_soft(preds[k].soft_labels, len),
                                      expand_soft(golds[k].soft_labels, len));
    auto& [si, sc, n] = sums[golds[k].item.lang];
    si += i;
    sc += c;
    ++n;
  }
  ASSERT_EQ(report.per_lang.size(), 3u);
  for (const auto& [lang, t] : sums) {
    const auto& m = report.per_lang.at(lang);
    EXPECT_EQ(m.n, static_cast<std::size_t>(std::get<2>(t)));
    EXPECT_NEAR(m.mean_iou, std::get<0>(t) / std::get<2>(t), 1e-12);
    EXPECT_NEAR(m.mean_cor, std::get<1>(t) / std::get<2>(t), 1e-9);
  }
}

TEST(EvalReport, TableAndJsonLayout) {
  const auto g = gold("a", "EN", "abcdef", {S(1, 3)});
  const auto report = evaluate({pred_from(g)}, {g});
  const auto table = report.to_table();
  EXPECT_EQ(table.rfind("Lang", 0), 0u);
  EXPECT_NE(table.find("EN"), std::string::npos);
  EXPECT_NE(table.find("1.0000"), std::string::npos);
  EXPECT_NE(table.find("ALL"), std::string::npos);
  const auto json = report.to_json();
  EXPECT_NE(json.find("\"per_lang\""), std::string::npos);
  EXPECT_NE(json.find("\"overall\""), std::string::npos);
}
