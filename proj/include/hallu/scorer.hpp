#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "hallu/aggregate.hpp"
#include "hallu/dataset.hpp"
#include "hallu/span.hpp"

namespace hallu {

/// Character-level intersection over union. Two empty sets score 1.0.
double iou(const SpanList& pred, const SpanList& gold, std::size_t len);

/// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& values);

/// Spearman correlation: Pearson correlation of the average-rank vectors.
/// Both inputs constant gives 1.0, exactly one constant gives 0.0.
/// Throws ShapeError on empty or mismatched inputs.
double spearman(const CharProbVector& pred, const CharProbVector& gold);

/// Per-character probabilities from soft labels; uncovered characters are 0.
/// Throws FormatError on overlapping labels.
CharProbVector expand_soft(const SpanList& labels, std::size_t len);

struct ItemScore {
  std::string id;
  std::string lang;
  double iou = 0.0;
  double cor = 0.0;
};

struct MeanScore {
  double mean_iou = 0.0;
  double mean_cor = 0.0;
  std::size_t n = 0;
};

struct EvalReport {
  std::vector<ItemScore> per_item;  // gold-file order
  std::map<std::string, MeanScore> per_lang;
  MeanScore overall;

  std::string to_json() const;
  /// Aligned table with columns Lang, IoU, Cor, N and a closing ALL row.
  std::string to_table() const;
};

/// Scores every gold item against the prediction with the same id. Throws
/// InputError naming ids present on only one side (or duplicated).
EvalReport evaluate(const std::vector<PredictionRecord>& preds,
                    const std::vector<GoldRecord>& golds);

}  // namespace hallu
