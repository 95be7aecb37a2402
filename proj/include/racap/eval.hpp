#pragma once

#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "racap/data.hpp"

namespace racap {

// One scored decision: does this bag express this (non-NA) relation?
struct Prediction {
  std::string bag_key;
  int relation = 0;
  double score = 0.0;
};

enum class BagAggregate { Max, Mean };

// Per-instance scores indexed by relation id (entry 0 = NA), e.g. the high
// capsule norms of a forward pass.
using InstanceScorer = std::function<std::vector<double>(const Instance&)>;

// One prediction per (bag, non-NA relation), aggregating instance scores
// across the bag.
std::vector<Prediction> score_bags(const Corpus& corpus, const InstanceScorer& scorer, BagAggregate agg);

// gold (bag_key, relation) positives: every non-NA label of every bag
using GoldSet = std::set<std::pair<std::string, int>>;
GoldSet gold_positives(const Corpus& corpus);

struct PrCurvePoint {
  double precision = 0.0;
  double recall = 0.0;
};

struct PrCurve {
  std::vector<PrCurvePoint> points;  // one per ranked prediction prefix
  double area = 0.0;
};

// Rank by score descending (ties by bag key then relation id) and sweep the
// prefix. The area keeps the last point at each distinct recall; the leading
// segment is a rectangle at that point's precision, the rest are trapezoids.
// Throws when the gold set is empty.
PrCurve pr_curve(std::vector<Prediction> preds, const GoldSet& gold);

// fraction of the n best-ranked predictions that are gold positives
double p_at_n(std::vector<Prediction> preds, const GoldSet& gold, std::size_t n);

}  // namespace racap
