#include "racap/eval.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace racap {

namespace {

// total order: best score first, then bag key, then relation id
bool ranked_before(const Prediction& a, const Prediction& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.bag_key != b.bag_key) return a.bag_key < b.bag_key;
  return a.relation < b.relation;
}

}  // namespace

std::vector<Prediction> score_bags(const Corpus& corpus, const InstanceScorer& scorer, BagAggregate agg) {
  const int num_rel = corpus.num_relations();
  std::vector<Prediction> out;
  for (const Bag& bag : bags(corpus)) {
    std::vector<double> acc(static_cast<std::size_t>(num_rel), 0.0);
    bool first = true;
    for (int id : bag.instance_ids) {
      const std::vector<double> scores = scorer(corpus.instances[static_cast<std::size_t>(id)]);
      if (static_cast<int>(scores.size()) != num_rel) {
        throw std::invalid_argument("score_bags: scorer returned " + std::to_string(scores.size()) +
                                    " scores for " + std::to_string(num_rel) + " relations");
      }
      for (int j = 0; j < num_rel; ++j) {
        const double s = scores[static_cast<std::size_t>(j)];
        if (agg == BagAggregate::Max) {
          acc[static_cast<std::size_t>(j)] = first ? s : std::max(acc[static_cast<std::size_t>(j)], s);
        } else {
          acc[static_cast<std::size_t>(j)] += s;
        }
      }
      first = false;
    }
    if (agg == BagAggregate::Mean) {
      for (double& s : acc) s /= static_cast<double>(bag.instance_ids.size());
    }
    for (int j = 1; j < num_rel; ++j) {
      out.push_back(Prediction{bag.key, j, acc[static_cast<std::size_t>(j)]});
    }
  }
  return out;
}

GoldSet gold_positives(const Corpus& corpus) {
  GoldSet gold;
  for (const Bag& bag : bags(corpus)) {
    for (int label : bag.labels) {
      if (label != 0) gold.emplace(bag.key, label);
    }
  }
  return gold;
}

PrCurve pr_curve(std::vector<Prediction> preds, const GoldSet& gold) {
  if (gold.empty()) throw std::invalid_argument("pr_curve: no gold positives, recall is undefined");
  std::sort(preds.begin(), preds.end(), ranked_before);

  PrCurve curve;
  const double positives = static_cast<double>(gold.size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (gold.count({preds[i].bag_key, preds[i].relation})) ++correct;
    curve.points.push_back(PrCurvePoint{static_cast<double>(correct) / static_cast<double>(i + 1),
                                        static_cast<double>(correct) / positives});
  }

  double prev_p = 0.0, prev_r = 0.0;
  bool leading = true;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    // only the last prefix at each recall level sits on the curve
    if (i + 1 < curve.points.size() && curve.points[i + 1].recall == curve.points[i].recall) continue;
    const PrCurvePoint& pt = curve.points[i];
    if (leading) {
      curve.area += pt.precision * pt.recall;
      leading = false;
    } else {
      curve.area += (pt.recall - prev_r) * (pt.precision + prev_p) / 2.0;
    }
    prev_p = pt.precision;
    prev_r = pt.recall;
  }
  return curve;
}

double p_at_n(std::vector<Prediction> preds, const GoldSet& gold, std::size_t n) {
  if (n == 0) throw std::invalid_argument("p_at_n: n must be positive");
  if (n > preds.size()) {
    throw std::invalid_argument("p_at_n: asked for top " + std::to_string(n) + " of " +
                                std::to_string(preds.size()) + " predictions");
  }
  std::sort(preds.begin(), preds.end(), ranked_before);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (gold.count({preds[i].bag_key, preds[i].relation})) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace racap
