#pragma once

#include <string>
#include <vector>

#include "racap/config.hpp"
#include "racap/data.hpp"
#include "racap/eval.hpp"
#include "racap/model.hpp"

namespace racap {

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;          // margin + disagreement + l2, composed in that order
  double margin = 0.0;        // mean margin loss per instance
  double disagreement = 0.0;  // beta-weighted mean disagreement (0 when disabled)
  double l2 = 0.0;            // weight-decay term, averaged over batches
  double heldout_auc = 0.0;
  bool has_heldout = false;
};

struct TrainResult {
  Model model;
  std::vector<EpochMetrics> metrics;
  double best_auc = 0.0;
  int best_epoch = -1;  // -1 when no held-out corpus was given
};

// Instance-level epochs with seeded shuffling and averaged batch gradients.
// When out_dir is non-empty, writes metrics.jsonl and model.ckpt there, plus
// model.best.ckpt at each held-out PR-AUC improvement. Aborts on a non-finite
// loss, naming the epoch and batch.
TrainResult train(const TrainConfig& cfg, const Corpus& train_corpus, const Corpus* heldout,
                  const std::string& out_dir);

// bag-level PR-AUC of the model's capsule norms on a corpus (max aggregation)
double heldout_auc(const Model& model, const Corpus& corpus);

// serialize one epoch the way metrics.jsonl stores it
std::string metrics_json_line(const EpochMetrics& m);

}  // namespace racap
