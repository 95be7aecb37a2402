#pragma once

#include <string>
#include <utility>
#include <vector>

#include "racap/attention.hpp"
#include "racap/capsule.hpp"
#include "racap/config.hpp"
#include "racap/encoder.hpp"
#include "racap/features.hpp"

namespace racap {

// The assembled network. High capsule j scores relation id j directly, with
// capsule 0 standing for NA, so the capsule count equals the relation count.
struct Model {
  ModelConfig cfg;
  EmbeddingTables tables;
  LstmParams lstm;
  AttentionParams attn;
  std::vector<Tensor> caps_w;  // per high capsule: caps_in x caps_out
  Tensor s;                    // learnable decision threshold, 1 element
  int num_relations = 0;

  static Model init(const ModelConfig& cfg, int vocab_size, int num_relations, double s_init, Rng& rng);

  // stable name -> tensor inventory; iteration order is fixed
  std::vector<std::pair<std::string, Tensor>> named_params() const;
  void zero_grads() const;
};

struct ForwardOptions {
  bool training = false;
  double dropout = 0.0;  // applied to BLSTM output entries when training
  bool enable_head_reg = true;
  bool enable_capsule_reg = true;
  Rng* rng = nullptr;  // required when training with dropout > 0
};

struct ForwardResult {
  std::vector<Tensor> capsules;      // per relation, 1 x caps_out
  std::vector<Tensor> norms;         // per relation, scalar
  Tensor disagreement;               // defined only in training mode with a reg flag on
  std::vector<Tensor> heads;         // attention heads, 1 x hidden/heads
  std::vector<Tensor> attn_weights;  // per head, 1 x seq_len
  std::vector<Tensor> low_capsules;  // squashed slices, 1 x caps_in
  RoutingState routing;
};

ForwardResult forward(Graph& g, const Model& model, const Instance& inst, const ForwardOptions& opt);

// capsule norms of an inference-mode pass, indexed by relation id
std::vector<double> relation_scores(const Model& model, const Instance& inst);

}  // namespace racap
