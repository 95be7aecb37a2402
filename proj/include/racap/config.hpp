#pragma once

#include <cstdint>
#include <string>

#include "racap/loss.hpp"

namespace racap {

// Architecture shape. Defaults are the full-size settings; the test harness
// shrinks everything for speed.
struct ModelConfig {
  int max_len = 100;    // sentence cap; also the position-feature clip radius
  int word_dim = 50;    // word embedding width
  int pos_dim = 5;      // each position embedding width
  int hidden = 256;     // BLSTM output width (directions summed) and attention width
  int heads = 16;       // attention heads; must divide hidden
  int attn_out = 256;   // feed-forward combiner output width
  int caps_count = 16;  // low-level capsules; caps_count * caps_in == attn_out
  int caps_in = 16;     // low-level capsule width
  int caps_out = 16;    // high-level capsule width
  int routing_iters = 3;
  bool relation_query = true;      // off: a learned constant query vector instead
  bool scale_by_head_dim = false;  // energies divide by sqrt(hidden) by default

  int feature_dim() const { return word_dim + 2 * pos_dim; }
  void validate() const;
};

struct TrainConfig {
  int batch_size = 50;
  double learning_rate = 1e-4;
  int epochs = 10;
  double dropout = 0.5;  // on the BLSTM output, training only
  std::uint64_t seed = 1;
  bool enable_head_reg = true;
  bool enable_capsule_reg = true;
  ModelConfig model;
  LossConfig loss;

  static TrainConfig from_json_text(const std::string& text);
  static TrainConfig from_json_file(const std::string& path);
  std::string to_json_text() const;  // round-trips through from_json_text
  void validate() const;
};

}  // namespace racap
