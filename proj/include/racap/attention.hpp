#pragma once

#include <vector>

#include "racap/rng.hpp"
#include "racap/tensor.hpp"

namespace racap {

// Multi-head attention that reads the whole sentence once per head with a
// single query, followed by a two-layer feed-forward combiner. No residual
// connections or layer norm anywhere.
struct AttentionParams {
  Tensor wq;       // d x d, only when use_relation_query
  Tensor const_q;  // 1 x d, only when the learned-constant query replaces it
  Tensor wk;       // d x d
  Tensor wv;       // d x d
  Tensor wo;       // d x d
  Tensor f1_w;     // d x d
  Tensor f1_b;     // 1 x d
  Tensor f2_w;     // d x d'
  Tensor f2_b;     // 1 x d'
  int heads = 0;
  bool use_relation_query = true;
  bool scale_by_head_dim = false;

  static AttentionParams init(int d, int d_out, int heads, bool use_relation_query, bool scale_by_head_dim,
                              Rng& rng);
};

// q = (h_en1 - h_en2) W^q: the difference of the two entity encodings acts
// as a relation-shaped probe
Tensor relation_query(Graph& g, const Tensor& h, int ent1_pos, int ent2_pos, const Tensor& wq);

struct AttentionOutput {
  Tensor output;                 // 1 x d', the feed-forward combiner result
  Tensor mixed;                  // 1 x d, concatenated heads through W^o
  std::vector<Tensor> heads;     // per head, 1 x (d / heads)
  std::vector<Tensor> weights;   // per head, 1 x seq_len attention rows
};

// h is seq_len x d; q is 1 x d. Full-width K/V projections are split into
// `heads` contiguous column slices; each head attends with its slice of q.
AttentionOutput multi_head_attention(Graph& g, const Tensor& h, const Tensor& q, const AttentionParams& p);

}  // namespace racap
