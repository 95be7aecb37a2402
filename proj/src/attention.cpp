#include "racap/attention.hpp"

#include <cmath>
#include <stdexcept>

namespace racap {

namespace {

Tensor glorotish(int rows, int cols, Rng& rng) {
  Tensor t = Tensor::zeros({rows, cols}, true);
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  for (auto& v : t.data()) v = rng.uniform(-bound, bound);
  return t;
}

}  // namespace

AttentionParams AttentionParams::init(int d, int d_out, int heads, bool use_relation_query,
                                      bool scale_by_head_dim, Rng& rng) {
  if (d < 1 || d_out < 1 || heads < 1) throw std::invalid_argument("attention: bad dimensions");
  if (d % heads != 0) {
    throw std::invalid_argument("attention: heads " + std::to_string(heads) + " must divide width " +
                                std::to_string(d));
  }
  AttentionParams p;
  p.heads = heads;
  p.use_relation_query = use_relation_query;
  p.scale_by_head_dim = scale_by_head_dim;
  if (use_relation_query) {
    p.wq = glorotish(d, d, rng);
  } else {
    p.const_q = glorotish(1, d, rng);
  }
  p.wk = glorotish(d, d, rng);
  p.wv = glorotish(d, d, rng);
  p.wo = glorotish(d, d, rng);
  p.f1_w = glorotish(d, d, rng);
  p.f1_b = Tensor::zeros({1, d}, true);
  p.f2_w = glorotish(d, d_out, rng);
  p.f2_b = Tensor::zeros({1, d_out}, true);
  return p;
}

Tensor relation_query(Graph& g, const Tensor& h, int ent1_pos, int ent2_pos, const Tensor& wq) {
  if (h.ndim() != 2) throw std::invalid_argument("relation_query: need 2-D encodings");
  const int l = h.dim(0);
  if (ent1_pos < 0 || ent1_pos >= l || ent2_pos < 0 || ent2_pos >= l) {
    throw std::invalid_argument("relation_query: entity position outside the sequence");
  }
  Tensor h1 = g.narrow(h, 0, ent1_pos, 1);
  Tensor h2 = g.narrow(h, 0, ent2_pos, 1);
  return g.matmul(g.sub(h1, h2), wq);
}

AttentionOutput multi_head_attention(Graph& g, const Tensor& h, const Tensor& q, const AttentionParams& p) {
  if (h.ndim() != 2 || q.ndim() != 2 || q.dim(0) != 1) {
    throw std::invalid_argument("attention: h must be l x d and q must be 1 x d");
  }
  const int d = h.dim(1);
  if (q.dim(1) != d) {
    throw std::invalid_argument("attention: query width " + std::to_string(q.dim(1)) + " vs encoding width " +
                                std::to_string(d));
  }
  if (p.heads < 1 || d % p.heads != 0) throw std::invalid_argument("attention: heads must divide width");
  const int dh = d / p.heads;

  Tensor k = g.matmul(h, p.wk);
  Tensor v = g.matmul(h, p.wv);
  const double denom = std::sqrt(static_cast<double>(p.scale_by_head_dim ? dh : d));

  AttentionOutput out;
  out.heads.reserve(static_cast<std::size_t>(p.heads));
  out.weights.reserve(static_cast<std::size_t>(p.heads));
  for (int i = 0; i < p.heads; ++i) {
    Tensor qi = g.narrow(q, 1, i * dh, dh);
    Tensor ki = g.narrow(k, 1, i * dh, dh);
    Tensor vi = g.narrow(v, 1, i * dh, dh);
    Tensor energy = g.scale(g.matmul(qi, g.transpose(ki)), 1.0 / denom);  // 1 x l
    Tensor w = g.softmax(energy, 1);
    out.weights.push_back(w);
    out.heads.push_back(g.matmul(w, vi));  // 1 x dh
  }
  out.mixed = g.matmul(g.concat(out.heads, 1), p.wo);
  Tensor hidden = g.relu(g.add(g.matmul(out.mixed, p.f1_w), p.f1_b));
  out.output = g.add(g.matmul(hidden, p.f2_w), p.f2_b);
  return out;
}

}  // namespace racap
