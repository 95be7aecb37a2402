#include "racap/regularize.hpp"

#include <stdexcept>

namespace racap {

Tensor avg_pairwise_cosine(Graph& g, std::span<const Tensor> vectors, bool exclude_diagonal) {
  const std::size_t m = vectors.size();
  if (m == 0) throw std::invalid_argument("avg_pairwise_cosine: no vectors");
  for (const Tensor& v : vectors) {
    if (!v.defined() || v.shape() != vectors[0].shape()) {
      throw std::invalid_argument("avg_pairwise_cosine: vectors must share one shape");
    }
  }
  if (exclude_diagonal && m == 1) {
    throw std::invalid_argument("avg_pairwise_cosine: one vector leaves no off-diagonal pairs");
  }

  // self dot products once per vector; an exactly-zero norm gates the pair to 0
  std::vector<Tensor> self(m);
  for (std::size_t i = 0; i < m; ++i) self[i] = g.dot(vectors[i], vectors[i]);

  Tensor total;  // accumulated in fixed row-major pair order
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j && exclude_diagonal) continue;
      ++pairs;
      Tensor term;
      if (i == j) {
        // cos(v, v) == 1 exactly; emitted as a constant so no gradient flows
        term = Tensor::scalar(1.0);
      } else if (self[i].item() == 0.0 || self[j].item() == 0.0) {
        term = Tensor::scalar(0.0);
      } else {
        term = g.div(g.dot(vectors[i], vectors[j]), g.sqrt(g.mul(self[i], self[j])));
      }
      total = total.defined() ? g.add(total, term) : term;
    }
  }
  return g.div(total, Tensor::scalar(static_cast<double>(pairs)));
}

Tensor disagreement(Graph& g, std::span<const Tensor> heads, std::span<const Tensor> capsules,
                    const DisagreementConfig& cfg) {
  if (!cfg.enable_head && !cfg.enable_capsule) {
    throw std::invalid_argument("disagreement: at least one term must be enabled");
  }
  Tensor d_sub, d_cap;
  if (cfg.enable_head) d_sub = avg_pairwise_cosine(g, heads, cfg.exclude_diagonal);
  if (cfg.enable_capsule) d_cap = avg_pairwise_cosine(g, capsules, cfg.exclude_diagonal);
  if (cfg.enable_head && cfg.enable_capsule) {
    return g.div(g.add(d_sub, d_cap), Tensor::scalar(2.0));
  }
  return cfg.enable_head ? d_sub : d_cap;
}

}  // namespace racap
