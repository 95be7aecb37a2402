#include "racap/loss.hpp"

#include <stdexcept>

namespace racap {

void LossConfig::validate() const {
  if (!(gamma > 0.0) || gamma > 0.5) throw std::invalid_argument("loss: gamma must be in (0, 0.5]");
  if (lambda < 0.0) throw std::invalid_argument("loss: lambda must be non-negative");
  if (beta < 0.0 || l2 < 0.0) throw std::invalid_argument("loss: regularizer weights must be non-negative");
  if (s_init <= 0.0 || s_init >= 1.0) throw std::invalid_argument("loss: s_init must be inside (0, 1)");
}

Tensor margin_loss(Graph& g, std::span<const Tensor> norms, const std::vector<bool>& present, const Tensor& s,
                   double gamma, double lambda) {
  if (norms.empty()) throw std::invalid_argument("margin_loss: no capsule norms");
  if (present.size() != norms.size()) {
    throw std::invalid_argument("margin_loss: " + std::to_string(present.size()) + " labels for " +
                                std::to_string(norms.size()) + " capsules");
  }
  if (!(gamma > 0.0)) throw std::invalid_argument("margin_loss: gamma must be positive");

  Tensor upper = g.add_const(s, gamma);   // present capsules are pushed above this
  Tensor lower = g.add_const(s, -gamma);  // absent capsules are pushed below this
  Tensor total;
  for (std::size_t j = 0; j < norms.size(); ++j) {
    Tensor term;
    if (present[j]) {
      Tensor gap = g.relu(g.sub(upper, norms[j]));
      term = g.mul(gap, gap);
    } else {
      Tensor gap = g.relu(g.sub(norms[j], lower));
      term = g.scale(g.mul(gap, gap), lambda);
    }
    total = total.defined() ? g.add(total, term) : term;
  }
  return total;
}

Tensor total_loss(Graph& g, const Tensor& margin, const Tensor* disagreement_term, double beta,
                  std::span<const Tensor> l2_params, double l2) {
  Tensor out = margin;
  if (disagreement_term != nullptr && beta > 0.0) {
    out = g.add(out, g.scale(*disagreement_term, beta));
  }
  if (l2 > 0.0 && !l2_params.empty()) {
    Tensor acc;
    for (const Tensor& p : l2_params) {
      Tensor sq = g.dot(p, p);
      acc = acc.defined() ? g.add(acc, sq) : sq;
    }
    out = g.add(out, g.scale(acc, l2));
  }
  return out;
}

std::vector<int> predict(std::span<const double> norms, double s) {
  std::vector<int> out;
  for (std::size_t j = 0; j < norms.size(); ++j) {
    if (norms[j] > s) out.push_back(static_cast<int>(j));
  }
  return out;
}

}  // namespace racap
