#pragma once

#include <span>
#include <utility>
#include <vector>

#include "racap/tensor.hpp"

namespace racap {

struct LossConfig {
  double gamma = 0.4;    // slide width; S is clamped to [gamma, 1 - gamma]
  double lambda = 1.0;   // down-weight for absent-relation terms
  double beta = 0.001;   // disagreement weight
  double l2 = 1e-8;      // weight decay coefficient
  double s_init = 0.5;   // starting threshold

  void validate() const;
};

// Margin loss against a learnable threshold S:
//   present:  max(0, (S + gamma) - |r_j|)^2
//   absent:   lambda * max(0, |r_j| - (S - gamma))^2
// summed over capsules.
Tensor margin_loss(Graph& g, std::span<const Tensor> norms, const std::vector<bool>& present, const Tensor& s,
                   double gamma, double lambda);

// loss = margin + beta * disagreement + l2 * sum |theta|^2 over the given
// parameters (the caller leaves S out). Either extra term may be absent; with
// both absent the margin tensor itself is returned.
Tensor total_loss(Graph& g, const Tensor& margin, const Tensor* disagreement_term, double beta,
                  std::span<const Tensor> l2_params, double l2);

// capsule indices whose norm exceeds the threshold; empty means NA
std::vector<int> predict(std::span<const double> norms, double s);

}  // namespace racap
