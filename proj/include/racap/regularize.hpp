#pragma once

#include <span>

#include "racap/tensor.hpp"

namespace racap {

struct DisagreementConfig {
  bool enable_head = true;
  bool enable_capsule = true;
  bool exclude_diagonal = false;  // diagonal terms are constant 1, carrying no gradient
};

// Mean cosine similarity over all ordered pairs of the given row vectors,
// the diagonal included (each i==j term contributes exactly 1.0). Zero-norm
// vectors contribute 0 to any pair they appear in.
Tensor avg_pairwise_cosine(Graph& g, std::span<const Tensor> vectors, bool exclude_diagonal = false);

// Average of the enabled subunit terms: heads after attention, low-level
// capsules before routing. At least one term must be enabled.
Tensor disagreement(Graph& g, std::span<const Tensor> heads, std::span<const Tensor> capsules,
                    const DisagreementConfig& cfg);

}  // namespace racap
