#pragma once

#include <span>
#include <vector>

#include "racap/rng.hpp"
#include "racap/tensor.hpp"

namespace racap {

struct CapsuleConfig {
  int count = 0;          // t: low-level capsules per sentence
  int in_dim = 0;         // d_u: width of each low-level capsule
  int out_dim = 0;        // d_r: width of each high-level capsule
  int routing_iters = 3;  // >= 1

  void validate(int feature_width) const;  // count * in_dim must equal the input width
};

// norm-gated nonlinearity: g(v) = (|v|^2 / (1 + |v|^2)) * v / |v|
Tensor squash(Graph& g, const Tensor& v);

// slice a 1 x (t * d_u) feature row into t low-level capsules of 1 x d_u
std::vector<Tensor> split_capsules(Graph& g, const Tensor& features, const CapsuleConfig& cfg);

struct RoutingState {
  Tensor logits;                                      // t x m after the final iteration
  Tensor coefficients;                                // t x m softmax used in the final iteration
  std::vector<Tensor> predictions;                    // per output capsule j: t x d_r stacked u-hat
  std::vector<std::vector<double>> coupling_history;  // snapshot of coefficients at every iteration
};

// Agreement routing between t low-level and m high-level capsules. w[j] maps
// d_u -> d_r for output capsule j. Logits start at zero each call; the
// coefficients are differentiated through the unrolled iterations; the logit
// update is skipped after the final iteration.
std::pair<std::vector<Tensor>, RoutingState> dynamic_routing(Graph& g, std::span<const Tensor> u,
                                                             std::span<const Tensor> w, int iters);

}  // namespace racap
