#include "racap/capsule.hpp"

#include <stdexcept>
#include <string>

namespace racap {

void CapsuleConfig::validate(int feature_width) const {
  if (count < 1 || in_dim < 1 || out_dim < 1) throw std::invalid_argument("capsule: bad dimensions");
  if (routing_iters < 1) throw std::invalid_argument("capsule: routing_iters must be >= 1");
  if (count * in_dim != feature_width) {
    throw std::invalid_argument("capsule: count " + std::to_string(count) + " x in_dim " + std::to_string(in_dim) +
                                " must equal the feature width " + std::to_string(feature_width));
  }
}

Tensor squash(Graph& g, const Tensor& v) {
  Tensor n = g.l2_norm(v);
  Tensor factor = g.div(n, g.add_const(g.mul(n, n), 1.0));
  return g.mul(v, factor);
}

std::vector<Tensor> split_capsules(Graph& g, const Tensor& features, const CapsuleConfig& cfg) {
  if (features.ndim() != 2 || features.dim(0) != 1) {
    throw std::invalid_argument("split_capsules: features must be a single row, got " + shape_str(features.shape()));
  }
  cfg.validate(features.dim(1));
  std::vector<Tensor> out(static_cast<std::size_t>(cfg.count));
  for (int i = 0; i < cfg.count; ++i) {
    out[static_cast<std::size_t>(i)] = g.narrow(features, 1, i * cfg.in_dim, cfg.in_dim);
  }
  return out;
}

std::pair<std::vector<Tensor>, RoutingState> dynamic_routing(Graph& g, std::span<const Tensor> u,
                                                             std::span<const Tensor> w, int iters) {
  const int t = static_cast<int>(u.size());
  const int m = static_cast<int>(w.size());
  if (t < 1 || m < 1) throw std::invalid_argument("routing: need at least one capsule on each side");
  if (iters < 1) throw std::invalid_argument("routing: iters must be >= 1");
  const int d_u = u[0].dim(1);
  const int d_r = w[0].dim(1);
  for (const Tensor& ui : u) {
    if (ui.ndim() != 2 || ui.dim(0) != 1 || ui.dim(1) != d_u) {
      throw std::invalid_argument("routing: input capsule shape " + shape_str(ui.shape()));
    }
  }
  for (const Tensor& wj : w) {
    if (wj.ndim() != 2 || wj.dim(0) != d_u || wj.dim(1) != d_r) {
      throw std::invalid_argument("routing: transform shape " + shape_str(wj.shape()) + ", expected [" +
                                  std::to_string(d_u) + "," + std::to_string(d_r) + "]");
    }
  }

  RoutingState state;
  state.predictions.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    std::vector<Tensor> uhat(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) uhat[static_cast<std::size_t>(i)] = g.matmul(u[static_cast<std::size_t>(i)], w[static_cast<std::size_t>(j)]);
    state.predictions.push_back(t == 1 ? uhat[0] : g.concat(uhat, 0));  // t x d_r
  }

  Tensor b = Tensor::zeros({t, m});  // fresh logits every pass
  Tensor c;
  std::vector<Tensor> outputs(static_cast<std::size_t>(m));
  for (int iter = 0; iter < iters; ++iter) {
    c = g.softmax(b, 1);
    state.coupling_history.emplace_back(c.data().begin(), c.data().end());
    for (int j = 0; j < m; ++j) {
      Tensor cj = g.transpose(g.narrow(c, 1, j, 1));  // 1 x t
      Tensor sj = g.matmul(cj, state.predictions[static_cast<std::size_t>(j)]);
      outputs[static_cast<std::size_t>(j)] = squash(g, sj);
    }
    if (iter + 1 < iters) {
      std::vector<Tensor> agreements(static_cast<std::size_t>(m));
      for (int j = 0; j < m; ++j) {
        agreements[static_cast<std::size_t>(j)] =
            g.matmul(state.predictions[static_cast<std::size_t>(j)],
                     g.transpose(outputs[static_cast<std::size_t>(j)]));  // t x 1
      }
      b = g.add(b, m == 1 ? agreements[0] : g.concat(agreements, 1));
    }
  }
  state.logits = b;
  state.coefficients = c;
  return {outputs, state};
}

}  // namespace racap
