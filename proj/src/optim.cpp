#include "racap/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace racap {

Adam::Adam(std::vector<std::pair<std::string, Tensor>> params, AdamConfig cfg) : cfg_(cfg) {
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("adam: learning rate must be positive");
  for (auto& [name, tensor] : params) {
    if (!tensor.defined()) throw std::invalid_argument("adam: parameter '" + name + "' is undefined");
    Slot slot;
    slot.param = tensor;
    slot.m.assign(tensor.numel(), 0.0);
    slot.v.assign(tensor.numel(), 0.0);
    slots_.push_back(std::move(slot));
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (Slot& slot : slots_) {
    auto data = slot.param.data();
    auto grad = slot.param.grad();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double gval = grad[i];
      slot.m[i] = cfg_.beta1 * slot.m[i] + (1.0 - cfg_.beta1) * gval;
      slot.v[i] = cfg_.beta2 * slot.v[i] + (1.0 - cfg_.beta2) * gval * gval;
      const double m_hat = slot.m[i] / bc1;
      const double v_hat = slot.v[i] / bc2;
      data[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

void Adam::zero_grads() {
  for (Slot& slot : slots_) slot.param.zero_grad();
}

}  // namespace racap
