#pragma once

#include <string>
#include <utility>
#include <vector>

#include "racap/tensor.hpp"

namespace racap {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard Adam with bias correction. Moment state lives here, keyed by the
// parameter list order given at construction.
class Adam {
 public:
  Adam(std::vector<std::pair<std::string, Tensor>> params, AdamConfig cfg);

  void step();       // consumes the tensors' current gradients
  void zero_grads();
  int timestep() const { return t_; }

 private:
  struct Slot {
    Tensor param;
    std::vector<double> m, v;
  };
  std::vector<Slot> slots_;
  AdamConfig cfg_;
  int t_ = 0;
};

}  // namespace racap
