#pragma once

#include "racap/rng.hpp"
#include "racap/tensor.hpp"

namespace racap {

struct LstmGate {
  Tensor wx;  // input_dim x hidden
  Tensor wh;  // hidden x hidden
  Tensor b;   // 1 x hidden
};

struct LstmDirection {
  LstmGate input, forget, output, candidate;
};

// Bidirectional LSTM whose two directions are summed, not concatenated, so
// the output width equals the hidden width.
struct LstmParams {
  LstmDirection fw, bw;
  int input_dim = 0;
  int hidden = 0;

  // uniform init in [-1/sqrt(hidden), 1/sqrt(hidden)], forget-gate bias 1.0
  static LstmParams init(int input_dim, int hidden, Rng& rng);
};

// x is seq_len x input_dim; returns seq_len x hidden. States start at zero.
Tensor blstm(Graph& g, const Tensor& x, const LstmParams& p);

}  // namespace racap
