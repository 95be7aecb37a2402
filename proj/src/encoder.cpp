#include "racap/encoder.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace racap {

namespace {

LstmGate init_gate(int input_dim, int hidden, double forget_bias, Rng& rng) {
  LstmGate gate;
  gate.wx = Tensor::zeros({input_dim, hidden}, true);
  gate.wh = Tensor::zeros({hidden, hidden}, true);
  gate.b = Tensor::full({1, hidden}, forget_bias, true);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (auto& v : gate.wx.data()) v = rng.uniform(-bound, bound);
  for (auto& v : gate.wh.data()) v = rng.uniform(-bound, bound);
  return gate;
}

// one step: returns (h, c)
std::pair<Tensor, Tensor> lstm_step(Graph& g, const Tensor& xt, const Tensor& h_prev, const Tensor& c_prev,
                                    const LstmDirection& d) {
  auto affine = [&](const LstmGate& gate) {
    return g.add(g.add(g.matmul(xt, gate.wx), g.matmul(h_prev, gate.wh)), gate.b);
  };
  Tensor i = g.sigmoid(affine(d.input));
  Tensor f = g.sigmoid(affine(d.forget));
  Tensor o = g.sigmoid(affine(d.output));
  Tensor cand = g.tanh(affine(d.candidate));
  Tensor c = g.add(g.mul(f, c_prev), g.mul(i, cand));
  Tensor h = g.mul(o, g.tanh(c));
  return {h, c};
}

std::vector<Tensor> run_direction(Graph& g, const Tensor& x, const LstmDirection& d, int hidden, bool reverse) {
  const int l = x.dim(0);
  std::vector<Tensor> hs(static_cast<std::size_t>(l));
  Tensor h = Tensor::zeros({1, hidden});
  Tensor c = Tensor::zeros({1, hidden});
  for (int step = 0; step < l; ++step) {
    const int t = reverse ? l - 1 - step : step;
    Tensor xt = g.narrow(x, 0, t, 1);
    auto [h2, c2] = lstm_step(g, xt, h, c, d);
    h = h2;
    c = c2;
    hs[static_cast<std::size_t>(t)] = h;
  }
  return hs;
}

}  // namespace

LstmParams LstmParams::init(int input_dim, int hidden, Rng& rng) {
  if (input_dim < 1 || hidden < 1) throw std::invalid_argument("lstm: bad dimensions");
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden = hidden;
  for (LstmDirection* d : {&p.fw, &p.bw}) {
    d->input = init_gate(input_dim, hidden, 0.0, rng);
    d->forget = init_gate(input_dim, hidden, 1.0, rng);
    d->output = init_gate(input_dim, hidden, 0.0, rng);
    d->candidate = init_gate(input_dim, hidden, 0.0, rng);
  }
  return p;
}

Tensor blstm(Graph& g, const Tensor& x, const LstmParams& p) {
  if (x.ndim() != 2 || x.dim(1) != p.input_dim) {
    throw std::invalid_argument("blstm: input shape " + shape_str(x.shape()) + " does not match input_dim " +
                                std::to_string(p.input_dim));
  }
  auto fw = run_direction(g, x, p.fw, p.hidden, false);
  auto bw = run_direction(g, x, p.bw, p.hidden, true);
  std::vector<Tensor> rows(fw.size());
  for (std::size_t t = 0; t < fw.size(); ++t) rows[t] = g.add(fw[t], bw[t]);
  if (rows.size() == 1) return rows[0];
  return g.concat(rows, 0);
}

}  // namespace racap
