#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "oracles.hpp"
#include "racap/encoder.hpp"

using namespace racap;

namespace {

// Plain scalar reference for the summed bidirectional LSTM, mirroring the
// gate equations directly on std::vector loops.
struct ScalarLstm {
  int in, hid;

  std::vector<double> gate(const std::vector<double>& wx, const std::vector<double>& wh,
                           const std::vector<double>& b, const std::vector<double>& x,
                           const std::vector<double>& h) const {
    std::vector<double> out(static_cast<std::size_t>(hid));
    for (int j = 0; j < hid; ++j) {
      double ax = 0.0, ah = 0.0;
      for (int k = 0; k < in; ++k) ax += x[static_cast<std::size_t>(k)] * wx[static_cast<std::size_t>(k) * hid + j];
      for (int k = 0; k < hid; ++k) ah += h[static_cast<std::size_t>(k)] * wh[static_cast<std::size_t>(k) * hid + j];
      out[static_cast<std::size_t>(j)] = (ax + ah) + b[static_cast<std::size_t>(j)];
    }
    return out;
  }

  static double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

  std::vector<std::vector<double>> run(const LstmDirection& d, const std::vector<std::vector<double>>& xs,
                                       bool reverse) const {
    auto vals = [](const Tensor& t) { return std::vector<double>(t.data().begin(), t.data().end()); };
    const auto wxi = vals(d.input.wx), whi = vals(d.input.wh), bi = vals(d.input.b);
    const auto wxf = vals(d.forget.wx), whf = vals(d.forget.wh), bf = vals(d.forget.b);
    const auto wxo = vals(d.output.wx), who = vals(d.output.wh), bo = vals(d.output.b);
    const auto wxc = vals(d.candidate.wx), whc = vals(d.candidate.wh), bc = vals(d.candidate.b);

    const int l = static_cast<int>(xs.size());
    std::vector<std::vector<double>> hs(static_cast<std::size_t>(l));
    std::vector<double> h(static_cast<std::size_t>(hid), 0.0), c(static_cast<std::size_t>(hid), 0.0);
    for (int step = 0; step < l; ++step) {
      const int t = reverse ? l - 1 - step : step;
      const auto& x = xs[static_cast<std::size_t>(t)];
      auto ig = gate(wxi, whi, bi, x, h);
      auto fg = gate(wxf, whf, bf, x, h);
      auto og = gate(wxo, who, bo, x, h);
      auto cg = gate(wxc, whc, bc, x, h);
      for (int j = 0; j < hid; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const double iv = sigmoid(ig[ju]);
        const double fv = sigmoid(fg[ju]);
        const double ov = sigmoid(og[ju]);
        const double cv = std::tanh(cg[ju]);
        c[ju] = fv * c[ju] + iv * cv;
        h[ju] = ov * std::tanh(c[ju]);
      }
      hs[static_cast<std::size_t>(t)] = h;
    }
    return hs;
  }
};

}  // namespace

TEST_SUITE("encoder") {

TEST_CASE("blstm matches an independent scalar reference") {
  Rng rng(51);
  const int in = 3, hid = 2, l = 5;
  auto p = LstmParams::init(in, hid, rng);
  std::vector<std::vector<double>> xs(static_cast<std::size_t>(l));
  std::vector<double> flat;
  for (auto& row : xs) {
    row.resize(static_cast<std::size_t>(in));
    for (auto& v : row) {
      v = rng.uniform(-1.0, 1.0);
      flat.push_back(v);
    }
  }
  Tensor x = Tensor::from({l, in}, flat);

  Graph g;
  Tensor h = blstm(g, x, p);
  REQUIRE(h.shape() == Shape{l, hid});

  ScalarLstm ref{in, hid};
  auto fw = ref.run(p.fw, xs, false);
  auto bw = ref.run(p.bw, xs, true);
  for (int t = 0; t < l; ++t) {
    for (int j = 0; j < hid; ++j) {
      const double expect = fw[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] +
                            bw[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
      CHECK(h.at(t, j) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("directions are genuinely bidirectional") {
  // With a length-2 input, position 0 of the backward pass must depend on
  // position 1 of the input; a forward-only bug would leave it unchanged.
  Rng rng(52);
  const int in = 2, hid = 2;
  auto p = LstmParams::init(in, hid, rng);
  Tensor x1 = Tensor::from({2, in}, {0.3, -0.2, 0.9, 0.5});
  Tensor x2 = Tensor::from({2, in}, {0.3, -0.2, -0.7, 0.1});  // same row 0, different row 1
  Graph g1, g2;
  Tensor h1 = blstm(g1, x1, p);
  Tensor h2 = blstm(g2, x2, p);
  bool row0_differs = false;
  for (int j = 0; j < hid; ++j)
    if (h1.at(0, j) != h2.at(0, j)) row0_differs = true;
  CHECK(row0_differs);
}

TEST_CASE("forget gates start with bias one, others zero, weights within bounds") {
  Rng rng(53);
  auto p = LstmParams::init(4, 3, rng);
  for (const LstmDirection* d : {&p.fw, &p.bw}) {
    for (double v : d->forget.b.data()) CHECK(v == 1.0);
    for (double v : d->input.b.data()) CHECK(v == 0.0);
    for (double v : d->output.b.data()) CHECK(v == 0.0);
    for (double v : d->candidate.b.data()) CHECK(v == 0.0);
    const double bound = 1.0 / std::sqrt(3.0);
    for (const LstmGate* gate : {&d->input, &d->forget, &d->output, &d->candidate}) {
      for (double v : gate->wx.data()) CHECK(std::fabs(v) <= bound);
      for (double v : gate->wh.data()) CHECK(std::fabs(v) <= bound);
    }
  }
}

TEST_CASE("gradients through the blstm agree with finite differences") {
  Rng rng(54);
  const int in = 2, hid = 2, l = 3;
  auto p = LstmParams::init(in, hid, rng);
  std::vector<double> xv(static_cast<std::size_t>(l * in));
  for (auto& v : xv) v = rng.uniform(-1.0, 1.0);
  Tensor x = Tensor::from({l, in}, xv, true);

  std::vector<Tensor> params{x};
  for (LstmDirection* d : {&p.fw, &p.bw}) {
    for (LstmGate* gate : {&d->input, &d->forget, &d->output, &d->candidate}) {
      params.push_back(gate->wx);
      params.push_back(gate->wh);
      params.push_back(gate->b);
    }
  }

  auto build = [&](Graph& g) { return g.l2_norm(blstm(g, x, p)); };

  for (Tensor& t : params) t.zero_grad();
  Graph g;
  g.backward(build(g));
  auto f = [&]() {
    Graph g2;
    return build(g2).item();
  };
  double worst = 0.0;
  for (Tensor& t : params) {
    auto data = t.data();
    auto grad = t.grad();
    for (std::size_t i = 0; i < data.size(); ++i) {
      worst = std::max(worst, oracle::rel_err(grad[i], oracle::central_diff(f, &data[i])));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("init is deterministic and input width is validated") {
  Rng r1(9), r2(9);
  auto p1 = LstmParams::init(3, 2, r1);
  auto p2 = LstmParams::init(3, 2, r2);
  CHECK(std::equal(p1.fw.input.wx.data().begin(), p1.fw.input.wx.data().end(), p2.fw.input.wx.data().begin()));
  CHECK(std::equal(p1.bw.candidate.wh.data().begin(), p1.bw.candidate.wh.data().end(),
                   p2.bw.candidate.wh.data().begin()));

  Graph g;
  Tensor bad = Tensor::from({2, 4}, {1, 2, 3, 4, 5, 6, 7, 8});
  CHECK_THROWS_AS(blstm(g, bad, p1), std::invalid_argument);
}

}  // TEST_SUITE
