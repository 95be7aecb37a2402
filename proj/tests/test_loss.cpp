#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "racap/loss.hpp"
#include "racap/rng.hpp"

using namespace racap;

namespace {

std::vector<Tensor> norm_tensors(const std::vector<double>& vals) {
  std::vector<Tensor> out;
  for (double v : vals) out.push_back(Tensor::from({1}, {v}));
  return out;
}

}  // namespace

TEST_SUITE("loss") {

TEST_CASE("margin loss matches the scalar reference on a grid") {
  const double gamma = 0.4;
  for (double s_val : {0.4, 0.5, 0.6}) {
    for (double lambda : {0.25, 1.0}) {
      for (double n0 : {0.0, 0.05, 0.1, 0.5, 0.85, 0.95, 0.999}) {
        for (double n1 : {0.0, 0.2, 0.9}) {
          std::vector<double> norms{n0, n1};
          std::vector<bool> present{true, false};
          Graph g;
          auto nt = norm_tensors(norms);
          Tensor s = Tensor::from({1}, {s_val});
          Tensor loss = margin_loss(g, nt, present, s, gamma, lambda);
          const double expect = oracle::margin_loss(present, norms, s_val, gamma, lambda);
          CHECK(loss.item() == doctest::Approx(expect).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("a confident correct prediction costs nothing") {
  // present capsule well above S + gamma, absent ones far below S - gamma
  Graph g;
  auto nt = norm_tensors({0.95, 0.02, 0.05});
  Tensor s = Tensor::from({1}, {0.5});
  Tensor loss = margin_loss(g, nt, {true, false, false}, s, 0.4, 1.0);
  CHECK(loss.item() == 0.0);
}

TEST_CASE("lambda only scales the absent-relation terms") {
  auto run = [&](double lambda) {
    Graph g;
    auto nt = norm_tensors({0.3, 0.8});
    Tensor s = Tensor::from({1}, {0.5});
    return margin_loss(g, nt, {true, false}, s, 0.4, lambda).item();
  };
  const double present_part = oracle::margin_term(true, 0.3, 0.5, 0.4, 1.0);
  const double absent_part = oracle::margin_term(false, 0.8, 0.5, 0.4, 1.0);
  CHECK(run(0.0) == doctest::Approx(present_part).epsilon(1e-12));
  CHECK(run(2.0) - run(1.0) == doctest::Approx(absent_part).epsilon(1e-9));
}

TEST_CASE("margin gradients match finite differences away from the hinge kinks") {
  Rng rng(91);
  for (int trial = 0; trial < 60; ++trial) {
    const double gamma = 0.4;
    const double lambda = rng.uniform(0.2, 1.5);
    const double s_val = rng.uniform(0.42, 0.58);
    std::vector<double> vals;
    std::vector<bool> present;
    for (int j = 0; j < 3; ++j) {
      double n;
      do {
        n = rng.uniform(0.01, 1.2);
      } while (std::abs(n - (s_val + gamma)) < 1e-2 || std::abs(n - (s_val - gamma)) < 1e-2);
      vals.push_back(n);
      present.push_back(rng.uniform_int(2) == 1);
    }
    std::vector<Tensor> nt;
    for (double v : vals) nt.push_back(Tensor::from({1}, {v}, true));
    Tensor s = Tensor::from({1}, {s_val}, true);

    auto build = [&](Graph& g) { return margin_loss(g, nt, present, s, gamma, lambda); };
    for (Tensor& p : nt) p.zero_grad();
    s.zero_grad();
    Graph g;
    g.backward(build(g));
    auto f = [&]() {
      Graph g2;
      return build(g2).item();
    };
    for (Tensor& p : nt) {
      CHECK(oracle::rel_err(p.grad()[0], oracle::central_diff(f, &p.data()[0])) < 1e-6);
    }
    CHECK(oracle::rel_err(s.grad()[0], oracle::central_diff(f, &s.data()[0])) < 1e-6);
  }
}

TEST_CASE("total loss composes the pieces bitwise") {
  Graph g;
  auto nt = norm_tensors({0.3, 0.8});
  Tensor s = Tensor::from({1}, {0.5});
  Tensor margin = margin_loss(g, nt, {true, false}, s, 0.4, 1.0);
  Tensor d = Tensor::from({1}, {0.75});
  Tensor p1 = Tensor::from({2, 2}, {1, 2, 3, 4});
  Tensor p2 = Tensor::from({1, 3}, {-1, 0, 2});
  std::vector<Tensor> params{p1, p2};

  SUBCASE("margin only is returned untouched") {
    Tensor out = total_loss(g, margin, nullptr, 0.001, {}, 0.0);
    CHECK(out.same_storage(margin));
  }
  SUBCASE("disagreement term") {
    Tensor out = total_loss(g, margin, &d, 0.001, {}, 0.0);
    CHECK(out.item() == margin.item() + 0.001 * 0.75);
  }
  SUBCASE("weight decay term") {
    Tensor out = total_loss(g, margin, nullptr, 0.001, params, 1e-2);
    const double sq = (1 + 4 + 9 + 16) + (1 + 0 + 4);
    CHECK(out.item() == margin.item() + 1e-2 * sq);
  }
  SUBCASE("all three") {
    Tensor out = total_loss(g, margin, &d, 0.5, params, 1e-3);
    const double sq = 30 + 5;
    // same association order as the implementation: (margin + beta*D) + l2*sq
    CHECK(out.item() == (margin.item() + 0.5 * 0.75) + 1e-3 * sq);
  }
  SUBCASE("zero weights drop the terms") {
    Tensor out = total_loss(g, margin, &d, 0.0, params, 0.0);
    CHECK(out.same_storage(margin));
  }
}

TEST_CASE("prediction thresholds strictly above S") {
  std::vector<double> norms{0.7, 0.2, 0.5, 0.51};
  auto picked = predict(norms, 0.5);
  REQUIRE(picked.size() == 2);
  CHECK(picked[0] == 0);
  CHECK(picked[1] == 3);
  CHECK(predict(std::vector<double>{0.1, 0.2}, 0.5).empty());
}

TEST_CASE("config validation") {
  LossConfig ok;
  CHECK_NOTHROW(ok.validate());
  LossConfig bad = ok;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ok;
  bad.gamma = 0.6;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ok;
  bad.lambda = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ok;
  bad.beta = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ok;
  bad.l2 = -1e-9;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ok;
  bad.s_init = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ok;
  bad.s_init = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("margin loss input contracts") {
  Graph g;
  auto nt = norm_tensors({0.5});
  Tensor s = Tensor::from({1}, {0.5});
  CHECK_THROWS_AS(margin_loss(g, nt, {true, false}, s, 0.4, 1.0), std::invalid_argument);
  std::vector<Tensor> empty;
  CHECK_THROWS_AS(margin_loss(g, empty, {}, s, 0.4, 1.0), std::invalid_argument);
}

}  // TEST_SUITE
