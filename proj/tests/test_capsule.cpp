#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "oracles.hpp"
#include "racap/capsule.hpp"

using namespace racap;

namespace {

// Scalar reference of the routing loop, mirroring the arithmetic order of
// the graph implementation so small cases can be compared exactly.
struct RoutingRef {
  std::vector<std::vector<double>> outputs;                 // m x d_r
  std::vector<std::vector<double>> history;                 // iters x (t*m)
};

RoutingRef route_ref(const std::vector<std::vector<double>>& u, const std::vector<std::vector<std::vector<double>>>& w,
                     int iters) {
  const int t = static_cast<int>(u.size());
  const int m = static_cast<int>(w.size());
  const int d_u = static_cast<int>(u[0].size());
  const int d_r = static_cast<int>(w[0][0].size());

  // u-hat[j][i][k]
  std::vector<std::vector<std::vector<double>>> uhat(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    uhat[static_cast<std::size_t>(j)].assign(static_cast<std::size_t>(t), std::vector<double>(static_cast<std::size_t>(d_r), 0.0));
    for (int i = 0; i < t; ++i)
      for (int q = 0; q < d_u; ++q)
        for (int k = 0; k < d_r; ++k)
          uhat[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +=
              u[static_cast<std::size_t>(i)][static_cast<std::size_t>(q)] * w[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)][static_cast<std::size_t>(k)];
  }

  std::vector<std::vector<double>> b(static_cast<std::size_t>(t), std::vector<double>(static_cast<std::size_t>(m), 0.0));
  RoutingRef ref;
  std::vector<std::vector<double>> c(static_cast<std::size_t>(t), std::vector<double>(static_cast<std::size_t>(m)));
  for (int iter = 0; iter < iters; ++iter) {
    for (int i = 0; i < t; ++i) {
      double mx = b[static_cast<std::size_t>(i)][0];
      for (int j = 1; j < m; ++j) mx = std::max(mx, b[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      double sum = 0.0;
      for (int j = 0; j < m; ++j) {
        c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::exp(b[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - mx);
        sum += c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
      for (int j = 0; j < m; ++j) c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] /= sum;
    }
    std::vector<double> flat;
    for (int i = 0; i < t; ++i)
      for (int j = 0; j < m; ++j) flat.push_back(c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    ref.history.push_back(flat);

    ref.outputs.assign(static_cast<std::size_t>(m), {});
    for (int j = 0; j < m; ++j) {
      std::vector<double> s(static_cast<std::size_t>(d_r), 0.0);
      for (int i = 0; i < t; ++i)
        for (int k = 0; k < d_r; ++k)
          s[static_cast<std::size_t>(k)] += c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * uhat[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      ref.outputs[static_cast<std::size_t>(j)] = oracle::squash(s);
    }

    if (iter + 1 < iters) {
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < t; ++i) {
          double agree = 0.0;
          for (int k = 0; k < d_r; ++k)
            agree += uhat[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] * ref.outputs[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
          b[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += agree;
        }
    }
  }
  return ref;
}

std::vector<Tensor> make_rows(Rng& rng, int n, int d, bool requires_grad = false) {
  std::vector<Tensor> out;
  for (int i = 0; i < n; ++i) {
    std::vector<double> v(static_cast<std::size_t>(d));
    for (auto& x : v) x = rng.uniform(-1, 1);
    out.push_back(Tensor::from({1, d}, std::move(v), requires_grad));
  }
  return out;
}

std::vector<Tensor> make_maps(Rng& rng, int m, int d_u, int d_r, bool requires_grad = false) {
  std::vector<Tensor> out;
  for (int j = 0; j < m; ++j) {
    std::vector<double> v(static_cast<std::size_t>(d_u * d_r));
    for (auto& x : v) x = rng.uniform(-1, 1);
    out.push_back(Tensor::from({d_u, d_r}, std::move(v), requires_grad));
  }
  return out;
}

}  // namespace

TEST_SUITE("capsule") {

TEST_CASE("squash of (3,4) lands on the known fraction") {
  Graph g;
  Tensor v = Tensor::from({1, 2}, {3.0, 4.0});
  Tensor s = squash(g, v);
  // norm 5, factor 5/26
  CHECK(s.at(0, 0) == doctest::Approx(15.0 / 26.0).epsilon(1e-15));
  CHECK(s.at(0, 1) == doctest::Approx(20.0 / 26.0).epsilon(1e-15));
  Graph g2;
  CHECK(g2.l2_norm(s).item() == doctest::Approx(25.0 / 26.0).epsilon(1e-15));
}

TEST_CASE("squash norms stay in [0,1) and grow monotonically") {
  Rng rng(81);
  const int d = 4;
  std::vector<std::pair<double, double>> in_out;
  for (int i = 0; i < 10000; ++i) {
    const double target = std::pow(10.0, rng.uniform(-8.0, 3.0));
    std::vector<double> v(static_cast<std::size_t>(d));
    double n2 = 0.0;
    for (auto& x : v) {
      x = rng.uniform(-1, 1);
      n2 += x * x;
    }
    const double scale_to = target / std::sqrt(n2);
    for (auto& x : v) x *= scale_to;

    Graph g;
    Tensor s = squash(g, Tensor::from({1, d}, v));
    const double out_norm = oracle::norm({s.data().begin(), s.data().end()});
    CHECK(out_norm >= 0.0);
    CHECK(out_norm < 1.0);
    in_out.emplace_back(oracle::norm(v), out_norm);
  }
  std::sort(in_out.begin(), in_out.end());
  int violations = 0;
  for (std::size_t i = 1; i < in_out.size(); ++i) {
    if (in_out[i].first == in_out[i - 1].first) continue;
    if (!(in_out[i].second > in_out[i - 1].second)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("squash of the zero vector is zero with zero gradient") {
  Graph g;
  Tensor v = Tensor::zeros({1, 3}, true);
  Tensor s = squash(g, v);
  for (int j = 0; j < 3; ++j) CHECK(s.at(0, j) == 0.0);
  v.zero_grad();
  g.backward(g.sum(s));
  for (double gv : v.grad()) CHECK(gv == 0.0);
}

TEST_CASE("squash gradient matches finite differences") {
  Rng rng(82);
  for (int trial = 0; trial < 50; ++trial) {
    auto vs = make_rows(rng, 1, 4, true);
    Tensor v = vs[0];
    v.zero_grad();
    auto build = [&](Graph& g) { return g.l2_norm(squash(g, v)); };
    Graph g;
    g.backward(build(g));
    auto f = [&]() {
      Graph g2;
      return build(g2).item();
    };
    auto data = v.data();
    auto grad = v.grad();
    for (std::size_t i = 0; i < data.size(); ++i) {
      CHECK(oracle::rel_err(grad[i], oracle::central_diff(f, &data[i])) < 1e-6);
    }
  }
}

TEST_CASE("split_capsules tiles the feature row exactly") {
  Graph g;
  Tensor feats = Tensor::from({1, 6}, {1, 2, 3, 4, 5, 6});
  CapsuleConfig cfg;
  cfg.count = 3;
  cfg.in_dim = 2;
  cfg.out_dim = 2;
  auto caps = split_capsules(g, feats, cfg);
  REQUIRE(caps.size() == 3);
  CHECK(caps[0].at(0, 0) == 1);
  CHECK(caps[0].at(0, 1) == 2);
  CHECK(caps[2].at(0, 0) == 5);
  CHECK(caps[2].at(0, 1) == 6);

  cfg.in_dim = 4;  // 3 * 4 != 6
  CHECK_THROWS_AS(split_capsules(g, feats, cfg), std::invalid_argument);
  cfg.in_dim = 2;
  cfg.routing_iters = 0;
  CHECK_THROWS_AS(split_capsules(g, feats, cfg), std::invalid_argument);
}

TEST_CASE("routing coefficients are simplex rows at every iteration") {
  Rng rng(83);
  const int t = 5, m = 4;
  auto u = make_rows(rng, t, 3);
  auto w = make_maps(rng, m, 3, 2);
  Graph g;
  auto [outputs, state] = dynamic_routing(g, u, w, 3);
  REQUIRE(outputs.size() == static_cast<std::size_t>(m));
  REQUIRE(state.coupling_history.size() == 3);
  for (const auto& snap : state.coupling_history) {
    REQUIRE(snap.size() == static_cast<std::size_t>(t * m));
    for (int i = 0; i < t; ++i) {
      double sum = 0.0;
      for (int j = 0; j < m; ++j) {
        const double c = snap[static_cast<std::size_t>(i * m + j)];
        CHECK(c >= 0.0);
        sum += c;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("routing matches the scalar reference trace") {
  Rng rng(84);
  const int t = 4, m = 3, d_u = 3, d_r = 2, iters = 3;
  auto u = make_rows(rng, t, d_u);
  auto w = make_maps(rng, m, d_u, d_r);

  std::vector<std::vector<double>> u_ref;
  for (const Tensor& ui : u) u_ref.emplace_back(ui.data().begin(), ui.data().end());
  std::vector<std::vector<std::vector<double>>> w_ref;
  for (const Tensor& wj : w) {
    std::vector<std::vector<double>> mat(static_cast<std::size_t>(d_u), std::vector<double>(static_cast<std::size_t>(d_r)));
    for (int q = 0; q < d_u; ++q)
      for (int k = 0; k < d_r; ++k) mat[static_cast<std::size_t>(q)][static_cast<std::size_t>(k)] = wj.at(q, k);
    w_ref.push_back(mat);
  }

  Graph g;
  auto [outputs, state] = dynamic_routing(g, u, w, iters);
  auto ref = route_ref(u_ref, w_ref, iters);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < d_r; ++k)
      CHECK(outputs[static_cast<std::size_t>(j)].at(0, k) ==
            doctest::Approx(ref.outputs[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]).epsilon(1e-12));
  for (int it = 0; it < iters; ++it)
    for (std::size_t x = 0; x < ref.history[static_cast<std::size_t>(it)].size(); ++x)
      CHECK(state.coupling_history[static_cast<std::size_t>(it)][x] ==
            doctest::Approx(ref.history[static_cast<std::size_t>(it)][x]).epsilon(1e-12));
}

TEST_CASE("single input capsule with one pass is the exact uniform mixture") {
  Rng rng(85);
  const int m = 3, d_u = 3, d_r = 2;
  auto u = make_rows(rng, 1, d_u);
  auto w = make_maps(rng, m, d_u, d_r);
  Graph g;
  auto [outputs, state] = dynamic_routing(g, u, w, 1);
  for (double b : state.logits.data()) CHECK(b == 0.0);  // no update after the only iteration
  for (int j = 0; j < m; ++j) {
    // u-hat scaled by the uniform coefficient 1/m, then squashed
    Graph g2;
    Tensor uhat = g2.matmul(u[0], w[static_cast<std::size_t>(j)]);
    std::vector<double> s(static_cast<std::size_t>(d_r));
    const double coeff = 1.0 / static_cast<double>(m);
    for (int k = 0; k < d_r; ++k) s[static_cast<std::size_t>(k)] = coeff * uhat.at(0, k);
    auto expect = oracle::squash(s);
    for (int k = 0; k < d_r; ++k) {
      CHECK(outputs[static_cast<std::size_t>(j)].at(0, k) == expect[static_cast<std::size_t>(k)]);  // exact
    }
  }
}

TEST_CASE("outputs are invariant to permuting the input capsules") {
  Rng rng(86);
  const int t = 4, m = 2, d_u = 2, d_r = 2;
  auto u = make_rows(rng, t, d_u);
  auto w = make_maps(rng, m, d_u, d_r);
  Graph g1;
  auto [out1, st1] = dynamic_routing(g1, u, w, 3);
  std::vector<Tensor> perm{u[2], u[0], u[3], u[1]};
  Graph g2;
  auto [out2, st2] = dynamic_routing(g2, perm, w, 3);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < d_r; ++k)
      CHECK(out1[static_cast<std::size_t>(j)].at(0, k) ==
            doctest::Approx(out2[static_cast<std::size_t>(j)].at(0, k)).epsilon(1e-12));
}

TEST_CASE("logits restart at zero on every call") {
  Rng rng(87);
  auto u = make_rows(rng, 3, 2);
  auto w = make_maps(rng, 2, 2, 2);
  Graph g1, g2;
  auto [o1, s1] = dynamic_routing(g1, u, w, 3);
  auto [o2, s2] = dynamic_routing(g2, u, w, 3);
  for (std::size_t j = 0; j < o1.size(); ++j) {
    CHECK(std::memcmp(o1[j].data().data(), o2[j].data().data(), o1[j].numel() * sizeof(double)) == 0);
  }
  CHECK(std::memcmp(s1.logits.data().data(), s2.logits.data().data(), s1.logits.numel() * sizeof(double)) == 0);
}

TEST_CASE("gradients flow through the unrolled routing, coefficients included") {
  Rng rng(88);
  const int t = 3, m = 2, d_u = 2, d_r = 2;
  auto u = make_rows(rng, t, d_u, true);
  auto w = make_maps(rng, m, d_u, d_r, true);
  std::vector<Tensor> params;
  params.insert(params.end(), u.begin(), u.end());
  params.insert(params.end(), w.begin(), w.end());

  auto build = [&](Graph& g) {
    auto [outputs, state] = dynamic_routing(g, u, w, 2);
    Tensor acc;
    for (const Tensor& r : outputs) {
      Tensor n = g.l2_norm(r);
      acc = acc.defined() ? g.add(acc, n) : n;
    }
    return acc;
  };
  for (Tensor& p : params) p.zero_grad();
  Graph g;
  g.backward(build(g));
  auto f = [&]() {
    Graph g2;
    return build(g2).item();
  };
  double worst = 0.0;
  for (Tensor& p : params) {
    auto data = p.data();
    auto grad = p.grad();
    for (std::size_t i = 0; i < data.size(); ++i) {
      worst = std::max(worst, oracle::rel_err(grad[i], oracle::central_diff(f, &data[i])));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("routing contracts") {
  Rng rng(89);
  auto u = make_rows(rng, 2, 3);
  auto w = make_maps(rng, 2, 3, 2);
  Graph g;
  CHECK_THROWS_AS(dynamic_routing(g, u, w, 0), std::invalid_argument);
  auto bad_w = make_maps(rng, 2, 4, 2);
  CHECK_THROWS_AS(dynamic_routing(g, u, bad_w, 2), std::invalid_argument);
  std::vector<Tensor> empty;
  CHECK_THROWS_AS(dynamic_routing(g, empty, w, 2), std::invalid_argument);
}

}  // TEST_SUITE
