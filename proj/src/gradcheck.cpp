#include "racap/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "racap/loss.hpp"
#include "racap/model.hpp"

namespace racap {

namespace {

constexpr double kStep = 1e-6;

double rel_err(double analytic, double numeric) {
  const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-3});
  return std::fabs(analytic - numeric) / denom;
}

}  // namespace

GradCheckReport run_gradcheck(const TrainConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);

  Vocab vocab;
  for (int i = 0; i < 10; ++i) vocab.add("t" + std::to_string(i));
  const int num_relations = 3;  // NA plus two
  Model model = Model::init(cfg.model, vocab.size(), num_relations, cfg.loss.s_init, rng);

  Instance inst;
  inst.bag_key = "g1#g2";
  const int len = cfg.model.max_len;
  for (int i = 0; i < len; ++i) inst.tokens.push_back(2 + rng.uniform_int(vocab.size() - 2));
  inst.ent1_pos = 0;
  inst.ent2_pos = len - 1;
  inst.labels = {1};

  ForwardOptions opt;
  opt.training = true;  // engages the disagreement term
  opt.dropout = 0.0;
  opt.enable_head_reg = cfg.enable_head_reg;
  opt.enable_capsule_reg = cfg.enable_capsule_reg;

  auto params = model.named_params();
  std::vector<Tensor> l2_params;
  for (const auto& [name, tensor] : params) {
    if (name != "loss.S") l2_params.push_back(tensor);
  }

  auto build = [&](Graph& g) {
    ForwardResult out = forward(g, model, inst, opt);
    std::vector<bool> present(static_cast<std::size_t>(num_relations), false);
    for (int label : inst.labels) present[static_cast<std::size_t>(label)] = true;
    Tensor margin = margin_loss(g, out.norms, present, model.s, cfg.loss.gamma, cfg.loss.lambda);
    return total_loss(g, margin, out.disagreement.defined() ? &out.disagreement : nullptr, cfg.loss.beta,
                      l2_params, cfg.loss.l2);
  };
  auto value = [&]() {
    Graph g;
    return build(g).item();
  };

  for (auto& [name, tensor] : params) tensor.zero_grad();
  Graph g;
  g.backward(build(g));

  GradCheckReport report;
  for (auto& [name, tensor] : params) {
    GradCheckEntry entry;
    entry.name = name;
    auto data = tensor.data();
    auto grad = tensor.grad();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + kStep;
      const double up = value();
      data[i] = saved - kStep;
      const double down = value();
      data[i] = saved;
      const double numeric = (up - down) / (2.0 * kStep);
      entry.max_rel_err = std::max(entry.max_rel_err, rel_err(grad[i], numeric));
    }
    report.worst = std::max(report.worst, entry.max_rel_err);
    report.entries.push_back(std::move(entry));
  }
  report.pass = report.worst < report.tolerance;
  return report;
}

}  // namespace racap
