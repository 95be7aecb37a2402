#include "racap/train.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "racap/checkpoint.hpp"
#include "racap/loss.hpp"
#include "racap/optim.hpp"

namespace racap {

double heldout_auc(const Model& model, const Corpus& corpus) {
  const auto preds = score_bags(
      corpus, [&model](const Instance& inst) { return relation_scores(model, inst); }, BagAggregate::Max);
  return pr_curve(preds, gold_positives(corpus)).area;
}

std::string metrics_json_line(const EpochMetrics& m) {
  nlohmann::json j;
  j["epoch"] = m.epoch;
  j["loss"] = m.loss;
  j["margin"] = m.margin;
  j["disagreement"] = m.disagreement;
  j["l2"] = m.l2;
  if (m.has_heldout) j["heldout_auc"] = m.heldout_auc;
  return j.dump();
}

TrainResult train(const TrainConfig& cfg, const Corpus& train_corpus, const Corpus* heldout,
                  const std::string& out_dir) {
  cfg.validate();
  if (train_corpus.instances.empty()) throw std::invalid_argument("train: the training corpus is empty");
  for (const Instance& inst : train_corpus.instances) {
    for (int label : inst.labels) {
      if (label < 0 || label >= train_corpus.num_relations())
        throw std::invalid_argument("train: instance labeled with unknown relation id " + std::to_string(label));
    }
  }

  Rng init_rng(cfg.seed);
  Rng run_rng(cfg.seed + 1);  // shuffling and dropout
  TrainResult result;
  result.model =
      Model::init(cfg.model, train_corpus.vocab.size(), train_corpus.num_relations(), cfg.loss.s_init, init_rng);
  Model& model = result.model;

  auto params = model.named_params();
  std::vector<Tensor> l2_params;  // every parameter except the threshold S
  for (const auto& [name, tensor] : params) {
    if (name != "loss.S") l2_params.push_back(tensor);
  }
  AdamConfig adam_cfg;
  adam_cfg.lr = cfg.learning_rate;
  Adam adam(params, adam_cfg);

  std::ofstream metrics_out;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    metrics_out.open(out_dir + "/metrics.jsonl");
    if (!metrics_out) throw std::runtime_error("cannot write metrics to " + out_dir);
  }

  std::vector<int> order(train_corpus.instances.size());
  std::iota(order.begin(), order.end(), 0);

  ForwardOptions fwd;
  fwd.training = true;
  fwd.dropout = cfg.dropout;
  fwd.enable_head_reg = cfg.enable_head_reg;
  fwd.enable_capsule_reg = cfg.enable_capsule_reg;
  fwd.rng = &run_rng;
  const bool reg_on = cfg.enable_head_reg || cfg.enable_capsule_reg;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    run_rng.shuffle(order);
    double margin_sum = 0.0;  // plain accumulators for the epoch log
    double d_sum = 0.0;
    double l2_sum = 0.0;
    int batches = 0;

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const int members = static_cast<int>(end - start);
      Graph g;

      Tensor margin_total, d_total;
      for (std::size_t pos = start; pos < end; ++pos) {
        const Instance& inst = train_corpus.instances[static_cast<std::size_t>(order[pos])];
        ForwardResult out = forward(g, model, inst, fwd);
        std::vector<bool> present(static_cast<std::size_t>(model.num_relations), false);
        for (int label : inst.labels) present[static_cast<std::size_t>(label)] = true;
        Tensor member_margin = margin_loss(g, out.norms, present, model.s, cfg.loss.gamma, cfg.loss.lambda);
        margin_sum += member_margin.item();
        margin_total = margin_total.defined() ? g.add(margin_total, member_margin) : member_margin;
        if (out.disagreement.defined()) {
          d_sum += out.disagreement.item();
          d_total = d_total.defined() ? g.add(d_total, out.disagreement) : out.disagreement;
        }
      }

      Tensor member_count = Tensor::scalar(static_cast<double>(members));
      Tensor margin_mean = g.div(margin_total, member_count);
      Tensor d_mean;
      if (d_total.defined()) d_mean = g.div(d_total, member_count);
      Tensor batch_loss = total_loss(g, margin_mean, d_total.defined() ? &d_mean : nullptr, cfg.loss.beta,
                                     l2_params, cfg.loss.l2);
      if (cfg.loss.l2 > 0.0) {
        // recover the logged decay term from the assembled loss pieces
        double decay = batch_loss.item() - margin_mean.item();
        if (d_total.defined()) decay -= cfg.loss.beta * d_mean.item();
        l2_sum += decay;
      }
      ++batches;

      const double loss_value = batch_loss.item();
      if (!std::isfinite(loss_value)) {
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                 std::to_string(batches));
      }

      g.backward(batch_loss);
      adam.step();
      // keep the sliding threshold inside its usable band
      auto s_val = model.s.data();
      s_val[0] = std::min(std::max(s_val[0], cfg.loss.gamma), 1.0 - cfg.loss.gamma);
      adam.zero_grads();
    }

    const double n = static_cast<double>(order.size());
    EpochMetrics em;
    em.epoch = epoch;
    em.margin = margin_sum / n;
    em.disagreement = reg_on ? cfg.loss.beta * (d_sum / n) : 0.0;
    em.l2 = batches > 0 ? l2_sum / batches : 0.0;
    em.loss = (em.margin + em.disagreement) + em.l2;
    if (heldout != nullptr) {
      em.has_heldout = true;
      em.heldout_auc = heldout_auc(model, *heldout);
      if (result.best_epoch < 0 || em.heldout_auc > result.best_auc) {
        result.best_auc = em.heldout_auc;
        result.best_epoch = epoch;
        if (!out_dir.empty()) {
          save_checkpoint(out_dir + "/model.best.ckpt", model, cfg, train_corpus.vocab,
                          train_corpus.relation_names);
        }
      }
    }
    result.metrics.push_back(em);
    if (metrics_out.is_open()) metrics_out << metrics_json_line(em) << '\n';
  }

  if (!out_dir.empty()) {
    save_checkpoint(out_dir + "/model.ckpt", model, cfg, train_corpus.vocab, train_corpus.relation_names);
    metrics_out.close();
    if (!metrics_out) throw std::runtime_error("short write to metrics.jsonl in " + out_dir);
  }
  return result;
}

}  // namespace racap
