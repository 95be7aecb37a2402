#include "racap/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace racap {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw std::invalid_argument("config: unknown key '" + item.key() + "' in " + where);
    }
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (max_len < 2) throw std::invalid_argument("model config: max_len must be at least 2");
  if (word_dim < 1 || pos_dim < 1) throw std::invalid_argument("model config: embedding widths must be positive");
  if (hidden < 1) throw std::invalid_argument("model config: hidden width must be positive");
  if (heads < 1 || hidden % heads != 0) {
    throw std::invalid_argument("model config: heads must divide the hidden width (" + std::to_string(heads) +
                                " vs " + std::to_string(hidden) + ")");
  }
  if (attn_out < 1) throw std::invalid_argument("model config: attn_out must be positive");
  if (caps_count < 1 || caps_in < 1 || caps_out < 1) {
    throw std::invalid_argument("model config: capsule dimensions must be positive");
  }
  if (caps_count * caps_in != attn_out) {
    throw std::invalid_argument("model config: caps_count * caps_in must equal attn_out (" +
                                std::to_string(caps_count) + " * " + std::to_string(caps_in) +
                                " != " + std::to_string(attn_out) + ")");
  }
  if (routing_iters < 1) throw std::invalid_argument("model config: routing_iters must be at least 1");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train config: learning_rate must be positive");
  if (epochs < 1) throw std::invalid_argument("train config: epochs must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("train config: dropout must lie in [0, 1)");
  model.validate();
  loss.validate();
}

TrainConfig TrainConfig::from_json_text(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  reject_unknown(j, {"batch_size", "learning_rate", "epochs", "dropout", "seed", "enable_head_reg",
                     "enable_capsule_reg", "model", "loss"},
                 "the top level");

  TrainConfig cfg;
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.dropout = j.value("dropout", cfg.dropout);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.enable_head_reg = j.value("enable_head_reg", cfg.enable_head_reg);
  cfg.enable_capsule_reg = j.value("enable_capsule_reg", cfg.enable_capsule_reg);

  if (j.contains("model")) {
    const auto& m = j.at("model");
    reject_unknown(m, {"max_len", "word_dim", "pos_dim", "hidden", "heads", "attn_out", "caps_count", "caps_in",
                       "caps_out", "routing_iters", "relation_query", "scale_by_head_dim"},
                   "model");
    ModelConfig& mc = cfg.model;
    mc.max_len = m.value("max_len", mc.max_len);
    mc.word_dim = m.value("word_dim", mc.word_dim);
    mc.pos_dim = m.value("pos_dim", mc.pos_dim);
    mc.hidden = m.value("hidden", mc.hidden);
    mc.heads = m.value("heads", mc.heads);
    mc.attn_out = m.value("attn_out", mc.attn_out);
    mc.caps_count = m.value("caps_count", mc.caps_count);
    mc.caps_in = m.value("caps_in", mc.caps_in);
    mc.caps_out = m.value("caps_out", mc.caps_out);
    mc.routing_iters = m.value("routing_iters", mc.routing_iters);
    mc.relation_query = m.value("relation_query", mc.relation_query);
    mc.scale_by_head_dim = m.value("scale_by_head_dim", mc.scale_by_head_dim);
  }
  if (j.contains("loss")) {
    const auto& l = j.at("loss");
    reject_unknown(l, {"gamma", "lambda", "beta", "l2", "s_init"}, "loss");
    LossConfig& lc = cfg.loss;
    lc.gamma = l.value("gamma", lc.gamma);
    lc.lambda = l.value("lambda", lc.lambda);
    lc.beta = l.value("beta", lc.beta);
    lc.l2 = l.value("l2", lc.l2);
    lc.s_init = l.value("s_init", lc.s_init);
  }
  cfg.validate();
  return cfg;
}

TrainConfig TrainConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string TrainConfig::to_json_text() const {
  nlohmann::json j;
  j["batch_size"] = batch_size;
  j["learning_rate"] = learning_rate;
  j["epochs"] = epochs;
  j["dropout"] = dropout;
  j["seed"] = seed;
  j["enable_head_reg"] = enable_head_reg;
  j["enable_capsule_reg"] = enable_capsule_reg;
  j["model"] = {{"max_len", model.max_len},
                {"word_dim", model.word_dim},
                {"pos_dim", model.pos_dim},
                {"hidden", model.hidden},
                {"heads", model.heads},
                {"attn_out", model.attn_out},
                {"caps_count", model.caps_count},
                {"caps_in", model.caps_in},
                {"caps_out", model.caps_out},
                {"routing_iters", model.routing_iters},
                {"relation_query", model.relation_query},
                {"scale_by_head_dim", model.scale_by_head_dim}};
  j["loss"] = {{"gamma", loss.gamma},
               {"lambda", loss.lambda},
               {"beta", loss.beta},
               {"l2", loss.l2},
               {"s_init", loss.s_init}};
  return j.dump(2);
}

}  // namespace racap
