#include "racap/model.hpp"

#include <cmath>
#include <stdexcept>

#include "racap/regularize.hpp"

namespace racap {

Model Model::init(const ModelConfig& cfg, int vocab_size, int num_relations, double s_init, Rng& rng) {
  cfg.validate();
  if (vocab_size < 2) throw std::invalid_argument("model: vocabulary is empty");
  if (num_relations < 2) throw std::invalid_argument("model: need NA plus at least one relation");
  if (s_init <= 0.0 || s_init >= 1.0) throw std::invalid_argument("model: s_init must lie inside (0, 1)");

  Model m;
  m.cfg = cfg;
  m.num_relations = num_relations;
  m.tables = EmbeddingTables::init(vocab_size, cfg.word_dim, cfg.pos_dim, cfg.max_len, rng);
  m.lstm = LstmParams::init(cfg.feature_dim(), cfg.hidden, rng);
  m.attn = AttentionParams::init(cfg.hidden, cfg.attn_out, cfg.heads, cfg.relation_query, cfg.scale_by_head_dim, rng);
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.caps_in));
  for (int j = 0; j < num_relations; ++j) {
    std::vector<double> w(static_cast<std::size_t>(cfg.caps_in * cfg.caps_out));
    for (auto& x : w) x = rng.uniform(-bound, bound);
    m.caps_w.push_back(Tensor::from({cfg.caps_in, cfg.caps_out}, std::move(w), true));
  }
  m.s = Tensor::from({1}, {s_init}, true);
  return m;
}

std::vector<std::pair<std::string, Tensor>> Model::named_params() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("embed.word", tables.word);
  out.emplace_back("embed.pos1", tables.pos1);
  out.emplace_back("embed.pos2", tables.pos2);
  const std::pair<const char*, const LstmDirection*> dirs[] = {{"fw", &lstm.fw}, {"bw", &lstm.bw}};
  for (const auto& [dir_name, dir] : dirs) {
    const std::pair<const char*, const LstmGate*> gates[] = {{"input", &dir->input},
                                                             {"forget", &dir->forget},
                                                             {"output", &dir->output},
                                                             {"candidate", &dir->candidate}};
    for (const auto& [gate_name, gate] : gates) {
      const std::string base = std::string("lstm.") + dir_name + "." + gate_name;
      out.emplace_back(base + ".wx", gate->wx);
      out.emplace_back(base + ".wh", gate->wh);
      out.emplace_back(base + ".b", gate->b);
    }
  }
  if (cfg.relation_query) {
    out.emplace_back("attn.wq", attn.wq);
  } else {
    out.emplace_back("attn.const_q", attn.const_q);
  }
  out.emplace_back("attn.wk", attn.wk);
  out.emplace_back("attn.wv", attn.wv);
  out.emplace_back("attn.wo", attn.wo);
  out.emplace_back("attn.f1_w", attn.f1_w);
  out.emplace_back("attn.f1_b", attn.f1_b);
  out.emplace_back("attn.f2_w", attn.f2_w);
  out.emplace_back("attn.f2_b", attn.f2_b);
  for (std::size_t j = 0; j < caps_w.size(); ++j) {
    out.emplace_back("caps.w." + std::to_string(j), caps_w[j]);
  }
  out.emplace_back("loss.S", s);
  return out;
}

void Model::zero_grads() const {
  for (auto& [name, tensor] : named_params()) {
    (void)name;
    Tensor t = tensor;
    t.zero_grad();
  }
}

ForwardResult forward(Graph& g, const Model& model, const Instance& inst, const ForwardOptions& opt) {
  Tensor x = embed(g, inst, model.tables);
  Tensor h = blstm(g, x, model.lstm);

  if (opt.training && opt.dropout > 0.0) {
    if (opt.rng == nullptr) throw std::invalid_argument("forward: dropout needs a random source");
    std::vector<double> mask(static_cast<std::size_t>(shape_numel(h.shape())));
    const double keep_scale = 1.0 / (1.0 - opt.dropout);
    for (auto& v : mask) v = opt.rng->uniform() < opt.dropout ? 0.0 : keep_scale;
    h = g.mul(h, Tensor::from(h.shape(), std::move(mask)));
  }

  Tensor q = model.cfg.relation_query
                 ? relation_query(g, h, inst.ent1_pos, inst.ent2_pos, model.attn.wq)
                 : model.attn.const_q;
  AttentionOutput att = multi_head_attention(g, h, q, model.attn);

  CapsuleConfig caps_cfg;
  caps_cfg.count = model.cfg.caps_count;
  caps_cfg.in_dim = model.cfg.caps_in;
  caps_cfg.out_dim = model.cfg.caps_out;
  caps_cfg.routing_iters = model.cfg.routing_iters;

  ForwardResult result;
  result.heads = att.heads;
  result.attn_weights = att.weights;
  for (const Tensor& slice : split_capsules(g, att.output, caps_cfg)) {
    result.low_capsules.push_back(squash(g, slice));
  }

  if (opt.training && (opt.enable_head_reg || opt.enable_capsule_reg)) {
    DisagreementConfig reg;
    reg.enable_head = opt.enable_head_reg;
    reg.enable_capsule = opt.enable_capsule_reg;
    result.disagreement = disagreement(g, result.heads, result.low_capsules, reg);
  }

  auto [capsules, routing] = dynamic_routing(g, result.low_capsules, model.caps_w, caps_cfg.routing_iters);
  result.capsules = std::move(capsules);
  result.routing = std::move(routing);
  for (const Tensor& r : result.capsules) result.norms.push_back(g.l2_norm(r));
  return result;
}

std::vector<double> relation_scores(const Model& model, const Instance& inst) {
  Graph g;
  ForwardOptions opt;
  ForwardResult out = forward(g, model, inst, opt);
  std::vector<double> scores;
  scores.reserve(out.norms.size());
  for (const Tensor& n : out.norms) scores.push_back(n.item());
  return scores;
}

}  // namespace racap
