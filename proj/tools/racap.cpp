#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "racap/checkpoint.hpp"
#include "racap/data.hpp"
#include "racap/eval.hpp"
#include "racap/gradcheck.hpp"
#include "racap/model.hpp"
#include "racap/train.hpp"

namespace {

using namespace racap;

// corpus directory layout: train.txt plus optional test.txt
std::string corpus_file(const std::string& dir, const char* name) { return dir + "/" + name; }

Corpus load_train_split(const std::string& dir, int max_len, LoadStats* stats) {
  LoadOptions opt;
  opt.max_sentence_len = max_len;
  return load_nyt(corpus_file(dir, "train.txt"), opt, stats);
}

Corpus load_test_split(const std::string& dir, int max_len, const Vocab& vocab,
                       const std::vector<std::string>& relations, LoadStats* stats) {
  LoadOptions opt;
  opt.split = Split::Test;
  opt.max_sentence_len = max_len;
  opt.vocab = &vocab;
  opt.relation_names = &relations;
  return load_nyt(corpus_file(dir, "test.txt"), opt, stats);
}

void report_load(const char* split, const Corpus& corpus, const LoadStats& stats) {
  std::cout << split << ": " << corpus.instances.size() << " instances, " << bags(corpus).size() << " bags, "
            << corpus.num_relations() << " relations";
  if (stats.rejected_entities || stats.truncated || stats.unknown_relation_to_na) {
    std::cout << " (rejected " << stats.rejected_entities << ", truncated " << stats.truncated
              << ", unknown->NA " << stats.unknown_relation_to_na << ")";
  }
  std::cout << "\n";
}

int cmd_generate(const std::string& spec_path, const std::string& out_dir) {
  SynthSpec spec = SynthSpec::from_json_file(spec_path);
  SynthCorpora corpora = generate(spec);
  std::filesystem::create_directories(out_dir);
  write_corpus(corpus_file(out_dir, "train.txt"), corpora.train);
  write_corpus(corpus_file(out_dir, "test.txt"), corpora.test);
  std::cout << "wrote " << corpora.train.instances.size() << " train and " << corpora.test.instances.size()
            << " test instances to " << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_dir, const std::string& out_dir) {
  TrainConfig cfg = TrainConfig::from_json_file(config_path);
  LoadStats train_stats;
  Corpus train_corpus = load_train_split(data_dir, cfg.model.max_len, &train_stats);
  report_load("train", train_corpus, train_stats);

  Corpus test_corpus;
  bool have_test = std::filesystem::exists(corpus_file(data_dir, "test.txt"));
  if (have_test) {
    LoadStats test_stats;
    test_corpus = load_test_split(data_dir, cfg.model.max_len, train_corpus.vocab, train_corpus.relation_names,
                                  &test_stats);
    report_load("test", test_corpus, test_stats);
  }

  TrainResult result = train(cfg, train_corpus, have_test ? &test_corpus : nullptr, out_dir);
  const EpochMetrics& last = result.metrics.back();
  std::cout << "epoch " << last.epoch << ": loss " << last.loss;
  if (last.has_heldout) std::cout << ", held-out PR-AUC " << last.heldout_auc;
  std::cout << "\nwrote " << out_dir << "/metrics.jsonl and " << out_dir << "/model.ckpt\n";
  if (result.best_epoch >= 0) {
    std::cout << "best held-out PR-AUC " << result.best_auc << " at epoch " << result.best_epoch << " ("
              << out_dir << "/model.best.ckpt)\n";
  }
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_dir, const std::string& pr_path,
             const std::string& summary_path, const std::string& aggregate) {
  Checkpoint ckpt = load_checkpoint(model_path);
  const char* split_file = std::filesystem::exists(corpus_file(data_dir, "test.txt")) ? "test.txt" : "train.txt";
  LoadOptions opt;
  opt.split = Split::Test;
  opt.max_sentence_len = ckpt.config.model.max_len;
  opt.vocab = &ckpt.vocab;
  opt.relation_names = &ckpt.relation_names;
  LoadStats stats;
  Corpus corpus = load_nyt(corpus_file(data_dir, split_file), opt, &stats);
  report_load(split_file, corpus, stats);

  const BagAggregate agg = aggregate == "mean" ? BagAggregate::Mean : BagAggregate::Max;
  const Model& model = ckpt.model;
  auto preds = score_bags(
      corpus, [&model](const Instance& inst) { return relation_scores(model, inst); }, agg);
  const GoldSet gold = gold_positives(corpus);
  PrCurve curve = pr_curve(preds, gold);

  if (!pr_path.empty()) {
    std::ofstream out(pr_path);
    if (!out) throw std::runtime_error("cannot write " + pr_path);
    char buf[80];
    for (const auto& pt : curve.points) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", pt.precision, pt.recall);
      out << buf;
    }
  }
  if (!summary_path.empty()) {
    nlohmann::json summary;
    summary["pr_auc"] = curve.area;
    summary["predictions"] = preds.size();
    summary["gold_positives"] = gold.size();
    nlohmann::json p_at = nlohmann::json::object();
    for (std::size_t n : {std::size_t{50}, std::size_t{100}, std::size_t{200}}) {
      if (n <= preds.size()) p_at[std::to_string(n)] = p_at_n(preds, gold, n);
    }
    summary["p_at"] = p_at;
    std::ofstream out(summary_path);
    if (!out) throw std::runtime_error("cannot write " + summary_path);
    out << summary.dump(2) << "\n";
  }
  std::cout << "PR-AUC " << curve.area << " over " << preds.size() << " predictions, " << gold.size()
            << " gold positives\n";
  return 0;
}

int cmd_inspect(const std::string& model_path, const std::string& data_dir, const std::string& out_dir,
                int limit) {
  Checkpoint ckpt = load_checkpoint(model_path);
  const char* split_file = std::filesystem::exists(corpus_file(data_dir, "test.txt")) ? "test.txt" : "train.txt";
  LoadOptions opt;
  opt.split = Split::Test;
  opt.max_sentence_len = ckpt.config.model.max_len;
  opt.vocab = &ckpt.vocab;
  opt.relation_names = &ckpt.relation_names;
  Corpus corpus = load_nyt(corpus_file(data_dir, split_file), opt, nullptr);

  std::filesystem::create_directories(out_dir);
  const std::string path = out_dir + "/inspect.jsonl";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);

  const std::size_t count = std::min<std::size_t>(corpus.instances.size(), static_cast<std::size_t>(limit));
  for (std::size_t i = 0; i < count; ++i) {
    const Instance& inst = corpus.instances[i];
    Graph g;
    ForwardResult res = forward(g, ckpt.model, inst, ForwardOptions{});

    nlohmann::json j;
    j["bag_key"] = inst.bag_key;
    std::vector<std::string> toks;
    for (int id : inst.tokens) toks.push_back(corpus.vocab.token(id));
    j["tokens"] = toks;
    j["ent1_pos"] = inst.ent1_pos;
    j["ent2_pos"] = inst.ent2_pos;
    j["labels"] = std::vector<int>(inst.labels.begin(), inst.labels.end());
    std::vector<double> norms;
    for (const Tensor& n : res.norms) norms.push_back(n.item());
    j["norms"] = norms;
    nlohmann::json attn = nlohmann::json::array();
    for (const Tensor& w : res.attn_weights) {
      attn.push_back(std::vector<double>(w.data().begin(), w.data().end()));
    }
    j["attention"] = attn;
    j["coupling"] = res.routing.coupling_history;  // per iteration, row-major t x m
    out << j.dump() << "\n";
  }
  std::cout << "wrote " << count << " records to " << path << "\n";
  return 0;
}

int cmd_gradcheck(const std::string& config_path) {
  TrainConfig cfg = TrainConfig::from_json_file(config_path);
  GradCheckReport report = run_gradcheck(cfg);
  for (const auto& entry : report.entries) {
    std::printf("%-22s max rel err %.3e\n", entry.name.c_str(), entry.max_rel_err);
  }
  std::printf("worst %.3e vs tolerance %.0e: %s\n", report.worst, report.tolerance,
              report.pass ? "PASS" : "FAIL");
  return report.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attentive capsule relation extraction toolkit"};
  app.require_subcommand(1);

  std::string spec_path, config_path, data_dir, out_dir, model_path;
  std::string pr_path, summary_path, aggregate = "max";
  int limit = 50;

  auto* gen = app.add_subcommand("generate", "synthesize a corpus from a JSON recipe");
  gen->add_option("--spec", spec_path, "synthetic corpus recipe (JSON)")->required();
  gen->add_option("--out", out_dir, "output corpus directory")->required();

  auto* tr = app.add_subcommand("train", "train a model");
  tr->add_option("--config", config_path, "training configuration (JSON)")->required();
  tr->add_option("--data", data_dir, "corpus directory with train.txt [and test.txt]")->required();
  tr->add_option("--out", out_dir, "run directory for metrics.jsonl and checkpoints")->required();

  auto* ev = app.add_subcommand("eval", "held-out evaluation of a checkpoint");
  ev->add_option("--model", model_path, "model checkpoint")->required();
  ev->add_option("--data", data_dir, "corpus directory")->required();
  ev->add_option("--pr", pr_path, "write PR points as precision,recall CSV lines");
  ev->add_option("--summary", summary_path, "write PR-AUC and P@N summary JSON");
  ev->add_option("--aggregate", aggregate, "bag aggregation: max or mean")
      ->check(CLI::IsMember({"max", "mean"}));

  auto* ins = app.add_subcommand("inspect", "dump attention weights and routing couplings");
  ins->add_option("--model", model_path, "model checkpoint")->required();
  ins->add_option("--data", data_dir, "corpus directory")->required();
  ins->add_option("--out", out_dir, "output directory for inspect.jsonl")->required();
  ins->add_option("--limit", limit, "instances to dump (default 50)");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of every parameter");
  gc->add_option("--config", config_path, "training configuration (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(spec_path, out_dir);
    if (tr->parsed()) return cmd_train(config_path, data_dir, out_dir);
    if (ev->parsed()) return cmd_eval(model_path, data_dir, pr_path, summary_path, aggregate);
    if (ins->parsed()) return cmd_inspect(model_path, data_dir, out_dir, limit);
    if (gc->parsed()) return cmd_gradcheck(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
