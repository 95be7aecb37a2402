#include "racap/data.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include <json.hpp>

#include "racap/rng.hpp"

namespace racap {

namespace {

std::vector<std::string> split_ws(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string tok;
  while (ss >> tok) out.push_back(std::move(tok));
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

// Find `surface` (possibly multi-word) in the token list, skipping a match
// that starts at skip_index, and collapse multi-word matches into one
// underscore-joined token. Returns the match position or -1.
int find_and_join(std::vector<std::string>& toks, const std::string& surface, int skip_index) {
  const std::vector<std::string> words = split_ws(surface);
  if (words.empty()) return -1;
  for (std::size_t i = 0; i + words.size() <= toks.size(); ++i) {
    if (static_cast<int>(i) == skip_index) continue;
    bool match = true;
    for (std::size_t k = 0; k < words.size(); ++k) {
      if (toks[i + k] != words[k]) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    if (words.size() > 1) {
      std::string joined = words[0];
      for (std::size_t k = 1; k < words.size(); ++k) joined += "_" + words[k];
      toks[i] = std::move(joined);
      toks.erase(toks.begin() + static_cast<std::ptrdiff_t>(i + 1),
                 toks.begin() + static_cast<std::ptrdiff_t>(i + words.size()));
    }
    return static_cast<int>(i);
  }
  return -1;
}

[[noreturn]] void line_error(int lineno, const std::string& what) {
  throw std::runtime_error("corpus line " + std::to_string(lineno) + ": " + what);
}

}  // namespace

int Corpus::relation_id(const std::string& name) const {
  for (std::size_t i = 0; i < relation_names.size(); ++i) {
    if (relation_names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

SynthSpec SynthSpec::from_json_text(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("synthetic spec: top level must be a JSON object");
  static const std::set<std::string> allowed{"relations",  "entities",     "noise_vocab", "train_bags",
                                             "test_bags",  "sentences_per_bag", "sentence_len", "noise_rate",
                                             "overlap_rate", "na_rate",    "seed"};
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) throw std::invalid_argument("synthetic spec: unknown key '" + item.key() + "'");
  }

  SynthSpec spec;
  for (const auto& rel : j.at("relations")) {
    static const std::set<std::string> rel_keys{"name", "cues"};
    for (const auto& item : rel.items()) {
      if (!rel_keys.count(item.key()))
        throw std::invalid_argument("synthetic spec: unknown relation key '" + item.key() + "'");
    }
    RelationTemplate t;
    t.name = rel.at("name").get<std::string>();
    for (const auto& cue : rel.at("cues")) {
      t.cues.push_back(cue.get<std::vector<std::string>>());
    }
    spec.relations.push_back(std::move(t));
  }
  spec.entities = j.at("entities").get<int>();
  spec.noise_vocab = j.at("noise_vocab").get<int>();
  spec.train_bags = j.at("train_bags").get<int>();
  spec.test_bags = j.at("test_bags").get<int>();
  spec.sentence_len = j.at("sentence_len").get<int>();
  if (j.contains("sentences_per_bag")) {
    const auto range = j.at("sentences_per_bag").get<std::vector<int>>();
    if (range.size() != 2) throw std::invalid_argument("synthetic spec: sentences_per_bag must be [lo, hi]");
    spec.sentences_lo = range[0];
    spec.sentences_hi = range[1];
  }
  spec.noise_rate = j.value("noise_rate", 0.0);
  spec.overlap_rate = j.value("overlap_rate", 0.0);
  spec.na_rate = j.value("na_rate", 0.0);
  spec.seed = j.value("seed", std::uint64_t{0});
  return spec;
}

SynthSpec SynthSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open synthetic spec: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void SynthSpec::validate() const {
  if (relations.empty()) throw std::invalid_argument("synthetic spec: at least one relation is required");
  std::set<std::string> names;
  int longest = 0, second = 0;
  for (const auto& rel : relations) {
    if (rel.name.empty() || rel.name == "NA")
      throw std::invalid_argument("synthetic spec: relation names must be non-empty and distinct from NA");
    if (!names.insert(rel.name).second)
      throw std::invalid_argument("synthetic spec: duplicate relation name '" + rel.name + "'");
    if (rel.cues.empty())
      throw std::invalid_argument("synthetic spec: relation '" + rel.name + "' has no cue patterns");
    int worst = 0;
    for (const auto& cue : rel.cues) {
      if (cue.empty()) throw std::invalid_argument("synthetic spec: empty cue pattern in '" + rel.name + "'");
      for (const auto& tok : cue) {
        if (tok.empty() || tok.find_first_of(" \t") != std::string::npos)
          throw std::invalid_argument("synthetic spec: cue tokens must be non-empty and whitespace-free");
      }
      worst = std::max(worst, static_cast<int>(cue.size()));
    }
    if (worst >= longest) {
      second = longest;
      longest = worst;
    } else {
      second = std::max(second, worst);
    }
  }
  if (entities < 2) throw std::invalid_argument("synthetic spec: need at least two entities");
  if (noise_vocab < 1) throw std::invalid_argument("synthetic spec: need at least one filler token");
  if (train_bags < 1 || test_bags < 0) throw std::invalid_argument("synthetic spec: bad bag counts");
  if (sentences_lo < 1 || sentences_hi < sentences_lo)
    throw std::invalid_argument("synthetic spec: sentences_per_bag range is invalid");
  for (double rate : {noise_rate, overlap_rate, na_rate}) {
    if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("synthetic spec: rates must lie in [0, 1]");
  }
  const bool can_overlap = overlap_rate > 0.0 && relations.size() >= 2;
  const int cue_budget = can_overlap ? longest + second : longest;
  if (sentence_len < cue_budget + 2) {
    throw std::invalid_argument("synthetic spec: sentence_len " + std::to_string(sentence_len) +
                                " cannot fit two entities plus cue patterns of total length " +
                                std::to_string(cue_budget));
  }
  const long long pairs = static_cast<long long>(entities) * (entities - 1);
  if (pairs < 2LL * (train_bags + test_bags)) {
    throw std::invalid_argument("synthetic spec: entity inventory too small for the requested bag count");
  }
}

SynthCorpora generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  // one shared vocabulary so train and test ids agree
  Vocab vocab;
  for (const auto& rel : spec.relations)
    for (const auto& cue : rel.cues)
      for (const auto& tok : cue) vocab.add(tok);
  for (int e = 0; e < spec.entities; ++e) vocab.add("ent" + std::to_string(e));
  for (int w = 0; w < spec.noise_vocab; ++w) vocab.add("w" + std::to_string(w));

  SynthCorpora out;
  out.train.vocab = vocab;
  out.test.vocab = vocab;
  out.test.split = Split::Test;
  for (const auto& rel : spec.relations) {
    out.train.relation_names.push_back(rel.name);
    out.test.relation_names.push_back(rel.name);
  }

  const int total_bags = spec.train_bags + spec.test_bags;
  std::unordered_set<long long> used_pairs;
  const int num_rel = static_cast<int>(spec.relations.size());

  for (int bag = 0; bag < total_bags; ++bag) {
    int e1 = 0, e2 = 0;
    while (true) {
      e1 = rng.uniform_int(spec.entities);
      e2 = rng.uniform_int(spec.entities);
      if (e1 == e2) continue;
      const long long key = static_cast<long long>(e1) * spec.entities + e2;
      if (used_pairs.insert(key).second) break;
    }

    std::set<int> labels;
    if (rng.uniform() < spec.na_rate) {
      labels.insert(0);
    } else {
      const int r1 = 1 + rng.uniform_int(num_rel);
      labels.insert(r1);
      if (num_rel >= 2 && rng.uniform() < spec.overlap_rate) {
        int r2 = r1;
        while (r2 == r1) r2 = 1 + rng.uniform_int(num_rel);
        labels.insert(r2);
      }
    }

    const int sentences = spec.sentences_lo + rng.uniform_int(spec.sentences_hi - spec.sentences_lo + 1);
    const std::string surface1 = "ent" + std::to_string(e1);
    const std::string surface2 = "ent" + std::to_string(e2);
    const std::string bag_key = "e" + std::to_string(e1) + "#e" + std::to_string(e2);

    for (int si = 0; si < sentences; ++si) {
      // blocks: entity 1, entity 2, then one cue pattern per labeled relation
      std::vector<std::vector<std::string>> blocks{{surface1}, {surface2}};
      for (int label : labels) {
        if (label == 0) continue;
        const auto& cues = spec.relations[static_cast<std::size_t>(label - 1)].cues;
        std::vector<std::string> cue = cues[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(cues.size())))];
        // repeated sentences may carry a corrupted cue; the first sentence
        // always keeps every relation attested
        if (si > 0 && rng.uniform() < spec.noise_rate) {
          for (auto& tok : cue) tok = "w" + std::to_string(rng.uniform_int(spec.noise_vocab));
        }
        blocks.push_back(std::move(cue));
      }

      std::vector<std::string> cells(static_cast<std::size_t>(spec.sentence_len));
      for (auto& cell : cells) cell = "w" + std::to_string(rng.uniform_int(spec.noise_vocab));

      std::vector<int> starts(blocks.size(), -1);
      bool placed = false;
      for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
        placed = true;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
          starts[b] = rng.uniform_int(spec.sentence_len - static_cast<int>(blocks[b].size()) + 1);
        }
        for (std::size_t a = 0; a < blocks.size() && placed; ++a) {
          for (std::size_t b = a + 1; b < blocks.size(); ++b) {
            const int a_end = starts[a] + static_cast<int>(blocks[a].size());
            const int b_end = starts[b] + static_cast<int>(blocks[b].size());
            if (starts[a] < b_end && starts[b] < a_end) {
              placed = false;
              break;
            }
          }
        }
      }
      if (!placed) {  // dense sentence: fall back to left-to-right packing
        int cursor = 0;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
          starts[b] = cursor;
          cursor += static_cast<int>(blocks[b].size());
        }
      }
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (std::size_t k = 0; k < blocks[b].size(); ++k) {
          cells[static_cast<std::size_t>(starts[b]) + k] = blocks[b][k];
        }
      }

      Instance inst;
      inst.bag_key = bag_key;
      inst.ent1_pos = starts[0];
      inst.ent2_pos = starts[1];
      inst.labels = labels;
      inst.tokens.reserve(cells.size());
      for (const auto& cell : cells) inst.tokens.push_back(vocab.lookup(cell));
      Corpus& target = bag < spec.train_bags ? out.train : out.test;
      target.instances.push_back(std::move(inst));
    }
  }
  return out;
}

Corpus load_nyt(const std::string& path, const LoadOptions& opt, LoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  if (opt.max_sentence_len < 2) throw std::invalid_argument("load_nyt: max_sentence_len must be at least 2");

  Corpus corpus;
  corpus.split = opt.split;
  if (opt.vocab != nullptr) corpus.vocab = *opt.vocab;
  if (opt.relation_names != nullptr) {
    if (opt.relation_names->empty() || (*opt.relation_names)[0] != "NA")
      throw std::invalid_argument("load_nyt: relation name list must start with NA");
    corpus.relation_names = *opt.relation_names;
  }

  LoadStats local;
  std::unordered_map<std::string, std::size_t> instance_at;  // bag_key \x1f sentence -> instance index
  const bool freeze_vocab = opt.split == Split::Test;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split_tabs(line);
    if (fields.size() != 6) {
      line_error(lineno, "expected 6 tab-separated fields, got " + std::to_string(line.empty() ? 0 : fields.size()));
    }
    for (std::size_t f = 0; f < 5; ++f) {
      if (fields[f].empty()) line_error(lineno, "field " + std::to_string(f + 1) + " is empty");
    }
    auto tokens = split_ws(fields[5]);
    if (tokens.empty()) line_error(lineno, "empty sentence");

    int ent1_pos = find_and_join(tokens, fields[2], -1);
    if (ent1_pos < 0) {
      ++local.rejected_entities;
      continue;
    }
    int ent2_pos = find_and_join(tokens, fields[3], ent1_pos);
    if (ent2_pos < 0) {
      ++local.rejected_entities;
      continue;
    }
    if (ent2_pos < ent1_pos) {
      // joining a multi-word second entity shifts earlier indices
      const auto words2 = split_ws(fields[3]).size();
      ent1_pos -= static_cast<int>(words2) - 1;
    }

    bool cut = false;
    if (static_cast<int>(tokens.size()) > opt.max_sentence_len) {
      if (ent1_pos >= opt.max_sentence_len || ent2_pos >= opt.max_sentence_len) {
        ++local.rejected_entities;  // the pair does not survive truncation
        continue;
      }
      tokens.resize(static_cast<std::size_t>(opt.max_sentence_len));
      cut = true;
    }

    int rid;
    if (fields[4] == "NA") {
      rid = 0;
    } else {
      rid = corpus.relation_id(fields[4]);
      if (rid < 0) {
        if (opt.split == Split::Train) {
          corpus.relation_names.push_back(fields[4]);
          rid = corpus.num_relations() - 1;
        } else {
          rid = 0;
          ++local.unknown_relation_to_na;
        }
      }
    }

    const std::string merge_key = fields[0] + "#" + fields[1] + '\x1f' + fields[5];
    auto it = instance_at.find(merge_key);
    if (it != instance_at.end()) {
      corpus.instances[it->second].labels.insert(rid);
      ++local.merged_lines;
      continue;
    }

    Instance inst;
    inst.bag_key = fields[0] + "#" + fields[1];
    inst.ent1_pos = ent1_pos;
    inst.ent2_pos = ent2_pos;
    inst.labels.insert(rid);
    inst.tokens.reserve(tokens.size());
    for (const auto& tok : tokens) {
      inst.tokens.push_back(freeze_vocab ? corpus.vocab.lookup(tok) : corpus.vocab.add(tok));
    }
    instance_at.emplace(merge_key, corpus.instances.size());
    corpus.instances.push_back(std::move(inst));
    ++local.loaded;
    if (cut) ++local.truncated;
  }

  if (stats != nullptr) *stats = local;
  return corpus;
}

void write_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  for (const Instance& inst : corpus.instances) {
    const std::size_t hash = inst.bag_key.find('#');
    if (hash == std::string::npos) {
      throw std::invalid_argument("write_corpus: bag key '" + inst.bag_key + "' is not ent1#ent2");
    }
    const std::string e1id = inst.bag_key.substr(0, hash);
    const std::string e2id = inst.bag_key.substr(hash + 1);
    const std::string& e1 = corpus.vocab.token(inst.tokens[static_cast<std::size_t>(inst.ent1_pos)]);
    const std::string& e2 = corpus.vocab.token(inst.tokens[static_cast<std::size_t>(inst.ent2_pos)]);
    std::string sentence;
    for (std::size_t i = 0; i < inst.tokens.size(); ++i) {
      if (i > 0) sentence += ' ';
      sentence += corpus.vocab.token(inst.tokens[i]);
    }
    for (int label : inst.labels) {
      out << e1id << '\t' << e2id << '\t' << e1 << '\t' << e2 << '\t'
          << corpus.relation_names[static_cast<std::size_t>(label)] << '\t' << sentence << '\n';
    }
  }
  if (!out) throw std::runtime_error("short write to corpus file: " + path);
}

std::vector<Bag> bags(const Corpus& corpus) {
  std::vector<Bag> out;
  std::unordered_map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
    const Instance& inst = corpus.instances[i];
    auto it = at.find(inst.bag_key);
    if (it == at.end()) {
      it = at.emplace(inst.bag_key, out.size()).first;
      out.push_back(Bag{inst.bag_key, {}, {}});
    }
    Bag& bag = out[it->second];
    bag.instance_ids.push_back(static_cast<int>(i));
    bag.labels.insert(inst.labels.begin(), inst.labels.end());
  }
  return out;
}

}  // namespace racap
