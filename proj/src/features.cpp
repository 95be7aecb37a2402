#include "racap/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace racap {

Vocab::Vocab() {
  add("<pad>");
  add("<unk>");
}

int Vocab::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

int Vocab::lookup(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

bool Vocab::contains(const std::string& token) const { return index_.count(token) > 0; }

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) {
    throw std::invalid_argument("vocab: id " + std::to_string(id) + " outside [0," + std::to_string(size()) + ")");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

int position_feature(int token_index, int entity_index, int max_len) {
  const int d = std::clamp(token_index - entity_index, -max_len, max_len);
  return d + max_len;
}

EmbeddingTables EmbeddingTables::init(int vocab_size, int word_dim, int pos_dim, int max_len, Rng& rng) {
  if (vocab_size < 2 || word_dim < 1 || pos_dim < 1 || max_len < 1) {
    throw std::invalid_argument("embedding tables: bad dimensions");
  }
  EmbeddingTables t;
  t.max_len = max_len;
  const int pos_rows = 2 * max_len + 1;
  auto fill = [&rng](Tensor& dst, int rows, int cols) {
    dst = Tensor::zeros({rows, cols}, true);
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    for (auto& v : dst.data()) v = rng.uniform(-bound, bound);
  };
  fill(t.word, vocab_size, word_dim);
  fill(t.pos1, pos_rows, pos_dim);
  fill(t.pos2, pos_rows, pos_dim);
  return t;
}

int EmbeddingTables::load_pretrained(const std::string& path, const Vocab& vocab) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("embeddings: cannot open " + path);
  const int cols = word.dim(1);
  std::string line;
  int loaded = 0, line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(cols));
    double v;
    while (ss >> v) vals.push_back(v);
    if (static_cast<int>(vals.size()) != cols) {
      throw std::runtime_error("embeddings: line " + std::to_string(line_no) + " has " +
                               std::to_string(vals.size()) + " values, expected " + std::to_string(cols));
    }
    if (!vocab.contains(token)) continue;
    const int id = vocab.lookup(token);
    std::copy(vals.begin(), vals.end(), word.data().begin() + static_cast<std::size_t>(id) * cols);
    ++loaded;
  }
  return loaded;
}

Tensor embed(Graph& g, const Instance& inst, const EmbeddingTables& tables) {
  const int l = static_cast<int>(inst.tokens.size());
  if (l < 1) throw std::invalid_argument("embed: empty instance");
  if (inst.ent1_pos < 0 || inst.ent1_pos >= l || inst.ent2_pos < 0 || inst.ent2_pos >= l) {
    throw std::invalid_argument("embed: entity position outside the sentence");
  }
  if (inst.ent1_pos == inst.ent2_pos) throw std::invalid_argument("embed: entity positions coincide");

  const int vocab_rows = tables.word.dim(0);
  std::vector<int> word_ids(inst.tokens.size());
  for (std::size_t i = 0; i < inst.tokens.size(); ++i) {
    const int id = inst.tokens[i];
    word_ids[i] = (id >= 0 && id < vocab_rows) ? id : Vocab::kUnk;
  }
  std::vector<int> p1(static_cast<std::size_t>(l)), p2(static_cast<std::size_t>(l));
  for (int i = 0; i < l; ++i) {
    p1[static_cast<std::size_t>(i)] = position_feature(i, inst.ent1_pos, tables.max_len);
    p2[static_cast<std::size_t>(i)] = position_feature(i, inst.ent2_pos, tables.max_len);
  }
  std::vector<Tensor> parts{g.gather_rows(tables.word, word_ids), g.gather_rows(tables.pos1, p1),
                            g.gather_rows(tables.pos2, p2)};
  return g.concat(parts, 1);
}

}  // namespace racap
