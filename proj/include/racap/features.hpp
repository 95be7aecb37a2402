#pragma once

#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "racap/rng.hpp"
#include "racap/tensor.hpp"

namespace racap {

// Token dictionary with two reserved entries. Unknown tokens map to kUnk at
// lookup time; ids are assigned in first-seen order so corpora reload
// deterministically.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocab();

  int add(const std::string& token);          // returns the existing id if known
  int lookup(const std::string& token) const; // kUnk when missing
  bool contains(const std::string& token) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(int id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// One sentence mentioning an entity pair. Labels are relation ids (0 = NA)
// and hold the union over everything asserted for this exact sentence.
struct Instance {
  std::string bag_key;
  std::vector<int> tokens;
  int ent1_pos = -1;
  int ent2_pos = -1;
  std::set<int> labels;
};

// distance to the entity, clipped to +/- max_len and shifted non-negative
int position_feature(int token_index, int entity_index, int max_len);

struct EmbeddingTables {
  Tensor word;  // |V| x word_dim
  Tensor pos1;  // (2*max_len + 1) x pos_dim
  Tensor pos2;
  int max_len = 0;

  static EmbeddingTables init(int vocab_size, int word_dim, int pos_dim, int max_len, Rng& rng);

  // text format: one line per token, "<token> v1 v2 ... vk"; tokens absent
  // from the vocab are skipped. Returns how many rows were overwritten.
  int load_pretrained(const std::string& path, const Vocab& vocab);
};

// rows x (word_dim + 2*pos_dim): word vector with both position vectors
// appended, one row per token
Tensor embed(Graph& g, const Instance& inst, const EmbeddingTables& tables);

}  // namespace racap
