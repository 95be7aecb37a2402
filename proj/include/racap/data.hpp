#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "racap/features.hpp"

namespace racap {

enum class Split { Train, Test };

// A loaded corpus. Relation id 0 is always NA; ids are dense indices into
// relation_names. Instances keep their file/generation order.
struct Corpus {
  Vocab vocab;
  std::vector<Instance> instances;
  std::vector<std::string> relation_names;  // [0] == "NA"
  Split split = Split::Train;

  Corpus() : relation_names{"NA"} {}
  int relation_id(const std::string& name) const;  // -1 when unknown
  int num_relations() const { return static_cast<int>(relation_names.size()); }
};

struct RelationTemplate {
  std::string name;
  std::vector<std::vector<std::string>> cues;  // contiguous token patterns, any of which marks the relation
};

// Recipe for a synthetic overlapped-relation corpus. Every sentence carries
// its bag's entity pair plus one cue pattern per bag relation, padded with
// filler tokens.
struct SynthSpec {
  std::vector<RelationTemplate> relations;
  int entities = 0;     // entity inventory size
  int noise_vocab = 0;  // distinct filler tokens
  int train_bags = 0;
  int test_bags = 0;
  int sentences_lo = 1;  // sentences per bag, inclusive range
  int sentences_hi = 1;
  int sentence_len = 0;
  double noise_rate = 0.0;    // chance a repeated sentence's planted cue is corrupted
  double overlap_rate = 0.0;  // chance a labeled bag carries two relations
  double na_rate = 0.0;       // chance a bag is labeled NA only
  std::uint64_t seed = 0;

  static SynthSpec from_json_text(const std::string& text);
  static SynthSpec from_json_file(const std::string& path);
  void validate() const;
};

struct SynthCorpora {
  Corpus train;
  Corpus test;  // entity pairs disjoint from train
};

// Deterministic under spec.seed. The first sentence of every bag always
// carries intact cues so each planted relation is attested at least once.
SynthCorpora generate(const SynthSpec& spec);

struct LoadStats {
  int loaded = 0;                  // instances produced
  int merged_lines = 0;            // lines folded into an existing (bag, sentence) instance
  int rejected_entities = 0;       // entity string missing from the sentence or lost to truncation
  int truncated = 0;               // surviving sentences cut to max_sentence_len
  int unknown_relation_to_na = 0;  // test-split relation names mapped to NA
};

struct LoadOptions {
  Split split = Split::Train;
  int max_sentence_len = 100;
  // Optional starting points, normally taken from the train corpus when
  // loading a test split: the vocab is frozen (unseen tokens become UNK) and
  // unknown relation names collapse to NA instead of minting new ids.
  const Vocab* vocab = nullptr;
  const std::vector<std::string>* relation_names = nullptr;
};

// Tab-separated lines: ent1_id  ent2_id  ent1_str  ent2_str  relation  sentence.
// One line per asserted relation; repeats of the same (entity pair, sentence)
// merge into one multi-label instance. Malformed lines raise an error naming
// the line number.
Corpus load_nyt(const std::string& path, const LoadOptions& opt = {}, LoadStats* stats = nullptr);

// Inverse of load_nyt for generated corpora: one line per (instance, label).
void write_corpus(const std::string& path, const Corpus& corpus);

struct Bag {
  std::string key;
  std::vector<int> instance_ids;  // indices into corpus.instances, in order
  std::set<int> labels;           // union over the bag's instances
};

// group by bag_key, keys in first-appearance order
std::vector<Bag> bags(const Corpus& corpus);

}  // namespace racap
