#pragma once

#include <string>
#include <vector>

#include "racap/config.hpp"
#include "racap/data.hpp"
#include "racap/model.hpp"

namespace racap {

// Single-file format, magic "RACKPT01": embedded config JSON, vocabulary,
// relation names, then named parameter blocks as shape + raw little-endian
// 64-bit floats. Loading rebuilds the model and demands that the file's
// parameter inventory matches the config's architecture exactly.
struct Checkpoint {
  TrainConfig config;
  Vocab vocab;
  std::vector<std::string> relation_names;
  Model model;
};

void save_checkpoint(const std::string& path, const Model& model, const TrainConfig& config, const Vocab& vocab,
                     const std::vector<std::string>& relation_names);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace racap
