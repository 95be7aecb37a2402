#pragma once

#include <string>
#include <vector>

#include "racap/config.hpp"

namespace racap {

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;  // one per named parameter
  double worst = 0.0;
  double tolerance = 1e-4;
  bool pass = false;
};

// Builds the configured model on a fixed synthetic instance, runs the full
// training loss (margin + disagreement + weight decay, dropout off), and
// compares every element of every named parameter against central
// differences.
GradCheckReport run_gradcheck(const TrainConfig& cfg);

}  // namespace racap
