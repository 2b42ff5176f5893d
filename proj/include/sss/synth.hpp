#pragma once

#include <string>
#include <vector>

#include "sss/types.hpp"

namespace sss::synth {

// Zipf-popularity catalog with a planted first-order transition structure:
// with probability succ_prob the next item is a fixed per-item successor,
// otherwise a fresh popularity draw.
struct SynthConfig {
  int users = 1000;
  int items = 300;
  double zipf_s = 1.05;
  double succ_prob = 0.55;
  int min_len = 3;
  double mean_len = 9.0;
  int max_len = 40;
  uint64_t seed = 1;
};

// Deterministic for a given config, independent of the standard library's
// distribution implementations (raw mt19937_64 draws + inverse CDF).
std::vector<Interaction> generate(const SynthConfig& cfg);

void write_triplets(const std::string& path, const std::vector<Interaction>& interactions);

}  // namespace sss::synth
