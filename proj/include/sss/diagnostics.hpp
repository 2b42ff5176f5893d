#pragma once

#include <cstdint>
#include <vector>

#include "sss/augment.hpp"
#include "sss/types.hpp"

namespace sss::diagnostics {

// Exact target counts with normalized probabilities and a deterministic
// plotting order (count descending, item index ascending).
struct TargetDistribution {
  int num_items = 0;
  int64_t total = 0;
  std::vector<int64_t> counts;     // size num_items+1, slot 0 unused
  std::vector<Real> probs;         // counts / total
  std::vector<ItemId> rank_order;  // all items 1..num_items
};

TargetDistribution target_distribution(const augment::TrainingSet& ts, int num_items);

// Per target item: how many training examples carry it, and how many
// distinct input lists (exact list equality) lead to it.
struct InputsPerTarget {
  int num_items = 0;
  std::vector<int64_t> example_count;
  std::vector<int64_t> distinct_inputs;
};

InputsPerTarget inputs_per_target(const augment::TrainingSet& ts, int num_items);

struct DistStats {
  Real coverage = 0;  // fraction of catalog items appearing as a target
  Real entropy = 0;   // bits, over positive-probability items
  Real gini = 0;      // over the full catalog, zeros included
};

DistStats distribution_stats(const TargetDistribution& dist, int catalog_size);

}  // namespace sss::diagnostics
