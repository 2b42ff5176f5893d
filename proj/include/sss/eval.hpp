#pragma once

#include <vector>

#include "sss/corpus.hpp"
#include "sss/models.hpp"
#include "sss/types.hpp"

namespace sss::eval {

enum class Phase { Valid, Test };

struct EvalConfig {
  int max_len = 50;
  bool filter_seen = false;  // drop context items from the ranked catalog
  bool retain_ranks = false;
};

struct MetricReport {
  Real h10 = 0, n10 = 0, h20 = 0, n20 = 0;
  int64_t num_users = 0;
  std::vector<int> ranks;  // per evaluated user, only when retained
};

// 1-based rank of `target` over items 1..V with deterministic tie-break by
// ascending item index. Index 0 (padding) never participates. `excluded`,
// when non-empty, is a size V+1 mask of items removed from the ranking; the
// target itself is always ranked.
int rank_of_target(const VecX& scores, ItemId target);
int rank_of_target(const VecX& scores, ItemId target, const std::vector<char>& excluded);

// hit = rank <= K; ndcg = 1/log2(rank+1) inside the cutoff, else 0.
std::pair<int, Real> metrics_from_rank(int rank, int K);

// Leave-one-out full-catalog ranking. Context is the training sequence, plus
// the validation item in the test phase, truncated to the last max_len items.
MetricReport evaluate(const models::Scorer& scorer, const corpus::DatasetSplit& split,
                      Phase phase, const EvalConfig& cfg);

}  // namespace sss::eval
