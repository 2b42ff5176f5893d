#include "sss/eval.hpp"

#include <cmath>
#include <stdexcept>

namespace sss::eval {

namespace {

int rank_impl(const VecX& scores, ItemId target, const std::vector<char>* excluded) {
  const int V = static_cast<int>(scores.size()) - 1;
  if (target < 1 || target > V) throw std::invalid_argument("target out of range");
  const Real st = scores(target);
  int rank = 1;
  for (int v = 1; v <= V; ++v) {
    if (v == target) continue;
    if (excluded && (*excluded)[v]) continue;
    const Real sv = scores(v);
    if (sv > st || (sv == st && v < target)) ++rank;
  }
  return rank;
}

}  // namespace

int rank_of_target(const VecX& scores, ItemId target) {
  return rank_impl(scores, target, nullptr);
}

int rank_of_target(const VecX& scores, ItemId target, const std::vector<char>& excluded) {
  return rank_impl(scores, target, &excluded);
}

std::pair<int, Real> metrics_from_rank(int rank, int K) {
  if (rank < 1 || K < 1) throw std::invalid_argument("rank and K must be positive");
  if (rank > K) return {0, 0.0};
  return {1, 1.0 / std::log2(static_cast<Real>(rank) + 1.0)};
}

MetricReport evaluate(const models::Scorer& scorer, const corpus::DatasetSplit& split,
                      Phase phase, const EvalConfig& cfg) {
  const auto& targets = phase == Phase::Valid ? split.valid_target : split.test_target;
  MetricReport rep;
  std::vector<char> excluded;
  for (const auto& seq : split.train) {
    if (seq.user < 0 || seq.user >= static_cast<int>(targets.size())) continue;
    const ItemId target = targets[seq.user];
    if (target == kPaddingItem) continue;

    std::vector<ItemId> context = seq.items;
    if (phase == Phase::Test) {
      const ItemId valid = split.valid_target[seq.user];
      if (valid != kPaddingItem) context.push_back(valid);
    }
    if (static_cast<int>(context.size()) > cfg.max_len)
      context.erase(context.begin(), context.end() - cfg.max_len);

    VecX scores = scorer.score_context(context);
    int rank;
    if (cfg.filter_seen) {
      excluded.assign(scores.size(), 0);
      for (ItemId v : context) excluded[v] = 1;
      excluded[target] = 0;
      rank = rank_of_target(scores, target, excluded);
    } else {
      rank = rank_of_target(scores, target);
    }

    auto [h10, n10] = metrics_from_rank(rank, 10);
    auto [h20, n20] = metrics_from_rank(rank, 20);
    rep.h10 += h10;
    rep.n10 += n10;
    rep.h20 += h20;
    rep.n20 += n20;
    rep.num_users++;
    if (cfg.retain_ranks) rep.ranks.push_back(rank);
  }
  if (rep.num_users == 0) throw std::runtime_error("no users to evaluate");
  rep.h10 /= rep.num_users;
  rep.n10 /= rep.num_users;
  rep.h20 /= rep.num_users;
  rep.n20 /= rep.num_users;
  return rep;
}

}  // namespace sss::eval
