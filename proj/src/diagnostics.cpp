#include "sss/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sss::diagnostics {

namespace {

int checked_num_items(const augment::TrainingSet& ts, int num_items) {
  if (ts.examples.empty()) throw std::runtime_error("empty training set");
  if (num_items < 1) throw std::invalid_argument("num_items must be positive");
  for (const auto& ex : ts.examples)
    if (ex.target < 1 || ex.target > num_items)
      throw std::invalid_argument("target outside the catalog");
  return num_items;
}

}  // namespace

TargetDistribution target_distribution(const augment::TrainingSet& ts, int num_items) {
  TargetDistribution dist;
  dist.num_items = checked_num_items(ts, num_items);
  dist.counts.assign(num_items + 1, 0);
  for (const auto& ex : ts.examples) dist.counts[ex.target]++;
  dist.total = static_cast<int64_t>(ts.examples.size());
  dist.probs.assign(num_items + 1, 0.0);
  for (int v = 1; v <= num_items; ++v)
    dist.probs[v] = static_cast<Real>(dist.counts[v]) / static_cast<Real>(dist.total);
  dist.rank_order.resize(num_items);
  std::iota(dist.rank_order.begin(), dist.rank_order.end(), 1);
  std::sort(dist.rank_order.begin(), dist.rank_order.end(), [&](ItemId a, ItemId b) {
    if (dist.counts[a] != dist.counts[b]) return dist.counts[a] > dist.counts[b];
    return a < b;
  });
  return dist;
}

InputsPerTarget inputs_per_target(const augment::TrainingSet& ts, int num_items) {
  InputsPerTarget ipt;
  ipt.num_items = checked_num_items(ts, num_items);
  ipt.example_count.assign(num_items + 1, 0);
  ipt.distinct_inputs.assign(num_items + 1, 0);

  std::vector<const augment::TrainingExample*> order;
  order.reserve(ts.examples.size());
  for (const auto& ex : ts.examples) order.push_back(&ex);
  std::sort(order.begin(), order.end(),
            [](const augment::TrainingExample* a, const augment::TrainingExample* b) {
              if (a->target != b->target) return a->target < b->target;
              return a->input < b->input;
            });
  for (size_t i = 0; i < order.size(); ++i) {
    ipt.example_count[order[i]->target]++;
    if (i == 0 || order[i]->target != order[i - 1]->target ||
        order[i]->input != order[i - 1]->input)
      ipt.distinct_inputs[order[i]->target]++;
  }
  return ipt;
}

DistStats distribution_stats(const TargetDistribution& dist, int catalog_size) {
  if (catalog_size < dist.num_items)
    throw std::invalid_argument("catalog smaller than the distribution support");
  DistStats stats;
  int covered = 0;
  for (int v = 1; v <= dist.num_items; ++v) {
    if (dist.counts[v] <= 0) continue;
    ++covered;
    stats.entropy -= dist.probs[v] * std::log2(dist.probs[v]);
  }
  stats.coverage = static_cast<Real>(covered) / static_cast<Real>(catalog_size);

  std::vector<Real> sorted(catalog_size, 0.0);
  std::copy(dist.probs.begin() + 1, dist.probs.end(), sorted.begin());
  std::sort(sorted.begin(), sorted.end());
  Real weighted = 0;
  for (int i = 0; i < catalog_size; ++i) weighted += static_cast<Real>(i + 1) * sorted[i];
  const Real n = static_cast<Real>(catalog_size);
  stats.gini = (2.0 * weighted - (n + 1.0)) / n;
  return stats;
}

}  // namespace sss::diagnostics
