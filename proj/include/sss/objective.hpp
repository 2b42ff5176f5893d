#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "sss/types.hpp"

namespace sss::objective {

struct LossKind {
  enum class Kind { CE, BCE };
  Kind kind = Kind::CE;
  int num_negatives = 1;  // BCE only

  static LossKind ce() { return {Kind::CE, 0}; }
  static LossKind bce(int negatives = 1) {
    if (negatives < 1) throw std::invalid_argument("BCE needs at least one negative");
    return {Kind::BCE, negatives};
  }
};

std::string to_string(const LossKind& k);
LossKind parse_loss_kind(const std::string& s, int num_negatives = 1);

struct LossGrad {
  Real loss = 0;
  VecX dh;  // gradient on the hidden state
};

// Full-catalog softmax cross-entropy over items 1..V (padding excluded),
// stabilized by max subtraction. dE, when given, accumulates the output-side
// item-embedding gradient.
LossGrad ce_loss_grad(const VecX& hidden, const MatX& item_embed, ItemId target,
                      MatX* dE = nullptr);

// Uniform without-replacement negatives from {1..V} minus exclusion minus
// the target. Error when not enough candidates remain.
std::vector<ItemId> sample_negatives(int num_items, const std::vector<ItemId>& exclusion,
                                     ItemId target, int count, std::mt19937_64& rng);

// loss = softplus(-r_target) + sum_neg softplus(r_neg), the stable form of
// -log sigmoid(r_t) - sum log(1 - sigmoid(r_neg)).
LossGrad bce_loss_grad_fixed(const VecX& hidden, const MatX& item_embed, ItemId target,
                             const std::vector<ItemId>& negatives, MatX* dE = nullptr);

LossGrad bce_loss_grad(const VecX& hidden, const MatX& item_embed, ItemId target,
                       std::mt19937_64& rng, int num_negatives,
                       const std::vector<ItemId>& exclusion, MatX* dE = nullptr,
                       std::vector<ItemId>* negatives_out = nullptr);

// ---------------------------------------------------------------------------
// Central-difference gradient check. Works on any parameter container with
// the visit(name, tensor) protocol. Checks every coordinate of tensors up to
// coords_per_tensor entries (so all biases) and a seeded subsample above
// that. Relative error denominator: max(|analytic|, |numeric|, 1e-8).
// ---------------------------------------------------------------------------

struct FdEntry {
  std::string tensor;
  Real max_rel_err = 0;
  int checked = 0;
};

struct FdReport {
  std::vector<FdEntry> tensors;
  Real max_rel_err = 0;

  bool passes(Real tolerance) const { return max_rel_err <= tolerance; }
};

template <typename Params, typename LossFn>
FdReport finite_diff_check(Params& params, const Params& analytic, LossFn&& loss_fn,
                           Real step = 1e-5, int coords_per_tensor = 200,
                           uint64_t seed = 0x5eed) {
  std::vector<std::pair<std::string, MatX*>> tensors;
  params.visit([&](const std::string& n, MatX& m) { tensors.emplace_back(n, &m); });
  std::vector<const MatX*> grads;
  analytic.visit([&](const std::string&, const MatX& m) { grads.push_back(&m); });
  if (tensors.size() != grads.size()) throw std::invalid_argument("parameter shape mismatch");

  std::mt19937_64 rng(seed);
  FdReport report;
  for (size_t t = 0; t < tensors.size(); ++t) {
    MatX& m = *tensors[t].second;
    const MatX& g = *grads[t];
    if (m.rows() != g.rows() || m.cols() != g.cols())
      throw std::invalid_argument("gradient shape mismatch for " + tensors[t].first);
    const Eigen::Index n = m.size();
    std::vector<Eigen::Index> coords(n);
    for (Eigen::Index i = 0; i < n; ++i) coords[i] = i;
    if (n > coords_per_tensor) {
      for (int i = 0; i < coords_per_tensor; ++i) {
        std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
        std::swap(coords[i], coords[pick(rng)]);
      }
      coords.resize(coords_per_tensor);
    }
    FdEntry entry{tensors[t].first, 0, static_cast<int>(coords.size())};
    for (Eigen::Index idx : coords) {
      Real* slot = m.data() + idx;
      const Real orig = *slot;
      *slot = orig + step;
      const Real up = loss_fn(std::as_const(params));
      *slot = orig - step;
      const Real down = loss_fn(std::as_const(params));
      *slot = orig;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw std::runtime_error("non-finite loss during gradient check");
      const Real numeric = (up - down) / (2 * step);
      const Real a = g.data()[idx];
      const Real rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      entry.max_rel_err = std::max(entry.max_rel_err, rel);
    }
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.tensors.push_back(std::move(entry));
  }
  return report;
}

}  // namespace sss::objective
