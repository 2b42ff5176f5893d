#include "sss/objective.hpp"

namespace sss::objective {

std::string to_string(const LossKind& k) {
  return k.kind == LossKind::Kind::CE ? "ce" : "bce";
}

LossKind parse_loss_kind(const std::string& s, int num_negatives) {
  if (s == "ce") return LossKind::ce();
  if (s == "bce") return LossKind::bce(num_negatives);
  throw std::invalid_argument("unknown loss: " + s);
}

namespace {

Real softplus(Real x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Real sigmoid(Real x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const Real e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

LossGrad ce_loss_grad(const VecX& hidden, const MatX& item_embed, ItemId target, MatX* dE) {
  const int V = static_cast<int>(item_embed.rows()) - 1;
  if (target <= 0 || target > V) throw std::invalid_argument("target must be a real item");
  if (item_embed.cols() != hidden.size()) throw std::invalid_argument("dimension mismatch");

  VecX logits = item_embed * hidden;  // index 0 ignored below
  const Real mx = logits.segment(1, V).maxCoeff();
  VecX p = VecX::Zero(V + 1);
  Real denom = 0;
  for (int v = 1; v <= V; ++v) {
    p(v) = std::exp(logits(v) - mx);
    denom += p(v);
  }
  p.segment(1, V) /= denom;

  LossGrad out;
  out.loss = -(logits(target) - mx - std::log(denom));
  VecX dlogits = p;
  dlogits(target) -= 1.0;
  out.dh = item_embed.transpose() * dlogits;  // row 0 has dlogits 0
  if (dE) dE->noalias() += dlogits * hidden.transpose();
  return out;
}

std::vector<ItemId> sample_negatives(int num_items, const std::vector<ItemId>& exclusion,
                                     ItemId target, int count, std::mt19937_64& rng) {
  std::vector<char> banned(num_items + 1, 0);
  banned[kPaddingItem] = 1;
  if (target >= 0 && target <= num_items) banned[target] = 1;
  for (ItemId v : exclusion)
    if (v >= 0 && v <= num_items) banned[v] = 1;
  int available = 0;
  for (int v = 1; v <= num_items; ++v) available += !banned[v];
  if (available < count) throw std::runtime_error("no valid negative available");

  std::vector<ItemId> negs;
  negs.reserve(count);
  const int64_t banned_count = num_items - available;
  if ((banned_count + count) * 4 >= num_items) {
    // dense exclusion: enumerate candidates, partial Fisher-Yates
    std::vector<ItemId> pool;
    pool.reserve(available);
    for (int v = 1; v <= num_items; ++v)
      if (!banned[v]) pool.push_back(v);
    for (int i = 0; i < count; ++i) {
      std::uniform_int_distribution<int> pick(i, static_cast<int>(pool.size()) - 1);
      std::swap(pool[i], pool[pick(rng)]);
      negs.push_back(pool[i]);
    }
  } else {
    std::uniform_int_distribution<int> pick(1, num_items);
    while (static_cast<int>(negs.size()) < count) {
      ItemId v = pick(rng);
      if (banned[v]) continue;
      banned[v] = 1;
      negs.push_back(v);
    }
  }
  return negs;
}

LossGrad bce_loss_grad_fixed(const VecX& hidden, const MatX& item_embed, ItemId target,
                             const std::vector<ItemId>& negatives, MatX* dE) {
  const int V = static_cast<int>(item_embed.rows()) - 1;
  if (target <= 0 || target > V) throw std::invalid_argument("target must be a real item");

  LossGrad out;
  out.dh = VecX::Zero(hidden.size());

  const Real r_t = (item_embed.row(target) * hidden).value();
  out.loss = softplus(-r_t);
  const Real dr_t = sigmoid(r_t) - 1.0;
  out.dh += dr_t * item_embed.row(target).transpose();
  if (dE) dE->row(target) += dr_t * hidden.transpose();

  for (ItemId neg : negatives) {
    if (neg <= 0 || neg > V || neg == target)
      throw std::invalid_argument("invalid negative sample");
    const Real r_n = (item_embed.row(neg) * hidden).value();
    out.loss += softplus(r_n);
    const Real dr_n = sigmoid(r_n);
    out.dh += dr_n * item_embed.row(neg).transpose();
    if (dE) dE->row(neg) += dr_n * hidden.transpose();
  }
  return out;
}

LossGrad bce_loss_grad(const VecX& hidden, const MatX& item_embed, ItemId target,
                       std::mt19937_64& rng, int num_negatives,
                       const std::vector<ItemId>& exclusion, MatX* dE,
                       std::vector<ItemId>* negatives_out) {
  const int V = static_cast<int>(item_embed.rows()) - 1;
  auto negs = sample_negatives(V, exclusion, target, num_negatives, rng);
  if (negatives_out) *negatives_out = negs;
  return bce_loss_grad_fixed(hidden, item_embed, target, negs, dE);
}

}  // namespace sss::objective
