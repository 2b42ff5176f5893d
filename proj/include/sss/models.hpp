#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <unordered_map>
#include <utility>

#include "sss/augment.hpp"
#include "sss/types.hpp"

namespace sss::models {

enum class ModelKind { Popularity, Markov, AttnRec, GruRec };
enum class Positions { Last, All };

std::string to_string(ModelKind k);
ModelKind parse_model_kind(const std::string& s);

constexpr Real kLnEps = 1e-8;

// ---------------------------------------------------------------------------
// Parameter containers. Every tensor is a dense matrix (biases are column
// vectors) so one visitor serves init, Adam, checkpointing and gradient
// checks alike. Visit order is fixed; seeded init depends on it.
// ---------------------------------------------------------------------------

struct AttnConfig {
  int num_items = 0;  // catalog size V; embeddings have V+1 rows
  int d = 64;
  int max_len = 50;
  int blocks = 1;
  int heads = 1;
  int d_ff = 0;  // 0 means d

  int ff_dim() const { return d_ff > 0 ? d_ff : d; }
};

template <typename Scalar>
struct AttnParams {
  AttnConfig cfg;
  Mat<Scalar> item_embed;  // (V+1) x d, row 0 pinned to zero
  Mat<Scalar> pos_embed;   // max_len x d
  struct Block {
    Mat<Scalar> Wq, Wk, Wv;    // d x d
    Mat<Scalar> ln1_g, ln1_b;  // d x 1
    Mat<Scalar> W1;            // d x d_ff
    Mat<Scalar> b1;            // d_ff x 1
    Mat<Scalar> W2;            // d_ff x d
    Mat<Scalar> b2;            // d x 1
    Mat<Scalar> ln2_g, ln2_b;  // d x 1
  };
  std::vector<Block> blocks;

  template <typename F>
  void visit(F&& f) {
    f("item_embed", item_embed);
    f("pos_embed", pos_embed);
    for (size_t b = 0; b < blocks.size(); ++b) {
      auto& blk = blocks[b];
      std::string p = "blk" + std::to_string(b) + ".";
      f(p + "Wq", blk.Wq);
      f(p + "Wk", blk.Wk);
      f(p + "Wv", blk.Wv);
      f(p + "ln1_g", blk.ln1_g);
      f(p + "ln1_b", blk.ln1_b);
      f(p + "W1", blk.W1);
      f(p + "b1", blk.b1);
      f(p + "W2", blk.W2);
      f(p + "b2", blk.b2);
      f(p + "ln2_g", blk.ln2_g);
      f(p + "ln2_b", blk.ln2_b);
    }
  }
  template <typename F>
  void visit(F&& f) const {
    const_cast<AttnParams*>(this)->visit(
        [&](const std::string& n, Mat<Scalar>& m) { f(n, std::as_const(m)); });
  }
};

template <typename Scalar>
struct GruParams {
  int num_items = 0;
  int d = 64;
  int max_len = 50;
  Mat<Scalar> item_embed;  // (V+1) x d
  Mat<Scalar> Wz, Wr, Wh;  // d x d, input-to-gate
  Mat<Scalar> Uz, Ur, Uh;  // d x d, recurrent
  Mat<Scalar> bz, br, bh;  // d x 1

  template <typename F>
  void visit(F&& f) {
    f("item_embed", item_embed);
    f("Wz", Wz);
    f("Wr", Wr);
    f("Wh", Wh);
    f("Uz", Uz);
    f("Ur", Ur);
    f("Uh", Uh);
    f("bz", bz);
    f("br", br);
    f("bh", bh);
  }
  template <typename F>
  void visit(F&& f) const {
    const_cast<GruParams*>(this)->visit(
        [&](const std::string& n, Mat<Scalar>& m) { f(n, std::as_const(m)); });
  }
};

template <typename Params>
Params zeros_like(const Params& p) {
  Params g = p;
  g.visit([](const std::string&, auto& m) { m.setZero(); });
  return g;
}

template <typename Scalar>
AttnParams<Scalar> init_attn(const AttnConfig& cfg, uint64_t seed) {
  if (cfg.d % cfg.heads != 0) throw std::invalid_argument("heads must divide d");
  if (cfg.blocks < 1 || cfg.num_items < 1 || cfg.max_len < 1)
    throw std::invalid_argument("bad attention config");
  AttnParams<Scalar> p;
  p.cfg = cfg;
  const int d = cfg.d, dff = cfg.ff_dim();
  p.item_embed.resize(cfg.num_items + 1, d);
  p.pos_embed.resize(cfg.max_len, d);
  p.blocks.resize(cfg.blocks);
  for (auto& blk : p.blocks) {
    blk.Wq.resize(d, d);
    blk.Wk.resize(d, d);
    blk.Wv.resize(d, d);
    blk.ln1_g.resize(d, 1);
    blk.ln1_b.resize(d, 1);
    blk.W1.resize(d, dff);
    blk.b1.resize(dff, 1);
    blk.W2.resize(dff, d);
    blk.b2.resize(d, 1);
    blk.ln2_g.resize(d, 1);
    blk.ln2_b.resize(d, 1);
  }
  std::mt19937_64 rng(seed);
  const double scale = 0.5 / std::sqrt(double(d));
  std::uniform_real_distribution<double> dist(-scale, scale);
  p.visit([&](const std::string& name, Mat<Scalar>& m) {
    if (name.ends_with("ln1_g") || name.ends_with("ln2_g")) {
      m.setOnes();
    } else if (name.ends_with("ln1_b") || name.ends_with("ln2_b")) {
      m.setZero();
    } else {
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = Scalar(dist(rng));
    }
  });
  p.item_embed.row(0).setZero();
  return p;
}

template <typename Scalar>
GruParams<Scalar> init_gru(int num_items, int d, int max_len, uint64_t seed) {
  if (num_items < 1 || d < 1 || max_len < 1) throw std::invalid_argument("bad gru config");
  GruParams<Scalar> p;
  p.num_items = num_items;
  p.d = d;
  p.max_len = max_len;
  p.item_embed.resize(num_items + 1, d);
  for (auto* m : {&p.Wz, &p.Wr, &p.Wh, &p.Uz, &p.Ur, &p.Uh}) m->resize(d, d);
  for (auto* m : {&p.bz, &p.br, &p.bh}) m->resize(d, 1);
  std::mt19937_64 rng(seed);
  const double scale = 0.5 / std::sqrt(double(d));
  std::uniform_real_distribution<double> dist(-scale, scale);
  p.visit([&](const std::string&, Mat<Scalar>& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = Scalar(dist(rng));
  });
  p.item_embed.row(0).setZero();
  return p;
}

// ---------------------------------------------------------------------------
// Padding helpers. Inputs are left-padded with item 0 to max_len; the real
// items occupy a suffix of the buffer.
// ---------------------------------------------------------------------------

inline std::vector<ItemId> left_pad(const std::vector<ItemId>& items, int max_len) {
  std::vector<ItemId> row(max_len, kPaddingItem);
  const int m = static_cast<int>(items.size());
  const int keep = std::min(m, max_len);
  for (int i = 0; i < keep; ++i) row[max_len - keep + i] = items[m - keep + i];
  return row;
}

inline int first_real_position(const std::vector<ItemId>& padded) {
  int f = 0;
  while (f < static_cast<int>(padded.size()) && padded[f] == kPaddingItem) ++f;
  return f;
}

// ---------------------------------------------------------------------------
// Layer norm over one row vector. Backward: with xh the normalized row,
// dx = inv_std * (dxh - mean(dxh) - xh * mean(dxh .* xh)).
// ---------------------------------------------------------------------------

template <typename Scalar>
void ln_forward(const Vec<Scalar>& x, const Mat<Scalar>& gain, const Mat<Scalar>& bias,
                Vec<Scalar>& xhat, Scalar& inv_std, Vec<Scalar>& out) {
  const Scalar mu = x.mean();
  const Scalar var = (x.array() - mu).square().mean();
  inv_std = Scalar(1) / std::sqrt(var + Scalar(kLnEps));
  xhat = ((x.array() - mu) * inv_std).matrix();
  out = (xhat.array() * gain.col(0).array() + bias.col(0).array()).matrix();
}

template <typename Scalar>
Vec<Scalar> ln_backward(const Vec<Scalar>& dy, const Vec<Scalar>& xhat, Scalar inv_std,
                        const Mat<Scalar>& gain, Mat<Scalar>& dgain, Mat<Scalar>& dbias) {
  dgain.col(0) += (dy.array() * xhat.array()).matrix();
  dbias.col(0) += dy;
  Vec<Scalar> dxh = (dy.array() * gain.col(0).array()).matrix();
  const Scalar m1 = dxh.mean();
  const Scalar m2 = (dxh.array() * xhat.array()).mean();
  return ((dxh.array() - m1 - xhat.array() * m2) * inv_std).matrix();
}

// ---------------------------------------------------------------------------
// AttnRec: item + positional embeddings, then per block causal multi-head
// scaled dot-product attention (no output projection), residual, layer norm,
// ReLU feed-forward, residual, layer norm. Scores are hidden . item_embed^T.
// Rows before the first real item are never touched; in the final block only
// rows from q_start on are computed (Last mode needs just the final row).
// ---------------------------------------------------------------------------

template <typename Scalar>
struct AttnCache {
  std::vector<ItemId> input;  // padded
  int f = 0;                  // first real row
  int q_start = 0;            // first computed query row of the final block
  Mat<Scalar> X0;
  struct BlockCache {
    int qs = 0;                  // query start of this block
    Mat<Scalar> Xin;             // L x d
    Mat<Scalar> Q, K, V;         // L x d
    std::vector<Mat<Scalar>> A;  // per head: nq x nk softmax weights
    Mat<Scalar> xhat1, Z;        // LN1
    Vec<Scalar> inv1;
    Mat<Scalar> Fpre, Fact;      // FFN
    Mat<Scalar> xhat2, H;        // LN2
    Vec<Scalar> inv2;
  };
  std::vector<BlockCache> blocks;

  const Mat<Scalar>& hidden() const { return blocks.back().H; }
};

template <typename Scalar>
AttnCache<Scalar> attn_forward(const AttnParams<Scalar>& p, const std::vector<ItemId>& padded,
                               Positions needed) {
  const int L = p.cfg.max_len;
  if (static_cast<int>(padded.size()) != L)
    throw std::invalid_argument("input must be padded to max_len");
  AttnCache<Scalar> c;
  c.input = padded;
  c.f = first_real_position(padded);
  if (c.f == L) throw std::runtime_error("all-padding input");
  for (int pos = c.f; pos < L; ++pos) {
    if (padded[pos] == kPaddingItem)
      throw std::invalid_argument("padding inside the real suffix");
    if (padded[pos] < 0 || padded[pos] > p.cfg.num_items)
      throw std::invalid_argument("item id out of range");
  }
  c.q_start = needed == Positions::Last ? L - 1 : c.f;

  const int d = p.cfg.d, H = p.cfg.heads, dh = d / H, dff = p.cfg.ff_dim();
  const Scalar inv_sqrt_dh = Scalar(1) / std::sqrt(Scalar(dh));

  c.X0.setZero(L, d);
  for (int pos = c.f; pos < L; ++pos)
    c.X0.row(pos) = p.item_embed.row(padded[pos]) + p.pos_embed.row(pos);

  c.blocks.resize(p.blocks.size());
  const Mat<Scalar>* Xin = &c.X0;
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    const auto& w = p.blocks[b];
    auto& bc = c.blocks[b];
    bc.qs = (b + 1 == p.blocks.size()) ? c.q_start : c.f;
    bc.Xin = *Xin;
    const int f = c.f, qs = bc.qs;
    const int nk = L - f, nq = L - qs;

    bc.Q.setZero(L, d);
    bc.K.setZero(L, d);
    bc.V.setZero(L, d);
    bc.Q.bottomRows(nq) = bc.Xin.bottomRows(nq) * w.Wq;
    bc.K.bottomRows(nk) = bc.Xin.bottomRows(nk) * w.Wk;
    bc.V.bottomRows(nk) = bc.Xin.bottomRows(nk) * w.Wv;

    Mat<Scalar> O = Mat<Scalar>::Zero(L, d);
    bc.A.assign(H, Mat<Scalar>());
    for (int h = 0; h < H; ++h) {
      Mat<Scalar> S = bc.Q.block(qs, h * dh, nq, dh) *
                      bc.K.block(f, h * dh, nk, dh).transpose() * inv_sqrt_dh;
      auto& A = bc.A[h];
      A.setZero(nq, nk);
      for (int i = 0; i < nq; ++i) {
        const int allowed = (qs + i) - f + 1;  // keys f .. qs+i
        Eigen::Array<Scalar, 1, Eigen::Dynamic> e =
            (S.row(i).head(allowed).array() - S.row(i).head(allowed).maxCoeff()).exp();
        A.row(i).head(allowed) = (e / e.sum()).matrix();
      }
      O.block(qs, h * dh, nq, dh) = A * bc.V.block(f, h * dh, nk, dh);
    }

    Mat<Scalar> Y = Mat<Scalar>::Zero(L, d);
    Y.bottomRows(nq) = bc.Xin.bottomRows(nq) + O.bottomRows(nq);

    bc.xhat1.setZero(L, d);
    bc.Z.setZero(L, d);
    bc.inv1.setZero(L);
    for (int pos = qs; pos < L; ++pos) {
      Vec<Scalar> y = Y.row(pos).transpose(), xh(d), z(d);
      Scalar inv;
      ln_forward<Scalar>(y, w.ln1_g, w.ln1_b, xh, inv, z);
      bc.xhat1.row(pos) = xh.transpose();
      bc.inv1(pos) = inv;
      bc.Z.row(pos) = z.transpose();
    }

    bc.Fpre.setZero(L, dff);
    bc.Fpre.bottomRows(nq) =
        (bc.Z.bottomRows(nq) * w.W1).rowwise() + w.b1.col(0).transpose();
    bc.Fact = bc.Fpre.cwiseMax(Scalar(0));
    Mat<Scalar> U = Mat<Scalar>::Zero(L, d);
    U.bottomRows(nq) = bc.Z.bottomRows(nq) +
                       ((bc.Fact.bottomRows(nq) * w.W2).rowwise() + w.b2.col(0).transpose());

    bc.xhat2.setZero(L, d);
    bc.H.setZero(L, d);
    bc.inv2.setZero(L);
    for (int pos = qs; pos < L; ++pos) {
      Vec<Scalar> u = U.row(pos).transpose(), xh(d), hrow(d);
      Scalar inv;
      ln_forward<Scalar>(u, w.ln2_g, w.ln2_b, xh, inv, hrow);
      bc.xhat2.row(pos) = xh.transpose();
      bc.inv2(pos) = inv;
      bc.H.row(pos) = hrow.transpose();
    }
    Xin = &bc.H;
  }
  return c;
}

// dH_final holds upstream gradients on the final hidden states (zero rows
// where no target sits). Accumulates into grads (zeros_like-shaped).
template <typename Scalar>
void attn_backward(const AttnParams<Scalar>& p, const AttnCache<Scalar>& c,
                   const Mat<Scalar>& dH_final, AttnParams<Scalar>& grads) {
  const int L = p.cfg.max_len, d = p.cfg.d, H = p.cfg.heads, dh = d / H;
  if (dH_final.rows() != L || dH_final.cols() != d)
    throw std::invalid_argument("upstream gradient shape mismatch");
  const Scalar inv_sqrt_dh = Scalar(1) / std::sqrt(Scalar(dh));
  const int f = c.f;

  Mat<Scalar> dH = dH_final;
  for (int b = static_cast<int>(p.blocks.size()) - 1; b >= 0; --b) {
    const auto& w = p.blocks[b];
    const auto& bc = c.blocks[b];
    auto& gw = grads.blocks[b];
    const int qs = bc.qs;
    const int nk = L - f, nq = L - qs;

    Mat<Scalar> dU = Mat<Scalar>::Zero(L, d);
    for (int pos = qs; pos < L; ++pos) {
      Vec<Scalar> dy = dH.row(pos).transpose();
      Vec<Scalar> xh = bc.xhat2.row(pos).transpose();
      dU.row(pos) =
          ln_backward<Scalar>(dy, xh, bc.inv2(pos), w.ln2_g, gw.ln2_g, gw.ln2_b).transpose();
    }

    Mat<Scalar> dZ = dU;
    {
      const Mat<Scalar> dFout = dU.bottomRows(nq);
      gw.W2 += bc.Fact.bottomRows(nq).transpose() * dFout;
      gw.b2.col(0) += dFout.colwise().sum().transpose();
      Mat<Scalar> dFact = dFout * w.W2.transpose();
      Mat<Scalar> mask = (bc.Fpre.bottomRows(nq).array() > Scalar(0))
                             .template cast<Scalar>()
                             .matrix();
      Mat<Scalar> dFpre = dFact.cwiseProduct(mask);
      gw.W1 += bc.Z.bottomRows(nq).transpose() * dFpre;
      gw.b1.col(0) += dFpre.colwise().sum().transpose();
      dZ.bottomRows(nq) += dFpre * w.W1.transpose();
    }

    Mat<Scalar> dY = Mat<Scalar>::Zero(L, d);
    for (int pos = qs; pos < L; ++pos) {
      Vec<Scalar> dz = dZ.row(pos).transpose();
      Vec<Scalar> xh = bc.xhat1.row(pos).transpose();
      dY.row(pos) =
          ln_backward<Scalar>(dz, xh, bc.inv1(pos), w.ln1_g, gw.ln1_g, gw.ln1_b).transpose();
    }

    Mat<Scalar> dXin = Mat<Scalar>::Zero(L, d);
    dXin.bottomRows(nq) = dY.bottomRows(nq);  // residual

    Mat<Scalar> dQ = Mat<Scalar>::Zero(L, d);
    Mat<Scalar> dK = Mat<Scalar>::Zero(L, d);
    Mat<Scalar> dV = Mat<Scalar>::Zero(L, d);
    for (int h = 0; h < H; ++h) {
      const auto& A = bc.A[h];
      const Mat<Scalar> dOh = dY.block(qs, h * dh, nq, dh);
      Mat<Scalar> dA = dOh * bc.V.block(f, h * dh, nk, dh).transpose();
      Eigen::Array<Scalar, Eigen::Dynamic, 1> rowsum =
          (dA.array() * A.array()).rowwise().sum();
      Mat<Scalar> dS = (A.array() * (dA.array().colwise() - rowsum)).matrix();
      dQ.block(qs, h * dh, nq, dh) = dS * bc.K.block(f, h * dh, nk, dh) * inv_sqrt_dh;
      dK.block(f, h * dh, nk, dh) =
          dS.transpose() * bc.Q.block(qs, h * dh, nq, dh) * inv_sqrt_dh;
      dV.block(f, h * dh, nk, dh) = A.transpose() * dOh;
    }

    gw.Wq += bc.Xin.bottomRows(nq).transpose() * dQ.bottomRows(nq);
    gw.Wk += bc.Xin.bottomRows(nk).transpose() * dK.bottomRows(nk);
    gw.Wv += bc.Xin.bottomRows(nk).transpose() * dV.bottomRows(nk);
    dXin.bottomRows(nq) += dQ.bottomRows(nq) * w.Wq.transpose();
    dXin.bottomRows(nk) += dK.bottomRows(nk) * w.Wk.transpose();
    dXin.bottomRows(nk) += dV.bottomRows(nk) * w.Wv.transpose();

    dH = std::move(dXin);
  }

  for (int pos = f; pos < L; ++pos) {
    grads.item_embed.row(c.input[pos]) += dH.row(pos);
    grads.pos_embed.row(pos) += dH.row(pos);
  }
  grads.item_embed.row(0).setZero();
}

// ---------------------------------------------------------------------------
// GruRec: single-layer gated recurrence over the embedded real suffix,
// initial state zero, padding rows skipped. Update gate z, reset gate r,
// candidate c = tanh(Wh x + Uh (r.h) + bh), h = (1-z).h_prev + z.c.
// ---------------------------------------------------------------------------

template <typename Scalar>
struct GruCache {
  std::vector<ItemId> input;
  int f = 0;
  Mat<Scalar> H;  // L x d hidden per position (rows < f zero)
  struct Step {
    Vec<Scalar> x, z, r, cand, h_prev;
  };
  std::vector<Step> steps;  // one per real position, in order

  const Mat<Scalar>& hidden() const { return H; }
};

template <typename Scalar>
GruCache<Scalar> gru_forward(const GruParams<Scalar>& p, const std::vector<ItemId>& padded,
                             Positions /*needed*/) {
  const int L = p.max_len, d = p.d;
  if (static_cast<int>(padded.size()) != L)
    throw std::invalid_argument("input must be padded to max_len");
  GruCache<Scalar> c;
  c.input = padded;
  c.f = first_real_position(padded);
  if (c.f == L) throw std::runtime_error("all-padding input");
  c.H.setZero(L, d);
  Vec<Scalar> h = Vec<Scalar>::Zero(d);
  auto sigmoid = [](const Vec<Scalar>& a) -> Vec<Scalar> {
    return (Scalar(1) / (Scalar(1) + (-a.array()).exp())).matrix();
  };
  for (int pos = c.f; pos < L; ++pos) {
    const ItemId v = padded[pos];
    if (v == kPaddingItem) throw std::invalid_argument("padding inside the real suffix");
    if (v < 0 || v > p.num_items) throw std::invalid_argument("item id out of range");
    typename GruCache<Scalar>::Step st;
    st.h_prev = h;
    st.x = p.item_embed.row(v).transpose();
    st.z = sigmoid(p.Wz * st.x + p.Uz * h + p.bz.col(0));
    st.r = sigmoid(p.Wr * st.x + p.Ur * h + p.br.col(0));
    st.cand = (p.Wh * st.x + p.Uh * (st.r.array() * h.array()).matrix() + p.bh.col(0))
                  .array()
                  .tanh()
                  .matrix();
    h = ((Scalar(1) - st.z.array()) * st.h_prev.array() + st.z.array() * st.cand.array())
            .matrix();
    c.H.row(pos) = h.transpose();
    c.steps.push_back(std::move(st));
  }
  return c;
}

template <typename Scalar>
void gru_backward(const GruParams<Scalar>& p, const GruCache<Scalar>& c,
                  const Mat<Scalar>& dH_final, GruParams<Scalar>& grads) {
  const int L = p.max_len, d = p.d;
  if (dH_final.rows() != L || dH_final.cols() != d)
    throw std::invalid_argument("upstream gradient shape mismatch");
  Vec<Scalar> dh = Vec<Scalar>::Zero(d);
  for (int pos = L - 1; pos >= c.f; --pos) {
    const auto& st = c.steps[pos - c.f];
    dh += dH_final.row(pos).transpose();

    Vec<Scalar> dz = (dh.array() * (st.cand - st.h_prev).array()).matrix();
    Vec<Scalar> dcand = (dh.array() * st.z.array()).matrix();
    Vec<Scalar> dh_prev = (dh.array() * (Scalar(1) - st.z.array())).matrix();

    Vec<Scalar> da_c = (dcand.array() * (Scalar(1) - st.cand.array().square())).matrix();
    Vec<Scalar> rh = (st.r.array() * st.h_prev.array()).matrix();
    grads.Wh += da_c * st.x.transpose();
    grads.Uh += da_c * rh.transpose();
    grads.bh.col(0) += da_c;
    Vec<Scalar> drh = p.Uh.transpose() * da_c;
    Vec<Scalar> dr = (drh.array() * st.h_prev.array()).matrix();
    dh_prev += (drh.array() * st.r.array()).matrix();

    Vec<Scalar> da_z = (dz.array() * st.z.array() * (Scalar(1) - st.z.array())).matrix();
    grads.Wz += da_z * st.x.transpose();
    grads.Uz += da_z * st.h_prev.transpose();
    grads.bz.col(0) += da_z;
    dh_prev += p.Uz.transpose() * da_z;

    Vec<Scalar> da_r = (dr.array() * st.r.array() * (Scalar(1) - st.r.array())).matrix();
    grads.Wr += da_r * st.x.transpose();
    grads.Ur += da_r * st.h_prev.transpose();
    grads.br.col(0) += da_r;
    dh_prev += p.Ur.transpose() * da_r;

    Vec<Scalar> dx =
        p.Wz.transpose() * da_z + p.Wr.transpose() * da_r + p.Wh.transpose() * da_c;
    grads.item_embed.row(c.input[pos]) += dx.transpose();

    dh = std::move(dh_prev);
  }
  grads.item_embed.row(0).setZero();
}

// ---------------------------------------------------------------------------
// Counting baselines.
// ---------------------------------------------------------------------------

struct PopularityModel {
  int num_items = 0;
  std::vector<int64_t> target_counts;  // size num_items+1
};

struct MarkovModel {
  int num_items = 0;
  std::vector<int64_t> target_counts;  // back-off
  std::unordered_map<ItemId, std::unordered_map<ItemId, int64_t>> transitions;
};

PopularityModel fit_popularity(const augment::TrainingSet& train, int num_items);
MarkovModel fit_markov(const augment::TrainingSet& train, int num_items);

// ---------------------------------------------------------------------------
// Shared scoring interface for evaluation. score_context returns a
// (num_items+1)-vector with the padding slot forced to -inf.
// ---------------------------------------------------------------------------

struct Scorer {
  virtual ~Scorer() = default;
  virtual VecX score_context(const std::vector<ItemId>& context) const = 0;
  virtual int num_items() const = 0;
};

std::unique_ptr<Scorer> make_popularity_scorer(PopularityModel model);
std::unique_ptr<Scorer> make_markov_scorer(MarkovModel model);
std::unique_ptr<Scorer> make_attn_scorer(AttnParams<Real> params);
std::unique_ptr<Scorer> make_gru_scorer(GruParams<Real> params);

// Scores for one hidden state under tied output embeddings.
inline VecX tied_scores(const MatX& item_embed, const VecX& hidden) {
  VecX s = item_embed * hidden;
  s(0) = -std::numeric_limits<Real>::infinity();
  return s;
}

}  // namespace sss::models
