#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sss/augment.hpp"
#include "sss/checkpoint.hpp"
#include "sss/corpus.hpp"
#include "sss/models.hpp"
#include "sss/objective.hpp"
#include "sss/types.hpp"

namespace sss::trainer {

// Seed salts for the independent RNG streams derived from TrainConfig::seed.
inline constexpr uint64_t kInitSalt = 0x696e6974;
inline constexpr uint64_t kShuffleSalt = 0x73687566;
inline constexpr uint64_t kNegSalt = 0x6e656773;

struct TrainConfig {
  int d = 64;
  int max_len = 50;
  int batch_size = 256;
  Real lr = 0.001;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real adam_epsilon = 1e-8;
  int patience = 20;
  int max_epochs = 500;
  uint64_t seed = 0;
  objective::LossKind loss = objective::LossKind::ce();
  int blocks = 1;
  int heads = 1;
  int d_ff = 0;  // 0 means d

  void validate() const {
    if (lr <= 0) throw std::invalid_argument("lr must be positive");
    if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
      throw std::invalid_argument("betas must lie in [0, 1)");
    if (patience < 1) throw std::invalid_argument("patience must be at least 1");
  }
};

// One forward pass worth of training signal: a padded-able input row with
// next-item targets at chosen positions. `targets` holds (index into items,
// target item); under Single there is one target at the final index, under
// Multi one per position.
struct TrainRow {
  UserId user = 0;
  std::vector<ItemId> items;
  std::vector<std::pair<int, ItemId>> targets;
};

// Expands the training split according to the splitting method and target
// strategy. Produces, per retained sub-sequence, one row holding the
// sub-sequence minus its last item; the target pair multiset equals the one
// produced by build_training_set + expand_targets.
std::vector<TrainRow> make_train_rows(const std::vector<corpus::UserSequence>& train,
                                      const augment::SplitMethod& method,
                                      augment::TargetStrategy strategy, int max_len);

TrainRow row_from_example(const augment::TrainingExample& ex);

struct PaddedBatch {
  Eigen::Matrix<ItemId, Eigen::Dynamic, Eigen::Dynamic> input;  // batch x max_len
  std::vector<std::vector<std::pair<int, ItemId>>> targets;     // (position, item)
};

// Left-pads each row to max_len with the reserved 0 index and shifts target
// indices to padded positions.
PaddedBatch pad_batch(const std::vector<TrainRow>& rows, int max_len);

class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {
    if (patience < 1) throw std::invalid_argument("patience must be at least 1");
  }

  // Returns true when the metric strictly improves on the best so far.
  bool observe(Real metric) {
    ++count_;
    if (metric > best_) {
      best_ = metric;
      best_index_ = count_;
      streak_ = 0;
      return true;
    }
    ++streak_;
    return false;
  }

  bool should_stop() const { return streak_ >= patience_; }
  Real best() const { return best_; }
  int best_index() const { return best_index_; }
  int observed() const { return count_; }

 private:
  int patience_;
  Real best_ = -std::numeric_limits<Real>::infinity();
  int best_index_ = 0;
  int count_ = 0;
  int streak_ = 0;
};

template <typename Params>
struct AdamState {
  Params m, v;
  int64_t t = 0;
};

template <typename Params>
AdamState<Params> make_adam_state(const Params& params) {
  return {models::zeros_like(params), models::zeros_like(params), 0};
}

// Standard bias-corrected Adam. The padding embedding row is re-zeroed after
// the update; any non-finite gradient aborts.
template <typename Params>
void adam_step(Params& params, const Params& grads, AdamState<Params>& state,
               const TrainConfig& cfg) {
  std::vector<MatX*> tp, tm, tv;
  std::vector<const MatX*> tg;
  params.visit([&](const std::string&, MatX& t) { tp.push_back(&t); });
  state.m.visit([&](const std::string&, MatX& t) { tm.push_back(&t); });
  state.v.visit([&](const std::string&, MatX& t) { tv.push_back(&t); });
  grads.visit([&](const std::string&, const MatX& t) { tg.push_back(&t); });

  state.t += 1;
  const Real bc1 = 1 - std::pow(cfg.beta1, static_cast<Real>(state.t));
  const Real bc2 = 1 - std::pow(cfg.beta2, static_cast<Real>(state.t));
  for (size_t i = 0; i < tp.size(); ++i) {
    const MatX& g = *tg[i];
    if (!g.allFinite()) throw std::runtime_error("diverged: non-finite gradient");
    MatX& m = *tm[i];
    MatX& v = *tv[i];
    m = cfg.beta1 * m + (1 - cfg.beta1) * g;
    v = (cfg.beta2 * v.array() + (1 - cfg.beta2) * g.array().square()).matrix();
    tp[i]->array() -=
        cfg.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.adam_epsilon);
  }
  params.item_embed.row(0).setZero();
}

struct TrainReport {
  int epochs = 0;
  int best_epoch = 0;
  Real best_valid = 0;
  double seconds = 0;
  std::vector<Real> epoch_losses;  // mean training loss per epoch
};

struct TrainResult {
  TrainReport report;
  models::Checkpoint checkpoint;
};

// Trains (or, for the counting baselines, fits) one model on the training
// split expanded under (method, strategy), early-stopping on validation N@10.
TrainResult train_model(models::ModelKind kind, const corpus::DatasetSplit& split,
                        const augment::SplitMethod& method, augment::TargetStrategy strategy,
                        const TrainConfig& cfg);

}  // namespace sss::trainer
