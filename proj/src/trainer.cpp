#include "sss/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <unordered_set>

#include "json.hpp"
#include "sss/eval.hpp"

namespace sss::trainer {

namespace {

// Rows describing one sub-sequence: input = sub minus its last item, targets
// per strategy. Truncation to the last max_len items happens before the
// split, matching build_training_set.
void rows_for_sequence(const corpus::UserSequence& seq, const augment::SplitMethod& method,
                       augment::TargetStrategy strategy, int max_len,
                       std::vector<TrainRow>& out) {
  std::vector<ItemId> s = seq.items;
  if (static_cast<int>(s.size()) > max_len) s.assign(s.end() - max_len, s.end());
  std::vector<std::vector<ItemId>> subs;
  try {
    subs = augment::split_sequence(s, method);
  } catch (const std::runtime_error&) {
    return;
  }
  for (auto& sub : subs) {
    if (sub.size() < 2) continue;
    TrainRow row;
    row.user = seq.user;
    row.items.assign(sub.begin(), sub.end() - 1);
    const int n = static_cast<int>(row.items.size());
    if (strategy == augment::TargetStrategy::Single) {
      row.targets.push_back({n - 1, sub.back()});
    } else {
      for (int i = 0; i + 1 < n; ++i) row.targets.push_back({i, row.items[i + 1]});
      row.targets.push_back({n - 1, sub.back()});
    }
    out.push_back(std::move(row));
  }
}

}  // namespace

std::vector<TrainRow> make_train_rows(const std::vector<corpus::UserSequence>& train,
                                      const augment::SplitMethod& method,
                                      augment::TargetStrategy strategy, int max_len) {
  if (max_len < 2) throw std::invalid_argument("max_len must be at least 2");
  std::vector<TrainRow> rows;
  for (const auto& seq : train) rows_for_sequence(seq, method, strategy, max_len, rows);
  return rows;
}

TrainRow row_from_example(const augment::TrainingExample& ex) {
  TrainRow row;
  row.user = ex.user;
  row.items = ex.input;
  row.targets = {{static_cast<int>(ex.input.size()) - 1, ex.target}};
  return row;
}

PaddedBatch pad_batch(const std::vector<TrainRow>& rows, int max_len) {
  PaddedBatch batch;
  batch.input.setZero(static_cast<Eigen::Index>(rows.size()), max_len);
  batch.targets.resize(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const int offset = max_len - static_cast<int>(row.items.size());
    if (offset < 0) throw std::invalid_argument("row longer than max_len");
    for (size_t i = 0; i < row.items.size(); ++i)
      batch.input(static_cast<Eigen::Index>(r), offset + static_cast<int>(i)) = row.items[i];
    for (auto [idx, target] : row.targets) batch.targets[r].push_back({offset + idx, target});
  }
  return batch;
}

namespace {

struct Preprocessed {
  std::vector<TrainRow> rows;
  std::vector<models::Positions> needed;            // per row
  std::vector<const std::vector<ItemId>*> exclude;  // per row: user's train items
};

Preprocessed preprocess(const corpus::DatasetSplit& split, const augment::SplitMethod& method,
                        augment::TargetStrategy strategy, const TrainConfig& cfg,
                        std::vector<std::vector<ItemId>>& user_items) {
  Preprocessed pre;
  pre.rows = make_train_rows(split.train, method, strategy, cfg.max_len);
  if (pre.rows.empty()) throw std::runtime_error("no training examples");

  int max_user = 0;
  for (const auto& seq : split.train) max_user = std::max(max_user, seq.user);
  user_items.assign(max_user + 1, {});
  for (const auto& seq : split.train) {
    auto items = seq.items;
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    user_items[seq.user] = std::move(items);
  }

  pre.needed.reserve(pre.rows.size());
  pre.exclude.reserve(pre.rows.size());
  for (const auto& row : pre.rows) {
    const bool last_only =
        row.targets.size() == 1 &&
        row.targets[0].first == static_cast<int>(row.items.size()) - 1;
    pre.needed.push_back(last_only ? models::Positions::Last : models::Positions::All);
    pre.exclude.push_back(&user_items[row.user]);
  }
  return pre;
}

template <typename Params, typename Forward, typename Backward, typename MakeScorer>
TrainResult train_neural(Params params, models::ModelKind kind,
                         const corpus::DatasetSplit& split, const augment::SplitMethod& method,
                         augment::TargetStrategy strategy, const TrainConfig& cfg,
                         Forward&& forward, Backward&& backward, MakeScorer&& make_scorer) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::vector<ItemId>> user_items;
  Preprocessed pre = preprocess(split, method, strategy, cfg, user_items);
  const int L = cfg.max_len;
  const bool use_bce = cfg.loss.kind == objective::LossKind::Kind::BCE;

  auto grads = models::zeros_like(params);
  auto adam = make_adam_state(params);
  EarlyStopper stopper(cfg.patience);
  Params best_params = params;

  eval::EvalConfig eval_cfg;
  eval_cfg.max_len = cfg.max_len;

  std::vector<size_t> order(pre.rows.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  MatX dH(L, cfg.d);
  std::vector<Real> epoch_losses;
  int epoch = 0;
  for (epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, kShuffleSalt, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    Real epoch_loss_sum = 0;
    int64_t epoch_targets = 0;

    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t stop = std::min(order.size(), start + cfg.batch_size);
      grads.visit([](const std::string&, MatX& t) { t.setZero(); });
      Real loss_sum = 0;
      int64_t num_targets = 0;

      for (size_t k = start; k < stop; ++k) {
        const size_t r = order[k];
        const TrainRow& row = pre.rows[r];
        const auto padded = models::left_pad(row.items, L);
        const int offset = L - static_cast<int>(row.items.size());
        auto cache = forward(params, padded, pre.needed[r]);
        dH.setZero();
        std::mt19937_64 neg_rng(derive_seed(cfg.seed, kNegSalt, epoch, r));
        for (auto [idx, target] : row.targets) {
          const int pos = offset + idx;
          VecX h = cache.hidden().row(pos).transpose();
          objective::LossGrad lg;
          if (use_bce) {
            lg = objective::bce_loss_grad(h, params.item_embed, target, neg_rng,
                                          cfg.loss.num_negatives, *pre.exclude[r],
                                          &grads.item_embed, nullptr);
          } else {
            lg = objective::ce_loss_grad(h, params.item_embed, target, &grads.item_embed);
          }
          dH.row(pos) += lg.dh.transpose();
          loss_sum += lg.loss;
          ++num_targets;
        }
        backward(params, cache, dH, grads);
      }

      const Real mean_loss = loss_sum / static_cast<Real>(num_targets);
      if (!std::isfinite(mean_loss) || mean_loss > 1e6)
        throw std::runtime_error("diverged: batch loss " + std::to_string(mean_loss));
      epoch_loss_sum += loss_sum;
      epoch_targets += num_targets;
      const Real scale = 1.0 / static_cast<Real>(num_targets);
      grads.visit([&](const std::string&, MatX& t) { t *= scale; });
      adam_step(params, grads, adam, cfg);
    }

    epoch_losses.push_back(epoch_loss_sum / static_cast<Real>(epoch_targets));
    auto scorer = make_scorer(params);
    const Real n10 = eval::evaluate(*scorer, split, eval::Phase::Valid, eval_cfg).n10;
    if (stopper.observe(n10)) best_params = params;
    if (stopper.should_stop()) break;
  }

  TrainResult result;
  result.report.epochs = std::min(epoch, cfg.max_epochs);
  result.report.best_epoch = stopper.best_index();
  result.report.best_valid = stopper.best();
  result.report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.report.epoch_losses = std::move(epoch_losses);
  result.checkpoint.kind = kind;
  result.checkpoint.meta = {
      {"loss", objective::to_string(cfg.loss)},
      {"negatives", cfg.loss.num_negatives},
      {"method", augment::to_string(method)},
      {"strategy", augment::to_string(strategy)},
      {"seed", cfg.seed},
      {"best_epoch", result.report.best_epoch},
      {"best_valid", result.report.best_valid},
  };
  result.checkpoint.model = std::move(best_params);
  return result;
}

}  // namespace

TrainResult train_model(models::ModelKind kind, const corpus::DatasetSplit& split,
                        const augment::SplitMethod& method, augment::TargetStrategy strategy,
                        const TrainConfig& cfg) {
  cfg.validate();
  using models::ModelKind;

  if (kind == ModelKind::Popularity || kind == ModelKind::Markov) {
    const auto t0 = std::chrono::steady_clock::now();
    auto train_set = augment::build_training_set(split, method, strategy, cfg.max_len);
    TrainResult result;
    result.checkpoint.kind = kind;
    std::unique_ptr<models::Scorer> scorer;
    if (kind == ModelKind::Popularity) {
      auto model = models::fit_popularity(train_set, split.num_items);
      scorer = models::make_popularity_scorer(model);
      result.checkpoint.model = std::move(model);
    } else {
      auto model = models::fit_markov(train_set, split.num_items);
      scorer = models::make_markov_scorer(model);
      result.checkpoint.model = std::move(model);
    }
    eval::EvalConfig eval_cfg;
    eval_cfg.max_len = cfg.max_len;
    result.report.best_valid = eval::evaluate(*scorer, split, eval::Phase::Valid, eval_cfg).n10;
    result.report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.checkpoint.meta = {
        {"loss", "none"},
        {"method", augment::to_string(method)},
        {"strategy", augment::to_string(strategy)},
        {"seed", cfg.seed},
    };
    return result;
  }

  if (kind == ModelKind::AttnRec) {
    models::AttnConfig acfg;
    acfg.num_items = split.num_items;
    acfg.d = cfg.d;
    acfg.max_len = cfg.max_len;
    acfg.blocks = cfg.blocks;
    acfg.heads = cfg.heads;
    acfg.d_ff = cfg.d_ff;
    auto params = models::init_attn<Real>(acfg, derive_seed(cfg.seed, kInitSalt));
    return train_neural(
        std::move(params), kind, split, method, strategy, cfg,
        [](const models::AttnParams<Real>& p, const std::vector<ItemId>& padded,
           models::Positions needed) { return models::attn_forward(p, padded, needed); },
        [](const models::AttnParams<Real>& p, const models::AttnCache<Real>& cache,
           const MatX& dH, models::AttnParams<Real>& g) {
          models::attn_backward(p, cache, dH, g);
        },
        [](const models::AttnParams<Real>& p) { return models::make_attn_scorer(p); });
  }

  auto params =
      models::init_gru<Real>(split.num_items, cfg.d, cfg.max_len, derive_seed(cfg.seed, kInitSalt));
  return train_neural(
      std::move(params), kind, split, method, strategy, cfg,
      [](const models::GruParams<Real>& p, const std::vector<ItemId>& padded,
         models::Positions needed) { return models::gru_forward(p, padded, needed); },
      [](const models::GruParams<Real>& p, const models::GruCache<Real>& cache, const MatX& dH,
         models::GruParams<Real>& g) { models::gru_backward(p, cache, dH, g); },
      [](const models::GruParams<Real>& p) { return models::make_gru_scorer(p); });
}

}  // namespace sss::trainer
