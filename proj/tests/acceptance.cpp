// End-to-end acceptance checks, one verdict line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sss/checkpoint.hpp"
#include "sss/diagnostics.hpp"
#include "sss/runner.hpp"
#include "sss/synth.hpp"

using namespace sss;

namespace {

int failures = 0;

void verdict(int n, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s (%s)\n", n, pass ? "PASS" : "FAIL", detail.c_str());
  if (!pass) ++failures;
}

void skipped(int n, const std::string& reason) {
  std::printf("criterion %2d: SKIP (%s)\n", n, reason.c_str());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string bundled_dataset() { return std::string(SSS_SOURCE_DIR) + "/data/synth_1k.tsv"; }

corpus::DatasetSplit load_bundled() {
  auto inter = corpus::parse_interactions_file(bundled_dataset(), corpus::InputFormat::Triplet);
  auto [catalog, seqs] = corpus::build_sequences(inter);
  return corpus::leave_one_out(seqs);
}

corpus::DatasetSplit synth_split(int users, int items, uint64_t seed) {
  synth::SynthConfig sc;
  sc.users = users;
  sc.items = items;
  sc.seed = seed;
  auto [catalog, seqs] = corpus::build_sequences(synth::generate(sc));
  return corpus::leave_one_out(seqs);
}

using Pair = std::pair<std::vector<ItemId>, ItemId>;

std::multiset<Pair> pair_multiset(const std::vector<ItemId>& seq,
                                  const augment::SplitMethod& method,
                                  augment::TargetStrategy strategy) {
  std::multiset<Pair> out;
  for (const auto& sub : augment::split_sequence(seq, method))
    for (auto& p : augment::expand_targets(sub, strategy)) out.insert(std::move(p));
  return out;
}

std::vector<ItemId> random_seq(std::mt19937_64& rng, int min_len, int max_len, int num_items) {
  std::uniform_int_distribution<int> len(min_len, max_len), item(1, num_items);
  std::vector<ItemId> s(len(rng));
  for (auto& v : s) v = item(rng);
  return s;
}

// Independent sub-sequence enumeration by index arithmetic, used as the
// counting oracle.
int64_t oracle_count(int n, const augment::SplitMethod& m, augment::TargetStrategy t) {
  std::vector<int> lengths;
  switch (m.kind) {
    case augment::SplitMethod::Kind::Original:
      lengths.push_back(n);
      break;
    case augment::SplitMethod::Kind::Prefix:
      for (int e = 2; e <= n; ++e) lengths.push_back(e);
      break;
    case augment::SplitMethod::Kind::Suffix:
      for (int k = 2; k <= n; ++k) lengths.push_back(k);
      break;
    case augment::SplitMethod::Kind::Sliding:
      if (m.window >= n) lengths.push_back(n);
      else for (int s = 0; s + m.window <= n; ++s) lengths.push_back(m.window);
      break;
  }
  int64_t total = 0;
  for (int len : lengths) total += t == augment::TargetStrategy::Single ? 1 : len - 1;
  return total;
}

// grad-check scaffolding at d=8, |V|=20, len <= 6 (shared with the unit
// suite's approach: parameters inflated so every sampled coordinate carries
// signal well above central-difference noise)
struct GradSetup {
  std::vector<ItemId> padded;
  std::vector<std::pair<int, ItemId>> targets;
  std::vector<std::vector<ItemId>> negs;
};

GradSetup grad_setup(int L, int V, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(4, L), item(1, V);
  std::vector<ItemId> items(len(rng));
  for (auto& v : items) v = item(rng);
  GradSetup s;
  s.padded = models::left_pad(items, L);
  const int first = models::first_real_position(s.padded);
  for (int pos = first; pos + 1 < L; ++pos) s.targets.push_back({pos, s.padded[pos + 1]});
  s.targets.push_back({L - 1, item(rng)});
  for (auto& [pos, tgt] : s.targets) {
    std::vector<ItemId> negs;
    std::set<ItemId> used = {tgt};
    while (negs.size() < 2) {
      ItemId c = item(rng);
      if (used.count(c)) continue;
      used.insert(c);
      negs.push_back(c);
    }
    s.negs.push_back(std::move(negs));
  }
  return s;
}

template <typename Params, typename Fwd, typename Bwd>
Real max_grad_err(Params& params, const GradSetup& s, Fwd&& forward, Bwd&& backward, int L,
                  int d, bool bce) {
  auto loss_of = [&](const Params& p) {
    auto cache = forward(p, s.padded);
    Real total = 0;
    for (size_t i = 0; i < s.targets.size(); ++i) {
      auto [pos, tgt] = s.targets[i];
      VecX h = cache.hidden().row(pos).transpose();
      total += bce ? objective::bce_loss_grad_fixed(h, p.item_embed, tgt, s.negs[i]).loss
                   : objective::ce_loss_grad(h, p.item_embed, tgt).loss;
    }
    return total;
  };
  auto grads = models::zeros_like(params);
  auto cache = forward(params, s.padded);
  MatX dH = MatX::Zero(L, d);
  for (size_t i = 0; i < s.targets.size(); ++i) {
    auto [pos, tgt] = s.targets[i];
    VecX h = cache.hidden().row(pos).transpose();
    auto lg = bce ? objective::bce_loss_grad_fixed(h, params.item_embed, tgt, s.negs[i],
                                                   &grads.item_embed)
                  : objective::ce_loss_grad(h, params.item_embed, tgt, &grads.item_embed);
    dH.row(pos) += lg.dh.transpose();
  }
  backward(params, cache, dH, grads);
  return objective::finite_diff_check(params, grads, loss_of, 1e-5, 200, 77).max_rel_err;
}

struct RandomScorer : models::Scorer {
  int V;
  mutable std::mt19937_64 rng;
  RandomScorer(int num_items, uint64_t seed) : V(num_items), rng(seed) {}
  VecX score_context(const std::vector<ItemId>&) const override {
    VecX s(V + 1);
    std::uniform_real_distribution<Real> u(0, 1);
    for (int i = 0; i <= V; ++i) s[i] = u(rng);
    return s;
  }
  int num_items() const override { return V; }
};

augment::TrainingSet uniform_targets(int n) {
  augment::TrainingSet ts;
  for (ItemId v = 1; v <= n; ++v) ts.examples.push_back({1, {1}, v});
  return ts;
}

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, x);
  return buf;
}

void criterion_1() {
  using Sub = std::vector<ItemId>;
  const auto pfx = augment::split_sequence({1, 2, 3, 4}, augment::SplitMethod::prefix());
  const auto sfx = augment::split_sequence({1, 2, 3, 4}, augment::SplitMethod::suffix());
  const auto sld = augment::split_sequence({1, 2, 3, 4, 5}, augment::SplitMethod::sliding(3));
  const bool ok = pfx == std::vector<Sub>{{1, 2}, {1, 2, 3}, {1, 2, 3, 4}} &&
                  sfx == std::vector<Sub>{{3, 4}, {2, 3, 4}, {1, 2, 3, 4}} &&
                  sld == std::vector<Sub>{{1, 2, 3}, {2, 3, 4}, {3, 4, 5}};
  verdict(1, ok, "prefix, suffix, and sliding worked examples reproduce");
}

void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  bool ok = true;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    const auto s = random_seq(rng, 2, 60, 100);
    ok = pair_multiset(s, augment::SplitMethod::prefix(), augment::TargetStrategy::Single) ==
         pair_multiset(s, augment::SplitMethod::original(), augment::TargetStrategy::Multi);
  }
  const double secs = seconds_since(t0);
  verdict(2, ok && secs < 1.0,
          "prefix+single pairs equal original+multi pairs on 1000 sequences, " +
              fmt("%.2f", secs) + "s");
}

void criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  for (int n = 2; n <= 12 && ok; ++n) {
    std::vector<ItemId> seq(n);
    for (int i = 0; i < n; ++i) seq[i] = i + 1;
    std::vector<augment::SplitMethod> methods = {
        augment::SplitMethod::original(), augment::SplitMethod::prefix(),
        augment::SplitMethod::suffix(),   augment::SplitMethod::sliding(2),
        augment::SplitMethod::sliding(3), augment::SplitMethod::sliding(5),
        augment::SplitMethod::sliding(n), augment::SplitMethod::sliding(n + 3)};
    for (const auto& m : methods) {
      for (auto t : {augment::TargetStrategy::Single, augment::TargetStrategy::Multi}) {
        const auto got = static_cast<int64_t>(pair_multiset(seq, m, t).size());
        if (got != oracle_count(n, m, t)) ok = false;
      }
    }
    const int64_t half = static_cast<int64_t>(n) * (n - 1) / 2;
    using augment::TargetStrategy;
    ok = ok &&
         pair_multiset(seq, augment::SplitMethod::original(), TargetStrategy::Single).size() == 1u &&
         static_cast<int64_t>(
             pair_multiset(seq, augment::SplitMethod::original(), TargetStrategy::Multi).size()) ==
             n - 1 &&
         static_cast<int64_t>(
             pair_multiset(seq, augment::SplitMethod::prefix(), TargetStrategy::Single).size()) ==
             n - 1 &&
         static_cast<int64_t>(
             pair_multiset(seq, augment::SplitMethod::prefix(), TargetStrategy::Multi).size()) ==
             half &&
         static_cast<int64_t>(
             pair_multiset(seq, augment::SplitMethod::suffix(), TargetStrategy::Multi).size()) ==
             half;
  }
  const double secs = seconds_since(t0);
  verdict(3, ok && secs < 1.0,
          "counts match the enumeration oracle and closed forms for n=2..12, " +
              fmt("%.2f", secs) + "s");
}

void criterion_4() {
  bool ok = true;
  int64_t checked = 0;
  std::vector<corpus::DatasetSplit> splits;
  splits.push_back(load_bundled());
  for (uint64_t seed = 40; seed < 50; ++seed) splits.push_back(synth_split(60, 40, seed));
  for (const auto& split : splits) {
    const auto ts = augment::build_training_set(split, augment::SplitMethod::suffix(),
                                                augment::TargetStrategy::Single, 50);
    std::map<UserId, ItemId> last;
    for (const auto& s : split.train)
      if (!s.items.empty()) last[s.user] = s.items.back();
    for (const auto& ex : ts.examples) {
      ++checked;
      if (ex.target != last[ex.user]) ok = false;
    }
  }
  verdict(4, ok && checked > 0,
          "suffix+single targets equal the source last item on " + std::to_string(checked) +
              " examples across 11 datasets");
}

void criterion_5() {
  std::mt19937_64 rng(555);
  bool ok = true;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    const int max_len = trial % 2 == 0 ? 5 : 50;
    std::vector<corpus::UserSequence> seqs = {{1, random_seq(rng, 1, 80, 50)}};
    const auto got = augment::legacy_pipeline_split(seqs, max_len);

    const auto& s = seqs[0].items;
    const int n = static_cast<int>(s.size());
    const int start = std::max(0, n - (max_len + 2));
    const int stop = std::max(start, n - 2);
    const std::vector<ItemId> slice(s.begin() + start, s.begin() + stop);

    std::multiset<Pair> want;
    int discarded = 0;
    for (size_t e = 1; e <= slice.size(); ++e) {
      if (e == 1) {
        ++discarded;
        continue;
      }
      want.insert({{slice.begin(), slice.begin() + e - 1}, slice[e - 1]});
    }
    std::multiset<Pair> have;
    for (const auto& ex : got.examples) have.insert({ex.input, ex.target});
    ok = have == want && got.discarded_prefixes == discarded;
  }
  verdict(5, ok, "legacy pipeline equals slice plus prefix+single on 1000 sequences");
}

void criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  const int V = 20, d = 8, L = 6;
  std::string detail;
  bool ok = true;
  for (bool bce : {false, true}) {
    models::AttnConfig cfg;
    cfg.num_items = V;
    cfg.d = d;
    cfg.max_len = L;
    auto p = models::init_attn<Real>(cfg, 501);
    p.visit([](const std::string& name, MatX& m) {
      if (!name.ends_with("_g") && !name.ends_with("_b")) m *= 2.0;
    });
    auto s = grad_setup(L, V, 1);
    const Real err = max_grad_err(
        p, s,
        [](const models::AttnParams<Real>& q, const std::vector<ItemId>& in) {
          return models::attn_forward(q, in, models::Positions::All);
        },
        [](const models::AttnParams<Real>& q, const models::AttnCache<Real>& c, const MatX& dH,
           models::AttnParams<Real>& g) { models::attn_backward(q, c, dH, g); },
        L, d, bce);
    ok = ok && err <= 1e-4;
    detail += std::string(bce ? "attn/bce " : "attn/ce ") + fmt("%.1e", err) + " ";
  }
  for (bool bce : {false, true}) {
    auto p = models::init_gru<Real>(V, d, L, 703);
    p.visit([](const std::string&, MatX& m) { m *= 4.0; });
    auto s = grad_setup(L, V, 3);
    const Real err = max_grad_err(
        p, s,
        [](const models::GruParams<Real>& q, const std::vector<ItemId>& in) {
          return models::gru_forward(q, in, models::Positions::All);
        },
        [](const models::GruParams<Real>& q, const models::GruCache<Real>& c, const MatX& dH,
           models::GruParams<Real>& g) { models::gru_backward(q, c, dH, g); },
        L, d, bce);
    ok = ok && err <= 1e-4;
    detail += std::string(bce ? "gru/bce " : "gru/ce ") + fmt("%.1e", err) + " ";
  }
  const double secs = seconds_since(t0);
  verdict(6, ok && secs < 60.0, "max rel errs " + detail + fmt("%.1f", secs) + "s");
}

void criterion_7() {
  std::mt19937_64 rng(777);
  bool ok = true;
  const int V = 50;
  for (int trial = 0; trial < 100 && ok; ++trial) {
    VecX scores(V + 1);
    std::uniform_int_distribution<int> q(-4, 4);
    for (int i = 0; i <= V; ++i) scores[i] = q(rng) * 0.25;
    std::uniform_int_distribution<int> pick(1, V);
    const ItemId target = pick(rng);

    std::vector<int> order(V);
    for (int i = 0; i < V; ++i) order[i] = i + 1;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return a < b;
    });
    const int oracle =
        static_cast<int>(std::find(order.begin(), order.end(), target) - order.begin()) + 1;
    ok = ok && eval::rank_of_target(scores, target) == oracle;
  }

  ok = ok && eval::metrics_from_rank(3, 10).second == 0.5;  // 1/log2(4)

  const auto split = synth_split(200, 60, 8);
  for (uint64_t seed = 1; seed <= 5 && ok; ++seed) {
    RandomScorer scorer(split.num_items, seed);
    for (auto phase : {eval::Phase::Valid, eval::Phase::Test}) {
      const auto m = eval::evaluate(scorer, split, phase, {});
      ok = ok && m.h10 >= 0 && m.h20 <= 1 && m.h10 <= m.h20 && m.n10 <= m.n20 &&
           m.n10 <= m.h10 && m.n20 <= m.h20 && m.n10 >= 0;
    }
  }
  verdict(7, ok, "rank oracle, exact NDCG at rank 3, and report monotonicity hold");
}

void criterion_8() {
  const auto split = synth_split(10500, 200, 88);
  RandomScorer scorer(split.num_items, 4242);
  const auto m = eval::evaluate(scorer, split, eval::Phase::Test, {});
  const double p = 10.0 / split.num_items;
  const double sigma = std::sqrt(p * (1 - p) / m.num_users);
  const double dev = std::abs(m.h10 - p);
  verdict(8, m.num_users >= 10000 && dev <= 3 * sigma,
          "H@10 " + fmt("%.5f", m.h10) + " vs expected " + fmt("%.5f", p) + ", |dev| " +
              fmt("%.2f", dev / sigma) + " sigma over " + std::to_string(m.num_users) +
              " draws");
}

void criterion_9() {
  bool ok = true;
  std::vector<corpus::DatasetSplit> splits;
  splits.push_back(load_bundled());
  for (uint64_t seed = 100; seed < 150; ++seed) splits.push_back(synth_split(60, 40, seed));
  for (const auto& split : splits) {
    std::set<ItemId> prefix_targets, original_targets;
    const auto pre = augment::build_training_set(split, augment::SplitMethod::prefix(),
                                                 augment::TargetStrategy::Single, 50);
    const auto org = augment::build_training_set(split, augment::SplitMethod::original(),
                                                 augment::TargetStrategy::Single, 50);
    for (const auto& ex : pre.examples) prefix_targets.insert(ex.target);
    for (const auto& ex : org.examples) original_targets.insert(ex.target);
    ok = ok && std::includes(prefix_targets.begin(), prefix_targets.end(),
                             original_targets.begin(), original_targets.end());
  }
  verdict(9, ok, "prefix+single target coverage includes original+single on 51 datasets");
}

void criterion_10() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto split = load_bundled();
  trainer::TrainConfig tc;
  tc.d = 32;
  tc.max_len = 20;
  tc.patience = 10;
  tc.max_epochs = 200;

  std::string detail;
  bool ok = true;
  for (uint64_t seed : {1, 2, 3}) {
    tc.seed = seed;
    Real n10[2] = {0, 0};
    int which = 0;
    for (auto method : {augment::SplitMethod::prefix(), augment::SplitMethod::original()}) {
      const auto trained = trainer::train_model(models::ModelKind::AttnRec, split, method,
                                                augment::TargetStrategy::Single, tc);
      const auto scorer = models::scorer_from_checkpoint(trained.checkpoint);
      eval::EvalConfig ec;
      ec.max_len = tc.max_len;
      n10[which++] = eval::evaluate(*scorer, split, eval::Phase::Test, ec).n10;
    }
    ok = ok && n10[0] > n10[1];
    detail += "seed " + std::to_string(seed) + ": " + fmt("%.4f", n10[0]) + ">" +
              fmt("%.4f", n10[1]) + " ";
  }
  const double secs = seconds_since(t0);
  verdict(10, ok && secs <= 1800.0,
          "prefix beats original on test N@10 for 3/3 seeds, " + detail + fmt("%.0f", secs) + "s");
}

void criterion_11() {
  const char* path = std::getenv("SSS_DATA_BEAUTY");
  if (path == nullptr || std::string(path).empty()) {
    skipped(11, "set SSS_DATA_BEAUTY to a user<TAB>item<TAB>timestamp log to run");
    return;
  }
  auto inter = corpus::parse_interactions_file(path, corpus::InputFormat::Triplet);
  inter = corpus::k_core_filter(inter, 5);
  auto [catalog, seqs] = corpus::build_sequences(inter);
  const auto split = corpus::leave_one_out(seqs);

  trainer::TrainConfig tc;
  tc.d = 64;
  tc.max_len = 50;
  tc.blocks = 2;
  tc.patience = 10;
  tc.max_epochs = 200;
  tc.seed = 1;
  const auto trained = trainer::train_model(models::ModelKind::AttnRec, split,
                                            augment::SplitMethod::prefix(),
                                            augment::TargetStrategy::Single, tc);
  const auto scorer = models::scorer_from_checkpoint(trained.checkpoint);
  eval::EvalConfig ec;
  ec.max_len = tc.max_len;
  const auto m = eval::evaluate(*scorer, split, eval::Phase::Test, ec);
  const double reference = 0.0944;
  const bool in_band = m.h10 >= 0.7 * reference && m.h10 <= 1.3 * reference;
  verdict(11, in_band,
          "H@10 " + fmt("%.4f", m.h10) + " vs reference " + fmt("%.4f", reference) +
              " +-30%; architecture deltas: single-head blocks, no dropout, full softmax");
}

void criterion_12() {
  const auto dir = std::filesystem::temp_directory_path() / "sss_acceptance";
  std::filesystem::create_directories(dir);
  const auto data = dir / "determinism.tsv";
  synth::SynthConfig sc;
  sc.users = 60;
  sc.items = 40;
  sc.seed = 21;
  synth::write_triplets(data.string(), synth::generate(sc));

  runner::GridConfig cfg = runner::parse_grid_config_text(
      "dataset = " + data.string() +
      "\nname = determinism\nmodels = attn, gru\nsplits = original, prefix\n"
      "targets = single\nlosses = ce, bce\nseeds = 9\nd = 8\nmax_len = 12\nmax_epochs = 2\n");
  const std::string a = runner::results_csv(runner::run_grid(cfg));
  const std::string b = runner::results_csv(runner::run_grid(cfg));
  verdict(12, !a.empty() && a == b,
          "rerunning an 8 cell neural grid reproduces results.csv byte for byte");
}

void criterion_13() {
  bool ok = true;
  for (int n : {2, 7, 64, 1000}) {
    const auto stats =
        diagnostics::distribution_stats(diagnostics::target_distribution(uniform_targets(n), n), n);
    ok = ok && std::abs(stats.gini) <= 1e-12 &&
         std::abs(stats.entropy - std::log2(static_cast<double>(n))) <= 1e-12;
  }

  std::vector<corpus::DatasetSplit> splits;
  splits.push_back(load_bundled());
  for (uint64_t seed = 200; seed < 225; ++seed) splits.push_back(synth_split(50, 30, seed));
  for (const auto& split : splits) {
    const auto a = diagnostics::target_distribution(
        augment::build_training_set(split, augment::SplitMethod::prefix(),
                                    augment::TargetStrategy::Single, 50),
        split.num_items);
    const auto b = diagnostics::target_distribution(
        augment::build_training_set(split, augment::SplitMethod::original(),
                                    augment::TargetStrategy::Multi, 50),
        split.num_items);
    ok = ok && a.counts == b.counts && a.total == b.total && a.rank_order == b.rank_order;
  }
  verdict(13, ok,
          "uniform Gini and entropy exact to 1e-12; prefix+single distribution equals "
          "original+multi on 26 datasets");
}

}  // namespace

int main() {
  try {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    criterion_13();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
