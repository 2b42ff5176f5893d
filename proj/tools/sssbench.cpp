#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "sss/checkpoint.hpp"
#include "sss/diagnostics.hpp"
#include "sss/runner.hpp"
#include "sss/synth.hpp"

using namespace sss;

namespace {

struct DataOpts {
  std::string path;
  std::string format = "triplet";
  int kcore = 0;
};

void add_data_opts(CLI::App* cmd, DataOpts& opts) {
  cmd->add_option("--data", opts.path, "interaction log")->required();
  cmd->add_option("--format", opts.format, "triplet or grouped")
      ->check(CLI::IsMember({"triplet", "grouped"}));
  cmd->add_option("--kcore", opts.kcore, "iterative k-core filter, 0 = off")
      ->check(CLI::NonNegativeNumber);
}

corpus::InputFormat format_of(const DataOpts& opts) {
  return opts.format == "grouped" ? corpus::InputFormat::Grouped : corpus::InputFormat::Triplet;
}

std::pair<corpus::Catalog, std::vector<corpus::UserSequence>> load_sequences(
    const DataOpts& opts) {
  auto interactions = corpus::parse_interactions_file(opts.path, format_of(opts));
  if (opts.kcore > 0) interactions = corpus::k_core_filter(interactions, opts.kcore);
  return corpus::build_sequences(interactions);
}

struct SplitOpts {
  std::string split = "original";
  int window = 0;
  std::string target = "single";
  int max_len = 50;
};

void add_split_opts(CLI::App* cmd, SplitOpts& opts) {
  cmd->add_option("--split", opts.split, "original, prefix, suffix, or sliding")
      ->check(CLI::IsMember({"original", "prefix", "suffix", "sliding"}));
  cmd->add_option("--window", opts.window, "sliding window length (sliding only)");
  cmd->add_option("--target", opts.target, "single or multi")
      ->check(CLI::IsMember({"single", "multi"}));
  cmd->add_option("--max-len", opts.max_len, "truncate training sequences to this length");
}

augment::SplitMethod method_of(const SplitOpts& opts) {
  if (opts.split == "sliding") {
    if (opts.window < 2) throw CLI::ValidationError("--window", "sliding needs --window >= 2");
    return augment::SplitMethod::sliding(opts.window);
  }
  return augment::parse_split_method(opts.split);
}

std::string meta_loss_token(const models::Checkpoint& ckpt) {
  const std::string loss = ckpt.meta.value("loss", "none");
  const int negatives = ckpt.meta.value("negatives", 1);
  if (loss == "bce" && negatives != 1) return loss + ":" + std::to_string(negatives);
  return loss;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sub-sequence splitting benchmark toolkit"};
  app.require_subcommand(1);

  DataOpts data;
  SplitOpts split_opts;

  auto* stats = app.add_subcommand("stats", "dataset summary");
  add_data_opts(stats, data);

  auto* build = app.add_subcommand("build", "construct a training set");
  add_data_opts(build, data);
  add_split_opts(build, split_opts);
  bool dump = false;
  build->add_flag("--dump", dump, "print one input-csv<TAB>target line per example");

  auto* train = app.add_subcommand("train", "train one model");
  add_data_opts(train, data);
  add_split_opts(train, split_opts);
  std::string model = "attn", loss = "ce", ckpt_out = "model.ckpt";
  trainer::TrainConfig tc;
  train->add_option("--model", model, "pop, markov, attn, or gru")
      ->check(CLI::IsMember({"pop", "markov", "attn", "gru"}));
  train->add_option("--loss", loss, "ce, bce, or bce:N");
  train->add_option("--seed", tc.seed, "RNG seed");
  train->add_option("--d", tc.d, "embedding width");
  train->add_option("--batch-size", tc.batch_size, "rows per step");
  train->add_option("--lr", tc.lr, "Adam learning rate");
  train->add_option("--patience", tc.patience, "early-stop patience in epochs");
  train->add_option("--max-epochs", tc.max_epochs, "epoch cap");
  train->add_option("--blocks", tc.blocks, "attention blocks");
  train->add_option("--heads", tc.heads, "attention heads");
  train->add_option("--d-ff", tc.d_ff, "feed-forward width, 0 = d");
  train->add_option("--out", ckpt_out, "checkpoint path");

  auto* eval_cmd = app.add_subcommand("eval", "rank the held-out items under a checkpoint");
  add_data_opts(eval_cmd, data);
  std::string ckpt_in, phase = "test";
  eval::EvalConfig ec;
  eval_cmd->add_option("--ckpt", ckpt_in, "checkpoint path")->required();
  eval_cmd->add_option("--phase", phase, "valid or test")
      ->check(CLI::IsMember({"valid", "test"}));
  eval_cmd->add_option("--max-len", ec.max_len, "context length");
  eval_cmd->add_flag("--filter-seen", ec.filter_seen, "drop context items from the catalog");

  auto* diagnose = app.add_subcommand("diagnose", "training-set distribution diagnostics");
  add_data_opts(diagnose, data);
  add_split_opts(diagnose, split_opts);
  std::string diag_out = ".";
  diagnose->add_option("--out", diag_out, "directory for the plot-data CSVs");

  auto* grid = app.add_subcommand("grid", "run a full experiment grid");
  std::string grid_config, grid_out;
  grid->add_option("--config", grid_config, "grid config file")->required();
  grid->add_option("--out", grid_out, "output directory")->required();

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic interaction log");
  synth::SynthConfig sc;
  std::string synth_out;
  synth_cmd->add_option("--out", synth_out, "output path")->required();
  synth_cmd->add_option("--users", sc.users, "number of users");
  synth_cmd->add_option("--items", sc.items, "catalog size");
  synth_cmd->add_option("--zipf", sc.zipf_s, "popularity exponent");
  synth_cmd->add_option("--succ-prob", sc.succ_prob, "planted successor probability");
  synth_cmd->add_option("--min-len", sc.min_len, "minimum sequence length");
  synth_cmd->add_option("--mean-len", sc.mean_len, "mean sequence length");
  synth_cmd->add_option("--max-len", sc.max_len, "maximum sequence length");
  synth_cmd->add_option("--seed", sc.seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (stats->parsed()) {
      auto [catalog, sequences] = load_sequences(data);
      const corpus::CorpusStats s = corpus::compute_stats(catalog, sequences);
      std::printf("users: %d\n", s.users);
      std::printf("items: %d\n", s.items);
      std::printf("interactions: %lld\n", static_cast<long long>(s.interactions));
      std::printf("avg_length: %.3f\n", s.avg_length);
      std::printf("sparsity: %.6f\n", s.sparsity);
    }

    if (build->parsed()) {
      auto [catalog, sequences] = load_sequences(data);
      const corpus::DatasetSplit split = corpus::leave_one_out(sequences);
      const auto ts = augment::build_training_set(
          split, method_of(split_opts), augment::parse_target_strategy(split_opts.target),
          split_opts.max_len);
      std::printf("examples: %zu\n", ts.examples.size());
      std::printf("users_with_examples: %zu\n", ts.per_user_counts.size());
      std::printf("skipped_sequences: %d\n", ts.skipped_sequences);
      if (dump)
        for (const auto& ex : ts.examples) {
          for (size_t i = 0; i < ex.input.size(); ++i)
            std::printf("%s%d", i ? "," : "", ex.input[i]);
          std::printf("\t%d\n", ex.target);
        }
    }

    if (train->parsed()) {
      auto [catalog, sequences] = load_sequences(data);
      const corpus::DatasetSplit split = corpus::leave_one_out(sequences);
      tc.loss = runner::parse_loss_token(loss);
      tc.max_len = split_opts.max_len;
      const trainer::TrainResult result = trainer::train_model(
          models::parse_model_kind(model), split, method_of(split_opts),
          augment::parse_target_strategy(split_opts.target), tc);
      models::save_checkpoint(ckpt_out, result.checkpoint);
      std::printf("epochs: %d\n", result.report.epochs);
      std::printf("best_epoch: %d\n", result.report.best_epoch);
      std::printf("best_valid_n10: %.6f\n", result.report.best_valid);
      std::printf("seconds: %.3f\n", result.report.seconds);
      std::printf("checkpoint: %s\n", ckpt_out.c_str());
    }

    if (eval_cmd->parsed()) {
      auto [catalog, sequences] = load_sequences(data);
      const corpus::DatasetSplit split = corpus::leave_one_out(sequences);
      const models::Checkpoint ckpt = models::load_checkpoint(ckpt_in);
      const auto scorer = models::scorer_from_checkpoint(ckpt);
      const eval::Phase ph = phase == "valid" ? eval::Phase::Valid : eval::Phase::Test;
      const eval::MetricReport m = eval::evaluate(*scorer, split, ph, ec);
      std::printf("%s,%s,%s,%s,%llu,%.6f,%.6f,%.6f,%.6f\n",
                  models::to_string(ckpt.kind).c_str(),
                  ckpt.meta.value("method", "?").c_str(),
                  ckpt.meta.value("strategy", "?").c_str(), meta_loss_token(ckpt).c_str(),
                  static_cast<unsigned long long>(ckpt.meta.value("seed", uint64_t{0})), m.h10,
                  m.n10, m.h20, m.n20);
    }

    if (diagnose->parsed()) {
      auto [catalog, sequences] = load_sequences(data);
      const corpus::DatasetSplit split = corpus::leave_one_out(sequences);
      const auto ts = augment::build_training_set(
          split, method_of(split_opts), augment::parse_target_strategy(split_opts.target),
          split_opts.max_len);
      const auto dist = diagnostics::target_distribution(ts, split.num_items);
      const auto ipt = diagnostics::inputs_per_target(ts, split.num_items);
      const auto stats_line = diagnostics::distribution_stats(dist, split.num_items);

      std::string ranks = "rank,probability\n";
      for (size_t i = 0; i < dist.rank_order.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%zu,%.9g\n", i + 1, dist.probs[dist.rank_order[i]]);
        ranks += buf;
      }
      std::string targets = "target_item,example_count,distinct_inputs\n";
      for (ItemId v = 1; v <= dist.num_items; ++v) {
        if (ipt.example_count[v] == 0) continue;
        targets += std::to_string(v) + "," + std::to_string(ipt.example_count[v]) + "," +
                   std::to_string(ipt.distinct_inputs[v]) + "\n";
      }
      std::filesystem::create_directories(diag_out);
      write_file(std::filesystem::path(diag_out) / "rank_probability.csv", ranks);
      write_file(std::filesystem::path(diag_out) / "target_inputs.csv", targets);
      std::printf("examples=%zu coverage=%.6f entropy_bits=%.6f gini=%.6f\n",
                  ts.examples.size(), stats_line.coverage, stats_line.entropy, stats_line.gini);
    }

    if (grid->parsed()) {
      const runner::GridConfig cfg = runner::parse_grid_config(grid_config);
      const runner::GridResult result = runner::run_grid(cfg);
      runner::write_outputs(result, grid_out);
      int ok = 0;
      for (const auto& c : result.cells) ok += c.ok ? 1 : 0;
      std::printf("cells: %zu ok: %d failed: %zu\n", result.cells.size(), ok,
                  result.cells.size() - ok);
      std::printf("outputs: %s\n", grid_out.c_str());
    }

    if (synth_cmd->parsed()) {
      const auto interactions = synth::generate(sc);
      synth::write_triplets(synth_out, interactions);
      std::printf("wrote %zu interactions for %d users to %s\n", interactions.size(), sc.users,
                  synth_out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
