#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sss/augment.hpp"
#include "sss/corpus.hpp"
#include "sss/eval.hpp"
#include "sss/objective.hpp"
#include "sss/trainer.hpp"
#include "sss/types.hpp"

namespace sss::runner {

inline constexpr char kToolkitVersion[] = "0.1.0";

// Grid of (model x split x target x loss x seed) cells over one dataset.
// Parsed from a line-oriented "key = value" file; lists are comma-separated,
// full-line comments start with '#', unknown keys are fatal.
struct GridConfig {
  std::string dataset_path;
  corpus::InputFormat format = corpus::InputFormat::Triplet;
  std::string dataset_name;  // defaults to the path stem
  int kcore = 0;             // 0 disables the k-core filter

  std::vector<models::ModelKind> models;
  std::vector<augment::SplitMethod> splits;
  std::vector<augment::TargetStrategy> targets;
  std::vector<objective::LossKind> losses;
  std::vector<uint64_t> seeds;

  trainer::TrainConfig train;  // loss and seed are set per cell
  bool filter_seen = false;
  bool record_wall_time = false;  // off keeps the results CSV reproducible

  // "model.split.target.loss.seed" -> learning rate for that one cell.
  std::map<std::string, Real> lr_overrides;

  void validate() const;
};

GridConfig parse_grid_config_text(const std::string& text);
GridConfig parse_grid_config(const std::string& path);

// Loss axis token: "ce", "bce" (one negative) or "bce:N".
std::string loss_token(const objective::LossKind& k);
objective::LossKind parse_loss_token(const std::string& text);

// Every config field in a fixed order; the manifest hash is FNV-1a over this.
std::string canonical_config(const GridConfig& cfg);
uint64_t config_hash(const GridConfig& cfg);

struct CellResult {
  int index = 0;
  models::ModelKind model = models::ModelKind::Popularity;
  augment::SplitMethod split;
  augment::TargetStrategy target = augment::TargetStrategy::Single;
  objective::LossKind loss;
  uint64_t seed = 0;
  bool ok = false;
  std::string error;  // set when !ok
  eval::MetricReport metrics;  // test phase
  trainer::TrainReport report;

  std::string key() const;  // the lr_overrides key for this cell
};

struct GridResult {
  GridConfig config;
  corpus::CorpusStats stats;
  int dropped_users = 0;
  std::vector<CellResult> cells;  // cell-index order, one per grid point
};

// Loads the dataset once, then runs cells in model > split > target > loss >
// seed order. A cell failure is recorded with its reason; only an unreadable
// dataset or invalid config is fatal.
GridResult run_grid(const GridConfig& cfg);

// Successful cells only, cell order, fixed header
// dataset,model,split,window,target,loss,seed,H@10,N@10,H@20,N@20,epochs,seconds.
std::string results_csv(const GridResult& result);

// Config hash, dataset stats, toolkit version, per-cell status. No
// timestamps, so identical runs serialize identically.
std::string manifest_json(const GridResult& result);

struct Summary {
  std::string spread_csv;  // per-model best/worst configuration and improvement
  std::string wins_csv;    // per-configuration best / second-best tallies
};

// Pure function of the result; throws if no cell succeeded.
Summary summarize(const GridResult& result);

// results.csv, manifest.json, summary_spread.csv, summary_wins.csv.
void write_outputs(const GridResult& result, const std::string& out_dir);

}  // namespace sss::runner
