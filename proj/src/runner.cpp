#include "sss/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "sss/checkpoint.hpp"
#include "sss/diagnostics.hpp"

namespace sss::runner {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& value, const std::string& key) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) throw std::invalid_argument("empty element in list '" + key + "'");
    out.push_back(tok);
  }
  if (out.empty()) throw std::invalid_argument("empty list '" + key + "'");
  return out;
}

int to_int(const std::string& v, const std::string& key) {
  try {
    size_t used = 0;
    int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad integer for '" + key + "': " + v);
  }
}

uint64_t to_u64(const std::string& v, const std::string& key) {
  try {
    size_t used = 0;
    uint64_t x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad integer for '" + key + "': " + v);
  }
}

Real to_real(const std::string& v, const std::string& key) {
  try {
    size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number for '" + key + "': " + v);
  }
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw std::invalid_argument("bad boolean for '" + key + "' (use true/false): " + v);
}

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, x);
  return buf;
}

std::string split_name(const augment::SplitMethod& m) {
  const std::string s = augment::to_string(m);
  return s.substr(0, s.find(':'));
}

int split_window(const augment::SplitMethod& m) {
  return m.kind == augment::SplitMethod::Kind::Sliding ? m.window : 0;
}

// Per (split, target, loss) configuration: metrics seed-averaged, then the
// four averages collapsed to one score for ordering.
struct ConfigCell {
  size_t axis_pos = 0;  // enumeration order, breaks ties
  std::string name;
  Real metric[4] = {0, 0, 0, 0};
  int cells = 0;

  Real score() const { return (metric[0] + metric[1] + metric[2] + metric[3]) / 4; }
};

std::vector<ConfigCell> config_means(const GridResult& result, models::ModelKind model) {
  std::map<size_t, ConfigCell> by_pos;
  const auto& cfg = result.config;
  for (const auto& cell : result.cells) {
    if (cell.model != model || !cell.ok) continue;
    size_t si = 0, ti = 0, li = 0;
    for (size_t i = 0; i < cfg.splits.size(); ++i)
      if (augment::to_string(cfg.splits[i]) == augment::to_string(cell.split)) si = i;
    for (size_t i = 0; i < cfg.targets.size(); ++i)
      if (cfg.targets[i] == cell.target) ti = i;
    for (size_t i = 0; i < cfg.losses.size(); ++i)
      if (loss_token(cfg.losses[i]) == loss_token(cell.loss)) li = i;
    const size_t pos = (si * cfg.targets.size() + ti) * cfg.losses.size() + li;
    auto& c = by_pos[pos];
    c.axis_pos = pos;
    c.name = augment::to_string(cell.split) + "|" + augment::to_string(cell.target) + "|" +
             loss_token(cell.loss);
    c.metric[0] += cell.metrics.h10;
    c.metric[1] += cell.metrics.n10;
    c.metric[2] += cell.metrics.h20;
    c.metric[3] += cell.metrics.n20;
    c.cells += 1;
  }
  std::vector<ConfigCell> out;
  for (auto& [pos, c] : by_pos) {
    for (Real& m : c.metric) m /= c.cells;
    out.push_back(c);
  }
  return out;  // map iteration gives axis order
}

}  // namespace

void GridConfig::validate() const {
  if (dataset_path.empty()) throw std::invalid_argument("dataset path missing");
  if (models.empty() || splits.empty() || targets.empty() || losses.empty() || seeds.empty())
    throw std::invalid_argument("every axis list must be non-empty");
  std::set<uint64_t> distinct(seeds.begin(), seeds.end());
  if (distinct.size() != seeds.size()) throw std::invalid_argument("seeds must be distinct");
  if (kcore < 0) throw std::invalid_argument("kcore must be non-negative");
  train.validate();
}

std::string loss_token(const objective::LossKind& k) {
  std::string s = objective::to_string(k);
  if (k.kind == objective::LossKind::Kind::BCE && k.num_negatives != 1)
    s += ":" + std::to_string(k.num_negatives);
  return s;
}

objective::LossKind parse_loss_token(const std::string& text) {
  const size_t colon = text.find(':');
  if (colon == std::string::npos) return objective::parse_loss_kind(text);
  const std::string name = text.substr(0, colon);
  if (name != "bce") throw std::invalid_argument("only bce takes a negative count: " + text);
  return objective::parse_loss_kind(name, to_int(text.substr(colon + 1), "losses"));
}

GridConfig parse_grid_config_text(const std::string& text) {
  GridConfig cfg;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");

    if (key == "dataset") {
      cfg.dataset_path = value;
    } else if (key == "format") {
      if (value == "triplet") cfg.format = corpus::InputFormat::Triplet;
      else if (value == "grouped") cfg.format = corpus::InputFormat::Grouped;
      else throw std::invalid_argument("unknown format: " + value);
    } else if (key == "name") {
      cfg.dataset_name = value;
    } else if (key == "kcore") {
      cfg.kcore = to_int(value, key);
    } else if (key == "models") {
      cfg.models.clear();
      for (const auto& t : split_list(value, key)) cfg.models.push_back(models::parse_model_kind(t));
    } else if (key == "splits") {
      cfg.splits.clear();
      for (const auto& t : split_list(value, key)) cfg.splits.push_back(augment::parse_split_method(t));
    } else if (key == "targets") {
      cfg.targets.clear();
      for (const auto& t : split_list(value, key))
        cfg.targets.push_back(augment::parse_target_strategy(t));
    } else if (key == "losses") {
      cfg.losses.clear();
      for (const auto& t : split_list(value, key)) cfg.losses.push_back(parse_loss_token(t));
    } else if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& t : split_list(value, key)) cfg.seeds.push_back(to_u64(t, key));
    } else if (key == "d") {
      cfg.train.d = to_int(value, key);
    } else if (key == "max_len") {
      cfg.train.max_len = to_int(value, key);
    } else if (key == "batch_size") {
      cfg.train.batch_size = to_int(value, key);
    } else if (key == "lr") {
      cfg.train.lr = to_real(value, key);
    } else if (key == "beta1") {
      cfg.train.beta1 = to_real(value, key);
    } else if (key == "beta2") {
      cfg.train.beta2 = to_real(value, key);
    } else if (key == "adam_epsilon") {
      cfg.train.adam_epsilon = to_real(value, key);
    } else if (key == "patience") {
      cfg.train.patience = to_int(value, key);
    } else if (key == "max_epochs") {
      cfg.train.max_epochs = to_int(value, key);
    } else if (key == "blocks") {
      cfg.train.blocks = to_int(value, key);
    } else if (key == "heads") {
      cfg.train.heads = to_int(value, key);
    } else if (key == "d_ff") {
      cfg.train.d_ff = to_int(value, key);
    } else if (key == "filter_seen") {
      cfg.filter_seen = to_bool(value, key);
    } else if (key == "record_wall_time") {
      cfg.record_wall_time = to_bool(value, key);
    } else if (key.rfind("override.", 0) == 0 && key.size() > 12 &&
               key.compare(key.size() - 3, 3, ".lr") == 0) {
      cfg.lr_overrides[key.substr(9, key.size() - 12)] = to_real(value, key);
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  if (cfg.dataset_name.empty() && !cfg.dataset_path.empty())
    cfg.dataset_name = std::filesystem::path(cfg.dataset_path).stem().string();
  cfg.validate();
  return cfg;
}

GridConfig parse_grid_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_grid_config_text(buf.str());
}

std::string canonical_config(const GridConfig& cfg) {
  std::ostringstream out;
  out << "dataset=" << cfg.dataset_path << '\n';
  out << "format=" << (cfg.format == corpus::InputFormat::Triplet ? "triplet" : "grouped") << '\n';
  out << "name=" << cfg.dataset_name << '\n';
  out << "kcore=" << cfg.kcore << '\n';
  out << "models=";
  for (size_t i = 0; i < cfg.models.size(); ++i)
    out << (i ? "," : "") << models::to_string(cfg.models[i]);
  out << "\nsplits=";
  for (size_t i = 0; i < cfg.splits.size(); ++i)
    out << (i ? "," : "") << augment::to_string(cfg.splits[i]);
  out << "\ntargets=";
  for (size_t i = 0; i < cfg.targets.size(); ++i)
    out << (i ? "," : "") << augment::to_string(cfg.targets[i]);
  out << "\nlosses=";
  for (size_t i = 0; i < cfg.losses.size(); ++i) out << (i ? "," : "") << loss_token(cfg.losses[i]);
  out << "\nseeds=";
  for (size_t i = 0; i < cfg.seeds.size(); ++i) out << (i ? "," : "") << cfg.seeds[i];
  const auto& t = cfg.train;
  out << "\nd=" << t.d << "\nmax_len=" << t.max_len << "\nbatch_size=" << t.batch_size
      << "\nlr=" << fmt("%.17g", t.lr) << "\nbeta1=" << fmt("%.17g", t.beta1)
      << "\nbeta2=" << fmt("%.17g", t.beta2) << "\nadam_epsilon=" << fmt("%.17g", t.adam_epsilon)
      << "\npatience=" << t.patience << "\nmax_epochs=" << t.max_epochs << "\nblocks=" << t.blocks
      << "\nheads=" << t.heads << "\nd_ff=" << t.d_ff;
  out << "\nfilter_seen=" << (cfg.filter_seen ? "true" : "false");
  out << "\nrecord_wall_time=" << (cfg.record_wall_time ? "true" : "false");
  for (const auto& [key, lr] : cfg.lr_overrides)
    out << "\noverride." << key << ".lr=" << fmt("%.17g", lr);
  out << '\n';
  return out.str();
}

uint64_t config_hash(const GridConfig& cfg) { return fnv1a(canonical_config(cfg)); }

std::string CellResult::key() const {
  return models::to_string(model) + "." + augment::to_string(split) + "." +
         augment::to_string(target) + "." + loss_token(loss) + "." + std::to_string(seed);
}

GridResult run_grid(const GridConfig& cfg) {
  cfg.validate();
  auto interactions = corpus::parse_interactions_file(cfg.dataset_path, cfg.format);
  if (cfg.kcore > 0) interactions = corpus::k_core_filter(interactions, cfg.kcore);
  auto [catalog, sequences] = corpus::build_sequences(interactions);
  const corpus::DatasetSplit split = corpus::leave_one_out(sequences);

  GridResult result;
  result.config = cfg;
  result.stats = corpus::compute_stats(catalog, sequences);
  result.dropped_users = split.dropped_users;

  int index = 0;
  for (auto model : cfg.models)
    for (const auto& method : cfg.splits)
      for (auto target : cfg.targets)
        for (const auto& loss : cfg.losses)
          for (uint64_t seed : cfg.seeds) {
            CellResult cell;
            cell.index = index++;
            cell.model = model;
            cell.split = method;
            cell.target = target;
            cell.loss = loss;
            cell.seed = seed;

            trainer::TrainConfig tc = cfg.train;
            tc.loss = loss;
            tc.seed = seed;
            if (auto it = cfg.lr_overrides.find(cell.key()); it != cfg.lr_overrides.end())
              tc.lr = it->second;

            try {
              trainer::TrainResult trained = trainer::train_model(model, split, method, target, tc);
              auto scorer = models::scorer_from_checkpoint(trained.checkpoint);
              eval::EvalConfig ec;
              ec.max_len = tc.max_len;
              ec.filter_seen = cfg.filter_seen;
              cell.metrics = eval::evaluate(*scorer, split, eval::Phase::Test, ec);
              cell.report = trained.report;
              cell.ok = true;
            } catch (const std::exception& e) {
              cell.ok = false;
              cell.error = e.what();
            }
            result.cells.push_back(std::move(cell));
          }
  return result;
}

std::string results_csv(const GridResult& result) {
  std::ostringstream out;
  out << "dataset,model,split,window,target,loss,seed,H@10,N@10,H@20,N@20,epochs,seconds\n";
  for (const auto& c : result.cells) {
    if (!c.ok) continue;
    const double secs = result.config.record_wall_time ? c.report.seconds : 0.0;
    out << result.config.dataset_name << ',' << models::to_string(c.model) << ','
        << split_name(c.split) << ',' << split_window(c.split) << ','
        << augment::to_string(c.target) << ',' << loss_token(c.loss) << ',' << c.seed << ','
        << fmt("%.6f", c.metrics.h10) << ',' << fmt("%.6f", c.metrics.n10) << ','
        << fmt("%.6f", c.metrics.h20) << ',' << fmt("%.6f", c.metrics.n20) << ','
        << c.report.epochs << ',' << fmt("%.3f", secs) << '\n';
  }
  return out.str();
}

std::string manifest_json(const GridResult& result) {
  nlohmann::ordered_json m;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(config_hash(result.config)));
  m["toolkit_version"] = kToolkitVersion;
  m["config_hash"] = hash;
  m["config"] = canonical_config(result.config);
  m["dataset"] = {{"name", result.config.dataset_name},
                  {"users", result.stats.users},
                  {"items", result.stats.items},
                  {"interactions", result.stats.interactions},
                  {"avg_length", result.stats.avg_length},
                  {"sparsity", result.stats.sparsity},
                  {"dropped_users", result.dropped_users}};
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& c : result.cells) {
    nlohmann::ordered_json jc;
    jc["index"] = c.index;
    jc["model"] = models::to_string(c.model);
    jc["split"] = augment::to_string(c.split);
    jc["target"] = augment::to_string(c.target);
    jc["loss"] = loss_token(c.loss);
    jc["seed"] = c.seed;
    jc["status"] = c.ok ? "ok" : "failed";
    if (!c.ok) jc["reason"] = c.error;
    cells.push_back(std::move(jc));
  }
  m["cells"] = std::move(cells);
  return m.dump(2) + "\n";
}

Summary summarize(const GridResult& result) {
  bool any = false;
  for (const auto& c : result.cells) any = any || c.ok;
  if (!any) throw std::runtime_error("no successful cells to summarize");

  std::ostringstream spread;
  spread << "# improvement = mean over H@10,N@10,H@20,N@20 of (best - worst) / worst on\n"
            "# seed-averaged metrics; metrics whose worst value is 0 are skipped; ties are\n"
            "# broken by configuration order (split, then target, then loss axis order).\n";
  spread << "model,best_config,worst_config,best_H@10,best_N@10,best_H@20,best_N@20,"
            "worst_H@10,worst_N@10,worst_H@20,worst_N@20,improvement\n";

  // wins: per configuration, how many models ranked it best / second best
  std::map<size_t, std::pair<int, int>> tallies;
  std::map<size_t, std::string> config_names;

  for (auto model : result.config.models) {
    std::vector<ConfigCell> configs = config_means(result, model);
    if (configs.empty()) continue;
    for (const auto& c : configs) config_names[c.axis_pos] = c.name;

    const auto better = [](const ConfigCell& a, const ConfigCell& b) {
      if (a.score() != b.score()) return a.score() > b.score();
      return a.axis_pos < b.axis_pos;
    };
    std::vector<ConfigCell> order = configs;
    std::sort(order.begin(), order.end(), better);
    const ConfigCell& best = order.front();
    const ConfigCell& worst = order.back();

    Real improvement = 0;
    int used = 0;
    for (int k = 0; k < 4; ++k) {
      if (worst.metric[k] == 0) continue;
      improvement += (best.metric[k] - worst.metric[k]) / worst.metric[k];
      ++used;
    }
    if (used > 0) improvement /= used;

    spread << models::to_string(model) << ',' << best.name << ',' << worst.name;
    for (int k = 0; k < 4; ++k) spread << ',' << fmt("%.6f", best.metric[k]);
    for (int k = 0; k < 4; ++k) spread << ',' << fmt("%.6f", worst.metric[k]);
    spread << ',' << fmt("%.6f", improvement) << '\n';

    tallies[best.axis_pos].first += 1;
    if (order.size() > 1) tallies[order[1].axis_pos].second += 1;
  }

  std::ostringstream wins;
  wins << "# per-configuration count of models for which it ranked best / second best;\n"
          "# ties broken by configuration order.\n";
  wins << "config,best,second\n";
  for (const auto& [pos, name] : config_names) {
    const auto it = tallies.find(pos);
    const auto [b, s] = it == tallies.end() ? std::pair<int, int>{0, 0} : it->second;
    wins << name << ',' << b << ',' << s << '\n';
  }
  return {spread.str(), wins.str()};
}

void write_outputs(const GridResult& result, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto put = [&](const std::string& file, const std::string& content) {
    std::ofstream out(std::filesystem::path(out_dir) / file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file + " in " + out_dir);
    out << content;
  };
  put("results.csv", results_csv(result));
  put("manifest.json", manifest_json(result));
  const Summary summary = summarize(result);
  put("summary_spread.csv", summary.spread_csv);
  put("summary_wins.csv", summary.wins_csv);
}

}  // namespace sss::runner
