#include "sss/models.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>

#include "sss/checkpoint.hpp"

namespace sss::models {

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Popularity: return "pop";
    case ModelKind::Markov: return "markov";
    case ModelKind::AttnRec: return "attn";
    case ModelKind::GruRec: return "gru";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "pop" || s == "popularity") return ModelKind::Popularity;
  if (s == "markov") return ModelKind::Markov;
  if (s == "attn" || s == "attnrec") return ModelKind::AttnRec;
  if (s == "gru" || s == "grurec") return ModelKind::GruRec;
  throw std::invalid_argument("unknown model kind: " + s);
}

PopularityModel fit_popularity(const augment::TrainingSet& train, int num_items) {
  if (train.examples.empty()) throw std::runtime_error("empty training set");
  PopularityModel m;
  m.num_items = num_items;
  m.target_counts.assign(num_items + 1, 0);
  for (const auto& ex : train.examples) m.target_counts.at(ex.target)++;
  return m;
}

MarkovModel fit_markov(const augment::TrainingSet& train, int num_items) {
  if (train.examples.empty()) throw std::runtime_error("empty training set");
  MarkovModel m;
  m.num_items = num_items;
  m.target_counts.assign(num_items + 1, 0);
  for (const auto& ex : train.examples) {
    m.target_counts.at(ex.target)++;
    m.transitions[ex.input.back()][ex.target]++;
  }
  return m;
}

namespace {

constexpr Real kNegInf = -std::numeric_limits<Real>::infinity();

struct PopularityScorer final : Scorer {
  PopularityModel m;
  explicit PopularityScorer(PopularityModel mm) : m(std::move(mm)) {}
  VecX score_context(const std::vector<ItemId>&) const override {
    VecX s(m.num_items + 1);
    for (int v = 0; v <= m.num_items; ++v) s(v) = static_cast<Real>(m.target_counts[v]);
    s(0) = kNegInf;
    return s;
  }
  int num_items() const override { return m.num_items; }
};

struct MarkovScorer final : Scorer {
  MarkovModel m;
  explicit MarkovScorer(MarkovModel mm) : m(std::move(mm)) {}
  VecX score_context(const std::vector<ItemId>& ctx) const override {
    VecX s = VecX::Zero(m.num_items + 1);
    auto it = ctx.empty() ? m.transitions.end() : m.transitions.find(ctx.back());
    if (it != m.transitions.end()) {
      for (const auto& [v, cnt] : it->second) s(v) = static_cast<Real>(cnt);
    } else {
      for (int v = 0; v <= m.num_items; ++v) s(v) = static_cast<Real>(m.target_counts[v]);
    }
    s(0) = kNegInf;
    return s;
  }
  int num_items() const override { return m.num_items; }
};

struct AttnScorer final : Scorer {
  AttnParams<Real> p;
  explicit AttnScorer(AttnParams<Real> pp) : p(std::move(pp)) {}
  VecX score_context(const std::vector<ItemId>& ctx) const override {
    auto cache = attn_forward(p, left_pad(ctx, p.cfg.max_len), Positions::Last);
    VecX h = cache.hidden().row(p.cfg.max_len - 1).transpose();
    return tied_scores(p.item_embed, h);
  }
  int num_items() const override { return p.cfg.num_items; }
};

struct GruScorer final : Scorer {
  GruParams<Real> p;
  explicit GruScorer(GruParams<Real> pp) : p(std::move(pp)) {}
  VecX score_context(const std::vector<ItemId>& ctx) const override {
    auto cache = gru_forward(p, left_pad(ctx, p.max_len), Positions::Last);
    VecX h = cache.hidden().row(p.max_len - 1).transpose();
    return tied_scores(p.item_embed, h);
  }
  int num_items() const override { return p.num_items; }
};

void write_u64(std::ostream& out, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("checkpoint truncated");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

void write_tensor(std::ostream& out, const std::string& name, const MatX& m) {
  out.write(name.c_str(), static_cast<std::streamsize>(name.size() + 1));
  write_u64(out, static_cast<uint64_t>(m.rows()));
  write_u64(out, static_cast<uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
}

std::pair<std::string, MatX> read_tensor(std::istream& in) {
  std::string name;
  std::getline(in, name, '\0');
  if (!in) throw std::runtime_error("checkpoint truncated");
  uint64_t rows = read_u64(in), cols = read_u64(in);
  MatX m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (uint64_t i = 0; i < rows; ++i)
    for (uint64_t j = 0; j < cols; ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(double));
      if (!in) throw std::runtime_error("checkpoint truncated");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  return {std::move(name), std::move(m)};
}

}  // namespace

std::unique_ptr<Scorer> make_popularity_scorer(PopularityModel model) {
  return std::make_unique<PopularityScorer>(std::move(model));
}
std::unique_ptr<Scorer> make_markov_scorer(MarkovModel model) {
  return std::make_unique<MarkovScorer>(std::move(model));
}
std::unique_ptr<Scorer> make_attn_scorer(AttnParams<Real> params) {
  return std::make_unique<AttnScorer>(std::move(params));
}
std::unique_ptr<Scorer> make_gru_scorer(GruParams<Real> params) {
  return std::make_unique<GruScorer>(std::move(params));
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);

  nlohmann::json header;
  header["version"] = 1;
  header["kind"] = to_string(ckpt.kind);
  header["meta"] = ckpt.meta;
  std::vector<std::pair<std::string, MatX>> tensors;

  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PopularityModel>) {
          header["num_items"] = m.num_items;
          MatX counts(m.num_items + 1, 1);
          for (int v = 0; v <= m.num_items; ++v) counts(v, 0) = static_cast<Real>(m.target_counts[v]);
          tensors.emplace_back("target_counts", std::move(counts));
        } else if constexpr (std::is_same_v<T, MarkovModel>) {
          header["num_items"] = m.num_items;
          MatX counts(m.num_items + 1, 1);
          for (int v = 0; v <= m.num_items; ++v) counts(v, 0) = static_cast<Real>(m.target_counts[v]);
          tensors.emplace_back("target_counts", std::move(counts));
          std::vector<std::array<int64_t, 3>> trips;
          for (const auto& [u, row] : m.transitions)
            for (const auto& [v, cnt] : row) trips.push_back({u, v, cnt});
          std::sort(trips.begin(), trips.end());
          MatX tm(static_cast<Eigen::Index>(trips.size()), 3);
          for (size_t i = 0; i < trips.size(); ++i)
            for (int j = 0; j < 3; ++j)
              tm(static_cast<Eigen::Index>(i), j) = static_cast<Real>(trips[i][j]);
          tensors.emplace_back("transitions", std::move(tm));
        } else if constexpr (std::is_same_v<T, AttnParams<Real>>) {
          header["config"] = {{"num_items", m.cfg.num_items}, {"d", m.cfg.d},
                              {"max_len", m.cfg.max_len},     {"blocks", m.cfg.blocks},
                              {"heads", m.cfg.heads},         {"d_ff", m.cfg.d_ff}};
          m.visit([&](const std::string& n, const MatX& t) { tensors.emplace_back(n, t); });
        } else {
          header["config"] = {{"num_items", m.num_items}, {"d", m.d}, {"max_len", m.max_len}};
          m.visit([&](const std::string& n, const MatX& t) { tensors.emplace_back(n, t); });
        }
      },
      ckpt.model);

  std::vector<std::string> names;
  for (const auto& [n, t] : tensors) names.push_back(n);
  header["tensors"] = names;

  const std::string hs = header.dump();
  out.write(kCheckpointMagic, static_cast<std::streamsize>(std::strlen(kCheckpointMagic)));
  write_u64(out, hs.size());
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& [n, t] : tensors) write_tensor(out, n, t);
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string magic(std::strlen(kCheckpointMagic), '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!in || magic != kCheckpointMagic) throw std::runtime_error("bad checkpoint magic");
  uint64_t hlen = read_u64(in);
  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw std::runtime_error("checkpoint truncated");
  nlohmann::json header = nlohmann::json::parse(hs);

  std::unordered_map<std::string, MatX> tensors;
  for (const auto& name : header.at("tensors")) {
    auto [n, t] = read_tensor(in);
    if (n != name.get<std::string>()) throw std::runtime_error("checkpoint tensor order mismatch");
    tensors.emplace(std::move(n), std::move(t));
  }

  Checkpoint ckpt;
  ckpt.kind = parse_model_kind(header.at("kind").get<std::string>());
  ckpt.meta = header.value("meta", nlohmann::json::object());

  auto take = [&](const std::string& n) -> MatX {
    auto it = tensors.find(n);
    if (it == tensors.end()) throw std::runtime_error("checkpoint missing tensor: " + n);
    return std::move(it->second);
  };

  switch (ckpt.kind) {
    case ModelKind::Popularity: {
      PopularityModel m;
      m.num_items = header.at("num_items").get<int>();
      MatX counts = take("target_counts");
      m.target_counts.resize(counts.rows());
      for (Eigen::Index v = 0; v < counts.rows(); ++v)
        m.target_counts[v] = static_cast<int64_t>(counts(v, 0));
      ckpt.model = std::move(m);
      break;
    }
    case ModelKind::Markov: {
      MarkovModel m;
      m.num_items = header.at("num_items").get<int>();
      MatX counts = take("target_counts");
      m.target_counts.resize(counts.rows());
      for (Eigen::Index v = 0; v < counts.rows(); ++v)
        m.target_counts[v] = static_cast<int64_t>(counts(v, 0));
      MatX trips = take("transitions");
      for (Eigen::Index i = 0; i < trips.rows(); ++i)
        m.transitions[static_cast<ItemId>(trips(i, 0))][static_cast<ItemId>(trips(i, 1))] =
            static_cast<int64_t>(trips(i, 2));
      ckpt.model = std::move(m);
      break;
    }
    case ModelKind::AttnRec: {
      AttnConfig cfg;
      const auto& jc = header.at("config");
      cfg.num_items = jc.at("num_items").get<int>();
      cfg.d = jc.at("d").get<int>();
      cfg.max_len = jc.at("max_len").get<int>();
      cfg.blocks = jc.at("blocks").get<int>();
      cfg.heads = jc.at("heads").get<int>();
      cfg.d_ff = jc.at("d_ff").get<int>();
      AttnParams<Real> p = init_attn<Real>(cfg, 0);
      p.visit([&](const std::string& n, MatX& t) { t = take(n); });
      ckpt.model = std::move(p);
      break;
    }
    case ModelKind::GruRec: {
      const auto& jc = header.at("config");
      GruParams<Real> p = init_gru<Real>(jc.at("num_items").get<int>(), jc.at("d").get<int>(),
                                         jc.at("max_len").get<int>(), 0);
      p.visit([&](const std::string& n, MatX& t) { t = take(n); });
      ckpt.model = std::move(p);
      break;
    }
  }
  return ckpt;
}

std::unique_ptr<Scorer> scorer_from_checkpoint(const Checkpoint& ckpt) {
  return std::visit(
      [&](const auto& m) -> std::unique_ptr<Scorer> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PopularityModel>) return make_popularity_scorer(m);
        else if constexpr (std::is_same_v<T, MarkovModel>) return make_markov_scorer(m);
        else if constexpr (std::is_same_v<T, AttnParams<Real>>) return make_attn_scorer(m);
        else return make_gru_scorer(m);
      },
      ckpt.model);
}

}  // namespace sss::models
