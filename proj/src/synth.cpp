#include "sss/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace sss::synth {

namespace {

double unit_draw(std::mt19937_64& rng) {
  // 53-bit mantissa draw in [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1p-53;
}

}  // namespace

std::vector<Interaction> generate(const SynthConfig& cfg) {
  if (cfg.users < 1 || cfg.items < 2) throw std::invalid_argument("need users and >= 2 items");
  if (cfg.min_len < 1 || cfg.max_len < cfg.min_len || cfg.mean_len < cfg.min_len)
    throw std::invalid_argument("invalid length bounds");
  if (cfg.succ_prob < 0 || cfg.succ_prob > 1) throw std::invalid_argument("invalid succ_prob");

  std::mt19937_64 rng(cfg.seed);

  std::vector<double> cdf(cfg.items);
  double mass = 0;
  for (int v = 1; v <= cfg.items; ++v) {
    mass += 1.0 / std::pow(static_cast<double>(v), cfg.zipf_s);
    cdf[v - 1] = mass;
  }
  for (auto& c : cdf) c /= mass;
  auto zipf = [&]() -> ItemId {
    const double u = unit_draw(rng);
    return static_cast<ItemId>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin() + 1);
  };

  std::vector<ItemId> successor(cfg.items + 1);
  for (ItemId v = 1; v <= cfg.items; ++v) {
    ItemId s = v;
    while (s == v) s = 1 + static_cast<ItemId>(rng() % cfg.items);
    successor[v] = s;
  }

  // geometric tail above min_len, mean extra = mean_len - min_len
  const double extra = cfg.mean_len - cfg.min_len;
  const double p = 1.0 / (1.0 + extra);
  auto length = [&]() {
    int len = cfg.min_len;
    if (extra > 0) {
      const double u = unit_draw(rng);
      len += static_cast<int>(std::floor(std::log1p(-u) / std::log1p(-p)));
    }
    return std::min(len, cfg.max_len);
  };

  std::vector<Interaction> out;
  for (int u = 1; u <= cfg.users; ++u) {
    const int len = length();
    ItemId prev = zipf();
    out.push_back({u, prev, 0});
    for (int t = 1; t < len; ++t) {
      const ItemId next = unit_draw(rng) < cfg.succ_prob ? successor[prev] : zipf();
      out.push_back({u, next, t});
      prev = next;
    }
  }
  return out;
}

void write_triplets(const std::string& path, const std::vector<Interaction>& interactions) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& x : interactions)
    out << x.user << '\t' << x.item << '\t' << x.timestamp << '\n';
}

}  // namespace sss::synth
