#pragma once

#include <variant>

#include "json.hpp"
#include "sss/models.hpp"

namespace sss::models {

// Versioned binary container: magic line, little-endian u64 JSON header
// length, JSON header (kind, shapes/config, user metadata), then named
// tensors as name NUL, u64 rows, u64 cols, row-major f64 payload.
inline constexpr char kCheckpointMagic[] = "SSSCKP01\n";

struct Checkpoint {
  ModelKind kind = ModelKind::Popularity;
  nlohmann::json meta;
  std::variant<PopularityModel, MarkovModel, AttnParams<Real>, GruParams<Real>> model;

  const AttnParams<Real>& attn() const { return std::get<AttnParams<Real>>(model); }
  const GruParams<Real>& gru() const { return std::get<GruParams<Real>>(model); }
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

std::unique_ptr<Scorer> scorer_from_checkpoint(const Checkpoint& ckpt);

}  // namespace sss::models
