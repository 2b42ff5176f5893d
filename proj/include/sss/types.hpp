#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sss {

using Real = double;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatX = Mat<Real>;
using VecX = Vec<Real>;

// Dense ids. Index 0 is the padding item/user slot and never maps to a real
// entity.
using ItemId = int32_t;
using UserId = int32_t;

constexpr ItemId kPaddingItem = 0;

struct Interaction {
  int64_t user = 0;       // external id, >= 0
  int64_t item = 0;       // external id, >= 0
  int64_t timestamp = 0;  // seconds since epoch, >= 0
};

// splitmix64: cheap, well-mixed 64-bit stream derivation. Used everywhere a
// sub-stream is derived from (seed, salt...) so that independent consumers
// never share an RNG state.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t seed, uint64_t salt) {
  return mix64(mix64(seed) ^ mix64(salt));
}

inline uint64_t derive_seed(uint64_t seed, uint64_t salt_a, uint64_t salt_b) {
  return mix64(derive_seed(seed, salt_a) ^ mix64(salt_b));
}

inline uint64_t derive_seed(uint64_t seed, uint64_t salt_a, uint64_t salt_b, uint64_t salt_c) {
  return mix64(derive_seed(seed, salt_a, salt_b) ^ mix64(salt_c));
}

// FNV-1a, used for config hashing in manifests and checkpoints.
inline uint64_t fnv1a(const std::string& s, uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace sss
