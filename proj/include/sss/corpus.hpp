#pragma once

#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "sss/types.hpp"

namespace sss::corpus {

enum class InputFormat { Triplet, Grouped };

// Maps external ids to dense indices 1..N (0 reserved for padding), in
// first-seen order.
struct Catalog {
  int num_users = 0;
  int num_items = 0;
  std::unordered_map<int64_t, UserId> user_index;
  std::unordered_map<int64_t, ItemId> item_index;
};

// One user's chronological item sequence under dense indices.
struct UserSequence {
  UserId user = 0;
  std::vector<ItemId> items;
};

// Leave-one-out partition: per retained user, train = all but the last two
// items, valid = second-to-last, test = last.
struct DatasetSplit {
  std::vector<UserSequence> train;
  std::vector<ItemId> valid_target;  // indexed by dense user id, 0 = absent
  std::vector<ItemId> test_target;
  int num_items = 0;
  int dropped_users = 0;  // users with original length < 3
};

struct CorpusStats {
  int users = 0;
  int items = 0;
  int64_t interactions = 0;
  double avg_length = 0.0;
  double sparsity = 0.0;  // 1 - interactions / (users * items)
};

// Parses a line-oriented interaction log.
//   Triplet: "user<TAB>item<TAB>timestamp"
//   Grouped: "user<TAB>item1,item2,..." (timestamps synthesized 0,1,2,...)
// Malformed lines raise std::runtime_error with the 1-based line number.
std::vector<Interaction> parse_interactions(std::istream& in, InputFormat format);
std::vector<Interaction> parse_interactions_file(const std::string& path, InputFormat format);

// Iteratively removes users and items with fewer than k interactions until a
// fixed point. Order-preserving; may return an empty list.
std::vector<Interaction> k_core_filter(const std::vector<Interaction>& interactions, int k);

// Dense re-indexing in first-seen order; per-user items sorted by
// (timestamp, input order). Duplicates are kept.
std::pair<Catalog, std::vector<UserSequence>> build_sequences(
    const std::vector<Interaction>& interactions);

// Users shorter than 3 are dropped (counted); throws if no user survives.
DatasetSplit leave_one_out(const std::vector<UserSequence>& sequences);

CorpusStats compute_stats(const Catalog& catalog, const std::vector<UserSequence>& sequences);

}  // namespace sss::corpus
