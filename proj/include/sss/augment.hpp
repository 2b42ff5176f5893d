#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sss/corpus.hpp"
#include "sss/types.hpp"

namespace sss::augment {

struct SplitMethod {
  enum class Kind { Original, Prefix, Suffix, Sliding };
  Kind kind = Kind::Original;
  int window = 8;  // Sliding only, must be >= 2

  static SplitMethod original() { return {Kind::Original, 0}; }
  static SplitMethod prefix() { return {Kind::Prefix, 0}; }
  static SplitMethod suffix() { return {Kind::Suffix, 0}; }
  static SplitMethod sliding(int T) {
    if (T < 2) throw std::invalid_argument("sliding window must be >= 2");
    return {Kind::Sliding, T};
  }
};

enum class TargetStrategy { Single, Multi };

struct TrainingExample {
  UserId user = 0;
  std::vector<ItemId> input;  // non-empty
  ItemId target = kPaddingItem;

  bool operator==(const TrainingExample& o) const {
    return user == o.user && input == o.input && target == o.target;
  }
};

struct TrainingSet {
  std::vector<TrainingExample> examples;
  SplitMethod method;
  TargetStrategy strategy = TargetStrategy::Single;
  std::vector<std::pair<UserId, int64_t>> per_user_counts;  // user order
  int skipped_sequences = 0;   // sequences that could yield no example
  int discarded_prefixes = 0;  // legacy pipeline only: length-1 prefixes
};

// Sub-sequences of s under the chosen method, shortest first for
// Prefix/Suffix; Sliding(T) clamps to [s] when T >= |s|.
std::vector<std::vector<ItemId>> split_sequence(const std::vector<ItemId>& s,
                                                const SplitMethod& method);

// Single: one (all-but-last, last) pair. Multi: every (proper prefix, next
// item) pair, |sub|-1 of them.
std::vector<std::pair<std::vector<ItemId>, ItemId>> expand_targets(
    const std::vector<ItemId>& sub, TargetStrategy strategy);

// Per train sequence: truncate to the last max_len items, split, expand.
// Duplicates kept; order is (user, sub-sequence, position). Sequences that
// cannot yield an example are skipped and counted.
TrainingSet build_training_set(const corpus::DatasetSplit& split, const SplitMethod& method,
                               TargetStrategy strategy, int max_len);

// Replica of the common data-reading shortcut: slice each ORIGINAL sequence
// to seq[-(max_len+2):-2] (Python semantics), emit every prefix of the
// slice, discard the length-1 ones (counted), keep the rest as
// single-target examples.
TrainingSet legacy_pipeline_split(const std::vector<corpus::UserSequence>& original_sequences,
                                  int max_len);

std::string to_string(const SplitMethod& m);
std::string to_string(TargetStrategy t);

// Inverse of to_string: "original", "prefix", "suffix", "sliding:T".
SplitMethod parse_split_method(const std::string& text);
TargetStrategy parse_target_strategy(const std::string& text);

}  // namespace sss::augment
