#include "sss/augment.hpp"

#include <algorithm>

namespace sss::augment {

std::vector<std::vector<ItemId>> split_sequence(const std::vector<ItemId>& s,
                                                const SplitMethod& method) {
  const int n = static_cast<int>(s.size());
  std::vector<std::vector<ItemId>> subs;
  switch (method.kind) {
    case SplitMethod::Kind::Original:
      subs.push_back(s);
      break;
    case SplitMethod::Kind::Prefix:
      if (n < 2) throw std::runtime_error("sequence too short to split");
      for (int len = 2; len <= n; ++len) subs.emplace_back(s.begin(), s.begin() + len);
      break;
    case SplitMethod::Kind::Suffix:
      if (n < 2) throw std::runtime_error("sequence too short to split");
      for (int len = 2; len <= n; ++len) subs.emplace_back(s.end() - len, s.end());
      break;
    case SplitMethod::Kind::Sliding: {
      const int T = method.window;
      if (T < 2) throw std::invalid_argument("sliding window must be >= 2");
      if (T >= n) {
        subs.push_back(s);
      } else {
        for (int start = 0; start + T <= n; ++start)
          subs.emplace_back(s.begin() + start, s.begin() + start + T);
      }
      break;
    }
  }
  return subs;
}

std::vector<std::pair<std::vector<ItemId>, ItemId>> expand_targets(
    const std::vector<ItemId>& sub, TargetStrategy strategy) {
  const int n = static_cast<int>(sub.size());
  if (n < 2) throw std::runtime_error("sub-sequence too short for an input-target pair");
  std::vector<std::pair<std::vector<ItemId>, ItemId>> pairs;
  if (strategy == TargetStrategy::Single) {
    pairs.emplace_back(std::vector<ItemId>(sub.begin(), sub.end() - 1), sub.back());
  } else {
    for (int k = 1; k < n; ++k)
      pairs.emplace_back(std::vector<ItemId>(sub.begin(), sub.begin() + k), sub[k]);
  }
  return pairs;
}

TrainingSet build_training_set(const corpus::DatasetSplit& split, const SplitMethod& method,
                               TargetStrategy strategy, int max_len) {
  if (max_len < 2) throw std::invalid_argument("build_training_set: max_len must be >= 2");
  TrainingSet out;
  out.method = method;
  out.strategy = strategy;
  for (const auto& seq : split.train) {
    std::vector<ItemId> s = seq.items;
    if (static_cast<int>(s.size()) > max_len)
      s.assign(s.end() - max_len, s.end());
    int64_t count = 0;
    try {
      for (const auto& sub : split_sequence(s, method)) {
        if (sub.size() < 2) continue;
        for (auto& [input, target] : expand_targets(sub, strategy)) {
          out.examples.push_back({seq.user, std::move(input), target});
          ++count;
        }
      }
    } catch (const std::runtime_error&) {
      count = 0;
    }
    if (count == 0) {
      ++out.skipped_sequences;
    } else {
      out.per_user_counts.emplace_back(seq.user, count);
    }
  }
  return out;
}

TrainingSet legacy_pipeline_split(const std::vector<corpus::UserSequence>& original_sequences,
                                  int max_len) {
  if (max_len < 1) throw std::invalid_argument("legacy_pipeline_split: max_len must be >= 1");
  TrainingSet out;
  out.method = SplitMethod::prefix();
  out.strategy = TargetStrategy::Single;
  for (const auto& seq : original_sequences) {
    const auto& s = seq.items;
    const int n = static_cast<int>(s.size());
    // Python seq[-(max_len+2):-2]: drop the last two, keep at most max_len
    // items before them.
    const int hi = n - 2;
    if (hi <= 0) {
      ++out.skipped_sequences;
      continue;
    }
    const int lo = std::max(0, n - (max_len + 2));
    std::vector<ItemId> slice(s.begin() + lo, s.begin() + hi);
    int64_t count = 0;
    for (int len = 1; len <= static_cast<int>(slice.size()); ++len) {
      if (len == 1) {
        ++out.discarded_prefixes;
        continue;
      }
      std::vector<ItemId> prefix(slice.begin(), slice.begin() + len);
      ItemId target = prefix.back();
      prefix.pop_back();
      out.examples.push_back({seq.user, std::move(prefix), target});
      ++count;
    }
    if (count == 0) {
      ++out.skipped_sequences;
    } else {
      out.per_user_counts.emplace_back(seq.user, count);
    }
  }
  return out;
}

std::string to_string(const SplitMethod& m) {
  switch (m.kind) {
    case SplitMethod::Kind::Original: return "original";
    case SplitMethod::Kind::Prefix: return "prefix";
    case SplitMethod::Kind::Suffix: return "suffix";
    case SplitMethod::Kind::Sliding: return "sliding:" + std::to_string(m.window);
  }
  return "?";
}

std::string to_string(TargetStrategy t) {
  return t == TargetStrategy::Single ? "single" : "multi";
}

SplitMethod parse_split_method(const std::string& text) {
  if (text == "original") return SplitMethod::original();
  if (text == "prefix") return SplitMethod::prefix();
  if (text == "suffix") return SplitMethod::suffix();
  if (text.rfind("sliding:", 0) == 0) {
    int window = 0;
    try {
      size_t used = 0;
      window = std::stoi(text.substr(8), &used);
      if (used != text.size() - 8) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument("bad sliding window in '" + text + "'");
    }
    return SplitMethod::sliding(window);
  }
  throw std::invalid_argument("unknown splitting method '" + text + "'");
}

TargetStrategy parse_target_strategy(const std::string& text) {
  if (text == "single") return TargetStrategy::Single;
  if (text == "multi") return TargetStrategy::Multi;
  throw std::invalid_argument("unknown target strategy '" + text + "'");
}

}  // namespace sss::augment
