#include "sss/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <string_view>
#include <unordered_set>

namespace sss::corpus {

namespace {

int64_t parse_int(std::string_view field, int line_no) {
  int64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                             ": not an integer: '" + std::string(field) + "'");
  return value;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::vector<Interaction> parse_interactions(std::istream& in, InputFormat format) {
  std::vector<Interaction> out;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = strip_cr(raw);
    if (line.empty()) continue;
    auto tab1 = line.find('\t');
    if (tab1 == std::string_view::npos)
      throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                               ": expected tab-separated fields");
    int64_t user = parse_int(line.substr(0, tab1), line_no);
    std::string_view rest = line.substr(tab1 + 1);
    if (format == InputFormat::Triplet) {
      auto tab2 = rest.find('\t');
      if (tab2 == std::string_view::npos)
        throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                 ": expected user<TAB>item<TAB>timestamp");
      int64_t item = parse_int(rest.substr(0, tab2), line_no);
      int64_t ts = parse_int(rest.substr(tab2 + 1), line_no);
      out.push_back({user, item, ts});
    } else {
      int64_t ts = 0;
      while (!rest.empty()) {
        auto comma = rest.find(',');
        std::string_view field =
            comma == std::string_view::npos ? rest : rest.substr(0, comma);
        out.push_back({user, parse_int(field, line_no), ts++});
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
    }
  }
  return out;
}

std::vector<Interaction> parse_interactions_file(const std::string& path, InputFormat format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return parse_interactions(in, format);
}

std::vector<Interaction> k_core_filter(const std::vector<Interaction>& interactions, int k) {
  if (k < 1) throw std::invalid_argument("k_core_filter: k must be >= 1");
  std::vector<Interaction> current = interactions;
  for (;;) {
    std::unordered_map<int64_t, int> user_count, item_count;
    for (const auto& x : current) {
      ++user_count[x.user];
      ++item_count[x.item];
    }
    std::vector<Interaction> next;
    next.reserve(current.size());
    for (const auto& x : current)
      if (user_count[x.user] >= k && item_count[x.item] >= k) next.push_back(x);
    if (next.size() == current.size()) return current;
    current = std::move(next);
  }
}

std::pair<Catalog, std::vector<UserSequence>> build_sequences(
    const std::vector<Interaction>& interactions) {
  Catalog catalog;
  std::vector<std::vector<std::pair<int64_t, size_t>>> per_user;  // (timestamp, input index)
  std::vector<ItemId> item_of;  // parallel to interactions
  item_of.reserve(interactions.size());
  std::vector<UserId> user_of;
  user_of.reserve(interactions.size());

  for (size_t i = 0; i < interactions.size(); ++i) {
    const auto& x = interactions[i];
    auto [uit, unew] = catalog.user_index.try_emplace(x.user, catalog.num_users + 1);
    if (unew) {
      ++catalog.num_users;
      per_user.emplace_back();
    }
    auto [iit, inew] = catalog.item_index.try_emplace(x.item, catalog.num_items + 1);
    if (inew) ++catalog.num_items;
    user_of.push_back(uit->second);
    item_of.push_back(iit->second);
    per_user[uit->second - 1].emplace_back(x.timestamp, i);
  }

  std::vector<UserSequence> sequences;
  sequences.reserve(per_user.size());
  for (int u = 0; u < catalog.num_users; ++u) {
    auto& entries = per_user[u];
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    UserSequence seq;
    seq.user = u + 1;
    seq.items.reserve(entries.size());
    for (const auto& [ts, idx] : entries) seq.items.push_back(item_of[idx]);
    sequences.push_back(std::move(seq));
  }
  return {std::move(catalog), std::move(sequences)};
}

DatasetSplit leave_one_out(const std::vector<UserSequence>& sequences) {
  DatasetSplit split;
  UserId max_user = 0;
  for (const auto& s : sequences) max_user = std::max(max_user, s.user);
  split.valid_target.assign(max_user + 1, kPaddingItem);
  split.test_target.assign(max_user + 1, kPaddingItem);
  ItemId max_item = 0;
  for (const auto& s : sequences) {
    for (ItemId v : s.items) max_item = std::max(max_item, v);
    if (s.items.size() < 3) {
      ++split.dropped_users;
      continue;
    }
    UserSequence train;
    train.user = s.user;
    train.items.assign(s.items.begin(), s.items.end() - 2);
    split.valid_target[s.user] = s.items[s.items.size() - 2];
    split.test_target[s.user] = s.items.back();
    split.train.push_back(std::move(train));
  }
  split.num_items = max_item;
  if (split.train.empty()) throw std::runtime_error("no trainable users");
  return split;
}

CorpusStats compute_stats(const Catalog& catalog, const std::vector<UserSequence>& sequences) {
  CorpusStats st;
  st.users = catalog.num_users;
  st.items = catalog.num_items;
  for (const auto& s : sequences) st.interactions += static_cast<int64_t>(s.items.size());
  if (!sequences.empty())
    st.avg_length = static_cast<double>(st.interactions) / static_cast<double>(sequences.size());
  if (st.users > 0 && st.items > 0)
    st.sparsity = 1.0 - static_cast<double>(st.interactions) /
                            (static_cast<double>(st.users) * static_cast<double>(st.items));
  return st;
}

}  // namespace sss::corpus
