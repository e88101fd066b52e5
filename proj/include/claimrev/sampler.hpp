#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "claimrev/corpus.hpp"
#include "claimrev/error.hpp"
#include "claimrev/ingest.hpp"
#include "claimrev/io.hpp"

namespace claimrev {

/// Fisher-Yates shuffle driven by raw mt19937_64 output, so the permutation
/// for a seed does not depend on the standard library's distributions.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

// ---------------------------------------------------------------------------
// Revision-distance datasets
// ---------------------------------------------------------------------------

/// Balanced dataset pairing each eligible history's final version with its
/// version at a fixed revision distance.
struct SampledDataset {
  std::uint32_t distance = 0;
  std::vector<LabeledInstance> positives;
  std::vector<LabeledInstance> negatives;
  std::vector<std::string> source_history_ids;  // sorted; positives[k], negatives[k] come from [k]
};

/// Builds D1..D{max_distance} from histories with at least `min_revisions`
/// revisions. All datasets draw from the same histories, so they are equal
/// in size and exactly balanced.
inline std::vector<SampledDataset> compile_distance_datasets(const std::vector<LabeledInstance>& instances,
                                                             std::uint32_t min_revisions = 4,
                                                             std::uint32_t max_distance = 4) {
  if (max_distance < 1) throw ValidationError("max_distance must be at least 1");
  if (min_revisions < max_distance) {
    throw ValidationError("min_revisions (" + std::to_string(min_revisions) + ") must be >= max_distance (" +
                          std::to_string(max_distance) + "), otherwise some datasets are undefined");
  }
  // history -> (distance -> instance)
  std::map<std::string, std::map<std::uint32_t, const LabeledInstance*>> by_history;
  for (const auto& inst : instances) {
    if (inst.revision_distance) by_history[inst.history_id][*inst.revision_distance] = &inst;
  }
  std::vector<SampledDataset> datasets(max_distance);
  for (std::uint32_t i = 0; i < max_distance; ++i) datasets[i].distance = i + 1;
  for (const auto& [history_id, versions] : by_history) {
    const std::uint32_t revision_count = versions.rbegin()->first;
    if (revision_count < min_revisions || !versions.contains(0)) continue;
    bool complete = true;
    for (std::uint32_t d = 1; d <= max_distance; ++d) complete = complete && versions.contains(d);
    if (!complete) continue;
    for (auto& ds : datasets) {
      ds.positives.push_back(*versions.at(0));
      ds.negatives.push_back(*versions.at(ds.distance));
      ds.source_history_ids.push_back(history_id);
    }
  }
  return datasets;
}

inline std::string serialize_distance_datasets(const std::vector<SampledDataset>& datasets,
                                               std::uint32_t min_revisions, const std::string& config_hash) {
  nlohmann::ordered_json header;
  header["format"] = "claimrev-distance-datasets";
  header["version"] = 1;
  header["tool_version"] = io::kToolVersion;
  header["config_hash"] = config_hash;
  header["min_revisions"] = min_revisions;
  header["max_distance"] = datasets.size();
  std::string out = header.dump() + "\n";
  for (const auto& ds : datasets) {
    for (std::size_t k = 0; k < ds.positives.size(); ++k) {
      out += "D" + std::to_string(ds.distance) + "\t" + ds.source_history_ids[k] + "\t" + ds.positives[k].claim_id +
             "\t" + ds.negatives[k].claim_id + "\n";
    }
  }
  return out;
}

/// Claim ids of one D-dataset read back from a serialized file.
struct DistanceDatasetIds {
  std::uint32_t distance = 0;
  std::set<std::string> claim_ids;
};

inline std::vector<DistanceDatasetIds> read_distance_datasets(const std::filesystem::path& path) {
  std::vector<DistanceDatasetIds> out;
  io::for_each_line(path, [&](std::string_view line, std::uint64_t n) {
    if (n == 1) {
      auto header = detail::parse_json_line(line, n, path.filename().string());
      const auto count = header.at("max_distance").get<std::uint32_t>();
      out.resize(count);
      for (std::uint32_t i = 0; i < count; ++i) out[i].distance = i + 1;
      return;
    }
    if (detail::blank(line)) return;
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find('\t', start)) != std::string_view::npos; start = pos + 1) {
      cols.push_back(line.substr(start, pos - start));
    }
    cols.push_back(line.substr(start));
    if (cols.size() != 4 || cols[0].size() < 2 || cols[0][0] != 'D') {
      throw FormatError(path.filename().string() + ": expected 'D<i>\\thistory\\tpositive\\tnegative'",
                        FormatError::Unit::line, n);
    }
    const auto d = static_cast<std::uint32_t>(std::stoul(std::string(cols[0].substr(1))));
    if (d < 1 || d > out.size()) throw FormatError(path.filename().string() + ": distance out of range", FormatError::Unit::line, n);
    out[d - 1].claim_ids.emplace(cols[2]);
    out[d - 1].claim_ids.emplace(cols[3]);
  });
  return out;
}

// ---------------------------------------------------------------------------
// History-level splits
// ---------------------------------------------------------------------------

enum class Split { train, dev, test };

inline constexpr std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "train";
}

inline std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "dev") return Split::dev;
  if (s == "test") return Split::test;
  return std::nullopt;
}

/// History id -> split. All versions of a history share its split.
struct SplitAssignment {
  std::map<std::string, Split, std::less<>> assignment;
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.70, 0.15, 0.15};
  std::string rule;

  std::optional<Split> find(std::string_view history_id) const {
    auto it = assignment.find(history_id);
    if (it == assignment.end()) return std::nullopt;
    return it->second;
  }

  std::array<std::size_t, 3> counts() const {
    std::array<std::size_t, 3> c{};
    for (const auto& [id, s] : assignment) ++c[static_cast<std::size_t>(s)];
    return c;
  }

  std::vector<std::string> histories_in(Split s) const {
    std::vector<std::string> ids;
    for (const auto& [id, split] : assignment) {
      if (split == s) ids.push_back(id);
    }
    return ids;
  }

  bool operator==(const SplitAssignment&) const = default;
};

inline constexpr std::string_view kFloorRule = "floor-train,floor-dev,remainder-test";

/// Per-split history counts: floor(train), floor(dev), remainder to test.
/// The epsilon absorbs representation error such as 0.7 * 10 = 6.9999...
inline std::array<std::size_t, 3> split_counts(std::size_t n, const std::array<double, 3>& ratios) {
  const auto take = [n](double r) {
    return std::min(n, static_cast<std::size_t>(std::floor(r * static_cast<double>(n) + 1e-9)));
  };
  const std::size_t train = take(ratios[0]);
  const std::size_t dev = std::min(n - train, take(ratios[1]));
  return {train, dev, n - train - dev};
}

inline std::vector<std::string> unique_history_ids(const std::vector<LabeledInstance>& instances) {
  std::set<std::string> ids;
  for (const auto& i : instances) ids.insert(i.history_id);
  return {ids.begin(), ids.end()};
}

/// Shuffles histories with the seed, then cuts them by ratio over history
/// counts. Deterministic for a fixed (history set, ratios, seed).
inline SplitAssignment split_by_history(const std::vector<LabeledInstance>& instances,
                                        const std::array<double, 3>& ratios = {0.70, 0.15, 0.15},
                                        std::uint64_t seed = 1) {
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ValidationError("split ratios must be non-negative");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw ValidationError("split ratios must sum to 1");
  }
  std::vector<std::string> ids = unique_history_ids(instances);
  if (ids.empty()) throw ValidationError("cannot split an empty corpus");
  seeded_shuffle(ids, seed);
  const auto counts = split_counts(ids.size(), ratios);
  SplitAssignment out;
  out.seed = seed;
  out.ratios = ratios;
  out.rule = std::string(kFloorRule);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const Split s = k < counts[0] ? Split::train : (k < counts[0] + counts[1] ? Split::dev : Split::test);
    out.assignment.emplace(std::move(ids[k]), s);
  }
  return out;
}

/// Every history whose debate carries `category` goes to test, all others
/// (uncategorized included) to train.
inline SplitAssignment split_leave_one_category_out(const std::vector<LabeledInstance>& instances, const Corpus& corpus,
                                                    const std::string& category) {
  const auto known = corpus.categories();
  if (!std::binary_search(known.begin(), known.end(), category)) {
    std::string list;
    for (const auto& c : known) list += (list.empty() ? "" : ", ") + c;
    throw ValidationError("unknown category '" + category + "'; known categories: " + list);
  }
  SplitAssignment out;
  out.rule = "leave-one-category-out:" + category;
  out.ratios = {0.0, 0.0, 0.0};
  for (const auto& inst : instances) {
    if (out.assignment.contains(inst.history_id)) continue;
    const Debate* debate = corpus.find_debate(inst.debate_id);
    if (!debate) throw ValidationError("instance '" + inst.claim_id + "' references unknown debate '" + inst.debate_id + "'");
    out.assignment.emplace(inst.history_id, debate->categories.contains(category) ? Split::test : Split::train);
  }
  return out;
}

/// Moves a seeded `fraction` of the train histories to dev (floor rule);
/// used to give leave-one-category-out runs a model-selection set.
inline SplitAssignment carve_dev(SplitAssignment split, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ValidationError("dev fraction must be in [0, 1)");
  auto train = split.histories_in(Split::train);
  seeded_shuffle(train, seed);
  const auto n_dev = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(train.size()) + 1e-9));
  for (std::size_t k = 0; k < n_dev; ++k) split.assignment[train[k]] = Split::dev;
  split.seed = seed;
  return split;
}

inline std::string serialize_split(const SplitAssignment& split, const std::string& config_hash = {}) {
  nlohmann::ordered_json header;
  header["seed"] = split.seed;
  header["ratios"] = split.ratios;
  header["rule"] = split.rule;
  header["tool_version"] = io::kToolVersion;
  header["config_hash"] = config_hash;
  std::string out = header.dump() + "\n";
  for (const auto& [id, s] : split.assignment) {
    out += id;
    out += '\t';
    out += to_string(s);
    out += '\n';
  }
  return out;
}

inline SplitAssignment read_split(const std::filesystem::path& path) {
  SplitAssignment split;
  bool header_seen = false;
  io::for_each_line(path, [&](std::string_view line, std::uint64_t n) {
    const std::string file = path.filename().string();
    if (!header_seen) {
      auto header = detail::parse_json_line(line, n, file);
      try {
        split.seed = header.at("seed").get<std::uint64_t>();
        split.ratios = header.at("ratios").get<std::array<double, 3>>();
        split.rule = header.at("rule").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw FormatError(file + ": bad split header: " + e.what(), FormatError::Unit::line, n);
      }
      header_seen = true;
      return;
    }
    if (detail::blank(line)) return;
    const auto tab = line.find('\t');
    std::optional<Split> s;
    if (tab != std::string_view::npos) s = parse_split(line.substr(tab + 1));
    if (!s) throw FormatError(file + ": expected 'history_id<TAB>train|dev|test'", FormatError::Unit::line, n);
    if (!split.assignment.emplace(std::string(line.substr(0, tab)), *s).second) {
      throw ValidationError(file + " line " + std::to_string(n) + ": history assigned twice");
    }
  });
  if (!header_seen) throw FormatError(path.filename().string() + ": empty split manifest", FormatError::Unit::line, 1);
  return split;
}

}  // namespace claimrev
