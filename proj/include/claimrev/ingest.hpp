#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "claimrev/corpus.hpp"
#include "claimrev/error.hpp"
#include "claimrev/text.hpp"
#include "claimrev/time.hpp"

namespace claimrev {

struct FilterConfig {
  Timestamp collection_date{};
  Timestamp recheck_date{};
  int grace_period_days = 183;

  /// Builds a config whose recheck date defaults to collection + grace period.
  static FilterConfig from_dates(Timestamp collection, std::optional<Timestamp> recheck = std::nullopt,
                                 int grace_period_days = 183) {
    FilterConfig cfg;
    cfg.collection_date = collection;
    cfg.grace_period_days = grace_period_days;
    cfg.recheck_date = recheck.value_or(collection + std::chrono::days{grace_period_days});
    cfg.validate();
    return cfg;
  }

  void validate() const {
    if (grace_period_days <= 0) throw ValidationError("grace_period_days must be positive");
    if (!(recheck_date > collection_date)) throw ValidationError("recheck_date must be after collection_date");
  }
};

/// Reads {"collection_date", "recheck_date"?, "grace_period_days"?}.
inline FilterConfig filter_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("filter config must be a JSON object");
  auto it = j.find("collection_date");
  if (it == j.end() || !it->is_string()) throw ValidationError("filter config: 'collection_date' is required");
  const Timestamp collection = parse_timestamp(it->get<std::string>());
  std::optional<Timestamp> recheck;
  if (auto r = j.find("recheck_date"); r != j.end() && !r->is_null()) recheck = parse_timestamp(r->get<std::string>());
  int grace = 183;
  if (auto g = j.find("grace_period_days"); g != j.end()) grace = g->get<int>();
  return FilterConfig::from_dates(collection, recheck, grace);
}

inline nlohmann::ordered_json to_json(const FilterConfig& cfg) {
  nlohmann::ordered_json j;
  j["collection_date"] = format_timestamp(cfg.collection_date);
  j["recheck_date"] = format_timestamp(cfg.recheck_date);
  j["grace_period_days"] = cfg.grace_period_days;
  return j;
}

struct LabeledInstance {
  std::string claim_id;
  std::string text;
  Quality quality = Quality::optimal;
  std::optional<RevisionType> revision_type;  // present iff suboptimal
  std::string history_id;
  std::string debate_id;
  // 0 for final versions; absent for never-revised claims.
  std::optional<std::uint32_t> revision_distance;

  bool operator==(const LabeledInstance&) const = default;
};

/// Drops every history in which some version's normalized text equals the
/// normalized text of any earlier version.
inline std::vector<RevisionHistory> filter_reverts(const std::vector<RevisionHistory>& histories) {
  std::vector<RevisionHistory> kept;
  kept.reserve(histories.size());
  for (const auto& h : histories) {
    std::set<std::string> seen;
    bool reverted = false;
    for (const auto& v : h.versions) {
      if (!seen.insert(text::normalize(v.text)).second) {
        reverted = true;
        break;
      }
    }
    if (!reverted) kept.push_back(h);
  }
  return kept;
}

/// Keeps a single-version history only when it was created before the
/// collection date. The export is taken at the recheck date, so a history
/// that is still single there has not been revised in the grace window.
/// Multi-version histories pass through.
inline std::vector<RevisionHistory> filter_unrevised(const std::vector<RevisionHistory>& histories,
                                                     const FilterConfig& cfg) {
  cfg.validate();
  std::vector<RevisionHistory> kept;
  kept.reserve(histories.size());
  for (const auto& h : histories) {
    if (h.versions.size() != 1 || h.versions.front().created_at < cfg.collection_date) kept.push_back(h);
  }
  return kept;
}

/// Final versions and never-revised claims are optimal; every earlier
/// version is suboptimal, labeled with the type of the edit that followed it.
inline std::vector<LabeledInstance> assign_labels(const std::vector<RevisionHistory>& histories) {
  std::vector<LabeledInstance> out;
  for (const auto& h : histories) {
    const auto last = static_cast<std::uint32_t>(h.versions.size() - 1);
    for (const auto& v : h.versions) {
      LabeledInstance inst;
      inst.claim_id = v.claim_id;
      inst.text = v.text;
      inst.history_id = h.history_id;
      inst.debate_id = h.debate_id;
      if (v.version_index == last) {
        inst.quality = Quality::optimal;
        if (last > 0) inst.revision_distance = 0;
      } else {
        inst.quality = Quality::suboptimal;
        inst.revision_type = v.revision_type.value_or(RevisionType::other);
        inst.revision_distance = last - v.version_index;
      }
      out.push_back(std::move(inst));
    }
  }
  return out;
}

/// Per-class instance counts in the layout of the corpus statistics table.
struct ClassAccounting {
  std::uint64_t final_versions = 0;
  std::uint64_t unrevised = 0;
  std::uint64_t clarification = 0;
  std::uint64_t typo_grammar = 0;
  std::uint64_t links = 0;
  std::uint64_t other = 0;

  std::uint64_t positives() const { return final_versions + unrevised; }
  std::uint64_t negatives() const { return clarification + typo_grammar + links + other; }
  std::uint64_t total() const { return positives() + negatives(); }
  // Instances eligible for the three-class improvement task.
  std::uint64_t improvement_subset() const { return clarification + typo_grammar + links; }

  bool operator==(const ClassAccounting&) const = default;
};

inline ClassAccounting account(const std::vector<LabeledInstance>& instances) {
  ClassAccounting a;
  for (const auto& i : instances) {
    if (i.quality == Quality::optimal) {
      (i.revision_distance ? a.final_versions : a.unrevised) += 1;
      continue;
    }
    switch (i.revision_type.value_or(RevisionType::other)) {
      case RevisionType::clarification: ++a.clarification; break;
      case RevisionType::typo_grammar: ++a.typo_grammar; break;
      case RevisionType::links: ++a.links; break;
      case RevisionType::other: ++a.other; break;
    }
  }
  return a;
}

inline nlohmann::ordered_json to_json(const ClassAccounting& a) {
  nlohmann::ordered_json j;
  j["positive"] = {{"final_in_history", a.final_versions}, {"unrevised", a.unrevised}, {"total", a.positives()}};
  j["negative"] = {{"clarification", a.clarification},
                   {"typo_grammar", a.typo_grammar},
                   {"links", a.links},
                   {"other_unlabeled", a.other},
                   {"total", a.negatives()}};
  j["improvement_subset"] = a.improvement_subset();
  j["overall"] = a.total();
  return j;
}

inline std::string render_accounting(const ClassAccounting& a) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "Subset    Type               # Instances\n"
                "Positive  Final in history   %11llu\n"
                "          Unrevised          %11llu\n"
                "Negative  Clarification      %11llu\n"
                "          Typo/Grammar       %11llu\n"
                "          Links              %11llu\n"
                "          Other/Unlabeled    %11llu\n"
                "Overall                      %11llu\n",
                static_cast<unsigned long long>(a.final_versions), static_cast<unsigned long long>(a.unrevised),
                static_cast<unsigned long long>(a.clarification), static_cast<unsigned long long>(a.typo_grammar),
                static_cast<unsigned long long>(a.links), static_cast<unsigned long long>(a.other),
                static_cast<unsigned long long>(a.total()));
  return buf;
}

inline nlohmann::ordered_json to_json(const LabeledInstance& i) {
  nlohmann::ordered_json j;
  j["claim_id"] = i.claim_id;
  j["text"] = i.text;
  j["quality"] = std::string(to_string(i.quality));
  j["revision_type"] = i.revision_type ? nlohmann::ordered_json(std::string(to_string(*i.revision_type))) : nlohmann::ordered_json(nullptr);
  j["history_id"] = i.history_id;
  j["debate_id"] = i.debate_id;
  j["revision_distance"] = i.revision_distance ? nlohmann::ordered_json(*i.revision_distance) : nlohmann::ordered_json(nullptr);
  return j;
}

inline LabeledInstance labeled_instance_from_json(const nlohmann::json& j, const std::string& where) {
  LabeledInstance i;
  i.claim_id = detail::require_string(j, "claim_id", where);
  i.text = detail::require_string(j, "text", where);
  auto quality = parse_quality(detail::require_string(j, "quality", where));
  if (!quality) throw ValidationError(where + ": unknown quality label");
  i.quality = *quality;
  if (auto t = detail::optional_string(j, "revision_type", where)) {
    i.revision_type = parse_revision_type(*t);
    if (!i.revision_type) throw ValidationError(where + ": unknown revision_type '" + *t + "'");
  }
  if ((i.quality == Quality::suboptimal) != i.revision_type.has_value()) {
    throw ValidationError(where + ": revision_type must be present exactly for suboptimal instances");
  }
  i.history_id = detail::require_string(j, "history_id", where);
  i.debate_id = detail::require_string(j, "debate_id", where);
  if (auto it = j.find("revision_distance"); it != j.end() && !it->is_null()) {
    i.revision_distance = it->get<std::uint32_t>();
  }
  return i;
}

inline std::string serialize_instances(const std::vector<LabeledInstance>& instances) {
  std::string out;
  for (const auto& i : instances) {
    out += to_json(i).dump();
    out += '\n';
  }
  return out;
}

inline std::vector<LabeledInstance> read_instances(const std::filesystem::path& path) {
  std::vector<LabeledInstance> out;
  const std::string file = path.filename().string();
  io::for_each_line(path, [&](std::string_view line, std::uint64_t n) {
    if (detail::blank(line)) return;
    out.push_back(labeled_instance_from_json(detail::parse_json_line(line, n, file), file + " line " + std::to_string(n)));
  });
  return out;
}

/// Full cleaning recipe: drop reverted histories, drop recent singletons,
/// then label every surviving version.
inline std::vector<RevisionHistory> clean_histories(const std::vector<RevisionHistory>& histories,
                                                    const FilterConfig& cfg) {
  return filter_unrevised(filter_reverts(histories), cfg);
}

}  // namespace claimrev
