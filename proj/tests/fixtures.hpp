#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "claimrev/claimrev.hpp"

namespace fixtures {

using namespace claimrev;

inline Timestamp day(int n) { return parse_timestamp("2019-01-01T00:00:00Z") + std::chrono::days{n}; }

inline ClaimVersion claim(const std::string& history, std::uint32_t index, std::string text, Timestamp at,
                          const std::string& debate = "d1", std::optional<RevisionType> type = std::nullopt,
                          std::optional<std::string> parent = std::nullopt) {
  ClaimVersion c;
  c.claim_id = history + "." + std::to_string(index);
  c.history_id = history;
  c.version_index = index;
  c.text = std::move(text);
  c.created_at = at;
  c.debate_id = debate;
  c.parent_claim_id = std::move(parent);
  c.revision_type = type;
  return c;
}

/// One history whose versions carry `texts` in order; every non-final
/// version is typed `type`.
inline std::vector<ClaimVersion> history(const std::string& id, const std::vector<std::string>& texts,
                                         const std::string& debate = "d1",
                                         std::optional<RevisionType> type = RevisionType::clarification,
                                         int start_day = 0) {
  std::vector<ClaimVersion> out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const bool last = i + 1 == texts.size();
    out.push_back(claim(id, static_cast<std::uint32_t>(i), texts[i], day(start_day + static_cast<int>(i)), debate,
                        last ? std::nullopt : type));
  }
  return out;
}

inline Debate debate(const std::string& id, std::set<std::string> categories = {}, std::string thesis = "") {
  return Debate{id, thesis.empty() ? "Thesis of " + id : std::move(thesis), std::move(categories)};
}

inline Corpus corpus(std::vector<Debate> debates, std::vector<std::vector<ClaimVersion>> histories) {
  std::vector<ClaimVersion> all;
  for (auto& h : histories) all.insert(all.end(), h.begin(), h.end());
  return Corpus(std::move(debates), assemble_histories(std::move(all)));
}

/// Corpus whose cleaned instances reproduce the class proportions of the
/// full corpus statistics table, scaled down by 100, plus histories the
/// filters must drop (reverts and recent singletons).
struct AccountingFixture {
  Corpus corpus;
  FilterConfig filter;
  ClassAccounting expected;
  std::size_t dropped_reverts = 0;
  std::size_t dropped_recent = 0;
};

inline AccountingFixture accounting_fixture() {
  AccountingFixture f;
  f.expected = {1215, 865, 611, 572, 175, 664};
  f.filter = FilterConfig::from_dates(parse_timestamp("2020-06-26T00:00:00Z"));
  std::vector<std::optional<RevisionType>> types;
  types.insert(types.end(), f.expected.clarification, RevisionType::clarification);
  types.insert(types.end(), f.expected.typo_grammar, RevisionType::typo_grammar);
  types.insert(types.end(), f.expected.links, RevisionType::links);
  // Half of the `other` edits are explicit, half unlabeled.
  for (std::uint64_t k = 0; k < f.expected.other; ++k) {
    types.push_back(k % 2 ? std::optional<RevisionType>(RevisionType::other) : std::nullopt);
  }
  seeded_shuffle(types, 11);

  std::vector<ClaimVersion> claims;
  const std::size_t revised = f.expected.final_versions;
  std::vector<std::size_t> negatives(revised, 1);
  for (std::size_t k = revised; k < types.size(); ++k) ++negatives[k % revised];
  std::size_t next_type = 0;
  for (std::size_t h = 0; h < revised; ++h) {
    const std::string id = "r" + std::to_string(h);
    for (std::size_t v = 0; v <= negatives[h]; ++v) {
      const bool last = v == negatives[h];
      auto c = claim(id, static_cast<std::uint32_t>(v), "claim " + id + " version " + std::to_string(v),
                     day(static_cast<int>(v)), "d" + std::to_string(h % 7));
      if (!last) c.revision_type = types[next_type++];
      claims.push_back(std::move(c));
    }
  }
  for (std::uint64_t u = 0; u < f.expected.unrevised; ++u) {
    claims.push_back(claim("u" + std::to_string(u), 0, "standalone " + std::to_string(u), day(30), "d" + std::to_string(u % 7)));
  }
  f.dropped_recent = 40;
  for (std::size_t u = 0; u < f.dropped_recent; ++u) {
    claims.push_back(claim("late" + std::to_string(u), 0, "late " + std::to_string(u),
                           parse_timestamp("2020-08-01T00:00:00Z"), "d0"));
  }
  f.dropped_reverts = 25;
  for (std::size_t r = 0; r < f.dropped_reverts; ++r) {
    const std::string id = "rev" + std::to_string(r);
    for (auto& c : history(id, {"A " + id, "B " + id, "A " + id}, "d1")) claims.push_back(std::move(c));
  }
  std::vector<Debate> debates;
  for (int d = 0; d < 7; ++d) debates.push_back(debate("d" + std::to_string(d), {"Law"}));
  f.corpus = Corpus(std::move(debates), assemble_histories(std::move(claims)));
  return f;
}

/// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / ("claimrev-test-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace fixtures
