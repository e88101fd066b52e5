#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "claimrev/error.hpp"
#include "claimrev/io.hpp"
#include "claimrev/text.hpp"
#include "claimrev/time.hpp"

namespace claimrev {

/// Type of the edit that produced the next version of a claim.
enum class RevisionType { clarification, typo_grammar, links, other };

enum class Quality { optimal, suboptimal };

inline constexpr std::string_view to_string(RevisionType t) {
  switch (t) {
    case RevisionType::clarification: return "clarification";
    case RevisionType::typo_grammar: return "typo_grammar";
    case RevisionType::links: return "links";
    case RevisionType::other: return "other";
  }
  return "other";
}

inline constexpr std::string_view to_string(Quality q) {
  return q == Quality::optimal ? "optimal" : "suboptimal";
}

inline std::optional<RevisionType> parse_revision_type(std::string_view s) {
  if (s == "clarification") return RevisionType::clarification;
  if (s == "typo_grammar") return RevisionType::typo_grammar;
  if (s == "links") return RevisionType::links;
  if (s == "other") return RevisionType::other;
  return std::nullopt;
}

inline std::optional<Quality> parse_quality(std::string_view s) {
  if (s == "optimal") return Quality::optimal;
  if (s == "suboptimal") return Quality::suboptimal;
  return std::nullopt;
}

struct Debate {
  std::string debate_id;
  std::string thesis;
  std::set<std::string> categories;

  bool operator==(const Debate&) const = default;
};

struct ClaimVersion {
  std::string claim_id;
  std::string history_id;
  std::uint32_t version_index = 0;
  std::string text;
  Timestamp created_at{};
  std::string debate_id;
  std::optional<std::string> parent_claim_id;
  // Labels the edit that turned this version into the next one; absent on
  // the final version of a history.
  std::optional<RevisionType> revision_type;

  bool operator==(const ClaimVersion&) const = default;
};

struct RevisionHistory {
  std::string history_id;
  std::string debate_id;
  std::vector<ClaimVersion> versions;

  std::size_t revision_count() const noexcept { return versions.empty() ? 0 : versions.size() - 1; }
  const ClaimVersion& final_version() const { return versions.back(); }

  bool operator==(const RevisionHistory&) const = default;
};

/// Groups claim versions into histories ordered by history id, validating
/// every per-history invariant.
inline std::vector<RevisionHistory> assemble_histories(std::vector<ClaimVersion> claims) {
  std::set<std::string, std::less<>> claim_ids;
  std::map<std::string, std::vector<ClaimVersion>, std::less<>> grouped;
  for (auto& c : claims) {
    if (!claim_ids.insert(c.claim_id).second) {
      throw ValidationError("duplicate claim_id '" + c.claim_id + "'");
    }
    grouped[c.history_id].push_back(std::move(c));
  }
  std::vector<RevisionHistory> histories;
  histories.reserve(grouped.size());
  for (auto& [history_id, versions] : grouped) {
    std::sort(versions.begin(), versions.end(),
              [](const ClaimVersion& a, const ClaimVersion& b) { return a.version_index < b.version_index; });
    for (std::size_t i = 0; i < versions.size(); ++i) {
      const ClaimVersion& v = versions[i];
      if (v.version_index != i) {
        throw ValidationError("history '" + history_id + "': version_index values are not contiguous from 0 (expected " +
                              std::to_string(i) + ", found " + std::to_string(v.version_index) + ")");
      }
      if (v.debate_id != versions.front().debate_id) {
        throw ValidationError("history '" + history_id + "': versions belong to different debates");
      }
      if (i > 0 && v.created_at < versions[i - 1].created_at) {
        throw ValidationError("history '" + history_id + "': created_at decreases at version " + std::to_string(i));
      }
      if (text::trim(v.text).empty()) {
        throw ValidationError("history '" + history_id + "': claim '" + v.claim_id + "' has empty text");
      }
    }
    if (versions.back().revision_type) {
      throw ValidationError("history '" + history_id + "': final version carries a revision_type");
    }
    RevisionHistory h;
    h.history_id = history_id;
    h.debate_id = versions.front().debate_id;
    h.versions = std::move(versions);
    histories.push_back(std::move(h));
  }
  return histories;
}

/// Immutable, indexed set of debates and revision histories.
class Corpus {
 public:
  Corpus() = default;

  Corpus(std::vector<Debate> debates, std::vector<RevisionHistory> histories)
      : debates_(std::move(debates)), histories_(std::move(histories)) {
    std::sort(debates_.begin(), debates_.end(),
              [](const Debate& a, const Debate& b) { return a.debate_id < b.debate_id; });
    std::sort(histories_.begin(), histories_.end(),
              [](const RevisionHistory& a, const RevisionHistory& b) { return a.history_id < b.history_id; });
    for (std::size_t i = 0; i < debates_.size(); ++i) {
      const Debate& d = debates_[i];
      if (d.debate_id.empty()) throw ValidationError("debate with empty debate_id");
      if (text::trim(d.thesis).empty()) throw ValidationError("debate '" + d.debate_id + "' has an empty thesis");
      if (!debate_index_.emplace(d.debate_id, i).second) {
        throw ValidationError("duplicate debate_id '" + d.debate_id + "'");
      }
    }
    for (std::size_t h = 0; h < histories_.size(); ++h) {
      const RevisionHistory& history = histories_[h];
      if (history.versions.empty()) throw ValidationError("history '" + history.history_id + "' has no versions");
      if (!history_index_.emplace(history.history_id, h).second) {
        throw ValidationError("duplicate history_id '" + history.history_id + "'");
      }
      if (!debate_index_.contains(history.debate_id)) {
        throw ValidationError("history '" + history.history_id + "' references unknown debate '" +
                              history.debate_id + "'");
      }
      for (std::size_t v = 0; v < history.versions.size(); ++v) {
        if (!claim_index_.emplace(history.versions[v].claim_id, std::pair{h, v}).second) {
          throw ValidationError("duplicate claim_id '" + history.versions[v].claim_id + "'");
        }
      }
    }
  }

  const std::vector<Debate>& debates() const noexcept { return debates_; }
  const std::vector<RevisionHistory>& histories() const noexcept { return histories_; }
  std::size_t claim_count() const noexcept { return claim_index_.size(); }

  const Debate* find_debate(std::string_view id) const {
    auto it = debate_index_.find(id);
    return it == debate_index_.end() ? nullptr : &debates_[it->second];
  }
  const RevisionHistory* find_history(std::string_view id) const {
    auto it = history_index_.find(id);
    return it == history_index_.end() ? nullptr : &histories_[it->second];
  }
  const ClaimVersion* find_claim(std::string_view id) const {
    auto it = claim_index_.find(id);
    if (it == claim_index_.end()) return nullptr;
    return &histories_[it->second.first].versions[it->second.second];
  }
  const RevisionHistory* history_of_claim(std::string_view id) const {
    auto it = claim_index_.find(id);
    return it == claim_index_.end() ? nullptr : &histories_[it->second.first];
  }

  /// Sorted union of all debate categories.
  std::vector<std::string> categories() const {
    std::set<std::string> all;
    for (const auto& d : debates_) all.insert(d.categories.begin(), d.categories.end());
    return {all.begin(), all.end()};
  }

  /// Same debates, different history set (e.g. after filtering).
  Corpus with_histories(std::vector<RevisionHistory> histories) const { return Corpus(debates_, std::move(histories)); }

  bool operator==(const Corpus& other) const {
    return debates_ == other.debates_ && histories_ == other.histories_;
  }

 private:
  std::vector<Debate> debates_;
  std::vector<RevisionHistory> histories_;
  std::map<std::string, std::size_t, std::less<>> debate_index_;
  std::map<std::string, std::size_t, std::less<>> history_index_;
  std::map<std::string, std::pair<std::size_t, std::size_t>, std::less<>> claim_index_;
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(where + ": missing field '" + key + "'");
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto& v = require_field(obj, key, where);
  if (!v.is_string()) throw ValidationError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

inline std::optional<std::string> optional_string(const nlohmann::json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ValidationError(where + ": field '" + key + "' must be a string or null");
  return it->get<std::string>();
}

inline nlohmann::json parse_json_line(std::string_view line, std::uint64_t number, const std::string& file) {
  try {
    auto j = nlohmann::json::parse(line);
    if (!j.is_object()) throw FormatError(file + ": expected a JSON object", FormatError::Unit::line, number);
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(file + ": malformed JSON: " + e.what(), FormatError::Unit::line, number);
  }
}

inline bool blank(std::string_view line) { return line.find_first_not_of(" \t\r") == std::string_view::npos; }

}  // namespace detail

inline Debate debate_from_json(const nlohmann::json& j, const std::string& where) {
  Debate d;
  d.debate_id = detail::require_string(j, "debate_id", where);
  d.thesis = detail::require_string(j, "thesis", where);
  if (auto it = j.find("categories"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw ValidationError(where + ": 'categories' must be an array");
    for (const auto& c : *it) {
      if (!c.is_string()) throw ValidationError(where + ": category names must be strings");
      d.categories.insert(c.get<std::string>());
    }
  }
  return d;
}

inline ClaimVersion claim_from_json(const nlohmann::json& j, const std::string& where) {
  ClaimVersion c;
  c.claim_id = detail::require_string(j, "claim_id", where);
  c.history_id = detail::require_string(j, "history_id", where);
  const auto& index = detail::require_field(j, "version_index", where);
  if (!index.is_number_unsigned() && !(index.is_number_integer() && index.get<std::int64_t>() >= 0)) {
    throw ValidationError(where + ": 'version_index' must be a non-negative integer");
  }
  c.version_index = index.get<std::uint32_t>();
  c.text = detail::require_string(j, "text", where);
  auto created = detail::optional_string(j, "created_at", where);
  if (!created) throw ValidationError(where + ": missing 'created_at' timestamp");
  try {
    c.created_at = parse_timestamp(*created);
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  c.debate_id = detail::require_string(j, "debate_id", where);
  c.parent_claim_id = detail::optional_string(j, "parent_claim_id", where);
  if (auto type = detail::optional_string(j, "revision_type", where)) {
    c.revision_type = parse_revision_type(*type);
    if (!c.revision_type) throw ValidationError(where + ": unknown revision_type '" + *type + "'");
  }
  return c;
}

inline nlohmann::ordered_json to_json(const Debate& d) {
  nlohmann::ordered_json j;
  j["debate_id"] = d.debate_id;
  j["thesis"] = d.thesis;
  j["categories"] = nlohmann::ordered_json::array();
  for (const auto& c : d.categories) j["categories"].push_back(c);
  return j;
}

inline nlohmann::ordered_json to_json(const ClaimVersion& c) {
  nlohmann::ordered_json j;
  j["claim_id"] = c.claim_id;
  j["history_id"] = c.history_id;
  j["version_index"] = c.version_index;
  j["text"] = c.text;
  j["created_at"] = format_timestamp(c.created_at);
  j["debate_id"] = c.debate_id;
  j["parent_claim_id"] = c.parent_claim_id ? nlohmann::ordered_json(*c.parent_claim_id) : nlohmann::ordered_json(nullptr);
  j["revision_type"] = c.revision_type ? nlohmann::ordered_json(std::string(to_string(*c.revision_type))) : nlohmann::ordered_json(nullptr);
  return j;
}

inline std::vector<Debate> parse_debates(const std::filesystem::path& path) {
  std::vector<Debate> debates;
  const std::string file = path.filename().string();
  io::for_each_line(path, [&](std::string_view line, std::uint64_t n) {
    if (detail::blank(line)) return;
    debates.push_back(debate_from_json(detail::parse_json_line(line, n, file), file + " line " + std::to_string(n)));
  });
  return debates;
}

inline std::vector<ClaimVersion> parse_claims(const std::filesystem::path& path) {
  std::vector<ClaimVersion> claims;
  const std::string file = path.filename().string();
  io::for_each_line(path, [&](std::string_view line, std::uint64_t n) {
    if (detail::blank(line)) return;
    claims.push_back(claim_from_json(detail::parse_json_line(line, n, file), file + " line " + std::to_string(n)));
  });
  return claims;
}

/// Loads and validates a debates.jsonl / claims.jsonl pair.
inline Corpus parse_corpus(const std::filesystem::path& debates_file, const std::filesystem::path& claims_file) {
  return Corpus(parse_debates(debates_file), assemble_histories(parse_claims(claims_file)));
}

inline std::string serialize_debates(const Corpus& corpus) {
  std::string out;
  for (const auto& d : corpus.debates()) {
    out += to_json(d).dump();
    out += '\n';
  }
  return out;
}

inline std::string serialize_claims(const Corpus& corpus) {
  std::string out;
  for (const auto& h : corpus.histories()) {
    for (const auto& v : h.versions) {
      out += to_json(v).dump();
      out += '\n';
    }
  }
  return out;
}

inline void write_corpus(const Corpus& corpus, const std::filesystem::path& debates_file,
                         const std::filesystem::path& claims_file) {
  io::write_file_atomic(debates_file, serialize_debates(corpus));
  io::write_file_atomic(claims_file, serialize_claims(corpus));
}

/// Text a reader sees as the claim's context: the latest version of the
/// parent claim, or the debate thesis for claims attached to the thesis.
inline const std::string& resolve_parent(const ClaimVersion& claim, const Corpus& corpus) {
  if (claim.parent_claim_id) {
    const RevisionHistory* parent = corpus.history_of_claim(*claim.parent_claim_id);
    if (!parent) {
      throw ValidationError("claim '" + claim.claim_id + "' references unknown parent claim '" +
                            *claim.parent_claim_id + "'");
    }
    return parent->final_version().text;
  }
  const Debate* debate = corpus.find_debate(claim.debate_id);
  if (!debate) throw ValidationError("claim '" + claim.claim_id + "' references unknown debate '" + claim.debate_id + "'");
  return debate->thesis;
}

/// Id of the record holding the resolved context: the parent's latest
/// claim_id, or the debate_id when the context is the thesis.
inline const std::string& resolve_parent_id(const ClaimVersion& claim, const Corpus& corpus) {
  if (claim.parent_claim_id) {
    const RevisionHistory* parent = corpus.history_of_claim(*claim.parent_claim_id);
    if (!parent) {
      throw ValidationError("claim '" + claim.claim_id + "' references unknown parent claim '" +
                            *claim.parent_claim_id + "'");
    }
    return parent->final_version().claim_id;
  }
  return claim.debate_id;
}

}  // namespace claimrev
