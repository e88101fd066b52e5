#pragma once

// Deterministic synthetic corpora for tests, demos and the acceptance suite.
//
// Every claim version is a bag of neutral filler words plus planted tokens:
//   - a quality marker whose probability grows with the version's revision
//     distance (final and never-revised claims rarely carry it);
//   - a type marker naming the improvement the version needs;
//   - a unique reference token, so no two versions collide by accident.
// Exact reverts can be planted on request.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "claimrev/corpus.hpp"
#include "claimrev/features.hpp"
#include "claimrev/ingest.hpp"
#include "claimrev/time.hpp"

namespace claimrev::synth {

inline const std::array<std::string, 20> kCategories{
    "Education", "Technology", "Philosophy", "Europe",   "Economics", "Government",    "Law",
    "Ethics",    "Children",   "Society",    "Health",   "Religion",  "Gender",        "ClimateChange",
    "Politics",  "USA",        "Science",    "Justice",  "Equality",  "Democracy"};

inline constexpr std::string_view kQualityMarker = "flawmark";

inline std::string_view type_marker(RevisionType t) {
  switch (t) {
    case RevisionType::clarification: return "unclearish";
    case RevisionType::typo_grammar: return "teh";
    case RevisionType::links: return "citationneeded";
    case RevisionType::other: return "";
  }
  return "";
}

struct SynthConfig {
  std::size_t histories = 200;
  std::uint64_t seed = 1;
  std::size_t debates = 0;  // 0: one debate per ~10 histories
  // Revision counts of revised histories, drawn uniformly from this range.
  std::uint32_t min_revisions = 1;
  std::uint32_t max_revisions = 8;
  // Share of histories that are never revised (single version).
  double singleton_fraction = 0.3;
  // Share of singletons created after the collection date (dropped by the
  // unrevised filter).
  double late_singleton_fraction = 0.1;
  std::size_t planted_reverts = 0;
  // Quality-marker probability: base for final versions, base + slope * d
  // for versions at distance d, capped at max.
  double marker_base = 0.05;
  double marker_slope = 0.2;
  double marker_max = 0.95;
  double type_marker_rate = 0.7;
  std::uint32_t filler_words = 8;
  std::uint32_t vocabulary = 200;
  std::uint32_t embedding_dim = 16;
  double uncategorized_fraction = 0.1;
};

struct SynthCorpus {
  Corpus corpus;
  StaticEmbeddingTable embeddings;
  FilterConfig filter;
  std::set<std::string> reverted_histories;
  std::set<std::string> late_singletons;
};

namespace detail {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  bool chance(double p) { return uniform() < p; }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// Negative-type shares of the extended corpus: clarification, typo/grammar,
// links, other/unlabeled.
inline RevisionType draw_type(Rng& rng) {
  static constexpr std::array<double, 4> kCounts{61142, 57219, 17467, 66390};
  const double total = kCounts[0] + kCounts[1] + kCounts[2] + kCounts[3];
  double u = rng.uniform() * total;
  for (std::size_t k = 0; k < 3; ++k) {
    if (u < kCounts[k]) return static_cast<RevisionType>(k);
    u -= kCounts[k];
  }
  return RevisionType::other;
}

inline std::string filler(Rng& rng, const SynthConfig& cfg) {
  std::string text;
  for (std::uint32_t w = 0; w < cfg.filler_words; ++w) {
    if (!text.empty()) text += ' ';
    text += "w" + std::to_string(rng.below(cfg.vocabulary));
  }
  return text;
}

}  // namespace detail

inline const Timestamp kCollectionDate = parse_timestamp("2020-06-26T00:00:00Z");
inline const Timestamp kRecheckDate = parse_timestamp("2020-12-22T00:00:00Z");

inline SynthCorpus generate(const SynthConfig& cfg) {
  if (cfg.histories == 0) throw ValidationError("synth: need at least one history");
  if (cfg.min_revisions < 1 || cfg.max_revisions < cfg.min_revisions) throw ValidationError("synth: bad revision range");
  detail::Rng rng(cfg.seed);
  SynthCorpus out;
  out.filter = FilterConfig::from_dates(kCollectionDate, kRecheckDate);

  const std::size_t n_debates = cfg.debates ? cfg.debates : std::max<std::size_t>(1, cfg.histories / 10);
  std::vector<Debate> debates;
  for (std::size_t d = 0; d < n_debates; ++d) {
    Debate debate;
    debate.debate_id = "d" + std::to_string(d);
    debate.thesis = "thesis " + detail::filler(rng, cfg) + ".";
    if (!rng.chance(cfg.uncategorized_fraction)) {
      debate.categories.insert(kCategories[rng.below(kCategories.size())]);
      if (rng.chance(0.3)) debate.categories.insert(kCategories[rng.below(kCategories.size())]);
    }
    debates.push_back(std::move(debate));
  }

  const auto start = parse_timestamp("2017-01-01T00:00:00Z");
  std::vector<ClaimVersion> claims;
  std::vector<std::vector<std::string>> debate_claims(n_debates);  // first claim_id of each history, per debate
  std::vector<std::size_t> revertable;                              // index of first version of histories with >= 3 versions
  std::vector<std::size_t> first_version;
  for (std::size_t h = 0; h < cfg.histories; ++h) {
    const std::string history_id = "h" + std::to_string(h);
    const std::size_t debate = rng.below(n_debates);
    std::optional<std::string> parent;
    if (!debate_claims[debate].empty() && rng.chance(0.7)) {
      parent = debate_claims[debate][rng.below(debate_claims[debate].size())];
    }
    const bool singleton = rng.chance(cfg.singleton_fraction);
    const std::uint32_t revisions =
        singleton ? 0 : cfg.min_revisions + static_cast<std::uint32_t>(rng.below(cfg.max_revisions - cfg.min_revisions + 1));
    Timestamp created = start + std::chrono::hours{static_cast<long>(rng.below(24 * 365 * 3))};
    if (singleton && rng.chance(cfg.late_singleton_fraction)) {
      created = kCollectionDate + std::chrono::hours{1 + static_cast<long>(rng.below(24 * 150))};
      out.late_singletons.insert(history_id);
    }
    first_version.push_back(claims.size());
    if (revisions >= 2) revertable.push_back(claims.size());
    for (std::uint32_t v = 0; v <= revisions; ++v) {
      ClaimVersion c;
      c.history_id = history_id;
      c.claim_id = history_id + "v" + std::to_string(v);
      c.version_index = v;
      c.debate_id = debates[debate].debate_id;
      c.parent_claim_id = parent;
      c.created_at = created + std::chrono::hours{24 * v};
      const std::uint32_t distance = revisions - v;
      std::string text = detail::filler(rng, cfg);
      const double p_marker = std::min(cfg.marker_max, cfg.marker_base + cfg.marker_slope * distance);
      if (rng.chance(p_marker)) text += " " + std::string(kQualityMarker);
      if (v < revisions) {
        c.revision_type = detail::draw_type(rng);
        const auto marker = type_marker(*c.revision_type);
        if (!marker.empty() && rng.chance(cfg.type_marker_rate)) text += " " + std::string(marker);
      }
      text += " ref-" + history_id + "-" + std::to_string(v) + ".";
      c.text = std::move(text);
      claims.push_back(std::move(c));
    }
    debate_claims[debate].push_back(history_id + "v0");
  }

  // Plant reverts: alternate non-adjacent (A ... A) and adjacent (A A, with
  // extra surrounding white space) duplicates.
  if (cfg.planted_reverts > revertable.size()) throw ValidationError("synth: not enough histories to plant reverts");
  std::vector<std::size_t> pick = revertable;
  for (std::size_t i = pick.size(); i > 1; --i) std::swap(pick[i - 1], pick[rng.below(i)]);
  for (std::size_t r = 0; r < cfg.planted_reverts; ++r) {
    const std::size_t base = pick[r];
    if (r % 2 == 0) {
      claims[base + 2].text = claims[base].text;
    } else {
      claims[base + 2].text = "  " + claims[base + 1].text + " ";
    }
    out.reverted_histories.insert(claims[base].history_id);
  }

  out.corpus = Corpus(std::move(debates), assemble_histories(std::move(claims)));

  for (std::uint32_t w = 0; w < cfg.vocabulary; ++w) {
    std::vector<float> v(cfg.embedding_dim);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    out.embeddings.add("w" + std::to_string(w), std::move(v));
  }
  for (std::string_view token : {kQualityMarker, type_marker(RevisionType::clarification),
                                 type_marker(RevisionType::typo_grammar), type_marker(RevisionType::links),
                                 std::string_view("thesis")}) {
    std::vector<float> v(cfg.embedding_dim);
    for (auto& x : v) x = static_cast<float>(3.0 * rng.normal());
    out.embeddings.add(std::string(token), std::move(v));
  }
  return out;
}

}  // namespace claimrev::synth
