#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <variant>
#include <vector>

#include "claimrev/corpus.hpp"
#include "claimrev/embx.hpp"
#include "claimrev/error.hpp"
#include "claimrev/ingest.hpp"
#include "claimrev/io.hpp"
#include "claimrev/matrix.hpp"
#include "claimrev/text.hpp"

namespace claimrev {

enum class FeatureMode { static_pool, embx };
enum class ContextKind { none, thesis, parent };

inline constexpr std::string_view to_string(ContextKind c) {
  switch (c) {
    case ContextKind::none: return "none";
    case ContextKind::thesis: return "thesis";
    case ContextKind::parent: return "parent";
  }
  return "none";
}

inline std::optional<ContextKind> parse_context(std::string_view s) {
  if (s == "none") return ContextKind::none;
  if (s == "thesis") return ContextKind::thesis;
  if (s == "parent") return ContextKind::parent;
  return std::nullopt;
}

inline constexpr std::string_view to_string(FeatureMode m) { return m == FeatureMode::embx ? "embx" : "static_pool"; }

/// Pooling is always the mean of token vectors.
struct FeatureConfig {
  FeatureMode mode = FeatureMode::static_pool;
  ContextKind context = ContextKind::none;
  bool lowercase = true;
};

/// Whitespace split, punctuation stripped from token edges, optional
/// lowercasing; empty tokens are dropped.
inline std::vector<std::string> tokenize(std::string_view text, bool lowercase = true) {
  auto words = text::split_words(text);
  if (lowercase) {
    for (auto& w : words) w = text::to_lower(w);
  }
  return words;
}

struct StaticEmbeddingTable {
  std::uint32_t dim = 0;
  std::unordered_map<std::string, std::vector<float>> vectors;

  const std::vector<float>* find(const std::string& token) const {
    auto it = vectors.find(token);
    return it == vectors.end() ? nullptr : &it->second;
  }

  void add(std::string token, std::vector<float> v) {
    if (dim == 0) dim = static_cast<std::uint32_t>(v.size());
    if (v.size() != dim || dim == 0) throw ValidationError("token '" + token + "' has the wrong dimension");
    if (!vectors.emplace(std::move(token), std::move(v)).second) throw ValidationError("duplicate token in table");
  }
};

/// Parses the plain-text distribution format, `token f1 f2 ... fd` per line.
/// A leading `count dim` header line (word2vec style) is skipped.
inline StaticEmbeddingTable parse_static_table(std::string_view data, const std::string& name = "embeddings") {
  using Unit = FormatError::Unit;
  StaticEmbeddingTable table;
  std::uint64_t line_no = 0;
  std::size_t start = 0;
  while (start < data.size()) {
    std::size_t end = data.find('\n', start);
    if (end == std::string_view::npos) end = data.size();
    std::string_view line = data.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (detail::blank(line)) continue;
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && line[pos] == ' ') ++pos;
      std::size_t q = pos;
      while (q < line.size() && line[q] != ' ') ++q;
      if (q > pos) fields.push_back(line.substr(pos, q - pos));
      pos = q;
    }
    if (line_no == 1 && fields.size() == 2 &&
        std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || (c >= '0' && c <= '9'); })) {
      continue;
    }
    if (fields.size() < 2) throw FormatError(name + ": expected 'token f1 ... fd'", Unit::line, line_no);
    std::vector<float> v(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      auto [ptr, ec] = std::from_chars(fields[k].data(), fields[k].data() + fields[k].size(), v[k - 1]);
      if (ec != std::errc{} || ptr != fields[k].data() + fields[k].size() || !std::isfinite(v[k - 1])) {
        throw FormatError(name + ": bad number '" + std::string(fields[k]) + "'", Unit::line, line_no);
      }
    }
    if (table.dim != 0 && v.size() != table.dim) {
      throw FormatError(name + ": expected " + std::to_string(table.dim) + " values", Unit::line, line_no);
    }
    std::string token(fields[0]);
    if (table.find(token)) throw FormatError(name + ": duplicate token '" + token + "'", Unit::line, line_no);
    table.add(std::move(token), std::move(v));
  }
  if (table.dim == 0) throw FormatError(name + ": no vectors found", Unit::line, line_no);
  return table;
}

inline StaticEmbeddingTable load_static_table(const std::filesystem::path& path) {
  return parse_static_table(io::read_file(path), path.filename().string());
}

inline std::string serialize_static_table(const StaticEmbeddingTable& table) {
  std::vector<const std::string*> tokens;
  for (const auto& [t, v] : table.vectors) tokens.push_back(&t);
  std::sort(tokens.begin(), tokens.end(), [](auto* a, auto* b) { return *a < *b; });
  std::string out;
  char buf[32];
  for (const auto* t : tokens) {
    out += *t;
    for (float x : table.vectors.at(*t)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
      out += ' ';
      out.append(buf, ptr);
    }
    out += '\n';
  }
  return out;
}

/// Mean of the in-vocabulary token vectors; the zero vector when no token
/// is in the table.
inline std::vector<float> pool_static(const std::vector<std::string>& tokens, const StaticEmbeddingTable& table) {
  std::vector<double> sum(table.dim, 0.0);
  std::size_t hits = 0;
  for (const auto& t : tokens) {
    if (const auto* v = table.find(t)) {
      for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += (*v)[d];
      ++hits;
    }
  }
  std::vector<float> out(table.dim, 0.0f);
  if (hits == 0) return out;
  for (std::size_t d = 0; d < sum.size(); ++d) out[d] = static_cast<float>(sum[d] / static_cast<double>(hits));
  return out;
}

/// Where feature vectors come from: a static table to pool over, or an
/// EMBX matrix of precomputed vectors keyed by claim_id (thesis context is
/// keyed by debate_id).
class FeatureSource {
 public:
  explicit FeatureSource(const StaticEmbeddingTable& table) : source_(&table) {}
  explicit FeatureSource(const EmbeddingMatrix& matrix) : source_(&matrix) {}

  FeatureMode mode() const { return std::holds_alternative<const EmbeddingMatrix*>(source_) ? FeatureMode::embx : FeatureMode::static_pool; }
  std::uint32_t dim() const {
    if (const auto* t = table()) return t->dim;
    return matrix()->dim();
  }
  const StaticEmbeddingTable* table() const {
    auto p = std::get_if<const StaticEmbeddingTable*>(&source_);
    return p ? *p : nullptr;
  }
  const EmbeddingMatrix* matrix() const {
    auto p = std::get_if<const EmbeddingMatrix*>(&source_);
    return p ? *p : nullptr;
  }

 private:
  std::variant<const StaticEmbeddingTable*, const EmbeddingMatrix*> source_;
};

namespace detail {

inline std::vector<float> lookup_record(const EmbeddingMatrix& m, const std::string& id) {
  const auto* v = m.find(id);
  if (!v) throw ValidationError("no EMBX record for id '" + id + "'");
  return *v;
}

}  // namespace detail

/// Claim vector, or [context vector || claim vector] when a context is set.
inline std::vector<float> featurize(const LabeledInstance& instance, const Corpus& corpus, const FeatureConfig& cfg,
                                    const FeatureSource& source) {
  if (cfg.mode != source.mode()) {
    throw ValidationError("feature mode '" + std::string(to_string(cfg.mode)) + "' does not match the supplied source");
  }
  auto embed_text = [&](const std::string& text) { return pool_static(tokenize(text, cfg.lowercase), *source.table()); };

  std::vector<float> claim = cfg.mode == FeatureMode::embx ? detail::lookup_record(*source.matrix(), instance.claim_id)
                                                           : embed_text(instance.text);
  if (cfg.context == ContextKind::none) return claim;

  std::vector<float> context;
  if (cfg.context == ContextKind::thesis) {
    const Debate* debate = corpus.find_debate(instance.debate_id);
    if (!debate) throw ValidationError("instance '" + instance.claim_id + "' references unknown debate '" + instance.debate_id + "'");
    context = cfg.mode == FeatureMode::embx ? detail::lookup_record(*source.matrix(), debate->debate_id)
                                            : embed_text(debate->thesis);
  } else {
    const ClaimVersion* version = corpus.find_claim(instance.claim_id);
    if (!version) throw ValidationError("instance '" + instance.claim_id + "' is not in the corpus");
    context = cfg.mode == FeatureMode::embx ? detail::lookup_record(*source.matrix(), resolve_parent_id(*version, corpus))
                                            : embed_text(resolve_parent(*version, corpus));
  }
  if (context.size() != claim.size()) {
    throw ValidationError("context vector has dimension " + std::to_string(context.size()) + " but claim vector has " +
                          std::to_string(claim.size()));
  }
  context.insert(context.end(), claim.begin(), claim.end());
  return context;
}

inline std::size_t feature_dim(const FeatureConfig& cfg, const FeatureSource& source) {
  return static_cast<std::size_t>(source.dim()) * (cfg.context == ContextKind::none ? 1 : 2);
}

/// Featurizes every instance, one row each, splitting the work over `jobs`
/// threads. Output is independent of `jobs`.
inline FeatureMatrix featurize_all(const std::vector<LabeledInstance>& instances, const Corpus& corpus,
                                   const FeatureConfig& cfg, const FeatureSource& source, unsigned jobs = 1) {
  FeatureMatrix out(instances.size(), feature_dim(cfg, source));
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, instances.size()))));
  std::vector<std::exception_ptr> errors(jobs);
  auto work = [&](unsigned worker) {
    try {
      for (std::size_t i = worker; i < instances.size(); i += jobs) {
        auto v = featurize(instances[i], corpus, cfg, source);
        std::copy(v.begin(), v.end(), out.row(i).begin());
      }
    } catch (...) {
      errors[worker] = std::current_exception();
    }
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace claimrev
