#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "claimrev/corpus.hpp"
#include "claimrev/error.hpp"
#include "claimrev/ingest.hpp"

namespace claimrev::eval {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double support = 0.0;

  bool operator==(const ClassMetrics&) const = default;
};

/// Metrics of one run, or the mean over several runs.
///
/// Precision or recall with a zero denominator is defined as 0, and so is F1
/// when both are 0.
struct EvalReport {
  std::vector<std::string> classes;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<ClassMetrics> per_class;        // parallel to classes
  std::vector<std::vector<double>> confusion;  // [gold][predicted]
  std::size_t n_runs = 1;
  std::vector<double> per_run_accuracy;
  std::vector<double> per_run_macro_f1;

  std::size_t index_of(std::string_view label) const {
    auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) throw ValidationError("class '" + std::string(label) + "' not in report");
    return static_cast<std::size_t>(it - classes.begin());
  }
  const ClassMetrics& metrics(std::string_view label) const { return per_class[index_of(label)]; }

  /// Confusion rows divided by their sums; empty rows stay zero.
  std::vector<std::vector<double>> confusion_shares() const {
    auto shares = confusion;
    for (auto& row : shares) {
      const double sum = std::accumulate(row.begin(), row.end(), 0.0);
      if (sum > 0.0) {
        for (double& v : row) v /= sum;
      }
    }
    return shares;
  }
};

/// Builds every metric from a confusion matrix over `classes`.
inline EvalReport report_from_confusion(std::vector<std::string> classes, std::vector<std::vector<double>> confusion) {
  const std::size_t k = classes.size();
  EvalReport r;
  r.classes = std::move(classes);
  r.confusion = std::move(confusion);
  double total = 0.0, trace = 0.0;
  std::vector<double> predicted(k, 0.0);
  for (std::size_t g = 0; g < k; ++g) {
    for (std::size_t p = 0; p < k; ++p) {
      total += r.confusion[g][p];
      predicted[p] += r.confusion[g][p];
    }
    trace += r.confusion[g][g];
  }
  r.accuracy = total > 0.0 ? trace / total : 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    ClassMetrics m;
    m.support = std::accumulate(r.confusion[c].begin(), r.confusion[c].end(), 0.0);
    const double tp = r.confusion[c][c];
    m.precision = predicted[c] > 0.0 ? tp / predicted[c] : 0.0;
    m.recall = m.support > 0.0 ? tp / m.support : 0.0;
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    r.per_class.push_back(m);
  }
  double f1_sum = 0.0;
  for (const auto& m : r.per_class) f1_sum += m.f1;
  r.macro_f1 = k > 0 ? f1_sum / static_cast<double>(k) : 0.0;
  r.per_run_accuracy = {r.accuracy};
  r.per_run_macro_f1 = {r.macro_f1};
  return r;
}

/// Scores predictions against gold labels. Without an explicit class list
/// the classes are the sorted union of both label sequences.
inline EvalReport score(std::span<const std::string> predictions, std::span<const std::string> gold,
                        std::vector<std::string> classes = {}) {
  if (predictions.size() != gold.size()) {
    throw ValidationError("score: " + std::to_string(predictions.size()) + " predictions for " +
                          std::to_string(gold.size()) + " gold labels");
  }
  if (gold.empty()) throw ValidationError("score: nothing to score");
  if (classes.empty()) {
    std::set<std::string> all(gold.begin(), gold.end());
    all.insert(predictions.begin(), predictions.end());
    classes.assign(all.begin(), all.end());
  }
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t c = 0; c < classes.size(); ++c) index.emplace(classes[c], c);
  std::vector<std::vector<double>> confusion(classes.size(), std::vector<double>(classes.size(), 0.0));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto g = index.find(gold[i]);
    auto p = index.find(predictions[i]);
    if (g == index.end() || p == index.end()) throw ValidationError("score: label outside the declared classes");
    confusion[g->second][p->second] += 1.0;
  }
  return report_from_confusion(std::move(classes), std::move(confusion));
}

/// Mean of every scalar metric (and of the confusion counts) over runs.
/// Per-run accuracy and macro-F1 are kept for significance testing.
inline EvalReport averaged_runs(std::span<const EvalReport> runs) {
  if (runs.empty()) throw ValidationError("averaged_runs: no reports");
  const auto& first = runs.front();
  const std::set<std::string> expected(first.classes.begin(), first.classes.end());
  EvalReport out;
  out.classes = first.classes;
  const std::size_t k = out.classes.size();
  out.per_class.assign(k, ClassMetrics{});
  out.confusion.assign(k, std::vector<double>(k, 0.0));
  out.per_run_accuracy.clear();
  out.per_run_macro_f1.clear();
  for (const auto& run : runs) {
    if (std::set<std::string>(run.classes.begin(), run.classes.end()) != expected || run.classes.size() != k) {
      throw ValidationError("averaged_runs: reports have different class sets");
    }
    std::vector<std::size_t> map(k);
    for (std::size_t c = 0; c < k; ++c) map[c] = run.index_of(out.classes[c]);
    out.accuracy += run.accuracy;
    out.macro_f1 += run.macro_f1;
    for (std::size_t c = 0; c < k; ++c) {
      const auto& m = run.per_class[map[c]];
      out.per_class[c].precision += m.precision;
      out.per_class[c].recall += m.recall;
      out.per_class[c].f1 += m.f1;
      out.per_class[c].support += m.support;
      for (std::size_t p = 0; p < k; ++p) out.confusion[c][p] += run.confusion[map[c]][map[p]];
    }
    out.per_run_accuracy.insert(out.per_run_accuracy.end(), run.per_run_accuracy.begin(), run.per_run_accuracy.end());
    out.per_run_macro_f1.insert(out.per_run_macro_f1.end(), run.per_run_macro_f1.begin(), run.per_run_macro_f1.end());
  }
  const double n = static_cast<double>(runs.size());
  out.accuracy /= n;
  out.macro_f1 /= n;
  for (auto& m : out.per_class) {
    m.precision /= n;
    m.recall /= n;
    m.f1 /= n;
    m.support /= n;
  }
  for (auto& row : out.confusion) {
    for (double& v : row) v /= n;
  }
  out.n_runs = out.per_run_accuracy.size();
  return out;
}

/// Two-sided two-sample Student's t-test with pooled variance.
inline double t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw ValidationError("t_test: each sample needs at least two values");
  auto mean = [](std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); };
  auto sum_sq = [](std::span<const double> v, double m) {
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
  };
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ma = mean(a), mb = mean(b);
  const double df = na + nb - 2.0;
  const double pooled = (sum_sq(a, ma) + sum_sq(b, mb)) / df;
  if (pooled == 0.0) return ma == mb ? 1.0 : 0.0;
  const double t = std::abs(ma - mb) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  const boost::math::students_t dist(df);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, t)), 0.0, 1.0);
}

/// Pearson correlation; nullopt when either variable has zero variance.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
  if (x.size() < 2) throw ValidationError("pearson: need at least two pairs");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Topic analysis
// ---------------------------------------------------------------------------

struct TopicEntry {
  double accuracy_full = 0.0;
  std::optional<double> accuracy_across;  // filled from a leave-one-category-out run
  std::size_t n_samples = 0;
};

using TopicReport = std::map<std::string, TopicEntry>;

/// Accuracy per debate category. An instance counts toward every category
/// of its debate; uncategorized instances count toward none.
inline TopicReport topic_breakdown(std::span<const std::string> predictions, std::span<const std::string> gold,
                                   std::span<const LabeledInstance> instances, const Corpus& corpus) {
  if (predictions.size() != gold.size() || gold.size() != instances.size()) {
    throw ValidationError("topic_breakdown: predictions, gold and instances differ in length");
  }
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // category -> (hits, total)
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Debate* debate = corpus.find_debate(instances[i].debate_id);
    if (!debate) throw ValidationError("topic_breakdown: unknown debate '" + instances[i].debate_id + "'");
    for (const auto& c : debate->categories) {
      counts[c].first += predictions[i] == gold[i];
      counts[c].second += 1;
    }
  }
  TopicReport report;
  for (const auto& [c, hv] : counts) {
    report[c] = TopicEntry{static_cast<double>(hv.first) / static_cast<double>(hv.second), std::nullopt, hv.second};
  }
  return report;
}

/// Pearson r between category size and cross-category accuracy (or the
/// full-setting accuracy when `across` is false). nullopt = undefined.
inline std::optional<double> size_accuracy_correlation(const TopicReport& report, bool across = true) {
  if (report.size() < 3) throw ValidationError("size_accuracy_correlation: need at least three categories");
  std::vector<double> sizes, accs;
  for (const auto& [c, e] : report) {
    if (across && !e.accuracy_across) throw ValidationError("category '" + c + "' has no cross-category accuracy");
    sizes.push_back(static_cast<double>(e.n_samples));
    accs.push_back(across ? *e.accuracy_across : e.accuracy_full);
  }
  return pearson(sizes, accs);
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

/// Expected metrics of a predictor drawing classes uniformly at random when
/// gold labels follow `priors` (normalized internally).
inline EvalReport uniform_random_baseline(std::vector<std::string> classes, std::span<const double> priors) {
  if (classes.size() != priors.size() || classes.empty()) throw ValidationError("baseline: one prior per class");
  const double total = std::accumulate(priors.begin(), priors.end(), 0.0);
  const double k = static_cast<double>(classes.size());
  std::vector<std::vector<double>> confusion(classes.size(), std::vector<double>(classes.size()));
  for (std::size_t g = 0; g < classes.size(); ++g) {
    for (auto& v : confusion[g]) v = priors[g] / total / k;
  }
  return report_from_confusion(std::move(classes), std::move(confusion));
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["classes"] = r.classes;
  j["accuracy"] = r.accuracy;
  j["macro_f1"] = r.macro_f1;
  j["per_class"] = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    const auto& m = r.per_class[c];
    j["per_class"][r.classes[c]] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
  }
  j["confusion"] = r.confusion;
  j["confusion_shares"] = r.confusion_shares();
  j["n_runs"] = r.n_runs;
  j["per_run_accuracy"] = r.per_run_accuracy;
  j["per_run_macro_f1"] = r.per_run_macro_f1;
  j["zero_division"] = 0;
  return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  try {
    r.classes = j.at("classes").get<std::vector<std::string>>();
    r.accuracy = j.at("accuracy").get<double>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    for (const auto& c : r.classes) {
      const auto& m = j.at("per_class").at(c);
      r.per_class.push_back({m.at("precision").get<double>(), m.at("recall").get<double>(), m.at("f1").get<double>(),
                             m.at("support").get<double>()});
    }
    r.confusion = j.at("confusion").get<std::vector<std::vector<double>>>();
    r.n_runs = j.at("n_runs").get<std::size_t>();
    r.per_run_accuracy = j.at("per_run_accuracy").get<std::vector<double>>();
    r.per_run_macro_f1 = j.at("per_run_macro_f1").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report: ") + e.what());
  }
  return r;
}

namespace detail {

inline std::string pct(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
  return buf;
}

inline std::string render(const std::vector<std::vector<std::string>>& cells) {
  std::vector<std::size_t> width;
  for (const auto& row : cells) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::size_t pad = width[c] - row[c].size();
      if (c == 0) {
        line += row[c] + std::string(pad, ' ');
      } else {
        line += "  " + std::string(pad, ' ') + row[c];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

}  // namespace detail

/// Binary-detection layout: accuracy, macro-F1, then P/R/F1 of `focus`.
inline std::string render_detection_table(const std::vector<std::pair<std::string, EvalReport>>& rows,
                                          const std::string& focus = "suboptimal") {
  std::vector<std::vector<std::string>> cells{{"Setup", "Accuracy", "Ma.F1", "P", "R", "F1"}};
  for (const auto& [name, r] : rows) {
    const auto& m = r.metrics(focus);
    cells.push_back({name, detail::pct(r.accuracy), detail::pct(r.macro_f1), detail::pct(m.precision),
                     detail::pct(m.recall), detail::pct(m.f1)});
  }
  return detail::render(cells);
}

/// Multi-class layout: accuracy, macro-F1, then F1 per class.
inline std::string render_per_class_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  if (rows.empty()) return {};
  std::vector<std::string> header{"Setup", "Accuracy", "Ma.F1"};
  for (const auto& c : rows.front().second.classes) header.push_back(c);
  std::vector<std::vector<std::string>> cells{header};
  for (const auto& [name, r] : rows) {
    std::vector<std::string> row{name, detail::pct(r.accuracy), detail::pct(r.macro_f1)};
    for (const auto& c : rows.front().second.classes) row.push_back(detail::pct(r.metrics(c).f1));
    cells.push_back(row);
  }
  return detail::render(cells);
}

/// Gold rows, predicted columns, row-normalized percentages.
inline std::string render_confusion_table(const EvalReport& r) {
  std::vector<std::string> header{"gold \\ predicted"};
  header.insert(header.end(), r.classes.begin(), r.classes.end());
  std::vector<std::vector<std::string>> cells{header};
  const auto shares = r.confusion_shares();
  for (std::size_t g = 0; g < r.classes.size(); ++g) {
    std::vector<std::string> row{r.classes[g]};
    for (double v : shares[g]) row.push_back(detail::pct(v));
    cells.push_back(row);
  }
  return detail::render(cells);
}

/// Long-format CSV: gold,predicted,count,share.
inline std::string confusion_csv(const EvalReport& r) {
  std::string out = "gold,predicted,count,share\n";
  const auto shares = r.confusion_shares();
  char buf[64];
  for (std::size_t g = 0; g < r.classes.size(); ++g) {
    for (std::size_t p = 0; p < r.classes.size(); ++p) {
      std::snprintf(buf, sizeof buf, ",%.6g,%.6f\n", r.confusion[g][p], shares[g][p]);
      out += r.classes[g] + "," + r.classes[p] + buf;
    }
  }
  return out;
}

inline std::string topic_csv(const TopicReport& report) {
  std::string out = "category,n_samples,accuracy_full,accuracy_across\n";
  char buf[96];
  for (const auto& [c, e] : report) {
    if (e.accuracy_across) {
      std::snprintf(buf, sizeof buf, ",%zu,%.6f,%.6f\n", e.n_samples, e.accuracy_full, *e.accuracy_across);
    } else {
      std::snprintf(buf, sizeof buf, ",%zu,%.6f,\n", e.n_samples, e.accuracy_full);
    }
    out += c + buf;
  }
  return out;
}

inline std::string render_topic_table(const TopicReport& report) {
  std::vector<std::vector<std::string>> cells{{"Category", "N", "Full", "Across"}};
  for (const auto& [c, e] : report) {
    cells.push_back({c, std::to_string(e.n_samples), detail::pct(e.accuracy_full),
                     e.accuracy_across ? detail::pct(*e.accuracy_across) : "-"});
  }
  return detail::render(cells);
}

}  // namespace claimrev::eval
