#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "claimrev/corpus.hpp"
#include "claimrev/error.hpp"
#include "claimrev/eval.hpp"
#include "claimrev/features.hpp"
#include "claimrev/ingest.hpp"
#include "claimrev/sampler.hpp"
#include "claimrev/svm.hpp"

namespace claimrev::tasks {

enum class Task { suboptimal_detection, improvement_suggestion, end_to_end };

inline constexpr std::string_view to_string(Task t) {
  switch (t) {
    case Task::suboptimal_detection: return "suboptimal_detection";
    case Task::improvement_suggestion: return "improvement_suggestion";
    case Task::end_to_end: return "end_to_end";
  }
  return "suboptimal_detection";
}

inline std::optional<Task> parse_task(std::string_view s) {
  if (s == "suboptimal_detection") return Task::suboptimal_detection;
  if (s == "improvement_suggestion") return Task::improvement_suggestion;
  if (s == "end_to_end") return Task::end_to_end;
  return std::nullopt;
}

/// 0 = full corpus, i = revision-distance dataset Di.
inline std::string dataset_name(std::uint32_t d) { return d == 0 ? "full" : "D" + std::to_string(d); }

inline std::optional<std::uint32_t> parse_dataset(std::string_view s) {
  if (s == "full") return 0u;
  if (s.size() >= 2 && s[0] == 'D') {
    std::uint32_t d = 0;
    auto [ptr, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), d);
    if (ec == std::errc{} && ptr == s.data() + s.size() && d >= 1) return d;
  }
  return std::nullopt;
}

struct ExperimentSpec {
  Task task = Task::suboptimal_detection;
  std::uint32_t dataset = 0;
  FeatureConfig features;
  std::vector<double> grid = svm::kDefaultGrid;
  svm::SvmConfig svm;  // C and seed are overridden per grid cell and run
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::uint32_t min_revisions = 4;
  std::uint32_t max_distance = 4;
  unsigned jobs = 1;

  std::size_t n_runs() const { return seeds.size(); }
};

inline nlohmann::ordered_json to_json(const ExperimentSpec& s) {
  nlohmann::ordered_json j;
  j["task"] = std::string(to_string(s.task));
  j["dataset"] = dataset_name(s.dataset);
  j["features"] = {{"mode", std::string(to_string(s.features.mode))},
                   {"context", std::string(to_string(s.features.context))},
                   {"pooling", "mean"},
                   {"lowercase", s.features.lowercase}};
  j["grid"] = s.grid;
  j["max_iterations"] = s.svm.max_iterations;
  j["tolerance"] = s.svm.tolerance;
  j["seeds"] = s.seeds;
  j["min_revisions"] = s.min_revisions;
  j["max_distance"] = s.max_distance;
  return j;
}

/// Class order used in reports and models for each task.
inline std::vector<std::string> task_classes(Task t) {
  switch (t) {
    case Task::suboptimal_detection: return {"optimal", "suboptimal"};
    case Task::improvement_suggestion: return {"clarification", "typo_grammar", "links"};
    case Task::end_to_end: return {"clarification", "typo_grammar", "links", "optimal"};
  }
  return {};
}

/// Gold label of an instance under a task, or nullopt when the task does not
/// use it (e.g. `other` revisions outside the detection task).
inline std::optional<std::string> task_label(const LabeledInstance& inst, Task t) {
  if (t == Task::suboptimal_detection) return std::string(to_string(inst.quality));
  if (inst.quality == Quality::optimal) {
    if (t == Task::end_to_end) return std::string("optimal");
    return std::nullopt;
  }
  const RevisionType type = inst.revision_type.value_or(RevisionType::other);
  if (type == RevisionType::other) return std::nullopt;
  return std::string(to_string(type));
}

/// Share of each task class among the instances the task uses.
inline std::vector<std::pair<std::string, double>> class_priors(const std::vector<LabeledInstance>& instances, Task t) {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& inst : instances) {
    if (auto label = task_label(inst, t)) {
      ++counts[*label];
      ++total;
    }
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& c : task_classes(t)) {
    out.emplace_back(c, total == 0 ? 0.0 : static_cast<double>(counts[c]) / static_cast<double>(total));
  }
  return out;
}

inline std::map<std::uint64_t, SplitAssignment> make_splits(const std::vector<LabeledInstance>& instances,
                                                            const std::vector<std::uint64_t>& seeds,
                                                            const std::array<double, 3>& ratios = {0.70, 0.15, 0.15}) {
  std::map<std::uint64_t, SplitAssignment> out;
  for (auto seed : seeds) out.emplace(seed, split_by_history(instances, ratios, seed));
  return out;
}

/// Everything an experiment reads. `instances` are the cleaned, labeled
/// instances; `corpus` is the full parsed corpus (used for context lookup and
/// categories); `splits` holds one assignment per seed.
struct ExperimentData {
  const Corpus* corpus = nullptr;
  const std::vector<LabeledInstance>* instances = nullptr;
  const FeatureSource* source = nullptr;
  std::map<std::uint64_t, SplitAssignment> splits;
};

/// Row indices, labels and features for one slice of the data.
struct Slice {
  std::vector<std::size_t> rows;
  std::vector<std::string> labels;
};

struct RunResult {
  std::uint64_t seed = 0;
  double best_C = 0.0;
  std::vector<std::pair<double, double>> dev_accuracy;
  eval::EvalReport report;
  std::vector<std::size_t> test_rows;
  std::vector<std::string> test_predictions;
  svm::SvmModel model;
};

struct ExperimentResult {
  ExperimentSpec spec;
  eval::EvalReport report;  // averaged over runs
  std::vector<RunResult> runs;
  std::vector<std::pair<std::string, double>> class_priors;
};

namespace detail {

inline const SplitAssignment& split_for(const ExperimentData& data, std::uint64_t seed) {
  auto it = data.splits.find(seed);
  if (it == data.splits.end()) throw ValidationError("missing split manifest for seed " + std::to_string(seed));
  return it->second;
}

inline void check_data(const ExperimentData& data) {
  if (!data.corpus || !data.instances || !data.source) throw ValidationError("experiment data is incomplete");
}

}  // namespace detail

/// Claim ids of dataset Di (positives and negatives), compiled from all
/// cleaned instances.
inline std::set<std::string> distance_dataset_ids(const std::vector<LabeledInstance>& instances, std::uint32_t d,
                                                  std::uint32_t min_revisions, std::uint32_t max_distance) {
  if (d == 0 || d > max_distance) throw ValidationError("dataset D" + std::to_string(d) + " is not defined");
  const auto datasets = compile_distance_datasets(instances, min_revisions, max_distance);
  std::set<std::string> ids;
  for (const auto& i : datasets[d - 1].positives) ids.insert(i.claim_id);
  for (const auto& i : datasets[d - 1].negatives) ids.insert(i.claim_id);
  return ids;
}

/// Instances of one split that the task uses, optionally restricted to a
/// set of claim ids.
inline Slice select(const std::vector<LabeledInstance>& instances, Task task, const SplitAssignment& split, Split which,
                    const std::set<std::string>* restrict_to = nullptr) {
  Slice s;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    if (split.find(inst.history_id) != which) continue;
    if (restrict_to && !restrict_to->contains(inst.claim_id)) continue;
    auto label = task_label(inst, task);
    if (!label) continue;
    s.rows.push_back(i);
    s.labels.push_back(std::move(*label));
  }
  return s;
}

/// Grid-selects C on dev, then scores the chosen model on test.
inline RunResult train_and_score(const FeatureMatrix& features, const Slice& train, const Slice& dev, const Slice& test,
                                 const ExperimentSpec& spec, std::uint64_t seed) {
  if (train.rows.empty()) throw ValidationError("empty training split for seed " + std::to_string(seed));
  if (dev.rows.empty()) throw ValidationError("empty dev split for seed " + std::to_string(seed));
  if (test.rows.empty()) throw ValidationError("empty test split for seed " + std::to_string(seed));
  svm::SvmConfig cfg = spec.svm;
  cfg.seed = seed;
  const auto classes = task_classes(spec.task);
  std::vector<std::string> declared = classes;
  if (spec.task == Task::suboptimal_detection) declared.clear();  // binary: classes come from data
  auto grid = svm::grid_select(features.select(train.rows), train.labels, features.select(dev.rows), dev.labels,
                               spec.grid, cfg, declared, spec.jobs);
  RunResult r;
  r.seed = seed;
  r.best_C = grid.best_C;
  r.dev_accuracy = grid.dev_accuracy;
  r.model = std::move(grid.model);
  r.test_rows = test.rows;
  r.test_predictions = svm::predict(r.model, features.select(test.rows));
  r.report = eval::score(r.test_predictions, test.labels, classes);
  return r;
}

/// Runs one task over all seeds: train on the train split, pick C on dev,
/// report on test, average over runs.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, const ExperimentData& data,
                                       const FeatureMatrix* precomputed = nullptr) {
  detail::check_data(data);
  if (spec.seeds.empty()) throw ValidationError("experiment needs at least one seed");
  if (spec.dataset != 0 && spec.task != Task::suboptimal_detection) {
    throw ValidationError("revision-distance datasets only apply to suboptimal-claim detection");
  }
  const auto& instances = *data.instances;
  FeatureMatrix computed;
  if (!precomputed) computed = featurize_all(instances, *data.corpus, spec.features, *data.source, spec.jobs);
  const FeatureMatrix& features = precomputed ? *precomputed : computed;
  if (features.rows() != instances.size()) throw ValidationError("feature rows do not match instances");

  std::optional<std::set<std::string>> subset;
  if (spec.dataset != 0) subset = distance_dataset_ids(instances, spec.dataset, spec.min_revisions, spec.max_distance);
  const std::set<std::string>* restrict_to = subset ? &*subset : nullptr;

  ExperimentResult result;
  result.spec = spec;
  result.class_priors = class_priors(instances, spec.task);
  std::vector<eval::EvalReport> reports;
  for (auto seed : spec.seeds) {
    const auto& split = detail::split_for(data, seed);
    auto run = train_and_score(features, select(instances, spec.task, split, Split::train, restrict_to),
                               select(instances, spec.task, split, Split::dev, restrict_to),
                               select(instances, spec.task, split, Split::test, restrict_to), spec, seed);
    reports.push_back(run.report);
    result.runs.push_back(std::move(run));
  }
  result.report = eval::averaged_runs(reports);
  return result;
}

inline ExperimentResult run_suboptimal_detection(ExperimentSpec spec, const ExperimentData& data) {
  spec.task = Task::suboptimal_detection;
  return run_experiment(spec, data);
}

/// Three-class improvement-type prediction over clarification, typo/grammar
/// and links revisions.
inline ExperimentResult run_improvement_suggestion(ExperimentSpec spec, const ExperimentData& data) {
  spec.task = Task::improvement_suggestion;
  return run_experiment(spec, data);
}

/// Four classes: the three improvement types plus `optimal`.
inline ExperimentResult run_end_to_end(ExperimentSpec spec, const ExperimentData& data) {
  spec.task = Task::end_to_end;
  return run_experiment(spec, data);
}

// ---------------------------------------------------------------------------
// Train-subset x test-subset accuracy matrix
// ---------------------------------------------------------------------------

struct DistanceMatrix {
  std::vector<std::string> train_rows;  // D1..Dk, then "Full training set"
  std::vector<std::string> test_cols;   // D1..Dk
  std::vector<std::vector<double>> accuracy;                  // averaged over seeds
  std::vector<std::vector<std::vector<double>>> per_seed;     // [seed][row][col]

  double row_average(std::size_t r) const {
    double s = 0.0;
    for (double v : accuracy[r]) s += v;
    return s / static_cast<double>(accuracy[r].size());
  }
};

/// Trains on each Di (and on the full train split) and evaluates every model
/// on every Dj test subset.
inline DistanceMatrix run_distance_matrix(ExperimentSpec spec, const ExperimentData& data,
                                          const FeatureMatrix* precomputed = nullptr) {
  detail::check_data(data);
  spec.task = Task::suboptimal_detection;
  if (spec.seeds.empty()) throw ValidationError("experiment needs at least one seed");
  const auto& instances = *data.instances;
  FeatureMatrix computed;
  if (!precomputed) computed = featurize_all(instances, *data.corpus, spec.features, *data.source, spec.jobs);
  const FeatureMatrix& features = precomputed ? *precomputed : computed;

  const auto datasets = compile_distance_datasets(instances, spec.min_revisions, spec.max_distance);
  std::vector<std::set<std::string>> ids(datasets.size());
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    for (const auto& i : datasets[d].positives) ids[d].insert(i.claim_id);
    for (const auto& i : datasets[d].negatives) ids[d].insert(i.claim_id);
  }
  const std::size_t k = datasets.size();

  DistanceMatrix m;
  for (std::size_t d = 0; d < k; ++d) {
    m.train_rows.push_back(dataset_name(static_cast<std::uint32_t>(d + 1)));
    m.test_cols.push_back(dataset_name(static_cast<std::uint32_t>(d + 1)));
  }
  m.train_rows.push_back("Full training set");
  m.accuracy.assign(k + 1, std::vector<double>(k, 0.0));

  const auto classes = task_classes(Task::suboptimal_detection);
  for (auto seed : spec.seeds) {
    const auto& split = detail::split_for(data, seed);
    std::vector<Slice> tests;
    for (std::size_t d = 0; d < k; ++d) tests.push_back(select(instances, spec.task, split, Split::test, &ids[d]));
    std::vector<std::vector<double>> table(k + 1, std::vector<double>(k, 0.0));
    for (std::size_t r = 0; r <= k; ++r) {
      const std::set<std::string>* restrict_to = r < k ? &ids[r] : nullptr;
      const Slice train = select(instances, spec.task, split, Split::train, restrict_to);
      const Slice dev = select(instances, spec.task, split, Split::dev, restrict_to);
      if (train.rows.empty() || dev.rows.empty()) throw ValidationError("empty train/dev slice for " + m.train_rows[r]);
      svm::SvmConfig cfg = spec.svm;
      cfg.seed = seed;
      auto grid = svm::grid_select(features.select(train.rows), train.labels, features.select(dev.rows), dev.labels,
                                   spec.grid, cfg, {}, spec.jobs);
      for (std::size_t c = 0; c < k; ++c) {
        if (tests[c].rows.empty()) throw ValidationError("empty test slice for " + m.test_cols[c]);
        const auto predictions = svm::predict(grid.model, features.select(tests[c].rows));
        table[r][c] = svm::accuracy(predictions, tests[c].labels);
      }
    }
    for (std::size_t r = 0; r <= k; ++r) {
      for (std::size_t c = 0; c < k; ++c) m.accuracy[r][c] += table[r][c] / static_cast<double>(spec.seeds.size());
    }
    m.per_seed.push_back(std::move(table));
  }
  return m;
}

inline std::string render_distance_table(const DistanceMatrix& m) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"Training Subset"};
  header.insert(header.end(), m.test_cols.begin(), m.test_cols.end());
  header.push_back("Average");
  cells.push_back(header);
  for (std::size_t r = 0; r < m.train_rows.size(); ++r) {
    std::vector<std::string> row{m.train_rows[r]};
    for (double v : m.accuracy[r]) row.push_back(eval::detail::pct(v));
    row.push_back(eval::detail::pct(m.row_average(r)));
    cells.push_back(row);
  }
  return eval::detail::render(cells);
}

inline nlohmann::ordered_json to_json(const DistanceMatrix& m) {
  nlohmann::ordered_json j;
  j["train_rows"] = m.train_rows;
  j["test_cols"] = m.test_cols;
  j["accuracy"] = m.accuracy;
  j["per_seed"] = m.per_seed;
  return j;
}

// ---------------------------------------------------------------------------
// Topic analysis
// ---------------------------------------------------------------------------

/// Per-category accuracy of the full-corpus detection model plus, for each
/// category, the accuracy of a model trained without that category
/// (leave-one-category-out; 15% of the remaining train histories serve as dev).
inline eval::TopicReport run_topic_analysis(ExperimentSpec spec, const ExperimentData& data,
                                            std::vector<std::string> categories = {}) {
  detail::check_data(data);
  spec.task = Task::suboptimal_detection;
  spec.dataset = 0;
  const auto& instances = *data.instances;
  const FeatureMatrix features = featurize_all(instances, *data.corpus, spec.features, *data.source, spec.jobs);
  const auto full = run_experiment(spec, data, &features);

  // Per-category accuracy_full: averaged over runs.
  eval::TopicReport report;
  std::map<std::string, std::size_t> seen_runs;
  for (const auto& run : full.runs) {
    std::vector<std::string> gold;
    std::vector<LabeledInstance> subset;
    for (std::size_t row : run.test_rows) {
      gold.push_back(*task_label(instances[row], spec.task));
      subset.push_back(instances[row]);
    }
    for (const auto& [c, e] : eval::topic_breakdown(run.test_predictions, gold, subset, *data.corpus)) {
      auto& entry = report[c];
      entry.accuracy_full += e.accuracy_full;
      entry.n_samples += e.n_samples;
      ++seen_runs[c];
    }
  }
  for (auto& [c, e] : report) {
    e.accuracy_full /= static_cast<double>(seen_runs[c]);
    e.n_samples /= seen_runs[c];
  }

  if (categories.empty()) categories = data.corpus->categories();
  for (const auto& category : categories) {
    double across = 0.0;
    for (auto seed : spec.seeds) {
      const auto split = carve_dev(split_leave_one_category_out(instances, *data.corpus, category), 0.15, seed);
      auto run = train_and_score(features, select(instances, spec.task, split, Split::train),
                                 select(instances, spec.task, split, Split::dev),
                                 select(instances, spec.task, split, Split::test), spec, seed);
      across += run.report.accuracy;
    }
    report[category].accuracy_across = across / static_cast<double>(spec.seeds.size());
  }
  return report;
}

inline nlohmann::ordered_json to_json(const ExperimentResult& r) {
  nlohmann::ordered_json j;
  j["spec"] = to_json(r.spec);
  j["report"] = eval::to_json(r.report);
  j["class_priors"] = nlohmann::ordered_json::object();
  for (const auto& [c, p] : r.class_priors) j["class_priors"][c] = p;
  j["runs"] = nlohmann::ordered_json::array();
  for (const auto& run : r.runs) {
    nlohmann::ordered_json rj;
    rj["seed"] = run.seed;
    rj["best_C"] = run.best_C;
    rj["dev_accuracy"] = run.dev_accuracy;
    rj["report"] = eval::to_json(run.report);
    j["runs"].push_back(rj);
  }
  return j;
}

}  // namespace claimrev::tasks
