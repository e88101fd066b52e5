#pragma once

// claimrev command line. Every subcommand reads and writes one run
// directory (--out):
//
//   corpus/debates.jsonl, corpus/claims.jsonl   copy of the ingested corpus
//   instances.jsonl, accounting.json            cleaned, labeled instances
//   datasets.tsv                                D1..Dk claim ids
//   splits/seed-N.tsv, splits/holdout-C/seed-N.tsv
//   features-<context>.embx                     one feature row per claim_id
//   models/<set>/seed-N.json, models/<set>/selection.json
//   reports/<set>.json, reports/<set>.confusion.csv, reports/summary.txt
//   <step>.manifest.json                        config hash, seeds, input hashes

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "claimrev/claimrev.hpp"

namespace claimrev::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/// Paths inside a run directory.
struct RunDir {
  fs::path root;

  fs::path debates() const { return root / "corpus" / "debates.jsonl"; }
  fs::path claims() const { return root / "corpus" / "claims.jsonl"; }
  fs::path instances() const { return root / "instances.jsonl"; }
  fs::path accounting() const { return root / "accounting.json"; }
  fs::path datasets() const { return root / "datasets.tsv"; }
  fs::path split_dir(const std::string& holdout) const {
    return holdout.empty() ? root / "splits" : root / "splits" / ("holdout-" + slug(holdout));
  }
  fs::path split(std::uint64_t seed, const std::string& holdout = {}) const {
    return split_dir(holdout) / ("seed-" + std::to_string(seed) + ".tsv");
  }
  fs::path features(ContextKind c) const { return root / ("features-" + std::string(to_string(c)) + ".embx"); }
  fs::path model_dir(const std::string& set) const { return root / "models" / set; }
  fs::path model(const std::string& set, std::uint64_t seed) const {
    return model_dir(set) / ("seed-" + std::to_string(seed) + ".json");
  }
  fs::path report(const std::string& set) const { return root / "reports" / (set + ".json"); }
  fs::path manifest(const std::string& step) const { return root / (step + ".manifest.json"); }

  static std::string slug(std::string_view s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out;
  }
};

inline std::string config_hash(const json& config) { return io::sha256_hex(config.dump()); }

inline std::string display_path(const RunDir& run, const fs::path& p) {
  const auto rel = p.lexically_relative(run.root);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return p.generic_string();
}

inline void refuse_existing_manifest(const RunDir& run, const std::string& step, bool force) {
  if (!force && fs::exists(run.manifest(step))) {
    throw ValidationError(display_path(run, run.manifest(step)) +
                          " already exists; pass --force to overwrite this run step");
  }
}

inline void write_manifest(const RunDir& run, const std::string& step, const json& config,
                           const std::vector<std::uint64_t>& seeds, const std::vector<fs::path>& inputs,
                           const std::vector<fs::path>& outputs) {
  json m;
  m["step"] = step;
  m["tool_version"] = io::kToolVersion;
  m["config"] = config;
  m["config_hash"] = config_hash(config);
  m["seeds"] = seeds;
  m["inputs"] = json::object();
  for (const auto& p : inputs) m["inputs"][display_path(run, p)] = io::sha256_file(p);
  m["outputs"] = json::object();
  for (const auto& p : outputs) m["outputs"][display_path(run, p)] = io::sha256_file(p);
  io::write_file_atomic(run.manifest(step), m.dump(2) + "\n");
}

inline void require_file(const fs::path& p, const std::string& hint) {
  if (!fs::exists(p)) throw ValidationError("missing " + p.generic_string() + "; " + hint);
}

inline json read_json(const fs::path& p) {
  try {
    return json::parse(io::read_file(p));
  } catch (const json::parse_error& e) {
    throw FormatError(p.generic_string() + ": " + e.what(), FormatError::Unit::byte, e.byte);
  }
}

// ---------------------------------------------------------------------------
// Shared experiment plumbing
// ---------------------------------------------------------------------------

struct ExperimentOptions {
  std::string task = "suboptimal_detection";
  std::string dataset = "full";
  std::string context = "none";
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string holdout;
  std::vector<double> grid = svm::kDefaultGrid;
  std::uint32_t max_iterations = 1000;
  unsigned jobs = 1;
  bool force = false;
  std::string spec_file;

  tasks::Task parsed_task() const {
    auto t = tasks::parse_task(task);
    if (!t) throw ValidationError("unknown task '" + task + "' (suboptimal_detection, improvement_suggestion, end_to_end)");
    return *t;
  }
  std::uint32_t parsed_dataset() const {
    auto d = tasks::parse_dataset(dataset);
    if (!d) throw ValidationError("unknown dataset '" + dataset + "' (full, D1, D2, ...)");
    return *d;
  }
  ContextKind parsed_context() const {
    auto c = parse_context(context);
    if (!c) throw ValidationError("unknown context '" + context + "' (none, thesis, parent)");
    return *c;
  }
  std::string set_name() const {
    std::string s = task + "-" + dataset + "-" + context;
    if (!holdout.empty()) s += "-holdout-" + RunDir::slug(holdout);
    return s;
  }
  json to_json() const {
    json j;
    j["task"] = task;
    j["dataset"] = dataset;
    j["context"] = context;
    j["seeds"] = seeds;
    j["holdout"] = holdout;
    j["grid"] = grid;
    j["max_iterations"] = max_iterations;
    return j;
  }
  void validate() const {
    const auto t = parsed_task();
    const auto d = parsed_dataset();
    parsed_context();
    if (seeds.empty()) throw ValidationError("--seeds must name at least one seed");
    if (grid.empty()) throw ValidationError("--grid must name at least one C value");
    if (d != 0 && t != tasks::Task::suboptimal_detection) {
      throw ValidationError("revision-distance datasets only apply to suboptimal_detection");
    }
    if (d != 0 && !holdout.empty()) throw ValidationError("--holdout only applies to the full dataset");
  }
};

inline void add_experiment_options(CLI::App* sub, ExperimentOptions& o) {
  sub->add_option("--task", o.task, "suboptimal_detection | improvement_suggestion | end_to_end")->capture_default_str();
  sub->add_option("--dataset", o.dataset, "full or Di (revision distance i)")->capture_default_str();
  sub->add_option("--context", o.context, "none | thesis | parent")->capture_default_str();
  sub->add_option("--seeds", o.seeds, "comma-separated run seeds")->delimiter(',')->capture_default_str();
  sub->add_option("--holdout", o.holdout, "category held out as the test set");
  sub->add_option("--grid", o.grid, "comma-separated C values")->delimiter(',')->capture_default_str();
  sub->add_option("--max-iterations", o.max_iterations)->capture_default_str();
  sub->add_option("--jobs", o.jobs, "worker threads")->capture_default_str();
  sub->add_flag("--force", o.force, "overwrite an existing manifest");
  sub->add_option("--spec", o.spec_file, "experiment spec (JSON); flags given on the command line win");
}

/// Fills every experiment option not given on the command line from the
/// --spec file.
inline void apply_spec_file(const CLI::App& sub, ExperimentOptions& o) {
  if (o.spec_file.empty()) return;
  const json j = read_json(o.spec_file);
  if (!j.is_object()) throw ValidationError(o.spec_file + ": spec must be a JSON object");
  auto unset = [&](const char* flag) { return sub.get_option(flag)->count() == 0; };
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "task") {
        if (unset("--task")) o.task = value.get<std::string>();
      } else if (key == "dataset") {
        if (unset("--dataset")) o.dataset = value.get<std::string>();
      } else if (key == "context") {
        if (unset("--context")) o.context = value.get<std::string>();
      } else if (key == "seeds") {
        if (unset("--seeds")) o.seeds = value.get<std::vector<std::uint64_t>>();
      } else if (key == "holdout") {
        if (unset("--holdout")) o.holdout = value.get<std::string>();
      } else if (key == "grid") {
        if (unset("--grid")) o.grid = value.get<std::vector<double>>();
      } else if (key == "max_iterations") {
        if (unset("--max-iterations")) o.max_iterations = value.get<std::uint32_t>();
      } else if (key == "jobs") {
        if (unset("--jobs")) o.jobs = value.get<unsigned>();
      } else {
        throw ValidationError(o.spec_file + ": unknown spec key '" + key + "'");
      }
    }
  } catch (const json::type_error& e) {
    throw ValidationError(o.spec_file + ": " + e.what());
  }
}

/// Loaded run state for train and eval.
struct Loaded {
  Corpus corpus;
  std::vector<LabeledInstance> instances;
  FeatureMatrix features;
  std::optional<std::set<std::string>> restrict_to;
  std::vector<fs::path> inputs;
};

inline FeatureMatrix features_from_embx(const EmbeddingMatrix& m, const std::vector<LabeledInstance>& instances,
                                        const fs::path& path) {
  FeatureMatrix out(instances.size(), m.dim());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto* v = m.find(instances[i].claim_id);
    if (!v) {
      throw ValidationError(path.generic_string() + " has no row for claim '" + instances[i].claim_id +
                            "'; re-run featurize after ingest");
    }
    std::copy(v->begin(), v->end(), out.row(i).begin());
  }
  return out;
}

inline std::set<std::string> dataset_ids(const RunDir& run, std::uint32_t d) {
  require_file(run.datasets(), "run `claimrev sample --out " + run.root.generic_string() + "` first");
  const auto all = read_distance_datasets(run.datasets());
  if (d > all.size()) {
    throw ValidationError("dataset D" + std::to_string(d) + " not compiled (max_distance " + std::to_string(all.size()) + ")");
  }
  return all[d - 1].claim_ids;
}

inline Loaded load_run(const RunDir& run, const ExperimentOptions& o) {
  const std::string dir = run.root.generic_string();
  require_file(run.instances(), "run `claimrev ingest --out " + dir + "` first");
  const auto context = o.parsed_context();
  require_file(run.features(context), "run `claimrev featurize --out " + dir + " --context " + o.context +
                                          "` before training or evaluating with this context");
  Loaded l;
  l.corpus = parse_corpus(run.debates(), run.claims());
  l.instances = read_instances(run.instances());
  l.features = features_from_embx(read_embx(run.features(context)), l.instances, run.features(context));
  l.inputs = {run.instances(), run.features(context)};
  if (const auto d = o.parsed_dataset(); d != 0) {
    l.restrict_to = dataset_ids(run, d);
    l.inputs.push_back(run.datasets());
  }
  return l;
}

inline SplitAssignment load_split(const RunDir& run, const ExperimentOptions& o, std::uint64_t seed,
                                  std::vector<fs::path>& inputs) {
  const auto path = run.split(seed, o.holdout);
  std::string hint = "run `claimrev split --out " + run.root.generic_string() + " --seeds " + std::to_string(seed);
  if (!o.holdout.empty()) hint += " --holdout " + o.holdout;
  require_file(path, hint + "` first");
  inputs.push_back(path);
  return read_split(path);
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct SynthOptions {
  synth::SynthConfig config;
  bool force = false;
};

inline int cmd_synth(const RunDir& run, const SynthOptions& o, std::ostream& out) {
  json config;
  config["histories"] = o.config.histories;
  config["seed"] = o.config.seed;
  config["planted_reverts"] = o.config.planted_reverts;
  config["embedding_dim"] = o.config.embedding_dim;
  refuse_existing_manifest(run, "synth", o.force);
  const auto s = synth::generate(o.config);
  const fs::path debates = run.root / "debates.jsonl", claims = run.root / "claims.jsonl",
                 embeddings = run.root / "embeddings.txt", filter = run.root / "filter.json";
  write_corpus(s.corpus, debates, claims);
  io::write_file_atomic(embeddings, serialize_static_table(s.embeddings));
  io::write_file_atomic(filter, to_json(s.filter).dump(2) + "\n");
  write_manifest(run, "synth", config, {o.config.seed}, {}, {debates, claims, embeddings, filter});
  out << "synthesized " << s.corpus.histories().size() << " histories, " << s.corpus.claim_count() << " claims in "
      << run.root.generic_string() << "\n";
  return 0;
}

struct IngestOptions {
  std::string debates;
  std::string corpus;
  std::string config;
  std::string collection_date;
  std::string recheck_date;
  bool force = false;
};

inline int cmd_ingest(const RunDir& run, const IngestOptions& o, std::ostream& out) {
  if (o.debates.empty() || o.corpus.empty()) throw ValidationError("ingest needs --debates and --corpus");
  FilterConfig filter;
  std::vector<fs::path> inputs{o.debates, o.corpus};
  if (!o.config.empty()) {
    filter = filter_config_from_json(nlohmann::json::parse(io::read_file(o.config)));
    inputs.push_back(o.config);
  } else if (!o.collection_date.empty()) {
    std::optional<Timestamp> recheck;
    if (!o.recheck_date.empty()) recheck = parse_timestamp(o.recheck_date);
    filter = FilterConfig::from_dates(parse_timestamp(o.collection_date), recheck);
  } else {
    throw ValidationError("ingest needs --config <filter.json> or --collection-date");
  }
  json config;
  config["filter"] = to_json(filter);
  refuse_existing_manifest(run, "ingest", o.force);

  const Corpus corpus = parse_corpus(o.debates, o.corpus);
  const auto without_reverts = filter_reverts(corpus.histories());
  const auto cleaned = filter_unrevised(without_reverts, filter);
  const auto instances = assign_labels(cleaned);
  const auto accounting = account(instances);

  write_corpus(corpus, run.debates(), run.claims());
  io::write_file_atomic(run.instances(), serialize_instances(instances));
  json acc;
  acc["tool_version"] = io::kToolVersion;
  acc["config_hash"] = config_hash(config);
  acc["histories_parsed"] = corpus.histories().size();
  acc["histories_reverted"] = corpus.histories().size() - without_reverts.size();
  acc["histories_recent_unrevised"] = without_reverts.size() - cleaned.size();
  acc["histories_kept"] = cleaned.size();
  acc["counts"] = to_json(accounting);
  io::write_file_atomic(run.accounting(), acc.dump(2) + "\n");
  write_manifest(run, "ingest", config, {}, inputs, {run.debates(), run.claims(), run.instances(), run.accounting()});

  out << "kept " << cleaned.size() << " of " << corpus.histories().size() << " histories ("
      << acc["histories_reverted"].get<std::size_t>() << " reverted, "
      << acc["histories_recent_unrevised"].get<std::size_t>() << " recent unrevised)\n"
      << render_accounting(accounting);
  return 0;
}

struct SampleOptions {
  std::uint32_t min_revisions = 4;
  std::uint32_t max_distance = 4;
  bool force = false;
};

inline int cmd_sample(const RunDir& run, const SampleOptions& o, std::ostream& out) {
  require_file(run.instances(), "run `claimrev ingest --out " + run.root.generic_string() + "` first");
  json config;
  config["min_revisions"] = o.min_revisions;
  config["max_distance"] = o.max_distance;
  refuse_existing_manifest(run, "sample", o.force);
  const auto instances = read_instances(run.instances());
  const auto datasets = compile_distance_datasets(instances, o.min_revisions, o.max_distance);
  io::write_file_atomic(run.datasets(), serialize_distance_datasets(datasets, o.min_revisions, config_hash(config)));
  write_manifest(run, "sample", config, {}, {run.instances()}, {run.datasets()});
  for (const auto& ds : datasets) {
    out << "D" << ds.distance << ": " << ds.positives.size() << " positive, " << ds.negatives.size() << " negative\n";
  }
  return 0;
}

struct SplitOptions {
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<double> ratios{0.70, 0.15, 0.15};
  std::string holdout;
  double dev_fraction = 0.15;
  bool force = false;
};

inline int cmd_split(const RunDir& run, const SplitOptions& o, std::ostream& out) {
  require_file(run.instances(), "run `claimrev ingest --out " + run.root.generic_string() + "` first");
  if (o.seeds.empty()) throw ValidationError("--seeds must name at least one seed");
  if (o.ratios.size() != 3) throw ValidationError("--ratios takes three comma-separated values");
  json config;
  config["ratios"] = o.ratios;
  config["holdout"] = o.holdout;
  config["dev_fraction"] = o.dev_fraction;
  const std::string step = o.holdout.empty() ? "split" : "split-holdout-" + RunDir::slug(o.holdout);
  refuse_existing_manifest(run, step, o.force);
  const auto instances = read_instances(run.instances());
  std::vector<fs::path> inputs{run.instances()}, outputs;
  std::optional<Corpus> corpus;
  if (!o.holdout.empty()) {
    corpus = parse_corpus(run.debates(), run.claims());
    inputs.push_back(run.debates());
  }
  const std::array<double, 3> ratios{o.ratios[0], o.ratios[1], o.ratios[2]};
  for (auto seed : o.seeds) {
    const SplitAssignment split = o.holdout.empty()
                                      ? split_by_history(instances, ratios, seed)
                                      : carve_dev(split_leave_one_category_out(instances, *corpus, o.holdout),
                                                  o.dev_fraction, seed);
    const auto path = run.split(seed, o.holdout);
    io::write_file_atomic(path, serialize_split(split, config_hash(config)));
    outputs.push_back(path);
    const auto c = split.counts();
    out << "seed " << seed << ": " << c[0] << " train, " << c[1] << " dev, " << c[2] << " test histories\n";
  }
  write_manifest(run, step, config, o.seeds, inputs, outputs);
  return 0;
}

struct FeaturizeOptions {
  std::string embeddings;
  std::string embx;
  std::string context = "none";
  bool keep_case = false;
  unsigned jobs = 1;
  bool force = false;
};

inline int cmd_featurize(const RunDir& run, const FeaturizeOptions& o, std::ostream& out) {
  require_file(run.instances(), "run `claimrev ingest --out " + run.root.generic_string() + "` first");
  if (o.embeddings.empty() == o.embx.empty()) {
    throw ValidationError("featurize needs exactly one of --embeddings <word vectors> or --embx <claim vectors>");
  }
  auto context = parse_context(o.context);
  if (!context) throw ValidationError("unknown context '" + o.context + "' (none, thesis, parent)");
  FeatureConfig cfg;
  cfg.mode = o.embx.empty() ? FeatureMode::static_pool : FeatureMode::embx;
  cfg.context = *context;
  cfg.lowercase = !o.keep_case;
  json config;
  config["mode"] = std::string(to_string(cfg.mode));
  config["context"] = o.context;
  config["pooling"] = "mean";
  config["lowercase"] = cfg.lowercase;
  const std::string step = "featurize-" + o.context;
  refuse_existing_manifest(run, step, o.force);

  const Corpus corpus = parse_corpus(run.debates(), run.claims());
  const auto instances = read_instances(run.instances());
  StaticEmbeddingTable table;
  EmbeddingMatrix matrix;
  std::optional<FeatureSource> source;
  if (cfg.mode == FeatureMode::static_pool) {
    table = load_static_table(o.embeddings);
    source.emplace(table);
  } else {
    matrix = read_embx(o.embx);
    source.emplace(matrix);
  }
  const FeatureMatrix features = featurize_all(instances, corpus, cfg, *source, o.jobs);
  EmbeddingMatrix rows(static_cast<std::uint32_t>(features.cols()));
  for (std::size_t i = 0; i < instances.size(); ++i) {
    auto r = features.row(i);
    rows.add(instances[i].claim_id, {r.begin(), r.end()});
  }
  write_embx(rows, run.features(*context));
  write_manifest(run, step, config, {}, {run.instances(), run.claims(), o.embx.empty() ? fs::path(o.embeddings) : fs::path(o.embx)},
                 {run.features(*context)});
  out << "wrote " << rows.size() << " feature rows of dimension " << rows.dim() << " to "
      << display_path(run, run.features(*context)) << "\n";
  return 0;
}

inline tasks::Slice slice(const Loaded& l, tasks::Task task, const SplitAssignment& split, Split which) {
  return tasks::select(l.instances, task, split, which, l.restrict_to ? &*l.restrict_to : nullptr);
}

inline int cmd_train(const RunDir& run, const ExperimentOptions& o, std::ostream& out) {
  o.validate();
  const auto task = o.parsed_task();
  const std::string set = o.set_name();
  const json config = o.to_json();
  refuse_existing_manifest(run, "train-" + set, o.force);
  Loaded l = load_run(run, o);
  std::vector<fs::path> outputs;
  json selection;
  selection["tool_version"] = io::kToolVersion;
  selection["config_hash"] = config_hash(config);
  selection["runs"] = json::array();
  svm::SvmConfig base;
  base.max_iterations = o.max_iterations;
  std::vector<std::string> declared = tasks::task_classes(task);
  if (task == tasks::Task::suboptimal_detection) declared.clear();
  for (auto seed : o.seeds) {
    const auto split = load_split(run, o, seed, l.inputs);
    const auto train = slice(l, task, split, Split::train);
    const auto dev = slice(l, task, split, Split::dev);
    if (train.rows.empty() || dev.rows.empty()) {
      throw ValidationError("seed " + std::to_string(seed) + ": empty train or dev slice for " + set);
    }
    base.seed = seed;
    const auto grid = svm::grid_select(l.features.select(train.rows), train.labels, l.features.select(dev.rows),
                                       dev.labels, o.grid, base, declared, o.jobs);
    svm::write_model(grid.model, run.model(set, seed), config_hash(config));
    outputs.push_back(run.model(set, seed));
    json r;
    r["seed"] = seed;
    r["best_C"] = grid.best_C;
    r["dev_accuracy"] = grid.dev_accuracy;
    r["train_instances"] = train.rows.size();
    r["dev_instances"] = dev.rows.size();
    selection["runs"].push_back(r);
    out << set << " seed " << seed << ": C=" << grid.best_C << " (" << train.rows.size() << " train, "
        << dev.rows.size() << " dev)\n";
  }
  const auto selection_path = run.model_dir(set) / "selection.json";
  io::write_file_atomic(selection_path, selection.dump(2) + "\n");
  outputs.push_back(selection_path);
  write_manifest(run, "train-" + set, config, o.seeds, l.inputs, outputs);
  return 0;
}

struct EvalOptions {
  ExperimentOptions experiment;
  std::vector<std::string> test_datasets;
};

inline int cmd_eval(const RunDir& run, const EvalOptions& eo, std::ostream& out) {
  const ExperimentOptions& o = eo.experiment;
  o.validate();
  const auto task = o.parsed_task();
  const std::string set = o.set_name();
  json config = o.to_json();
  config["test_datasets"] = eo.test_datasets;
  if (!eo.test_datasets.empty() && task != tasks::Task::suboptimal_detection) {
    throw ValidationError("--test-datasets only applies to suboptimal_detection");
  }
  refuse_existing_manifest(run, "eval-" + set, o.force);
  Loaded l = load_run(run, o);
  std::vector<std::pair<std::string, std::set<std::string>>> cross;
  for (const auto& name : eo.test_datasets) {
    auto d = tasks::parse_dataset(name);
    if (!d || *d == 0) throw ValidationError("--test-datasets takes Di names, got '" + name + "'");
    cross.emplace_back(name, dataset_ids(run, *d));
  }
  if (!cross.empty()) l.inputs.push_back(run.datasets());

  const auto classes = tasks::task_classes(task);
  std::vector<eval::EvalReport> reports;
  std::map<std::string, std::vector<double>> cross_acc;
  eval::TopicReport topics;
  std::map<std::string, std::size_t> topic_runs;
  json runs = json::array();
  for (auto seed : o.seeds) {
    const auto model_path = run.model(set, seed);
    require_file(model_path, "run `claimrev train` with the same --task/--dataset/--context/--seeds first");
    l.inputs.push_back(model_path);
    const auto model = svm::read_model(model_path);
    const auto split = load_split(run, o, seed, l.inputs);
    const auto test = slice(l, task, split, Split::test);
    if (test.rows.empty()) throw ValidationError("seed " + std::to_string(seed) + ": empty test slice for " + set);
    const auto predictions = svm::predict(model, l.features.select(test.rows));
    reports.push_back(eval::score(predictions, test.labels, classes));
    runs.push_back({{"seed", seed}, {"test_instances", test.rows.size()}, {"report", eval::to_json(reports.back())}});

    for (const auto& [name, ids] : cross) {
      const auto s = tasks::select(l.instances, task, split, Split::test, &ids);
      if (s.rows.empty()) throw ValidationError("seed " + std::to_string(seed) + ": empty " + name + " test slice");
      cross_acc[name].push_back(svm::accuracy(svm::predict(model, l.features.select(s.rows)), s.labels));
    }

    if (o.holdout.empty() && o.parsed_dataset() == 0) {
      std::vector<LabeledInstance> subset;
      for (auto row : test.rows) subset.push_back(l.instances[row]);
      for (const auto& [c, e] : eval::topic_breakdown(predictions, test.labels, subset, l.corpus)) {
        topics[c].accuracy_full += e.accuracy_full;
        topics[c].n_samples += e.n_samples;
        ++topic_runs[c];
      }
    }
  }
  for (auto& [c, e] : topics) {
    e.accuracy_full /= static_cast<double>(topic_runs[c]);
    e.n_samples /= topic_runs[c];
  }

  const auto report = eval::averaged_runs(reports);
  const auto priors = tasks::class_priors(l.instances, task);
  std::vector<double> prior_values;
  for (const auto& [c, p] : priors) prior_values.push_back(p);

  json j;
  j["format"] = "claimrev-eval-report";
  j["tool_version"] = io::kToolVersion;
  j["config_hash"] = config_hash(config);
  j["set"] = set;
  j["config"] = config;
  j["report"] = eval::to_json(report);
  j["random_baseline"] = eval::to_json(eval::uniform_random_baseline(classes, prior_values));
  j["class_priors"] = json::object();
  for (const auto& [c, p] : priors) j["class_priors"][c] = p;
  j["runs"] = runs;
  j["cross"] = json::object();
  for (const auto& [name, accs] : cross_acc) {
    double mean = 0.0;
    for (double a : accs) mean += a / static_cast<double>(accs.size());
    j["cross"][name] = {{"accuracy", mean}, {"per_run_accuracy", accs}};
  }
  j["topics"] = json::object();
  for (const auto& [c, e] : topics) j["topics"][c] = {{"accuracy", e.accuracy_full}, {"n_samples", e.n_samples}};

  const auto report_path = run.report(set);
  const auto csv_path = run.root / "reports" / (set + ".confusion.csv");
  io::write_file_atomic(report_path, j.dump(2) + "\n");
  io::write_file_atomic(csv_path, eval::confusion_csv(report));
  write_manifest(run, "eval-" + set, config, o.seeds, l.inputs, {report_path, csv_path});

  if (task == tasks::Task::suboptimal_detection) {
    out << eval::render_detection_table({{set, report}});
  } else {
    out << eval::render_per_class_table({{set, report}});
  }
  return 0;
}

struct ReportOptions {
  bool force = false;
};

/// Collects every eval report in the run into reports/summary.txt.
inline int cmd_report(const RunDir& run, const ReportOptions& o, std::ostream& out) {
  const fs::path dir = run.root / "reports";
  if (!fs::is_directory(dir)) throw ValidationError("no reports in " + run.root.generic_string() + "; run `claimrev eval` first");
  refuse_existing_manifest(run, "report", o.force);
  std::vector<fs::path> inputs;
  std::map<std::string, json> sets;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto p = entry.path();
    if (p.extension() != ".json" || p.filename() == "summary.json") continue;
    auto j = read_json(p);
    if (j.value("format", "") != "claimrev-eval-report") continue;
    sets.emplace(j.at("set").get<std::string>(), std::move(j));
    inputs.push_back(p);
  }
  if (sets.empty()) throw ValidationError("no eval reports in " + dir.generic_string() + "; run `claimrev eval` first");
  std::sort(inputs.begin(), inputs.end());

  std::string text;
  if (fs::exists(run.instances())) {
    inputs.push_back(run.instances());
    text += "Class accounting\n\n" + render_accounting(account(read_instances(run.instances()))) + "\n";
  }

  std::map<std::string, std::vector<std::pair<std::string, eval::EvalReport>>> by_task;
  for (const auto& [set, j] : sets) {
    const auto task = j.at("config").at("task").get<std::string>();
    auto& rows = by_task[task];
    if (rows.empty()) rows.emplace_back("Random baseline", eval::report_from_json(j.at("random_baseline")));
    rows.emplace_back(set, eval::report_from_json(j.at("report")));
  }
  for (const auto& [task, rows] : by_task) {
    text += task + "\n\n";
    text += task == "suboptimal_detection" ? eval::render_detection_table(rows) : eval::render_per_class_table(rows);
    text += "\n";
    if (task != "suboptimal_detection") {
      for (std::size_t r = 1; r < rows.size(); ++r) {
        text += "Confusion (" + rows[r].first + ")\n\n" + eval::render_confusion_table(rows[r].second) + "\n";
      }
    }
  }

  // Context variants against the no-context run of the same task and dataset.
  std::string significance;
  for (const auto& [set, j] : sets) {
    const auto& c = j.at("config");
    if (c.at("context") == "none" || !c.at("holdout").get<std::string>().empty()) continue;
    ExperimentOptions base;
    base.task = c.at("task");
    base.dataset = c.at("dataset");
    base.context = "none";
    auto it = sets.find(base.set_name());
    if (it == sets.end()) continue;
    const auto a = j.at("report").at("per_run_accuracy").get<std::vector<double>>();
    const auto b = it->second.at("report").at("per_run_accuracy").get<std::vector<double>>();
    if (a.size() < 2 || b.size() < 2) continue;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s vs %s: accuracy %+.1f points, p = %.4f\n", set.c_str(), it->first.c_str(),
                  100.0 * (j.at("report").at("accuracy").get<double>() - it->second.at("report").at("accuracy").get<double>()),
                  eval::t_test(a, b));
    significance += buf;
  }
  if (!significance.empty()) text += "Significance (two-sided t-test on per-run accuracy)\n\n" + significance + "\n";

  // Train-subset x test-subset matrix, when every Di model was evaluated on every Dj.
  for (const std::string context : {"none", "thesis", "parent"}) {
    tasks::DistanceMatrix m;
    for (std::uint32_t d = 1;; ++d) {
      auto it = sets.find("suboptimal_detection-D" + std::to_string(d) + "-" + context);
      if (it == sets.end() || it->second.at("cross").empty()) break;
      m.train_rows.push_back(tasks::dataset_name(d));
    }
    auto full = sets.find("suboptimal_detection-full-" + context);
    if (m.train_rows.empty() || full == sets.end() || full->second.at("cross").size() != m.train_rows.size()) continue;
    m.test_cols = m.train_rows;
    m.train_rows.push_back("Full training set");
    bool complete = true;
    for (std::size_t r = 0; r < m.train_rows.size() && complete; ++r) {
      const auto& j = r + 1 < m.train_rows.size() ? sets.at("suboptimal_detection-" + m.train_rows[r] + "-" + context)
                                                  : full->second;
      std::vector<double> row;
      for (const auto& col : m.test_cols) {
        if (!j.at("cross").contains(col)) {
          complete = false;
          break;
        }
        row.push_back(j.at("cross").at(col).at("accuracy").get<double>());
      }
      m.accuracy.push_back(std::move(row));
    }
    if (!complete) continue;
    text += "Accuracy by training subset and test subset (context: " + context + ")\n\n" +
            tasks::render_distance_table(m) + "\n";
  }

  // Per-topic accuracy with leave-one-category-out results where available.
  auto full = sets.find("suboptimal_detection-full-none");
  if (full != sets.end() && !full->second.at("topics").empty()) {
    eval::TopicReport topics;
    for (const auto& [c, e] : full->second.at("topics").items()) {
      topics[c] = {e.at("accuracy").get<double>(), std::nullopt, e.at("n_samples").get<std::size_t>()};
      ExperimentOptions h;
      h.holdout = c;
      auto it = sets.find(h.set_name());
      if (it != sets.end()) topics[c].accuracy_across = it->second.at("report").at("accuracy").get<double>();
    }
    text += "Accuracy per topic\n\n" + eval::render_topic_table(topics);
    bool all_across = topics.size() >= 3;
    for (const auto& [c, e] : topics) all_across = all_across && e.accuracy_across.has_value();
    if (all_across) {
      const auto r = eval::size_accuracy_correlation(topics);
      char buf[96];
      if (r) {
        std::snprintf(buf, sizeof buf, "\nPearson r (category size, cross-category accuracy) = %.3f\n", *r);
      } else {
        std::snprintf(buf, sizeof buf, "\nPearson r (category size, cross-category accuracy) undefined\n");
      }
      text += buf;
    }
    text += "\n";
    io::write_file_atomic(dir / "topics.csv", eval::topic_csv(topics));
  }

  const auto summary = dir / "summary.txt";
  io::write_file_atomic(summary, text);
  std::vector<fs::path> outputs{summary};
  if (fs::exists(dir / "topics.csv")) outputs.push_back(dir / "topics.csv");
  write_manifest(run, "report", json::object(), {}, inputs, outputs);
  out << text;
  return 0;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Runs the CLI on `args` (program name excluded). Returns the exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"claimrev: revision-history corpora, sampling and linear claim-quality classifiers", "claimrev"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(io::kToolVersion));
  std::string out_dir;
  auto add_out = [&out_dir](CLI::App* sub) { sub->add_option("--out", out_dir, "run directory")->required(); };

  SynthOptions synth_o;
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus and word vectors");
  add_out(synth);
  synth->add_option("--histories", synth_o.config.histories)->capture_default_str();
  synth->add_option("--seed", synth_o.config.seed)->capture_default_str();
  synth->add_option("--reverts", synth_o.config.planted_reverts, "histories with a planted revert")->capture_default_str();
  synth->add_option("--dim", synth_o.config.embedding_dim, "word vector dimension")->capture_default_str();
  synth->add_flag("--force", synth_o.force);

  IngestOptions ingest_o;
  auto* ingest = app.add_subcommand("ingest", "parse, filter and label a corpus");
  add_out(ingest);
  ingest->add_option("--debates", ingest_o.debates, "debates JSONL")->required();
  ingest->add_option("--corpus", ingest_o.corpus, "claims JSONL")->required();
  ingest->add_option("--config", ingest_o.config, "filter config JSON");
  ingest->add_option("--collection-date", ingest_o.collection_date);
  ingest->add_option("--recheck-date", ingest_o.recheck_date);
  ingest->add_flag("--force", ingest_o.force);

  SampleOptions sample_o;
  auto* sample = app.add_subcommand("sample", "compile revision-distance datasets D1..Dk");
  add_out(sample);
  sample->add_option("--min-revisions", sample_o.min_revisions)->capture_default_str();
  sample->add_option("--max-distance", sample_o.max_distance)->capture_default_str();
  sample->add_flag("--force", sample_o.force);

  SplitOptions split_o;
  auto* split = app.add_subcommand("split", "assign histories to train/dev/test");
  add_out(split);
  split->add_option("--seeds", split_o.seeds)->delimiter(',')->capture_default_str();
  split->add_option("--ratios", split_o.ratios)->delimiter(',')->capture_default_str();
  split->add_option("--holdout", split_o.holdout, "category to hold out as the test set");
  split->add_option("--dev-fraction", split_o.dev_fraction, "dev share of train histories for --holdout")->capture_default_str();
  split->add_flag("--force", split_o.force);

  FeaturizeOptions feat_o;
  auto* featurize = app.add_subcommand("featurize", "compute one feature row per instance");
  add_out(featurize);
  featurize->add_option("--embeddings", feat_o.embeddings, "word vectors, text format");
  featurize->add_option("--embx", feat_o.embx, "precomputed vectors keyed by claim_id / debate_id");
  featurize->add_option("--context", feat_o.context, "none | thesis | parent")->capture_default_str();
  featurize->add_flag("--keep-case", feat_o.keep_case, "do not lowercase tokens");
  featurize->add_option("--jobs", feat_o.jobs)->capture_default_str();
  featurize->add_flag("--force", feat_o.force);

  ExperimentOptions train_o;
  auto* train = app.add_subcommand("train", "select C on dev and write one model per seed");
  add_out(train);
  add_experiment_options(train, train_o);

  EvalOptions eval_o;
  auto* evaluate = app.add_subcommand("eval", "score trained models on the test split");
  add_out(evaluate);
  add_experiment_options(evaluate, eval_o.experiment);
  evaluate->add_option("--test-datasets", eval_o.test_datasets, "also score on these Di test subsets")->delimiter(',');

  ReportOptions report_o;
  auto* report = app.add_subcommand("report", "render tables from every eval report");
  add_out(report);
  report->add_flag("--force", report_o.force);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << io::kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* which = &app;
    for (const auto* sub : app.get_subcommands()) which = sub;
    err << which->help();
    return 1;
  }

  const RunDir run{out_dir};
  try {
    if (*synth) return cmd_synth(run, synth_o, out);
    if (*ingest) return cmd_ingest(run, ingest_o, out);
    if (*sample) return cmd_sample(run, sample_o, out);
    if (*split) return cmd_split(run, split_o, out);
    if (*featurize) return cmd_featurize(run, feat_o, out);
    if (*train) {
      apply_spec_file(*train, train_o);
      return cmd_train(run, train_o, out);
    }
    if (*evaluate) {
      apply_spec_file(*evaluate, eval_o.experiment);
      return cmd_eval(run, eval_o, out);
    }
    if (*report) return cmd_report(run, report_o, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "format error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace claimrev::cli
