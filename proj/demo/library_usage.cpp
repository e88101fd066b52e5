// Detection with parent context on a corpus directory holding
// debates.jsonl, claims.jsonl and vectors.txt.

#include <iostream>

#include <claimrev/claimrev.hpp>

using namespace claimrev;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: library_usage CORPUS_DIR\n";
    return 1;
  }
  const std::filesystem::path dir = argv[1];
  try {
    const Corpus corpus = parse_corpus(dir / "debates.jsonl", dir / "claims.jsonl");
    const auto filter = FilterConfig::from_dates(parse_timestamp("2020-06-26"));
    const auto instances = assign_labels(clean_histories(corpus.histories(), filter));

    const auto table = load_static_table(dir / "vectors.txt");
    const FeatureSource source(table);

    tasks::ExperimentSpec spec;
    spec.features.context = ContextKind::parent;
    tasks::ExperimentData data{&corpus, &instances, &source, tasks::make_splits(instances, spec.seeds)};
    const auto result = tasks::run_experiment(spec, data);
    std::cout << eval::to_json(result.report).dump(2) << "\n";
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
