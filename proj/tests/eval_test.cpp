#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles/oracles.hpp"

using namespace claimrev;

namespace {

using Labels = std::vector<std::string>;

void expect_matches_oracle(const eval::EvalReport& r, const oracle::Metrics& m, double tol) {
  EXPECT_NEAR(r.accuracy, m.accuracy, tol);
  EXPECT_NEAR(r.macro_f1, m.macro_f1, tol);
  for (const auto& [c, v] : m.per_class) {
    const auto& got = r.metrics(c);
    EXPECT_NEAR(got.precision, v[0], tol) << c;
    EXPECT_NEAR(got.recall, v[1], tol) << c;
    EXPECT_NEAR(got.f1, v[2], tol) << c;
    EXPECT_NEAR(got.support, v[3], tol) << c;
  }
}

eval::EvalReport run_with_hits(std::size_t hits, std::size_t n = 100) {
  Labels gold(n, "a"), pred(n, "a");
  for (std::size_t i = 0; i < n; i += 2) gold[i] = "b";
  for (std::size_t i = 0; i < n; ++i) pred[i] = i < hits ? gold[i] : (gold[i] == "a" ? "b" : "a");
  auto r = eval::score(pred, gold);
  r.per_run_accuracy = {r.accuracy};
  r.per_run_macro_f1 = {r.macro_f1};
  return r;
}

}  // namespace

TEST(Score, HandWorkedBinaryExample) {
  const Labels gold{"pos", "pos", "neg", "neg"};
  const Labels pred{"pos", "neg", "neg", "neg"};
  const auto r = eval::score(pred, gold);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(r.metrics("pos").precision, 1.0);
  EXPECT_DOUBLE_EQ(r.metrics("pos").recall, 0.5);
  EXPECT_DOUBLE_EQ(r.metrics("pos").f1, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.metrics("neg").precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.metrics("neg").recall, 1.0);
  EXPECT_EQ(r.confusion, (std::vector<std::vector<double>>{{2, 0}, {1, 1}}));
}

TEST(Score, PerfectPredictions) {
  const Labels gold{"a", "b", "c", "a"};
  const auto r = eval::score(gold, gold);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(r.macro_f1, 1.0);
}

TEST(Score, ZeroDivisionIsZero) {
  const auto r = eval::score(Labels{"a", "a"}, Labels{"a", "a"}, {"a", "b"});
  EXPECT_EQ(r.metrics("b").precision, 0.0);
  EXPECT_EQ(r.metrics("b").recall, 0.0);
  EXPECT_EQ(r.metrics("b").f1, 0.0);
  EXPECT_DOUBLE_EQ(r.macro_f1, 0.5);
  EXPECT_THROW(eval::score(Labels{"a"}, Labels{"a", "b"}), ValidationError);
  EXPECT_THROW(eval::score(Labels{"z"}, Labels{"a"}, {"a", "b"}), ValidationError);
}

TEST(Score, RandomizedFixturesMatchCountingOracle) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t k = 2 + rng() % 4;
    Labels classes;
    for (std::size_t c = 0; c < k; ++c) classes.push_back("c" + std::to_string(c));
    const std::size_t n = 5 + rng() % 300;
    Labels gold, pred;
    for (std::size_t i = 0; i < n; ++i) {
      gold.push_back(classes[rng() % k]);
      pred.push_back(rng() % 3 == 0 ? gold.back() : classes[rng() % k]);
    }
    expect_matches_oracle(eval::score(pred, gold, classes), oracle::score(pred, gold, classes), 1e-9);
  }
}

TEST(Score, RelabelingClassesPermutesMetrics) {
  std::mt19937_64 rng(3);
  Labels gold, pred;
  for (int i = 0; i < 200; ++i) {
    gold.push_back(std::string(1, static_cast<char>('a' + rng() % 3)));
    pred.push_back(std::string(1, static_cast<char>('a' + rng() % 3)));
  }
  auto rename = [](Labels v) {
    for (auto& s : v) s = s == "a" ? "z" : s;
    return v;
  };
  const auto r1 = eval::score(pred, gold);
  const auto r2 = eval::score(rename(pred), rename(gold));
  EXPECT_DOUBLE_EQ(r1.accuracy, r2.accuracy);
  EXPECT_DOUBLE_EQ(r1.macro_f1, r2.macro_f1);
  EXPECT_EQ(r1.metrics("a"), r2.metrics("z"));
}

TEST(Score, ConstantPredictorMacroF1) {
  // Predicting only class c gives F1_c = 2p/(1+p) and zero elsewhere.
  const Labels gold{"a", "a", "a", "b", "c"};
  const Labels pred(gold.size(), "a");
  const auto r = eval::score(pred, gold);
  const double p = 3.0 / 5.0;
  EXPECT_NEAR(r.macro_f1, 2 * p / (1 + p) / 3.0, 1e-12);
}

TEST(Score, ConfusionSharesSumToOne) {
  std::mt19937_64 rng(8);
  Labels gold, pred;
  for (int i = 0; i < 300; ++i) {
    gold.push_back("c" + std::to_string(rng() % 4));
    pred.push_back("c" + std::to_string(rng() % 4));
  }
  for (const auto& row : eval::score(pred, gold).confusion_shares()) {
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(AveragedRuns, ArithmeticMeanOfRuns) {
  std::vector<eval::EvalReport> runs;
  for (std::size_t hits : {60, 62, 64, 61, 63}) runs.push_back(run_with_hits(hits));
  const auto avg = eval::averaged_runs(runs);
  EXPECT_NEAR(avg.accuracy, 0.62, 1e-12);
  EXPECT_EQ(avg.n_runs, 5u);
  EXPECT_EQ(avg.per_run_accuracy, (std::vector<double>{0.60, 0.62, 0.64, 0.61, 0.63}));
  double f1 = 0;
  for (const auto& r : runs) f1 += r.metrics("a").f1;
  EXPECT_NEAR(avg.metrics("a").f1, f1 / 5, 1e-12);
}

TEST(AveragedRuns, RejectsMismatchedClasses) {
  std::vector<eval::EvalReport> runs{eval::score(Labels{"a"}, Labels{"a"}), eval::score(Labels{"b"}, Labels{"b"})};
  EXPECT_THROW(eval::averaged_runs(runs), ValidationError);
  EXPECT_THROW(eval::averaged_runs({}), ValidationError);
}

TEST(TTest, MatchesSimpsonOracle) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a, b;
    const double shift = 0.2 * trial;
    for (int i = 0; i < 5; ++i) a.push_back(60 + normal(rng));
    for (int i = 0; i < 5; ++i) b.push_back(60 + shift + normal(rng));
    EXPECT_NEAR(eval::t_test(a, b), oracle::t_test_p(a, b), 1e-6) << trial;
    EXPECT_DOUBLE_EQ(eval::t_test(a, b), eval::t_test(b, a));
  }
}

TEST(TTest, EdgeCases) {
  const std::vector<double> same{1, 1, 1};
  const std::vector<double> other{2, 2, 2};
  EXPECT_EQ(eval::t_test(same, same), 1.0);
  EXPECT_EQ(eval::t_test(same, other), 0.0);
  EXPECT_THROW(eval::t_test(std::vector<double>{1}, same), ValidationError);
}

TEST(Pearson, KnownValuesAndOracle) {
  EXPECT_NEAR(*eval::pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}), 1.0, 1e-12);
  EXPECT_NEAR(*eval::pearson(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}), -1.0, 1e-12);
  EXPECT_FALSE(eval::pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}).has_value());
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 100);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x, y;
    for (int i = 0; i < 3 + trial; ++i) {
      x.push_back(u(rng));
      y.push_back(0.5 * x.back() + u(rng));
    }
    EXPECT_NEAR(*eval::pearson(x, y), oracle::pearson(x, y), 1e-9);
  }
}

TEST(Topics, AccuracyPerCategoryAndCorrelation) {
  const Corpus c = fixtures::corpus(
      {fixtures::debate("d1", {"Law"}), fixtures::debate("d2", {"Law", "Ethics"}), fixtures::debate("d3", {"Gender"}),
       fixtures::debate("d4")},
      {fixtures::history("a", {"x"}, "d1"), fixtures::history("b", {"y"}, "d2"), fixtures::history("c", {"z"}, "d3"),
       fixtures::history("d", {"w"}, "d4")});
  const auto inst = assign_labels(c.histories());
  const Labels gold{"optimal", "optimal", "optimal", "optimal"};
  const Labels pred{"optimal", "suboptimal", "optimal", "optimal"};
  auto topics = eval::topic_breakdown(pred, gold, inst, c);
  ASSERT_EQ(topics.size(), 3u);
  EXPECT_DOUBLE_EQ(topics["Law"].accuracy_full, 0.5);
  EXPECT_EQ(topics["Law"].n_samples, 2u);
  EXPECT_DOUBLE_EQ(topics["Ethics"].accuracy_full, 0.0);
  EXPECT_DOUBLE_EQ(topics["Gender"].accuracy_full, 1.0);
  EXPECT_THROW(eval::size_accuracy_correlation(topics), ValidationError);
  topics["Law"].accuracy_across = 0.7;
  topics["Ethics"].accuracy_across = 0.6;
  topics["Gender"].accuracy_across = 0.6;
  EXPECT_NEAR(*eval::size_accuracy_correlation(topics),
              oracle::pearson({1, 1, 2}, {0.6, 0.6, 0.7}), 1e-9);
  topics.erase("Gender");
  EXPECT_THROW(eval::size_accuracy_correlation(topics), ValidationError);
}

TEST(RandomBaseline, BalancedBinaryIsFifty) {
  const std::vector<double> priors{1, 1};
  const auto r = eval::uniform_random_baseline({"optimal", "suboptimal"}, priors);
  EXPECT_NEAR(r.accuracy, 0.5, 1e-12);
  EXPECT_NEAR(r.macro_f1, 0.5, 1e-12);
}

TEST(RandomBaseline, SimulatedUniformPredictorAgrees) {
  std::mt19937_64 rng(1);
  Labels gold, pred;
  for (int i = 0; i < 10000; ++i) {
    gold.push_back(i % 2 ? "optimal" : "suboptimal");
    pred.push_back(rng() % 2 ? "optimal" : "suboptimal");
  }
  const auto r = eval::score(pred, gold);
  EXPECT_NEAR(100 * r.accuracy, 50.0, 1.5);
  EXPECT_NEAR(100 * r.macro_f1, 50.0, 1.5);
}

TEST(RandomBaseline, ImprovementTypeTableFromCounts) {
  // Class counts of the improvement subset: 61142 / 57219 / 17467.
  const std::vector<double> priors{61142, 57219, 17467};
  const auto r = eval::uniform_random_baseline({"clarification", "typo_grammar", "links"}, priors);
  EXPECT_NEAR(100 * r.accuracy, 33.3, 0.05);
  EXPECT_NEAR(100 * r.macro_f1, 31.4, 0.05);
  EXPECT_NEAR(100 * r.metrics("clarification").f1, 38.3, 0.05);
  EXPECT_NEAR(100 * r.metrics("typo_grammar").f1, 37.2, 0.05);
  EXPECT_NEAR(100 * r.metrics("links").f1, 18.6, 0.05);
}

TEST(RandomBaseline, FourClassTableWithinPublishedRounding) {
  const std::vector<double> priors{61142, 57219, 17467, 207986};
  const auto r = eval::uniform_random_baseline({"clarification", "typo_grammar", "links", "optimal"}, priors);
  EXPECT_NEAR(100 * r.metrics("clarification").f1, 20.8, 0.3);
  EXPECT_NEAR(100 * r.metrics("typo_grammar").f1, 19.8, 0.3);
  EXPECT_NEAR(100 * r.metrics("links").f1, 8.4, 0.3);
  EXPECT_NEAR(100 * r.metrics("optimal").f1, 35.5, 0.3);
  EXPECT_NEAR(100 * r.macro_f1, 21.1, 0.3);
}

TEST(RandomBaseline, PrecisionIsPriorRecallIsOneOverK) {
  const std::vector<double> priors{3, 1, 6};
  const auto r = eval::uniform_random_baseline({"a", "b", "c"}, priors);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_NEAR(r.per_class[c].precision, priors[c] / 10.0, 1e-12);
    EXPECT_NEAR(r.per_class[c].recall, 1.0 / 3.0, 1e-12);
  }
}

TEST(Report, JsonRoundTrip) {
  std::vector<eval::EvalReport> runs{run_with_hits(70), run_with_hits(80)};
  const auto avg = eval::averaged_runs(runs);
  const auto back = eval::report_from_json(nlohmann::json::parse(eval::to_json(avg).dump()));
  EXPECT_EQ(back.classes, avg.classes);
  EXPECT_EQ(back.per_class, avg.per_class);
  EXPECT_EQ(back.confusion, avg.confusion);
  EXPECT_EQ(back.per_run_accuracy, avg.per_run_accuracy);
  EXPECT_DOUBLE_EQ(back.macro_f1, avg.macro_f1);
}
