#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles/oracles.hpp"

using namespace claimrev;
using fixtures::history;

namespace {

std::vector<LabeledInstance> labeled(const synth::SynthCorpus& s) {
  return assign_labels(clean_histories(s.corpus.histories(), s.filter));
}

synth::SynthConfig all_revised(std::size_t histories, std::uint64_t seed) {
  synth::SynthConfig cfg;
  cfg.histories = histories;
  cfg.seed = seed;
  cfg.singleton_fraction = 0.0;
  return cfg;
}

}  // namespace

TEST(DistanceDatasets, FourRevisionHistoryDefinitionChase) {
  const Corpus c = fixtures::corpus({fixtures::debate("d1")}, {history("h", {"a", "b", "c", "d", "e"})});
  const auto ds = compile_distance_datasets(assign_labels(c.histories()));
  ASSERT_EQ(ds.size(), 4u);
  for (const auto& d : ds) {
    ASSERT_EQ(d.positives.size(), 1u);
    ASSERT_EQ(d.negatives.size(), 1u);
    EXPECT_EQ(d.positives[0].claim_id, "h.4");
  }
  EXPECT_EQ(ds[2].negatives[0].claim_id, "h.1");
}

TEST(DistanceDatasets, RejectsUndefinedConfiguration) {
  EXPECT_THROW(compile_distance_datasets({}, 3, 4), ValidationError);
  EXPECT_THROW(compile_distance_datasets({}, 4, 0), ValidationError);
}

TEST(DistanceDatasets, SizesMatchCountingOracle) {
  const auto s = synth::generate(all_revised(50, 13));
  std::size_t eligible = 0;
  for (const auto& h : s.corpus.histories()) eligible += h.revision_count() >= 4;
  const auto ds = compile_distance_datasets(labeled(s));
  for (const auto& d : ds) {
    EXPECT_EQ(d.positives.size() + d.negatives.size(), 2 * eligible);
  }
}

TEST(DistanceDatasets, MatchesEnumerationOracle) {
  const auto s = synth::generate(all_revised(200, 17));
  const auto ds = compile_distance_datasets(labeled(s));
  EXPECT_EQ(oracle::as_pairs(ds), oracle::distance_pairs(s.corpus.histories(), 4, 4));
}

TEST(DistanceDatasets, FartherDistanceMeansEarlierVersion) {
  const auto s = synth::generate(all_revised(200, 19));
  const auto inst = labeled(s);
  const auto ds = compile_distance_datasets(inst);
  std::map<std::string, std::uint32_t> index;
  for (const auto& h : s.corpus.histories()) {
    for (const auto& v : h.versions) index[v.claim_id] = v.version_index;
  }
  for (std::size_t i = 0; i + 1 < ds.size(); ++i) {
    ASSERT_EQ(ds[i].source_history_ids, ds[i + 1].source_history_ids);
    for (std::size_t k = 0; k < ds[i].negatives.size(); ++k) {
      EXPECT_LT(index[ds[i + 1].negatives[k].claim_id], index[ds[i].negatives[k].claim_id]);
      EXPECT_EQ(ds[i].negatives[k].history_id, ds[i].positives[k].history_id);
    }
  }
}

TEST(DistanceDatasets, FileRoundTripKeepsClaimIds) {
  fixtures::TempDir dir("datasets");
  const auto s = synth::generate(all_revised(80, 23));
  const auto ds = compile_distance_datasets(labeled(s));
  io::write_file_atomic(dir.path / "d.tsv", serialize_distance_datasets(ds, 4, "hash"));
  const auto back = read_distance_datasets(dir.path / "d.tsv");
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::set<std::string> expected;
    for (const auto& p : ds[i].positives) expected.insert(p.claim_id);
    for (const auto& n : ds[i].negatives) expected.insert(n.claim_id);
    EXPECT_EQ(back[i].claim_ids, expected);
  }
}

TEST(SplitCounts, FloorFloorRemainder) {
  EXPECT_EQ(split_counts(10, {0.7, 0.15, 0.15}), (std::array<std::size_t, 3>{7, 1, 2}));
  EXPECT_EQ(split_counts(1000, {0.7, 0.15, 0.15}), (std::array<std::size_t, 3>{700, 150, 150}));
  EXPECT_EQ(split_counts(1, {0.7, 0.15, 0.15}), (std::array<std::size_t, 3>{0, 0, 1}));
  for (std::size_t n = 1; n < 300; ++n) {
    const auto c = split_counts(n, {0.7, 0.15, 0.15});
    EXPECT_EQ(c[0], n * 70 / 100) << n;
    EXPECT_EQ(c[1], n * 15 / 100) << n;
    EXPECT_EQ(c[0] + c[1] + c[2], n);
  }
}

TEST(SplitByHistory, DeterministicAndValidated) {
  const auto inst = labeled(synth::generate({.histories = 100, .seed = 2}));
  EXPECT_EQ(split_by_history(inst, {0.7, 0.15, 0.15}, 5), split_by_history(inst, {0.7, 0.15, 0.15}, 5));
  EXPECT_NE(split_by_history(inst, {0.7, 0.15, 0.15}, 5).assignment,
            split_by_history(inst, {0.7, 0.15, 0.15}, 6).assignment);
  EXPECT_THROW(split_by_history(inst, {0.7, 0.2, 0.2}, 1), ValidationError);
  EXPECT_THROW(split_by_history({}, {0.7, 0.15, 0.15}, 1), ValidationError);
}

TEST(SplitByHistory, IntegrityAndCountsAcrossSeeds) {
  const auto inst = labeled(synth::generate({.histories = 1000, .seed = 4, .late_singleton_fraction = 0.0}));
  const auto histories = unique_history_ids(inst);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto split = split_by_history(inst, {0.7, 0.15, 0.15}, seed);
    std::set<std::string> seen;
    std::array<std::size_t, 3> counts{};
    for (auto s : {Split::train, Split::dev, Split::test}) {
      for (const auto& id : split.histories_in(s)) {
        EXPECT_TRUE(seen.insert(id).second) << id;
        ++counts[static_cast<std::size_t>(s)];
      }
    }
    EXPECT_EQ(seen.size(), histories.size());
    EXPECT_EQ(counts, (std::array<std::size_t, 3>{histories.size() * 70 / 100, histories.size() * 15 / 100,
                                                   histories.size() - histories.size() * 70 / 100 - histories.size() * 15 / 100}));
    for (const auto& i : inst) EXPECT_TRUE(split.find(i.history_id).has_value());
  }
}

TEST(SplitByHistory, ManifestRoundTrip) {
  fixtures::TempDir dir("split");
  const auto inst = labeled(synth::generate({.histories = 60, .seed = 2}));
  const auto split = split_by_history(inst, {0.7, 0.15, 0.15}, 9);
  io::write_file_atomic(dir.path / "s.tsv", serialize_split(split, "abc"));
  EXPECT_EQ(read_split(dir.path / "s.tsv"), split);
  const auto header = nlohmann::json::parse(io::read_file(dir.path / "s.tsv").substr(0, io::read_file(dir.path / "s.tsv").find('\n')));
  EXPECT_EQ(header.at("seed"), 9);
  EXPECT_EQ(header.at("rule"), std::string(kFloorRule));
}

TEST(LeaveOneCategoryOut, MembershipRule) {
  const Corpus c = fixtures::corpus(
      {fixtures::debate("law", {"Law"}), fixtures::debate("law_ethics", {"Law", "Ethics"}),
       fixtures::debate("gender", {"Gender"}), fixtures::debate("none")},
      {history("a", {"x"}, "law"), history("b", {"y"}, "law_ethics"), history("c", {"z"}, "gender"),
       history("d", {"w"}, "none")});
  const auto inst = assign_labels(c.histories());
  const auto split = split_leave_one_category_out(inst, c, "Law");
  EXPECT_EQ(split.histories_in(Split::test), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(split.histories_in(Split::train), (std::vector<std::string>{"c", "d"}));
  try {
    split_leave_one_category_out(inst, c, "Sports");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("Ethics, Gender, Law"), std::string::npos) << e.what();
  }
}

TEST(LeaveOneCategoryOut, CoversAllCategorizedHistories) {
  const auto s = synth::generate({.histories = 400, .seed = 31});
  const auto inst = labeled(s);
  std::set<std::string> union_of_tests, categorized;
  for (const auto& i : inst) {
    if (!s.corpus.find_debate(i.debate_id)->categories.empty()) categorized.insert(i.history_id);
  }
  for (const auto& category : s.corpus.categories()) {
    const auto split = split_leave_one_category_out(inst, s.corpus, category);
    const auto test = split.histories_in(Split::test);
    const auto train = split.histories_in(Split::train);
    std::set<std::string> t(test.begin(), test.end());
    for (const auto& id : train) EXPECT_FALSE(t.contains(id));
    union_of_tests.insert(test.begin(), test.end());
  }
  EXPECT_EQ(union_of_tests, categorized);
}

TEST(CarveDev, MovesFloorFractionOfTrain) {
  const auto s = synth::generate({.histories = 300, .seed = 31});
  const auto inst = labeled(s);
  const auto loco = split_leave_one_category_out(inst, s.corpus, s.corpus.categories().front());
  const auto carved = carve_dev(loco, 0.15, 3);
  const auto before = loco.counts();
  const auto after = carved.counts();
  EXPECT_EQ(after[1], before[0] * 15 / 100);
  EXPECT_EQ(after[0] + after[1], before[0]);
  EXPECT_EQ(after[2], before[2]);
  EXPECT_THROW(carve_dev(loco, 1.0, 3), ValidationError);
}
