#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace claimrev;
using fixtures::TempDir;

namespace {

void write(const std::filesystem::path& p, const std::string& s) { io::write_file_atomic(p, s); }

const char* kDebate = R"({"debate_id": "d1", "thesis": "Vaccines should be mandatory.", "categories": ["Health"]})";

std::string claim_line(const std::string& id, int index, const std::string& text, const std::string& type = "null",
                       const std::string& parent = "null") {
  return R"({"claim_id": ")" + id + R"(", "history_id": "h1", "version_index": )" + std::to_string(index) +
         R"(, "text": ")" + text + R"(", "created_at": "2019-0)" + std::to_string(index + 1) +
         R"(-01T00:00:00Z", "debate_id": "d1", "parent_claim_id": )" + parent + R"(, "revision_type": )" + type + "}";
}

}  // namespace

TEST(ParseCorpus, AssemblesOneHistoryFromThreeVersions) {
  TempDir dir("corpus-ok");
  write(dir.path / "debates.jsonl", std::string(kDebate) + "\n");
  write(dir.path / "claims.jsonl", claim_line("c2", 2, "v2") + "\n" + claim_line("c0", 0, "v0", "\"typo_grammar\"") +
                                       "\n\n" + claim_line("c1", 1, "v1", "\"links\"") + "\n");
  const Corpus corpus = parse_corpus(dir.path / "debates.jsonl", dir.path / "claims.jsonl");
  ASSERT_EQ(corpus.debates().size(), 1u);
  ASSERT_EQ(corpus.histories().size(), 1u);
  const auto& h = corpus.histories()[0];
  EXPECT_EQ(h.revision_count(), 2u);
  EXPECT_EQ(h.versions[0].claim_id, "c0");
  EXPECT_EQ(h.versions[0].revision_type, RevisionType::typo_grammar);
  EXPECT_FALSE(h.final_version().revision_type.has_value());
  EXPECT_EQ(corpus.claim_count(), 3u);
  EXPECT_EQ(corpus.find_debate("d1")->categories, std::set<std::string>{"Health"});
}

TEST(ParseCorpus, NonContiguousVersionsNameTheHistory) {
  TempDir dir("corpus-gap");
  write(dir.path / "debates.jsonl", std::string(kDebate) + "\n");
  write(dir.path / "claims.jsonl", claim_line("c0", 0, "v0", "\"other\"") + "\n" + claim_line("c2", 2, "v2") + "\n");
  try {
    parse_corpus(dir.path / "debates.jsonl", dir.path / "claims.jsonl");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'h1'"), std::string::npos) << e.what();
  }
}

TEST(ParseCorpus, MalformedLineReportsLineNumber) {
  TempDir dir("corpus-bad");
  write(dir.path / "debates.jsonl", std::string(kDebate) + "\n");
  write(dir.path / "claims.jsonl", claim_line("c0", 0, "v0") + "\n{\"claim_id\": \n");
  try {
    parse_corpus(dir.path / "debates.jsonl", dir.path / "claims.jsonl");
    FAIL() << "expected a format error";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.unit(), FormatError::Unit::line);
    EXPECT_EQ(e.position(), 2u);
  }
}

TEST(ParseCorpus, DanglingDebateIsRejected) {
  TempDir dir("corpus-dangling");
  write(dir.path / "debates.jsonl", R"({"debate_id": "other", "thesis": "x", "categories": []})" "\n");
  write(dir.path / "claims.jsonl", claim_line("c0", 0, "v0") + "\n");
  try {
    parse_corpus(dir.path / "debates.jsonl", dir.path / "claims.jsonl");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("h1"), std::string::npos);
  }
}

TEST(ParseCorpus, MissingTimestampIsRejected) {
  TempDir dir("corpus-notime");
  write(dir.path / "debates.jsonl", std::string(kDebate) + "\n");
  write(dir.path / "claims.jsonl",
        R"({"claim_id": "c0", "history_id": "h1", "version_index": 0, "text": "x", "debate_id": "d1"})" "\n");
  EXPECT_THROW(parse_corpus(dir.path / "debates.jsonl", dir.path / "claims.jsonl"), ValidationError);
}

TEST(AssembleHistories, EnforcesInvariants) {
  using fixtures::claim;
  using fixtures::day;
  // revision_type on the final version
  EXPECT_THROW(assemble_histories({claim("h", 0, "a", day(0), "d1", RevisionType::links)}), ValidationError);
  // blank text
  EXPECT_THROW(assemble_histories({claim("h", 0, "  \t", day(0))}), ValidationError);
  // time going backwards
  EXPECT_THROW(assemble_histories({claim("h", 0, "a", day(2), "d1", RevisionType::links), claim("h", 1, "b", day(1))}),
               ValidationError);
  // versions spread over two debates
  EXPECT_THROW(assemble_histories({claim("h", 0, "a", day(0), "d1", RevisionType::links), claim("h", 1, "b", day(1), "d2")}),
               ValidationError);
  // duplicate claim id
  auto a = claim("h", 0, "a", day(0));
  auto b = claim("g", 0, "b", day(0));
  b.claim_id = a.claim_id;
  EXPECT_THROW(assemble_histories({a, b}), ValidationError);
}

TEST(Corpus, RejectsDuplicateDebatesAndEmptyThesis) {
  EXPECT_THROW(Corpus({fixtures::debate("d1"), fixtures::debate("d1")}, {}), ValidationError);
  EXPECT_THROW(Corpus({Debate{"d1", "  ", {}}}, {}), ValidationError);
  EXPECT_THROW(Corpus({Debate{"", "t", {}}}, {}), ValidationError);
}

TEST(Corpus, RoundTripThroughFilesIsIdentity) {
  TempDir dir("corpus-roundtrip");
  const auto synth = synth::generate({.histories = 120, .seed = 3});
  write_corpus(synth.corpus, dir.path / "d.jsonl", dir.path / "c.jsonl");
  const Corpus once = parse_corpus(dir.path / "d.jsonl", dir.path / "c.jsonl");
  EXPECT_EQ(once, synth.corpus);
  write_corpus(once, dir.path / "d2.jsonl", dir.path / "c2.jsonl");
  EXPECT_EQ(parse_corpus(dir.path / "d2.jsonl", dir.path / "c2.jsonl"), once);
  EXPECT_EQ(io::read_file(dir.path / "c.jsonl"), io::read_file(dir.path / "c2.jsonl"));
}

TEST(Corpus, EveryHistoryHasCountOneLessThanVersionsAndUntypedFinal) {
  const auto synth = synth::generate({.histories = 300, .seed = 5});
  for (const auto& h : synth.corpus.histories()) {
    EXPECT_EQ(h.revision_count() + 1, h.versions.size());
    EXPECT_FALSE(h.final_version().revision_type.has_value());
  }
}

TEST(ResolveParent, FallsBackToThesis) {
  const Corpus c = fixtures::corpus({fixtures::debate("d1", {}, "T")}, {fixtures::history("h1", {"a"})});
  EXPECT_EQ(resolve_parent(c.histories()[0].versions[0], c), "T");
  EXPECT_EQ(resolve_parent_id(c.histories()[0].versions[0], c), "d1");
}

TEST(ResolveParent, UsesLatestParentVersion) {
  auto child = fixtures::history("child", {"x"});
  child[0].parent_claim_id = "p.0";
  const Corpus c =
      fixtures::corpus({fixtures::debate("d1")}, {fixtures::history("p", {"parent v0", "parent v1"}), child});
  const ClaimVersion& v = c.find_history("child")->versions[0];
  // Oracle: the version with the largest index in the parent's history.
  const auto* parent = c.history_of_claim("p.0");
  const auto latest = std::max_element(parent->versions.begin(), parent->versions.end(),
                                       [](const auto& a, const auto& b) { return a.version_index < b.version_index; });
  EXPECT_EQ(resolve_parent(v, c), latest->text);
  EXPECT_EQ(resolve_parent(v, c), "parent v1");
  EXPECT_EQ(resolve_parent_id(v, c), "p.1");
}

TEST(ResolveParent, DanglingParentNamesBothIds) {
  auto child = fixtures::history("child", {"x"});
  child[0].parent_claim_id = "ghost";
  const Corpus c = fixtures::corpus({fixtures::debate("d1")}, {child});
  try {
    resolve_parent(c.histories()[0].versions[0], c);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("child.0"), std::string::npos);
    EXPECT_NE(what.find("ghost"), std::string::npos);
  }
}
