#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace claimrev;

TEST(Synth, SameSeedSameCorpus) {
  const auto a = synth::generate({.histories = 150, .seed = 4, .planted_reverts = 6});
  const auto b = synth::generate({.histories = 150, .seed = 4, .planted_reverts = 6});
  EXPECT_EQ(a.corpus, b.corpus);
  EXPECT_EQ(a.embeddings.vectors, b.embeddings.vectors);
  EXPECT_NE(synth::generate({.histories = 150, .seed = 5}).corpus, a.corpus);
}

TEST(Synth, PlantedRevertsAndLateSingletonsAreReported) {
  const auto s = synth::generate({.histories = 300, .seed = 2, .planted_reverts = 12});
  EXPECT_EQ(s.reverted_histories.size(), 12u);
  EXPECT_EQ(filter_reverts(s.corpus.histories()).size(), 300u - 12u);
  for (const auto& id : s.late_singletons) {
    const auto* h = s.corpus.find_history(id);
    ASSERT_NE(h, nullptr);
    EXPECT_EQ(h->versions.size(), 1u);
    EXPECT_GE(h->versions[0].created_at, s.filter.collection_date);
  }
}
