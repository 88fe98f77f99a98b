#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_support.hpp"
#include "votefuse/fusion/dual_fusion.hpp"
#include "votefuse/fusion/fixture.hpp"

using namespace votefuse;
using namespace votefuse::fusion;
using votefuse::testing::cooling_mae;
using votefuse::testing::fixture_path;
using votefuse::testing::load_expected;

namespace {

LabelSeries labels_of(std::vector<std::uint8_t> v) {
  LabelSeries s;
  for (std::size_t i = 0; i < v.size(); ++i) s.timestamps.push_back(Timestamp{static_cast<std::int64_t>(1000 * i)});
  s.labels = std::move(v);
  return s;
}

std::uint8_t verdict_at(const VoteMatrix& m, const VoteOutcome& o, Timestamp t) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    if (m.candidates()[r] == t) return o.labels[r];
  ADD_FAILURE() << "timestamp not in stage B: " << format_timestamp(t);
  return 255;
}

FusionResult fuse_fixture(const std::string& votes) {
  auto table = load_vote_table(fixture_path(votes));
  auto entries = load_mae_list(fixture_path("cooling_mae.csv"));
  return dual_fusion(table.labels, table.models, mae_for(entries, table.models));
}

}  // namespace

TEST(Weights, DerivedFromMae) {
  auto w = model_weights(cooling_mae);
  const std::vector<double> expected{0.57, 0.547, 0.993, 0.884, 0.516};
  for (std::size_t j = 0; j < 5; ++j) {
    // 1 - 0.43 and 1 - 0.453 land one ulp away from the nearest doubles to 0.57 and 0.547.
    EXPECT_LE(std::abs(w.weight[j] - expected[j]), 4 * std::numeric_limits<double>::epsilon()) << j;
  }
  EXPECT_NEAR(w.weight_total(), 3.51, 1e-12);
  EXPECT_EQ(w.rank, (std::vector<int>{3, 2, 5, 4, 1}));
  EXPECT_EQ(w.rank_total(), 15);
  const std::vector<double> table{0.2, 0.133, 0.333, 0.266, 0.066};
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_EQ(w.rank_weight[j], w.rank[j] / 15.0);
    EXPECT_NEAR(w.rank_weight[j], table[j], 5e-3);
  }
}

TEST(Weights, FloorAndErrors) {
  auto w = weights_from_mae(std::vector<double>{1.0, 2.5, 0.0});
  EXPECT_EQ(w.weight, (std::vector<double>{min_weight, min_weight, 1.0}));
  EXPECT_THROW(weights_from_mae(std::vector<double>{-0.1}), DataError);
  EXPECT_THROW(weights_from_mae(std::vector<double>{std::nan("")}), DataError);
  EXPECT_THROW(rank_weights(std::vector<double>{}), DataError);
}

TEST(Weights, TiedMaeRanksFollowRegistrationOrder) {
  auto w = rank_weights(std::vector<double>{0.2, 0.5, 0.2, 0.5});
  EXPECT_EQ(w.rank, (std::vector<int>{3, 1, 4, 2}));
}

TEST(Fixture, VoteTableParsesBothSeparators) {
  std::istringstream csv("timestamp,A,B\n2020-12-09 06:14:11.462,1,0\n2020-12-09 06:14:12.493,0,1\n");
  std::istringstream tsv("timestamp\tA\tB\n2020-12-09 06:14:11.462\t1\t0\n2020-12-09 06:14:12.493\t0\t1\n");
  auto a = load_vote_table(csv);
  auto b = load_vote_table(tsv);
  EXPECT_EQ(a.models, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.labels[1].labels, (std::vector<std::uint8_t>{0, 1}));
}

TEST(Fixture, VoteTableErrors) {
  std::istringstream bad_cell("timestamp,A\n2020-12-09 06:14:11.462,2\n");
  EXPECT_THROW(load_vote_table(bad_cell), IngestionError);
  std::istringstream bad_time("timestamp,A\nyesterday,1\n");
  EXPECT_THROW(load_vote_table(bad_time), IngestionError);
  std::istringstream short_row("timestamp,A,B\n2020-12-09 06:14:11.462,1\n");
  EXPECT_THROW(load_vote_table(short_row), IngestionError);
  std::istringstream empty("");
  EXPECT_THROW(load_vote_table(empty), IngestionError);
  EXPECT_THROW(load_vote_table(std::string("/nonexistent/votes.csv")), IngestionError);
}

TEST(Fixture, MaeListLookup) {
  std::istringstream in("# comment\nmodel,mae\nA,0.25\nB,0.5\n");
  auto entries = load_mae_list(in);
  EXPECT_EQ(mae_for(entries, {"B", "A"}), (std::vector<double>{0.5, 0.25}));
  EXPECT_THROW(mae_for(entries, {"C"}), DataError);
}

TEST(VoteMatrixBuild, KeepsRowsWithAnyVoteInTimeOrder) {
  LabelSeries a{{{30}, {10}, {20}}, {1, 0, 0}};
  LabelSeries b{{{30}, {10}, {20}}, {0, 1, 0}};
  auto m = build_vote_matrix({a, b}, {"a", "b"});
  ASSERT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.candidates(), (std::vector<Timestamp>{{10}, {30}}));
  EXPECT_EQ(m.at(0, 1), 1);
  EXPECT_EQ(m.at(1, 0), 1);
  auto ex = build_vote_matrix({a, b}, {"a", "b"}, {Timestamp{10}});
  EXPECT_EQ(ex.candidates(), (std::vector<Timestamp>{{30}}));
}

TEST(VoteMatrixBuild, Errors) {
  LabelSeries a{{{0}, {1}}, {1, 0}};
  LabelSeries b{{{0}, {2}}, {1, 0}};
  EXPECT_THROW(build_vote_matrix({a, b}, {"a", "b"}), DataError);
  EXPECT_THROW(build_vote_matrix({}, {}), DataError);
  EXPECT_THROW(build_vote_matrix({a}, {"a", "b"}), DataError);
  EXPECT_THROW(VoteMatrix({{0}}, {"a"}, {2}), DataError);
  EXPECT_THROW(VoteMatrix({{0}}, {"a", "b"}, {1}), DataError);
}

TEST(RowRules, Thresholds) {
  using V = std::vector<std::uint8_t>;
  EXPECT_TRUE(majority(V{1, 1, 0}));
  EXPECT_FALSE(majority(V{1, 1, 0, 0}));
  EXPECT_TRUE(unanimous(V{1, 1}));
  EXPECT_FALSE(unanimous(V{}));
  // Exactly one half is not a majority under any rule.
  EXPECT_FALSE(weighted_majority(V{1, 0}, std::vector<double>{0.5, 0.5}));
  EXPECT_FALSE(rank_majority(V{0, 1, 1}, std::vector<int>{3, 1, 2}));
  EXPECT_TRUE(rank_majority(V{1, 0, 1}, std::vector<int>{3, 1, 2}));
}

TEST(FuseCounts, MajorityOfThreeWithMedianFallback) {
  EXPECT_EQ(fuse_counts(4, 5, 4), (FusedCount{4, Method::majority}));
  EXPECT_EQ(fuse_counts(4, 4, 5), (FusedCount{4, Method::majority}));
  EXPECT_EQ(fuse_counts(7, 7, 7), (FusedCount{7, Method::majority}));
  EXPECT_EQ(fuse_counts(3, 5, 5), (FusedCount{5, Method::weighted}));
  EXPECT_EQ(fuse_counts(3, 4, 5), (FusedCount{4, Method::weighted}));
  EXPECT_EQ(fuse_counts(5, 3, 4), (FusedCount{4, Method::rank}));
  EXPECT_EQ(fuse_counts(4, 9, 1), (FusedCount{4, Method::majority}));
}

TEST(Golden, ConsensusOfCoolingFixture) {
  auto r = fuse_fixture("cooling_votes.csv");
  EXPECT_EQ(r.candidates.rows(), 22u);
  EXPECT_EQ(r.n_a, 6u);
  EXPECT_EQ(format_timestamp(r.consensus.flagged.front()), "2020-12-09 10:02:00.702");
  EXPECT_EQ(format_timestamp(r.consensus.flagged.back()), "2020-12-09 10:02:05.859");
  EXPECT_EQ(r.stage_b.rows(), 16u);
}

TEST(Golden, MajorityVoting) {
  auto r = fuse_fixture("cooling_votes.csv");
  auto expected = load_expected("cooling_expected.csv");
  ASSERT_EQ(r.stage_b.candidates(), expected.timestamps);
  EXPECT_EQ(r.majority.labels, expected.majority);
  EXPECT_EQ(r.n_b1, 4u);
}

TEST(Golden, WeightedVoting) {
  auto r = fuse_fixture("cooling_votes_weighted_view.csv");
  auto expected = load_expected("cooling_expected.csv");
  ASSERT_EQ(r.stage_b.candidates(), expected.timestamps);
  EXPECT_EQ(r.weighted.labels, expected.weighted);
  EXPECT_EQ(r.n_b2a, 5u);
  const auto flip = *parse_timestamp("2020-12-09 13:30:09.119");
  EXPECT_EQ(verdict_at(r.stage_b, r.weighted, flip), 1);
  const double ratio = (0.547 + 0.884 + 0.516) / 3.51;
  EXPECT_NEAR(ratio, 0.555, 1e-3);
}

TEST(Golden, RankVoting) {
  auto r = fuse_fixture("cooling_votes_weighted_view.csv");
  auto expected = load_expected("cooling_expected.csv");
  ASSERT_EQ(r.stage_b.candidates(), expected.timestamps);
  EXPECT_EQ(r.rank.labels, expected.rank);
  EXPECT_EQ(r.n_b2b, 4u);
  // Same verdicts on the majority-view grid: the disputed cell carries rank 1 of 15.
  auto m = fuse_fixture("cooling_votes.csv");
  EXPECT_EQ(m.rank.labels, expected.rank);
}

TEST(Golden, DualFusionTotals) {
  auto r = fuse_fixture("cooling_votes.csv");
  EXPECT_EQ(r.n_a, 6u);
  EXPECT_EQ(r.n_b, 4u);
  EXPECT_EQ(r.n, 10u);
  EXPECT_EQ(r.selected, Method::majority);
  EXPECT_EQ(r.final_set.size(), r.n);
  // On the weighted-view grid the disputed row also passes majority: 5/5/4 -> N = 11.
  auto w = fuse_fixture("cooling_votes_weighted_view.csv");
  EXPECT_EQ(w.n_b1, 5u);
  EXPECT_EQ(w.n_b, 5u);
  EXPECT_EQ(w.n, 11u);
}

TEST(Golden, ProvenanceMarksFinalInstants) {
  auto r = fuse_fixture("cooling_votes.csv");
  std::size_t final_count = 0;
  for (const auto& p : r.provenance) {
    final_count += p.final ? 1 : 0;
    ASSERT_FALSE(p.methods.empty());
    const bool consensus = p.methods.front() == Method::consensus;
    EXPECT_EQ(consensus ? p.methods.size() : 0u, consensus ? 1u : 0u);
  }
  EXPECT_EQ(final_count, r.n);
}

TEST(DualFusion, EdgeCases) {
  auto none = dual_fusion({labels_of({0, 0, 0}), labels_of({0, 0, 0})}, {"a", "b"}, std::vector<double>{0.1, 0.2});
  EXPECT_EQ(none.n, 0u);
  EXPECT_TRUE(none.final_set.empty());
  EXPECT_TRUE(none.provenance.empty());

  auto all = dual_fusion({labels_of({1, 1}), labels_of({1, 1}), labels_of({1, 1})}, {"a", "b", "c"},
                         std::vector<double>{0.1, 0.2, 0.3});
  EXPECT_EQ(all.n_a, 2u);
  EXPECT_EQ(all.n_b, 0u);
  EXPECT_TRUE(all.stage_b.empty());

  auto single = dual_fusion({labels_of({1, 0, 1})}, {"solo"}, std::vector<double>{0.5});
  EXPECT_EQ(single.n_a, 2u);
  EXPECT_EQ(single.n, 2u);

  EXPECT_THROW(dual_fusion({labels_of({1})}, {"a"}, std::vector<double>{0.1, 0.2}), DataError);
  EXPECT_THROW(weighted_average_vote(none.stage_b, model_weights(std::vector<double>{0.1})), DataError);
}
