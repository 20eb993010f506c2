#include <gtest/gtest.h>

#include <random>

#include "bsrone/errors.hpp"
#include "bsrone/selection.hpp"
#include "oracles.hpp"

using namespace bsrone;

namespace {

const CriteriaWeights kWeights{CriteriaVector{0.4, 0.3, 0.1, 0.2}};
const CriteriaBounds kBounds{{10, 7200, 10, 10}, {1, 300, 0, 0}};

DecisionMatrix sample() { return {{{8, 3600, 1, 9}, {2, 600, 5, 2}, {5, 1800, 2, 6}}}; }

}  // namespace

TEST(Weights, MustFormAConvexCombination) {
  EXPECT_THROW(CriteriaWeights(CriteriaVector{0.5, 0.5, 0.5, 0.0}), domain_error);
  EXPECT_THROW(CriteriaWeights(CriteriaVector{1.2, -0.2, 0, 0}), domain_error);
  EXPECT_NO_THROW(CriteriaWeights(CriteriaVector{1, 0, 0, 0}));
}

TEST(Bounds, Validation) {
  EXPECT_THROW((CriteriaBounds{{0, 1, 1, 1}, {0, 0, 0, 0}}.validate()), domain_error);
  EXPECT_THROW((CriteriaBounds{{1, 1, 1, 1}, {2, 0, 0, 0}}.validate()), domain_error);
  EXPECT_THROW((CriteriaBounds{{1, 1, 1, 10.5}, {0, 0, 0, 0}}.validate()), domain_error);
  EXPECT_NO_THROW(kBounds.validate());
}

TEST(Normalize, UsesEuclideanColumnNorms) {
  const auto a = normalize(sample());
  double sq = 0;
  for (const auto& row : a) sq += row[0] * row[0];
  EXPECT_NEAR(sq, 1.0, 1e-15);
  EXPECT_NEAR(a[0][0], 8.0 / std::sqrt(93.0), 1e-15);
}

TEST(Normalize, ZeroColumnIsReportedByName) {
  DecisionMatrix d{{{1, 0, 1, 1}, {2, 0, 3, 1}}};
  try {
    normalize(d);
    FAIL() << "expected normalization_error";
  } catch (const normalization_error& e) {
    EXPECT_EQ(e.criterion(), 1u);
    EXPECT_NE(std::string(e.what()).find("time_on_network"), std::string::npos);
  }
  const auto a = normalize(d, ZeroColumnPolicy::neutral);
  EXPECT_EQ(a[0][1], 0.0);
}

TEST(Score, FrozenHighPrecisionValues) {
  // Computed independently at 50 significant digits.
  const auto weighted = score(sample(), kWeights, kBounds).values;
  EXPECT_NEAR(weighted[0], 0.78104447998660186651, 1e-12);
  EXPECT_NEAR(weighted[1], 0.20300557550307479301, 1e-12);
  EXPECT_NEAR(weighted[2], 0.45899602181927291378, 1e-12);
  EXPECT_EQ(rank(weighted), (std::vector<std::size_t>{0, 2, 1}));

  const auto literal = score(sample(), kWeights, kBounds, {TopsisVariant::literal, ZeroColumnPolicy::reject}).values;
  EXPECT_NEAR(literal[0], 0.61796577169422989487, 1e-12);
  EXPECT_NEAR(literal[1], 0.39812103176601254018, 1e-12);
  EXPECT_NEAR(literal[2], 0.44919329023447538862, 1e-12);
}

TEST(Score, SingleCandidateAtUpperBoundScoresOne) {
  // One row normalizes to all ones, which sits exactly on the ideal.
  const auto c = score({{{3, 7, 2, 5}}}, kWeights, kBounds).values;
  EXPECT_EQ(c[0], 1.0);
}

TEST(Score, LowerBoundRowScoresZero) {
  // Bounds chosen so the anti-ideal equals the normalized row.
  const CriteriaBounds b{{2, 2, 2, 2}, {1, 1, 1, 1}};
  const DecisionMatrix d{{{1, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}}};
  const auto c = score(d, kWeights, b).values;
  for (double v : c) EXPECT_EQ(v, 0.0);
}

TEST(Score, DegenerateBoundsReportCOne) {
  const CriteriaBounds b{{1, 1, 1, 1}, {1, 1, 1, 1}};
  const auto c = score({{{5, 5, 5, 5}}}, kWeights, b);
  EXPECT_EQ(c.values[0], 1.0);
  EXPECT_EQ(c.degenerate_rows, std::vector<std::size_t>{0});
}

TEST(Score, MatchesBruteForceOnGridMatrices) {
  const std::vector<double> grid{0.5, 1, 2, 4};
  const std::vector<double> w(kWeights.values().begin(), kWeights.values().end());
  const std::vector<double> up(kBounds.upper.begin(), kBounds.upper.end());
  const std::vector<double> lo(kBounds.lower.begin(), kBounds.lower.end());
  std::mt19937_64 rng(3);
  double worst = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng() % 4;
    DecisionMatrix d;
    std::vector<std::vector<double>> raw;
    for (std::size_t i = 0; i < n; ++i) {
      CriteriaVector row{};
      for (auto& v : row) v = grid[rng() % grid.size()];
      d.rows.push_back(row);
      raw.emplace_back(row.begin(), row.end());
    }
    for (bool weighted : {true, false}) {
      const auto got = score(d, kWeights, kBounds,
                             {weighted ? TopsisVariant::weighted : TopsisVariant::literal, ZeroColumnPolicy::reject})
                           .values;
      const auto want = oracle::topsis(raw, w, up, lo, weighted);
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
    }
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(Score, ScaleInvariantPerColumn) {
  auto d = sample();
  const auto before = score(d, kWeights, kBounds).values;
  for (auto& row : d.rows) row[1] *= 17.0;
  const auto after = score(d, kWeights, kBounds).values;
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_NEAR(before[i], after[i], 1e-12);
}

TEST(Score, ImprovingACriterionNeverLowersTheRankOfThatRow) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.5, 9.5);
  for (int trial = 0; trial < 500; ++trial) {
    DecisionMatrix d;
    for (int i = 0; i < 4; ++i) d.rows.push_back({u(rng), u(rng), u(rng), u(rng)});
    const auto before = score(d, kWeights, kBounds).values;
    d.rows[0][rng() % kCriteria] *= 1.5;
    const auto after = score(d, kWeights, kBounds).values;
    for (std::size_t i = 1; i < 4; ++i) {
      if (before[0] >= before[i]) ASSERT_GE(after[0], after[i] - 1e-12);
    }
  }
}

TEST(DecisionMatrix, ExchangeCountBecomesHeadroom) {
  const std::vector<AttributeVector> attrs{{8, 3600, 9, 9}, {2, 600, 12, 2}};
  const auto d = build_decision_matrix(attrs, kBounds);
  EXPECT_EQ(d.rows[0][2], 1.0);
  EXPECT_EQ(d.rows[1][2], 0.0);
  const auto b = benefit_bounds(kBounds);
  EXPECT_EQ(b.upper[2], 10.0);
  EXPECT_EQ(b.lower[2], 0.0);
}

TEST(Attributes, WillingnessAboveTenIsRejected) {
  EXPECT_THROW((AttributeVector{1, 1, 0, 11}.validate()), domain_error);
  EXPECT_THROW((AttributeVector{-1, 1, 0, 1}.validate()), domain_error);
}

TEST(Rank, TiesGoToTheLowerId) {
  const std::vector<double> c{0.5, 0.7, 0.5};
  const std::vector<NodeId> ids{NodeId{9}, NodeId{4}, NodeId{2}};
  EXPECT_EQ(rank(c, ids), (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_EQ(rank(c), (std::vector<std::size_t>{1, 0, 2}));
}
