#include <gtest/gtest.h>

#include <bit>
#include <random>

#include "bsrone/errors.hpp"
#include "bsrone/tables.hpp"
#include "oracles.hpp"

using namespace bsrone;

TEST(SearchTable, SlotsFollowMemberOffsets) {
  const NetworkGeometry g(5, 2);
  const std::vector<NodeId> members{NodeId{5}, NodeId{7}};
  const auto t = build_search_table(NodeId{4}, members, g);
  ASSERT_EQ(t.slots.size(), 3u);
  EXPECT_EQ(t.slots[0], NodeId{5});
  EXPECT_FALSE(t.slots[1].has_value());
  EXPECT_EQ(t.slots[2], NodeId{7});
  EXPECT_EQ(t.occupied(), 2u);
  EXPECT_TRUE(t.contains(NodeId{7}));
}

TEST(SearchTable, RejectsForeignMembersAndNonHeadOwners) {
  const NetworkGeometry g(5, 2);
  const std::vector<NodeId> foreign{NodeId{9}};
  EXPECT_THROW(build_search_table(NodeId{4}, foreign, g), domain_error);
  EXPECT_THROW(build_search_table(NodeId{5}, {}, g), domain_error);
}

TEST(DefaultRoutingTable, ListsOtherHeadsClockwiseWithFlags) {
  const NetworkGeometry g(5, 2);
  ActivationMap a(g);
  for (std::uint64_t c : {0u, 1u, 3u, 4u, 5u, 7u}) a.set_cluster(c, true);
  const auto t = build_default_routing_table(NodeId{20}, a, g);
  ASSERT_EQ(t.entries.size(), 7u);
  EXPECT_EQ(t.entries.front().head, NodeId{24});
  EXPECT_FALSE(t.entries.front().active);
  EXPECT_EQ(t.entries.back().head, NodeId{16});
  EXPECT_EQ(t.find(NodeId{8})->active, false);
  EXPECT_EQ(t.find(NodeId{12})->active, true);
  EXPECT_EQ(t.find(NodeId{20}), nullptr);
}

TEST(SectionRoutingTable, StaysInsideTheSection) {
  const NetworkGeometry g(9, 2, 5u);
  const auto a = ActivationMap::all_active(g);
  const auto t = build_section_routing_table(NodeId{72}, a, g);
  ASSERT_EQ(t.entries.size(), 7u);
  for (const auto& e : t.entries) EXPECT_EQ(section_of(e.head, g), section_of(NodeId{72}, g));
}

TEST(SupremeOffsets, MatchTheBinarySearchLayout) {
  const NetworkGeometry g(9, 2, 5u);
  const std::vector<std::uint64_t> expected{32, 64, 128, 160, 192, 256};
  EXPECT_EQ(supreme_offsets(g), expected);
  const NetworkGeometry two(6, 2, 5u);
  EXPECT_EQ(supreme_offsets(two), std::vector<std::uint64_t>{32});
}

TEST(SupremeOffsets, StrictlyIncreasingAndEndAtHalfRing) {
  for (unsigned n = 3; n <= 16; ++n) {
    for (unsigned s = 1; s < n; ++s) {
      const NetworkGeometry g(n, 1, s);
      const auto off = supreme_offsets(g);
      ASSERT_FALSE(off.empty());
      EXPECT_EQ(off.back(), g.half_ring());
      for (std::size_t i = 1; i < off.size(); ++i) ASSERT_LT(off[i - 1], off[i]);
      for (auto o : off) ASSERT_EQ(o % g.section_size(), 0u);
    }
  }
}

TEST(SupremeTables, SingleSectionHasNoEntries) {
  const NetworkGeometry g(6, 2, 6u);
  const auto t = build_supreme_tables(NodeId{0}, g);
  EXPECT_TRUE(t.clockwise.empty());
  EXPECT_FALSE(t.successor.has_value());
}

TEST(SupremeTables, FallbacksWalkBackTowardTheOwner) {
  // Both last entries of owner 160 name the antipode 416; with 416 inactive
  // the clockwise side falls back to 384 and the counterclockwise side to 448.
  const NetworkGeometry g(9, 2, 5u);
  ActivationMap a(g);
  for (std::uint64_t head : {160u, 384u, 448u, 0u}) a.set_section(head / 32, true);
  const auto t = resolve_fallbacks(build_supreme_tables(NodeId{160}, g), a, g);
  EXPECT_EQ(t.clockwise.back().target, NodeId{416});
  EXPECT_EQ(t.clockwise.back().hop, NodeId{384});
  EXPECT_EQ(t.counterclockwise.back().target, NodeId{416});
  EXPECT_EQ(t.counterclockwise.back().hop, NodeId{448});
  EXPECT_EQ(t.successor, NodeId{384});
  EXPECT_EQ(t.predecessor, NodeId{0});
}

TEST(SupremeTables, FallbackNeverOvershootsAndMovesMonotonically) {
  const NetworkGeometry g(10, 2, 5u);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    ActivationMap a(g);
    for (std::uint64_t s = 0; s < g.section_count(); ++s) a.set_section(s, rng() % 3 == 0);
    a.set_section(0, true);
    const auto t = resolve_fallbacks(build_supreme_tables(NodeId{0}, g), a, g);
    for (const auto& e : t.clockwise) {
      ASSERT_LE(g.clockwise_distance(NodeId{0}, e.hop), g.clockwise_distance(NodeId{0}, e.target));
      ASSERT_TRUE(e.hop == NodeId{0} || a.section_active_at(e.hop, g));
    }
    for (const auto& e : t.counterclockwise) {
      ASSERT_LE(g.counterclockwise_distance(NodeId{0}, e.hop), g.counterclockwise_distance(NodeId{0}, e.target));
    }
    // Deactivating one more section can only pull a fallback closer to the owner.
    ActivationMap fewer = a;
    for (std::uint64_t s = 1; s < g.section_count(); ++s) {
      if (fewer.section_active(s)) {
        fewer.set_section(s, false);
        break;
      }
    }
    const auto u = resolve_fallbacks(build_supreme_tables(NodeId{0}, g), fewer, g);
    for (std::size_t i = 0; i < t.clockwise.size(); ++i) {
      ASSERT_LE(g.clockwise_distance(NodeId{0}, u.clockwise[i].hop), g.clockwise_distance(NodeId{0}, t.clockwise[i].hop));
    }
  }
}

TEST(NextHop, ExampleRouteTakesTheLargestNonOvershootingStep) {
  const NetworkGeometry g(9, 2, 5u);
  const SupremeRouter router(g, ActivationMap::all_active(g));
  const auto r = router.route(NodeId{0}, NodeId{230});
  EXPECT_TRUE(r.reached);
  EXPECT_EQ(r.path, (std::vector<NodeId>{NodeId{0}, NodeId{192}, NodeId{224}}));
}

TEST(NextHop, SameSectionReturnsCurrent) {
  const NetworkGeometry g(9, 2, 5u);
  const auto t = build_supreme_tables(NodeId{64}, g);
  EXPECT_EQ(next_hop(NodeId{64}, NodeId{80}, t, g), NodeId{64});
}

TEST(NextHop, StuckRoutingThrows) {
  const NetworkGeometry g(9, 2, 5u);
  ActivationMap a(g);
  a.set_section(0, true);
  const auto t = resolve_fallbacks(build_supreme_tables(NodeId{0}, g), a, g);
  EXPECT_THROW(next_hop(NodeId{0}, NodeId{300}, t, g), routing_failure);
  EXPECT_FALSE(try_next_hop(NodeId{0}, NodeId{300}, t, g).has_value());
}

TEST(NextHop, HalvesTheRemainingDistanceWhenAllActive) {
  for (unsigned n = 6; n <= 13; ++n) {
    const NetworkGeometry g(n, 2, 5u);
    const SupremeRouter router(g, ActivationMap::all_active(g));
    for (NodeId from : router.active_heads()) {
      for (NodeId to : router.active_heads()) {
        const auto r = router.route(from, to);
        ASSERT_TRUE(r.reached);
        for (std::size_t i = 1; i < r.path.size(); ++i) {
          ASSERT_LE(2 * g.ring_distance(r.path[i], to), g.ring_distance(r.path[i - 1], to));
        }
      }
    }
  }
}

TEST(NextHop, GreedyIsWithinOneOfShortestPathAndLogBounded) {
  for (unsigned n = 6; n <= 12; ++n) {
    const NetworkGeometry g(n, 2, 5u);
    const SupremeRouter router(g, ActivationMap::all_active(g));
    const auto bound = static_cast<std::size_t>(std::bit_width(g.section_count() - 1));
    for (NodeId from : router.active_heads()) {
      for (NodeId to : router.active_heads()) {
        const auto r = router.route(from, to);
        ASSERT_TRUE(r.reached);
        ASSERT_LE(r.hops(), bound);
        ASSERT_LE(static_cast<int>(r.hops()), oracle::bfs_hops(router, from, to) + 1);
      }
    }
  }
}

TEST(NextHop, PartialActivationStillReachesEveryActiveSection) {
  const NetworkGeometry g(11, 2, 5u);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    ActivationMap a(g);
    for (std::uint64_t s = 0; s < g.section_count(); ++s) a.set_section(s, rng() % 2 == 0);
    const SupremeRouter router(g, a);
    for (NodeId from : router.active_heads()) {
      for (NodeId to : router.active_heads()) ASSERT_TRUE(router.route(from, to).reached);
    }
  }
}
