#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "qkmap/partition.hpp"
#include "support/oracles.hpp"
#include "support/random_inputs.hpp"

using namespace qkmap;

namespace {

Qodg qodg_of(const std::string& text) {
  return build_qodg(parse_program(text).kernels.front(), *bundled_profile("steane"));
}

Qodg diamond() {
  // a -> {b, c} -> d
  return qodg_of("qubit p\nqubit q\nCNOT p,q\nH p\nH q\nCNOT p,q\n");
}

}  // namespace

TEST(WeightVectors, OneHotOnWideLevels) {
  Qodg g = qodg_of("qubit a\nqubit b\nqubit c\nCNOT a,b\nT b\nCNOT a,c\n");
  WeightVectors w = assign_weight_vectors(g, 2);
  EXPECT_EQ(w.balanced_levels, std::vector<std::size_t>{1});
  EXPECT_EQ(w.n_con(), 1u);
  EXPECT_EQ(w.vector(0), std::vector<std::uint32_t>{0});
  EXPECT_EQ(w.vector(1), std::vector<std::uint32_t>{1});
  EXPECT_EQ(w.vector(2), std::vector<std::uint32_t>{1});
}

TEST(WeightVectors, KOneBalancesEveryLevel) {
  Qodg g = qodg_of("qubit a\nqubit b\nqubit c\nCNOT a,b\nT b\nCNOT a,c\n");
  WeightVectors w = assign_weight_vectors(g, 1);
  EXPECT_EQ(w.n_con(), g.level_count());
}

TEST(WeightVectors, NarrowLevelsGiveNoDimensions) {
  Qodg g = qodg_of("qubit a\nH a\nT a\nH a\n");
  WeightVectors w = assign_weight_vectors(g, 2);
  EXPECT_EQ(w.n_con(), 0u);
  for (std::size_t v = 0; v < g.nodes.size(); ++v) EXPECT_TRUE(w.vector(v).empty());
  BalanceBounds b = balance_bounds(w, g.nodes.size(), 0.1);
  EXPECT_TRUE(b.size_constrained);
  EXPECT_EQ(b.max_part_size, 2);
}

TEST(BalanceBounds, TightAndOutward) {
  // Four nodes on one level, k = 2: exactly 2 per part.
  Qodg g = qodg_of("qubit a\nqubit b\nqubit c\nqubit d\nH a\nH b\nH c\nH d\n");
  WeightVectors w = assign_weight_vectors(g, 2);
  BalanceBounds b = balance_bounds(w, 4, 0.1);
  EXPECT_EQ(b.lo, std::vector<std::int64_t>{2});
  EXPECT_EQ(b.hi, std::vector<std::int64_t>{2});
  // Twenty nodes, k = 2, eps = 0.1: 9..11.
  std::ostringstream text;
  for (int i = 0; i < 20; ++i) text << "qubit q" << i << '\n';
  for (int i = 0; i < 20; ++i) text << "H q" << i << '\n';
  Qodg wide = qodg_of(text.str());
  BalanceBounds b20 = balance_bounds(assign_weight_vectors(wide, 2), 20, 0.1);
  EXPECT_EQ(b20.lo, std::vector<std::int64_t>{9});
  EXPECT_EQ(b20.hi, std::vector<std::int64_t>{11});
  EXPECT_FALSE(b20.size_constrained);
}

TEST(KwayPartition, TwoIndependentChains) {
  Qodg g = qodg_of("qubit a\nqubit b\nH a\nH b\nT a\nT b\nH a\nH b\nT a\nT b\nH a\nH b\n");
  WeightVectors w = assign_weight_vectors(g, 2);
  EXPECT_EQ(w.n_con(), 5u);
  Partition p = kway_partition(g, w);
  EXPECT_EQ(p.cut_weight, 0u);
  EXPECT_TRUE(p.cut_edges.empty());
  for (std::size_t v = 0; v < g.nodes.size(); ++v)
    EXPECT_EQ(p.assignment[v], p.assignment[v % 2]) << v;
  EXPECT_NE(p.assignment[0], p.assignment[1]);
  auto exhaustive = oracle::exhaustive_min_cut(g, [&](const std::vector<std::uint32_t>& a) {
    return satisfies_bounds(w, balance_bounds(w, g.nodes.size(), 0.1), a);
  });
  EXPECT_EQ(exhaustive, 0u);
}

TEST(KwayPartition, SinglePart) {
  Qodg g = diamond();
  Partition p = kway_partition(g, assign_weight_vectors(g, 1));
  EXPECT_EQ(p.assignment, std::vector<std::uint32_t>(4, 0));
  EXPECT_TRUE(p.cut_edges.empty());
  EXPECT_EQ(p.traffic, std::vector<std::uint64_t>{0});
}

TEST(KwayPartition, DiamondSplitsMiddleLevel) {
  Qodg g = diamond();
  ASSERT_EQ(g.level_sizes, (std::vector<std::size_t>{1, 2, 1}));
  WeightVectors w = assign_weight_vectors(g, 2);
  Partition p = kway_partition(g, w);
  EXPECT_NE(p.assignment[1], p.assignment[2]);
  EXPECT_GE(p.cut_edges.size(), 2u);
  BalanceBounds b = balance_bounds(w, 4, 0.1);
  auto best = oracle::exhaustive_min_cut(g, [&](const std::vector<std::uint32_t>& a) {
    return satisfies_bounds(w, b, a);
  });
  EXPECT_EQ(p.cut_weight, best);
}

TEST(TrafficMatrix, CountsSharedQubitsPerDirection) {
  Qodg g = qodg_of("qubit a\nqubit b\nqubit c\nCNOT a,b\nT b\nCNOT a,c\n");
  Partition p = make_partition(g, {0, 0, 1}, 2);
  EXPECT_EQ(p.traffic_at(0, 1), 1u);
  EXPECT_EQ(p.traffic_at(1, 0), 0u);
  EXPECT_EQ(p.cut_weight, 1u);

  Partition none = make_partition(g, {0, 0, 0}, 2);
  EXPECT_EQ(none.traffic, std::vector<std::uint64_t>(4, 0));

  // Cut edges sharing {a} and {b, c}.
  Qodg h = qodg_of("qubit a\nqubit b\nqubit c\nqubit d\nCNOT b,c\nCNOT a,d\nCNOT b,c\nH a\n");
  ASSERT_EQ(h.edges.size(), 2u);
  Partition q = make_partition(h, {0, 0, 1, 1}, 2);
  EXPECT_EQ(q.traffic_at(0, 1), 3u);
  EXPECT_EQ(q.traffic_at(1, 0), 0u);
}

TEST(KwayPartition, DeterministicForSeed) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    Qodg g = randomized::random_dag(rng, 40, 0.08);
    WeightVectors w = assign_weight_vectors(g, 3);
    PartitionOptions opt;
    opt.seed = 99;
    EXPECT_EQ(kway_partition(g, w, opt).assignment, kway_partition(g, w, opt).assignment);
  }
}

TEST(KwayPartition, ParallelismPropertyOnRandomDags) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 60; ++trial) {
    std::uint32_t k = randomized::uniform(rng, 2, 6);
    Qodg g = randomized::random_dag(rng, randomized::uniform(rng, 4, 60), 0.06);
    WeightVectors w = assign_weight_vectors(g, k);
    Partition p = kway_partition(g, w);
    EXPECT_TRUE(satisfies_bounds(w, balance_bounds(w, g.nodes.size(), 0.1), p.assignment));
    EXPECT_TRUE(oracle::levels_balanced_outward(g, p.assignment, k, 0.1));
    for (std::size_t level = 0; level < g.level_count(); ++level) {
      if (g.level_sizes[level] < k) continue;
      std::vector<std::size_t> count(k, 0);
      for (std::size_t v = 0; v < g.nodes.size(); ++v)
        if (g.nodes[v].level == level) ++count[p.assignment[v]];
      double cap = std::ceil(static_cast<double>(g.level_sizes[level]) / k) * 1.1;
      for (std::size_t c : count) EXPECT_LE(static_cast<double>(c), std::ceil(cap));
    }
  }
}

TEST(KwayPartition, NearOptimalOnSmallGraphs) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    Qodg g = randomized::random_dag(rng, randomized::uniform(rng, 2, 12), 0.25);
    WeightVectors w = assign_weight_vectors(g, 2);
    BalanceBounds b = balance_bounds(w, g.nodes.size(), 0.1);
    Partition p = kway_partition(g, w);
    auto best = oracle::exhaustive_min_cut(g, [&](const std::vector<std::uint32_t>& a) {
      return satisfies_bounds(w, b, a);
    });
    EXPECT_LE(static_cast<double>(p.cut_weight), 1.5 * static_cast<double>(best));
  }
}

TEST(KwayPartition, RejectsBadEpsilon) {
  Qodg g = diamond();
  WeightVectors w = assign_weight_vectors(g, 2);
  PartitionOptions opt;
  opt.epsilon = 0.0;
  EXPECT_THROW(kway_partition(g, w, opt), ConfigError);
  opt.epsilon = 1.0;
  EXPECT_THROW(kway_partition(g, w, opt), ConfigError);
}

TEST(KwayPartition, CsvDump) {
  Qodg g = diamond();
  Partition p = make_partition(g, {0, 1, 0, 1}, 2);
  std::ostringstream out;
  write_partition_csv(out, p);
  EXPECT_EQ(out.str(), "node,part\n0,0\n1,1\n2,0\n3,1\n");
}
