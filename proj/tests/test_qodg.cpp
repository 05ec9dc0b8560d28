#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "qkmap/qodg.hpp"
#include "support/oracles.hpp"
#include "support/random_inputs.hpp"

using namespace qkmap;

namespace {

QecProfile uniform_profile(double delay_us) {
  QecProfile p("flat", 7);
  for (OpKind k : kAllOpKinds) p.set_row(k, {28, delay_us, k != OpKind::T});
  return p;
}

Kernel kernel_of(const std::string& text) { return parse_program(text).kernels.front(); }

const std::string kThreeOps = "qubit a\nqubit b\nqubit c\nCNOT a,b\nT b\nCNOT a,c\n";

}  // namespace

TEST(BuildQodg, ThreeOpExample) {
  Qodg g = build_qodg(kernel_of(kThreeOps), uniform_profile(10));
  ASSERT_EQ(g.nodes.size(), 3u);
  ASSERT_EQ(g.edges.size(), 2u);
  EXPECT_EQ(g.edges[0], (QodgEdge{0, 1, {1}}));
  EXPECT_EQ(g.edges[1], (QodgEdge{0, 2, {0}}));
  EXPECT_EQ(g.nodes[0].level, 0u);
  EXPECT_EQ(g.nodes[1].level, 1u);
  EXPECT_EQ(g.nodes[2].level, 1u);
  EXPECT_EQ(g.level_sizes, (std::vector<std::size_t>{1, 2}));
}

TEST(BuildQodg, SingleOpHasNoEdges) {
  Qodg g = build_qodg(kernel_of("qubit a\nH a\n"), uniform_profile(10));
  EXPECT_EQ(g.nodes.size(), 1u);
  EXPECT_TRUE(g.edges.empty());
}

TEST(BuildQodg, SingleQubitChain) {
  Qodg g = build_qodg(kernel_of("qubit q\nH q\nH q\nH q\n"), uniform_profile(10));
  ASSERT_EQ(g.edges.size(), 2u);
  EXPECT_EQ(g.edges[0], (QodgEdge{0, 1, {0}}));
  EXPECT_EQ(g.edges[1], (QodgEdge{1, 2, {0}}));
}

TEST(BuildQodg, CnotPairSharesOneEdge) {
  Qodg g = build_qodg(kernel_of("qubit a\nqubit b\nCNOT a,b\nCNOT b,a\n"), uniform_profile(10));
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0].shared_qubits, (std::vector<QubitIndex>{0, 1}));
}

TEST(BuildQodg, CopiesProfileRows) {
  QecProfile steane = *bundled_profile("steane");
  Qodg g = build_qodg(kernel_of("qubit a\nqubit b\nT a\nCNOT a,b\nTdg b\n"), steane);
  EXPECT_EQ(g.nodes[0].ancilla, 100u);
  EXPECT_EQ(g.nodes[1].ancilla, 56u);
  EXPECT_EQ(g.nodes[2].delay_us, 1000.0);
}

TEST(BuildQodg, MissingProfileRowIsConfigError) {
  QecProfile p("partial", 7);
  p.set_row(OpKind::H, {28, 100, true});
  p.set_row(OpKind::T, {100, 1000, false});
  EXPECT_THROW(build_qodg(kernel_of("qubit a\nqubit b\nH a\nCNOT a,b\n"), p), ConfigError);
}

TEST(BuildQodg, MatchesPairwiseOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    Kernel k = randomized::random_kernel(rng, 50, 10);
    Qodg g = build_qodg(k, uniform_profile(10));
    auto expected = oracle::pairwise_edges(k.body);
    std::map<std::pair<std::size_t, std::size_t>, std::vector<QubitIndex>> got;
    for (const QodgEdge& e : g.edges) {
      EXPECT_TRUE(got.emplace(std::make_pair(e.from, e.to), e.shared_qubits).second);
    }
    EXPECT_EQ(got, expected);
  }
}

TEST(BuildQodg, EdgesPerQubitFormSimpleChain) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    Kernel k = randomized::random_kernel(rng, 50, 8);
    Qodg g = build_qodg(k, uniform_profile(10));
    for (QubitIndex q : k.touched_qubits) {
      std::vector<std::size_t> users;
      for (std::size_t i = 0; i < k.body.size(); ++i)
        if (k.body[i].touches(q)) users.push_back(i);
      std::vector<std::pair<std::size_t, std::size_t>> chain;
      for (const QodgEdge& e : g.edges)
        if (std::binary_search(e.shared_qubits.begin(), e.shared_qubits.end(), q))
          chain.push_back({e.from, e.to});
      std::sort(chain.begin(), chain.end());
      ASSERT_EQ(chain.size() + 1, users.size());
      for (std::size_t i = 0; i < chain.size(); ++i)
        EXPECT_EQ(chain[i], std::make_pair(users[i], users[i + 1]));
    }
  }
}

TEST(LevelGraph, EmptyGraphHasNoLevels) {
  Qodg g;
  level_graph(g);
  EXPECT_TRUE(g.level_sizes.empty());
}

TEST(LevelGraph, ChainOfFive) {
  Qodg g = build_qodg(kernel_of("qubit q\nH q\nT q\nH q\nT q\nH q\n"), uniform_profile(10));
  EXPECT_EQ(g.level_sizes, (std::vector<std::size_t>(5, 1)));
  for (std::size_t v = 0; v < 5; ++v) EXPECT_EQ(g.nodes[v].level, v);
}

TEST(LevelGraph, LevelsAreAsap) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    Qodg g = randomized::random_dag(rng, 20, 0.15);
    for (std::size_t v = 0; v < g.nodes.size(); ++v) {
      std::size_t expected = 0;
      for (const QodgEdge& e : g.edges)
        if (e.to == v) expected = std::max(expected, g.nodes[e.from].level + 1);
      EXPECT_EQ(g.nodes[v].level, expected);
    }
  }
}

TEST(TopologicalOrder, RejectsCycles) {
  std::mt19937_64 rng(1);
  Qodg g = randomized::random_dag(rng, 3, 0.0);
  g.edges = {{0, 1, {0}}, {1, 2, {1}}, {2, 0, {2}}};
  g.index_edges();
  EXPECT_THROW(topological_order(g), InternalError);
}

TEST(CriticalPath, TChain) {
  QecProfile steane = *bundled_profile("steane");
  Qodg g = build_qodg(kernel_of("qubit q\nT q\nT q\nT q\n"), steane);
  EXPECT_DOUBLE_EQ(critical_path(g), 3 * 1000.0);
}

TEST(CriticalPath, ThreeOpExampleWithAndWithoutRouting) {
  Qodg g = build_qodg(kernel_of(kThreeOps), uniform_profile(10));
  EXPECT_DOUBLE_EQ(critical_path(g), 20.0);
  std::vector<double> routing(g.edges.size(), 96.0);
  EXPECT_DOUBLE_EQ(critical_path(g, routing), 116.0);
}

TEST(CriticalPath, RoutingListMustMatchEdges) {
  Qodg g = build_qodg(kernel_of(kThreeOps), uniform_profile(10));
  std::vector<double> routing(1, 0.0);
  EXPECT_THROW(critical_path(g, routing), ConfigError);
}

TEST(WriteQodgDot, ListsNodesAndEdges) {
  KernelProgram p = parse_program(kThreeOps);
  Qodg g = build_qodg(p.kernels.front(), uniform_profile(10));
  std::ostringstream out;
  write_qodg_dot(out, g, "k", p.qubits);
  std::string dot = out.str();
  EXPECT_EQ(dot.rfind("digraph", 0), 0u);
  EXPECT_NE(dot.find("n0 -> n1 [label=\"b\"]"), std::string::npos);
  EXPECT_NE(dot.find("n0 -> n2 [label=\"a\"]"), std::string::npos);
}
