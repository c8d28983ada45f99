#include <gtest/gtest.h>

#include <set>

#include "ionforge/lattice.hpp"

namespace ionforge {
namespace {

std::set<std::pair<int, int>> edge_set(const LatticeSpec& s) {
  std::set<std::pair<int, int>> out;
  for (const auto& e : lattice_edges(s)) out.emplace(e.i, e.j);
  return out;
}

TEST(Lattice, LinearIsPath) {
  for (int n = 2; n <= 20; ++n) {
    const auto e = lattice_edges(default_spec(LatticeKind::linear, n));
    ASSERT_EQ(static_cast<int>(e.size()), n - 1);
    for (int i = 0; i + 1 < n; ++i) {
      EXPECT_EQ(e[i].i, i);
      EXPECT_EQ(e[i].j, i + 1);
    }
  }
}

TEST(Lattice, SquareEdgeCount) {
  for (int l = 2; l <= 5; ++l)
    for (int m = 2; m <= 6; ++m) {
      const LatticeSpec s{LatticeKind::square, {l, m}, l * m, {}};
      EXPECT_EQ(static_cast<int>(lattice_edges(s).size()), l * (m - 1) + m * (l - 1)) << l << "x" << m;
    }
}

TEST(Lattice, SquareTwoByFiveNeighbours) {
  const auto e = edge_set({LatticeKind::square, {2, 5}, 10, {}});
  EXPECT_TRUE(e.count({0, 1}));
  EXPECT_TRUE(e.count({0, 5}));
  EXPECT_TRUE(e.count({4, 9}));
  EXPECT_FALSE(e.count({4, 5}));
  EXPECT_FALSE(e.count({0, 6}));
}

TEST(Lattice, TriangularTwoByFive) {
  const auto e = edge_set({LatticeKind::triangular, {2, 5}, 10, {}});
  EXPECT_EQ(e.size(), 17u);
  EXPECT_TRUE(e.count({1, 5}));
  EXPECT_TRUE(e.count({4, 8}));
  EXPECT_FALSE(e.count({0, 6}));
}

TEST(Lattice, TriangularInteriorCoordinationIsSix) {
  const LatticeSpec s{LatticeKind::triangular, {5, 5}, 25, {}};
  std::vector<int> degree(25, 0);
  for (const auto& e : lattice_edges(s)) ++degree[e.i], ++degree[e.j];
  for (int r = 1; r < 4; ++r)
    for (int c = 1; c < 4; ++c) EXPECT_EQ(degree[r * 5 + c], 6) << r << "," << c;
}

TEST(Lattice, KagomeCornerSharingTriangles) {
  const auto e = edge_set(default_spec(LatticeKind::kagome, 10));
  EXPECT_EQ(e.size(), 13u);
  EXPECT_TRUE(e.count({0, 2}));
  EXPECT_TRUE(e.count({2, 4}));
  EXPECT_TRUE(e.count({8, 9}));
  EXPECT_FALSE(e.count({1, 3}));
}

TEST(Lattice, CubicPartialPlane) {
  const auto s = default_spec(LatticeKind::cubic, 10);
  EXPECT_EQ(s.dims, (std::vector<int>{3, 2, 2}));
  EXPECT_EQ(s.label(), "cubic:3x2x2@10");
  EXPECT_EQ(lattice_edges(s).size(), 15u);
  const LatticeSpec full{LatticeKind::cubic, {3, 3, 3}, 27, {}};
  EXPECT_EQ(lattice_edges(full).size(), 54u);
}

TEST(Lattice, TwoChainsHaveNoCrossCouplings) {
  const LatticeSpec s{LatticeKind::two_chains, {2, 5}, 10, {}};
  const auto g = build_target(s).full();
  for (int i = 0; i < 5; ++i)
    for (int j = 5; j < 10; ++j) EXPECT_EQ(g(i, j), 0.0);
  EXPECT_EQ(lattice_edges(s).size(), 8u);
  EXPECT_THROW(lattice_edges({LatticeKind::two_chains, {3, 4}, 12, {}}), ShapeError);
}

TEST(Lattice, TargetsAreUnitNormAndNonNegative) {
  for (int n : {4, 7, 10, 16}) {
    for (const auto& s : list_supported(n)) {
      const auto g = build_target(s);
      EXPECT_NEAR(g.couplings.norm(), 1.0, 1e-12) << s.label();
      EXPECT_GE(g.couplings.minCoeff(), 0.0);
      EXPECT_TRUE(g.normalized);
    }
  }
}

TEST(Lattice, SitesConnectedForEveryListedLayout) {
  for (int n = 4; n <= 20; ++n)
    for (const auto& s : list_supported(n)) {
      if (s.kind == LatticeKind::two_chains) continue;
      std::vector<int> parent(n);
      for (int i = 0; i < n; ++i) parent[i] = i;
      auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
      };
      for (const auto& e : lattice_edges(s)) parent[find(e.i)] = find(e.j);
      for (int i = 1; i < n; ++i) EXPECT_EQ(find(i), find(0)) << s.label();
    }
}

TEST(Lattice, RejectsInconsistentDims) {
  EXPECT_THROW(lattice_edges({LatticeKind::square, {2, 5}, 11, {}}), ShapeError);
  EXPECT_THROW(lattice_edges({LatticeKind::square, {3, 4}, 8, {}}), ShapeError);
  EXPECT_THROW(lattice_edges({LatticeKind::square, {2, 5, 1}, 10, {}}), ShapeError);
  EXPECT_THROW(lattice_edges({LatticeKind::linear, {3}, 4, {}}), ShapeError);
  EXPECT_THROW(lattice_edges({LatticeKind::linear, {}, 1, {}}), ShapeError);
  EXPECT_NO_THROW(lattice_edges({LatticeKind::square, {3, 4}, 10, {}}));
}

TEST(Lattice, CustomEdgesValidated) {
  LatticeSpec s{LatticeKind::custom_edges, {4}, 4, {{0, 3, 2.0}, {1, 2, -1.0}}};
  const auto g = build_target(s);
  EXPECT_NEAR(g.couplings[pair_index(0, 3, 4)], 2.0 / std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(g.couplings[pair_index(1, 2, 4)], -1.0 / std::sqrt(5.0), 1e-15);
  s.edges.push_back({0, 3, 1.0});
  EXPECT_THROW(lattice_edges(s), ShapeError);
  s.edges = {{2, 1, 1.0}};
  EXPECT_THROW(lattice_edges(s), ShapeError);
  s.edges = {{0, 4, 1.0}};
  EXPECT_THROW(lattice_edges(s), ShapeError);
  s.edges = {};
  EXPECT_THROW(build_target(s), DegenerateError);
}

TEST(Lattice, ListSupported) {
  const auto two = list_supported(2);
  ASSERT_EQ(two.size(), 1u);
  EXPECT_EQ(two[0].kind, LatticeKind::linear);

  std::vector<std::string> nine;
  for (const auto& s : list_supported(9)) nine.push_back(s.label());
  EXPECT_EQ(nine, (std::vector<std::string>{"linear:9", "square:3x3", "triangular:3x3", "two_chains:2x5@9",
                                            "kagome:9", "cubic:3x2x2@9"}));

  std::vector<std::string> ten;
  for (const auto& s : list_supported(10)) ten.push_back(s.label());
  EXPECT_EQ(ten, (std::vector<std::string>{"linear:10", "square:2x5", "triangular:2x5", "two_chains:2x5",
                                           "kagome:10", "cubic:3x2x2@10"}));
  EXPECT_THROW(list_supported(1), ShapeError);
}

TEST(Lattice, PrimeSizesGetFragments) {
  const auto s = default_spec(LatticeKind::square, 7);
  EXPECT_EQ(s.dims, (std::vector<int>{3, 3}));
  EXPECT_EQ(s.label(), "square:3x3@7");
  EXPECT_EQ(lattice_edges(s).size(), 8u);
}

TEST(Lattice, ParseShorthand) {
  EXPECT_EQ(parse_lattice("kagome:10").label(), "kagome:10");
  EXPECT_EQ(parse_lattice("square:10").label(), "square:2x5");
  EXPECT_EQ(parse_lattice("square:5x2").dims, (std::vector<int>{5, 2}));
  EXPECT_EQ(parse_lattice("cubic:3x2x2@10").n_ions, 10);
  EXPECT_EQ(parse_lattice("two-chains:10").kind, LatticeKind::two_chains);
  EXPECT_THROW(parse_lattice("hexagonal:10"), ShapeError);
  EXPECT_THROW(parse_lattice("square"), ShapeError);
  EXPECT_THROW(parse_lattice("square:axb"), ShapeError);
  EXPECT_THROW(parse_lattice("square:2x5@12"), ShapeError);
  for (const auto& s : list_supported(12)) EXPECT_EQ(parse_lattice(s.label()).label(), s.label());
}

TEST(Lattice, KindNamesRoundTrip) {
  for (auto k : {LatticeKind::linear, LatticeKind::square, LatticeKind::triangular, LatticeKind::kagome,
                 LatticeKind::cubic, LatticeKind::two_chains, LatticeKind::custom_edges})
    EXPECT_EQ(lattice_kind_from_string(to_string(k)), k);
}

}  // namespace
}  // namespace ionforge
