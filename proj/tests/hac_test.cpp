#include <gtest/gtest.h>

#include <map>
#include <set>
#include <vector>

#include "crownhac/hac.hpp"
#include "oracles.hpp"
#include "scenes.hpp"

using namespace crownhac;

namespace {

struct Built {
  LabeledRaster raster{1, 1};
  std::vector<Isol> isols;
  LinkStore store;
  Hierarchy hier;
};

Built build(LabeledRaster r) {
  Built b;
  b.raster = std::move(r);
  b.isols = extract_isols(b.raster);
  b.store = cast_rays(b.raster, b.isols);
  b.hier = agglomerate(b.isols, b.store);
  return b;
}

void expect_matches_oracle(const Built& b) {
  const auto want = oracle::brute_hac(b.raster);
  ASSERT_EQ(b.hier.merge_count(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    const HierarchyNode& n = b.hier.node(static_cast<NodeId>(b.hier.isol_count() + i));
    EXPECT_EQ(n.merge_iteration, i + 1);
    EXPECT_EQ(b.hier.node((*n.ancestors)[0]).members, want[i].left) << "merge " << i + 1;
    EXPECT_EQ(b.hier.node((*n.ancestors)[1]).members, want[i].right) << "merge " << i + 1;
    EXPECT_EQ(n.merge_distance->value(), want[i].distance) << "merge " << i + 1;
  }
}

}  // namespace

TEST(Agglomerate, SingleIsol) {
  auto b = build(load_raster_string("0 7\n0 0"));
  EXPECT_EQ(b.hier.size(), 1u);
  EXPECT_EQ(b.hier.merge_count(), 0u);
  EXPECT_EQ(b.hier.roots(), std::vector<NodeId>{0});
}

TEST(Agglomerate, EmptyInputRejected) {
  LinkStore store(1);
  EXPECT_THROW(agglomerate({}, store), std::invalid_argument);
}

TEST(Agglomerate, ToySceneMergeOrder) {
  auto b = build(test_scenes::toy());
  expect_matches_oracle(b);
  ASSERT_EQ(b.hier.size(), 7u);
  EXPECT_EQ(b.hier.roots(), std::vector<NodeId>{6});
  EXPECT_EQ(b.hier.node(6).members, (std::vector<IsolId>{1, 2, 3, 4}));
  // 1 and 3 are separated only by the two notch pixels, so they go first.
  EXPECT_EQ(b.hier.node(4).members, (std::vector<IsolId>{1, 3}));
  EXPECT_EQ(b.hier.node(4).merge_distance, Distance(2));
  const auto raw = oracle::raw_links(b.raster);
  const auto& second = b.hier.node(5);
  EXPECT_EQ(second.merge_distance->value(),
            oracle::group_distance(raw, b.hier.node((*second.ancestors)[0]).members,
                                   b.hier.node((*second.ancestors)[1]).members));
}

TEST(Agglomerate, DisconnectedSceneIsForest) {
  auto b = build(load_raster_string("1 0 2 0 0 0\n0 0 0 0 0 0\n0 0 0 0 0 0\n0 0 0 0 0 0\n0 0 0 0 0 3\n"));
  EXPECT_EQ(b.hier.merge_count(), 1u);
  const auto roots = b.hier.roots();
  ASSERT_EQ(roots.size(), 2u);
  std::size_t total = 0;
  for (NodeId r : roots) total += b.hier.node(r).members.size();
  EXPECT_EQ(total, 3u);
  EXPECT_FALSE(b.hier.lowest_common(1, 3).has_value());
  EXPECT_EQ(b.hier.lowest_common(1, 2), NodeId{3});
}

TEST(Agglomerate, TiesBrokenByMemberIds) {
  // Three equal gaps: 1-2 and 2-3 both at distance 1; the pair holding id 1 wins.
  auto b = build(load_raster_string("1 0 2 0 3"));
  EXPECT_EQ(b.hier.node(3).members, (std::vector<IsolId>{1, 2}));
  expect_matches_oracle(b);
}

TEST(Agglomerate, MatchesBruteForceOnCorpus) {
  for (const auto& scene : oracle::random_corpus()) expect_matches_oracle(build(scene.raster));
}

TEST(Agglomerate, Deterministic) {
  const auto scene = generate_random(77, 12, 40);
  const auto a = build(scene.raster), b = build(scene.raster);
  ASSERT_EQ(a.hier.size(), b.hier.size());
  for (NodeId h = 0; h < a.hier.size(); ++h) {
    EXPECT_EQ(a.hier.node(h).members, b.hier.node(h).members);
    EXPECT_EQ(a.hier.node(h).ancestors, b.hier.node(h).ancestors);
    EXPECT_EQ(a.hier.node(h).merge_distance, b.hier.node(h).merge_distance);
  }
}

TEST(Hierarchy, WellFormedOnCorpus) {
  for (const auto& scene : oracle::random_corpus()) {
    const auto b = build(scene.raster);
    const auto& h = b.hier;
    const std::size_t m = h.isol_count();
    std::size_t in_roots = 0;
    for (NodeId r : h.roots()) in_roots += h.node(r).members.size();
    EXPECT_EQ(in_roots, m);
    if (h.roots().size() == 1) {
      EXPECT_EQ(h.size(), 2 * m - 1);
    }

    std::optional<Distance> prev;
    for (const HierarchyNode& n : h.nodes()) {
      EXPECT_EQ(n.is_singleton(), n.members.size() == 1);
      EXPECT_EQ(n.is_singleton(), !n.merge_iteration.has_value());
      if (n.id < m) continue;
      EXPECT_EQ(*n.merge_iteration, n.id - m + 1);
      const auto [a, c] = *n.ancestors;
      EXPECT_EQ(h.node(a).successor, n.id);
      EXPECT_EQ(h.node(c).successor, n.id);
      std::vector<IsolId> joined;
      std::merge(h.node(a).members.begin(), h.node(a).members.end(), h.node(c).members.begin(),
                 h.node(c).members.end(), std::back_inserter(joined));
      EXPECT_EQ(joined, n.members);
      EXPECT_EQ(std::adjacent_find(joined.begin(), joined.end()), joined.end());
      // A merged group's links to any other group contain the links of its parts.
      if (prev) {
        EXPECT_LE(*prev, *n.merge_distance);
      }
      prev = n.merge_distance;
    }
    for (const HierarchyNode& n : h.nodes())
      if (n.successor) {
        const auto& s = h.node(*n.successor).members;
        EXPECT_TRUE(std::includes(s.begin(), s.end(), n.members.begin(), n.members.end()));
        EXPECT_LT(n.members.size(), s.size());
      }
  }
}

TEST(Hierarchy, SuccessorCalculus) {
  auto b = build(test_scenes::toy());
  const auto& h = b.hier;
  EXPECT_EQ(h.successor(2, 0), NodeId{2});
  EXPECT_FALSE(h.successor(6).has_value());
  const auto path = h.path_from(h.singleton(2));
  EXPECT_EQ(path.back(), NodeId{6});
  EXPECT_EQ(h.successor(path.front(), path.size() - 1), NodeId{6});
  EXPECT_FALSE(h.successor(path.front(), path.size()).has_value());
  EXPECT_EQ(h.path_from(6), std::vector<NodeId>{6});

  // Path length is the number of merges enclosing the ISOL, plus one.
  for (IsolId isol = 1; isol <= 4; ++isol) {
    std::size_t enclosing = 0;
    for (const HierarchyNode& n : h.nodes())
      if (!n.is_singleton() && std::count(n.members.begin(), n.members.end(), isol)) ++enclosing;
    EXPECT_EQ(h.path_from(h.singleton(isol)).size(), enclosing + 1);
  }

  EXPECT_EQ(h.ancestors_all(1), std::vector<NodeId>{1});
  EXPECT_EQ(h.ancestors_all(4).size(), 3u);
  EXPECT_EQ(h.ancestors_all(6).size(), 7u);
  EXPECT_THROW(h.node(99), std::out_of_range);
  EXPECT_THROW(h.singleton(99), std::out_of_range);
}

TEST(Hierarchy, MergeRejectsNonRoots) {
  Hierarchy h({1, 2, 3});
  const NodeId c = h.merge(0, 1, Distance(3));
  EXPECT_EQ(c, 3u);
  EXPECT_THROW(h.merge(0, 2, Distance(1)), std::invalid_argument);
  EXPECT_THROW(h.merge(2, 2, Distance(1)), std::invalid_argument);
  EXPECT_THROW(Hierarchy({4, 4}), std::invalid_argument);
}

TEST(GroupPixels, CountsMatchRaster) {
  for (const auto& scene : oracle::random_corpus(30)) {
    const auto b = build(scene.raster);
    std::map<Label, std::size_t> per_label;
    for (Label v : b.raster.labels()) ++per_label[v];
    for (const HierarchyNode& n : b.hier.nodes()) {
      std::size_t want = 0;
      for (IsolId m : n.members) want += per_label[m];
      const auto px = group_pixels(b.hier, b.isols, n.id);
      EXPECT_EQ(px.size(), want);
      if (n.is_singleton()) {
        EXPECT_EQ(px, find_isol(b.isols, n.members.front())->pixels);
      }
    }
  }
}
