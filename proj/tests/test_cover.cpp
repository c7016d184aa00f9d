#include <catch2/catch_amalgamated.hpp>

#include "kuratlas/cover.hpp"

using namespace kuratlas;

namespace {

// Circle with n equally spaced samples, arc-length metric (rational: 1 unit
// per step), resolution h.
SampledSpace circle_space(int n, Q h) {
  std::vector<Q> tab(static_cast<size_t>(n) * n, Q(0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int d = std::abs(i - j);
      tab[static_cast<size_t>(i) * n + j] = Q(std::min(d, n - d));
    }
  return SampledSpace::from_table(n, tab, h);
}

IdSet arc(int n, int from, int len) {
  IdSet s;
  for (int t = 0; t < len; ++t) s.push_back((from + t) % n);
  return set_sorted(s);
}

Cover subset_cover(SampledSpace space, const std::vector<IdSet>& basics) {
  // family: all nonempty intersections
  int nb = static_cast<int>(basics.size());
  std::vector<IdSet> family;
  std::vector<IdSet> sets;
  for (unsigned mask = 1; mask < (1u << nb); ++mask) {
    IdSet inter;
    bool first = true;
    IdSet members;
    for (int t = 0; t < nb; ++t)
      if (mask & (1u << t)) {
        members.push_back(t);
        inter = first ? basics[t] : set_intersect(inter, basics[t]);
        first = false;
      }
    if (!inter.empty()) {
      family.push_back(members);
      sets.push_back(inter);
    }
  }
  std::vector<std::string> names;
  for (int t = 0; t < nb; ++t) names.push_back(std::to_string(t + 1));
  Cover c;
  c.space = std::move(space);
  c.poset = make_subset_poset(family, names);
  c.sets = sets;
  return c;
}

}  // namespace

TEST_CASE("shrink_cover keeps all pairwise intersections on a circle") {
  int n = 120;
  SampledSpace X = circle_space(n, Q(2));
  std::vector<IdSet> basics = {arc(n, 0, 55), arc(n, 40, 55), arc(n, 80, 55)};
  Cover c = subset_cover(X, basics);
  REQUIRE(c.check_valid().ok());
  Cover s = shrink_cover(c);
  // brute-force scan: every nonempty F_I stays nonempty
  for (int i = 0; i < c.poset.n(); ++i) {
    if (!c.sets[i].empty()) REQUIRE_FALSE(s.sets[i].empty());
  }
  // margin h against the original complement
  for (int i = 0; i < c.poset.n(); ++i) {
    if (!c.poset.is_minimal(i) || s.sets[i].empty()) continue;
    auto m = X.margin(s.sets[i], c.sets[i]);
    if (m) CHECK(*m >= X.h);
  }
}

TEST_CASE("shrink_cover leaves a whole-space set unchanged") {
  int n = 20;
  SampledSpace X = circle_space(n, Q(1));
  std::vector<IdSet> basics = {X.all(), arc(n, 0, 12)};
  Cover c = subset_cover(X, basics);
  Cover s = shrink_cover(c);
  CHECK(s.sets[c.poset.id("1")] == X.all());
}

TEST_CASE("already-minimal two-point cover is returned unchanged") {
  std::vector<Q> tab = {Q(0), Q(5), Q(5), Q(0)};
  SampledSpace X = SampledSpace::from_table(2, tab, Q(1));
  std::vector<IdSet> basics = {{0}, {1}};
  Cover c = subset_cover(X, basics);
  Cover s = shrink_cover(c);
  CHECK(s.sets == c.sets);
}

TEST_CASE("nested families: single-set cover stays constant") {
  int n = 16;
  SampledSpace X = circle_space(n, Q(1));
  std::vector<IdSet> basics = {X.all()};
  Cover c = subset_cover(X, basics);
  NestedFamilies f = nested_families(c, 2);
  for (auto& fam : f.families) CHECK(fam[0] == X.all());
}

TEST_CASE("nested families: depth-1 two-chart overlap keeps margin h") {
  int n = 120;
  SampledSpace X = circle_space(n, Q(2));
  std::vector<IdSet> basics = {arc(n, 0, 80), arc(n, 60, 80)};
  Cover c = subset_cover(X, basics);
  NestedFamilies f = nested_families(c, 1);
  // direct distance check: Q^0 strictly inside P^1 at margin h
  for (int i = 0; i < c.poset.n(); ++i) {
    if (f.Qf(0)[i].empty()) continue;
    auto m = X.margin(f.Qf(0)[i], f.P(1)[i]);
    if (m) CHECK(*m >= X.h);
  }
}

TEST_CASE("nested families: law holds in every family on a 3-chart circle") {
  int n = 120;
  SampledSpace X = circle_space(n, Q(1, 2));
  std::vector<IdSet> basics = {arc(n, 0, 55), arc(n, 40, 55), arc(n, 80, 55)};
  Cover c = subset_cover(X, basics);
  NestedFamilies f = nested_families(c, 3);
  // exhaustive pair scan of the intersection law in every family
  for (auto& fam : f.families) {
    for (int i = 0; i < c.poset.n(); ++i)
      for (int j = i + 1; j < c.poset.n(); ++j) {
        IdSet inter = set_intersect(fam[i], fam[j]);
        if (inter.empty()) continue;
        auto l = c.poset.lub2(i, j);
        REQUIRE(l.has_value());
        REQUIRE(set_subset(inter, fam[*l]));
      }
  }
}

TEST_CASE("cover_reduction reproduces the three-point worked example") {
  // X = {p1,p2,p3}, F1 = {p1,p3}, F2 = {p2,p3}, F12 = {p3}
  std::vector<Q> tab = {Q(0), Q(1), Q(1), Q(1), Q(0), Q(1), Q(1), Q(1), Q(0)};
  SampledSpace X = SampledSpace::from_table(3, tab, Q(1, 4));
  std::vector<IdSet> basics = {{0, 2}, {1, 2}};
  Cover c = subset_cover(X, basics);
  CoverReduction r = cover_reduction(c);
  CHECK(r.zsets[c.poset.id("1")] == IdSet{0});
  CHECK(r.zsets[c.poset.id("2")] == IdSet{1});
  CHECK(r.zsets[c.poset.id("1,2")] == IdSet{2});
}

TEST_CASE("cover_reduction: single-set cover gives the whole space") {
  int n = 12;
  SampledSpace X = circle_space(n, Q(1));
  Cover c = subset_cover(X, {X.all()});
  CoverReduction r = cover_reduction(c);
  CHECK(r.zsets[0] == X.all());
}

TEST_CASE("cover_reduction properties on random torus covers") {
  // 20x20 torus grid with L1 wraparound metric
  int side = 20, n = side * side;
  std::vector<Q> tab(static_cast<size_t>(n) * n, Q(0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int xi = i % side, yi = i / side, xj = j % side, yj = j / side;
      int dx = std::abs(xi - xj), dy = std::abs(yi - yj);
      tab[static_cast<size_t>(i) * n + j] =
          Q(std::min(dx, side - dx) + std::min(dy, side - dy));
    }
  SampledSpace X = SampledSpace::from_table(n, tab, Q(1, 4));
  auto band = [&](bool horiz, int from, int len) {
    IdSet s;
    for (int a = 0; a < side; ++a)
      for (int t = 0; t < len; ++t) {
        int b = (from + t) % side;
        s.push_back(horiz ? (b * side + a) : (a * side + b));
      }
    return set_sorted(s);
  };
  Rng rng(99);
  for (int trial = 0; trial < 8; ++trial) {
    int l1 = 14 + static_cast<int>(rng.below(4));
    int l2 = 14 + static_cast<int>(rng.below(4));
    std::vector<IdSet> basics = {
        band(true, static_cast<int>(rng.below(side)), l1),
        band(true, static_cast<int>(rng.below(side)) + side / 2, l1),
        band(false, static_cast<int>(rng.below(side)), l2),
        band(false, static_cast<int>(rng.below(side)) + side / 2, l2)};
    // ensure coverage
    IdSet u;
    for (auto& b : basics) u = set_union(u, b);
    if (u != X.all()) continue;
    Cover c = subset_cover(X, basics);
    CoverReduction r = cover_reduction(c);
    CHECK(r.check(X, c.sets).ok());
  }
}

TEST_CASE("set_reduction: trivial ambient case") {
  IdSet uprime = {0, 1, 2, 3};
  IdSet z;  // empty closed set
  std::vector<IdSet> z_i = {{}};
  std::map<unsigned, IdSet> W = {{1u, {0, 1, 2, 3}}};
  auto out = set_reduction(uprime, z, z_i, W);
  CHECK(out[1u] == uprime);
}

TEST_CASE("set_reduction: disjoint zero pieces force disjoint outputs") {
  // N = 2 with Z1 ∩ Z2 = ∅ and overlapping W's
  IdSet uprime;
  for (int i = 0; i < 30; ++i) uprime.push_back(i);
  IdSet z = {0, 1, 2, 27, 28, 29};
  std::vector<IdSet> z_i = {{0, 1, 2}, {27, 28, 29}};
  std::map<unsigned, IdSet> W;
  IdSet w1, w2;
  for (int i = 0; i < 20; ++i) w1.push_back(i);
  for (int i = 10; i < 30; ++i) w2.push_back(i);
  W[1u] = w1;
  W[2u] = w2;
  W[3u] = {};  // W_{12} ∩ Z = Z_12 = ∅
  auto out = set_reduction(uprime, z, z_i, W);
  CHECK(set_intersect(out[1u], out[2u]).empty());
  CHECK(set_intersect(out[1u], z) == z_i[0]);
  CHECK(set_intersect(out[2u], z) == z_i[1]);
}

TEST_CASE("set_reduction: nested-interval model, exhaustive pairwise law") {
  // 60 samples on a line, N = 3
  int n = 60;
  IdSet uprime;
  for (int i = 0; i < n; ++i) uprime.push_back(i);
  auto seg = [&](int a, int b) {
    IdSet s;
    for (int i = a; i <= b; ++i) s.push_back(i);
    return s;
  };
  IdSet z = seg(10, 50);
  std::vector<IdSet> z_i = {set_intersect(z, seg(10, 30)),
                            set_intersect(z, seg(20, 40)),
                            set_intersect(z, seg(30, 50))};
  std::map<unsigned, IdSet> W;
  for (unsigned K = 1; K < 8; ++K) {
    IdSet zk = z;
    for (int t = 0; t < 3; ++t)
      if (K & (1u << t)) zk = set_intersect(zk, z_i[t]);
    // W_K = Z_K thickened inside the line, minus the rest of Z
    IdSet w = zk;
    for (int x : zk) {
      if (x > 0) w.push_back(x - 1);
      if (x + 1 < n) w.push_back(x + 1);
    }
    w = set_sorted(w);
    w = set_minus(w, set_minus(z, zk));
    W[K] = w;
  }
  auto out = set_reduction(uprime, z, z_i, W);
  for (unsigned J = 1; J < 8; ++J)
    for (unsigned K = 1; K < 8; ++K)
      REQUIRE(set_intersect(out[J], out[K]) == out[J | K]);
}

TEST_CASE("set_reduction rejects a violated hypothesis with the offender") {
  IdSet uprime = {0, 1, 2};
  IdSet z = {0, 1};
  std::vector<IdSet> z_i = {{0}};
  std::map<unsigned, IdSet> W = {{1u, {0, 1}}};  // W ∩ Z = {0,1} != Z_1 = {0}
  CHECK_THROWS_AS(set_reduction(uprime, z, z_i, W), AtlasError);
}
