#include <catch2/catch_amalgamated.hpp>

#include "kuratlas/examples.hpp"
#include "kuratlas/reduce.hpp"
#include "kuratlas/tame.hpp"

using namespace kuratlas;
using namespace kuratlas::examples;

TEST_CASE("reduction of the metrizability example separates V1 and V2") {
  KhomeoModel m = make_khomeo();
  PreshrinkResult pre = preshrink(m.atlas);
  Reduction red = build_reduction(pre.atlas, pre.realization);
  const Atlas& a = pre.atlas;
  int i1 = a.poset.id("1"), i2 = a.poset.id("2"), i12 = a.poset.id("12");
  REQUIRE_FALSE(red.V[i1].empty());
  REQUIRE_FALSE(red.V[i12].empty());
  // F2 and F12 share footprints here, so the level rule may empty V2;
  // the disjointness property π(cl V1) ∩ π(cl V2) = ∅ is the exact claim.
  std::set<int> c1, c2;
  for (int x : a.charts[i1].closure(red.V[i1]))
    c1.insert(pre.realization.class_of(i1, x));
  for (int x : a.charts[i2].closure(red.V[i2]))
    c2.insert(pre.realization.class_of(i2, x));
  for (int c : c1) REQUIRE_FALSE(c2.count(c));
}

TEST_CASE("football reduction carves polar caps and an equatorial band") {
  FootballModel m = make_football(6, 24, 16, 8);
  Realization r = realize(m.atlas);
  Reduction red = build_reduction(m.atlas, r);
  const Atlas& a = m.atlas;
  CheckReport rep = check_reduction(a, r, red);
  INFO(rep.first_failure());
  CHECK(rep.ok());
  // caps contain the poles
  CHECK(set_contains(red.V[a.poset.id("1")], 0));
  CHECK(set_contains(red.V[a.poset.id("2")], 0));
}

TEST_CASE("incomparable reduction images are disjoint on the football") {
  FootballModel m = make_football(6, 24, 16, 8);
  Realization r = realize(m.atlas);
  Reduction red = build_reduction(m.atlas, r);
  // incomparable pair (1, 2)
  std::set<int> c1, c2;
  const Atlas& a = m.atlas;
  for (int x : red.V[a.poset.id("1")]) c1.insert(r.class_of(a.poset.id("1"), x));
  for (int x : red.V[a.poset.id("2")]) c2.insert(r.class_of(a.poset.id("2"), x));
  for (int c : c1) REQUIRE_FALSE(c2.count(c));
}

TEST_CASE("nested reductions chain with margins") {
  FootballModel m = make_football(6, 24, 16, 8);
  Realization r = realize(m.atlas);
  Reduction v = build_reduction(m.atlas, r);
  Reduction c = nested_reduction(m.atlas, r, v);
  for (int i = 0; i < m.atlas.n(); ++i) REQUIRE(set_subset(c.V[i], v.V[i]));
  Reduction c2 = nested_reduction(m.atlas, r, c);
  for (int i = 0; i < m.atlas.n(); ++i) REQUIRE(set_subset(c2.V[i], c.V[i]));
}

TEST_CASE("constant pack: trivial obstruction gives the +inf sentinel") {
  FootballModel m = make_football(6, 24, 16, 8);
  Realization r = realize(m.atlas);
  Reduction v = build_reduction(m.atlas, r);
  Reduction c = nested_reduction(m.atlas, r, v);
  Q dv = compute_delta_v(m.atlas, r, v);
  REQUIRE(dv > 0);
  ConstantPack pack = constant_pack(m.atlas, r, v, c, dv / 2);
  CHECK_FALSE(pack.sigma.has_value());  // no nonzero section values
  CHECK(pack.eta0 == (Q(1) - kC14) * (dv / 2));
}

TEST_CASE("constant pack on the tamed metrizability example") {
  KhomeoModel m = make_khomeo(8, 8, 4);
  PreshrinkResult pre = preshrink(m.atlas);
  Reduction v = build_reduction(pre.atlas, pre.realization);
  Reduction c = nested_reduction(pre.atlas, pre.realization, v);
  Q dv = compute_delta_v(pre.atlas, pre.realization, v);
  REQUIRE(dv > 0);
  ConstantPack pack = constant_pack(pre.atlas, pre.realization, v, c, dv / 2);
  // σ is either the +inf sentinel (everything near the zero set is carved
  // into cores and the nested reduction) or a concrete positive rational
  if (pack.sigma) CHECK(*pack.sigma > 0);
  CHECK_THROWS_AS(constant_pack(pre.atlas, pre.realization, v, c, dv * 2), AtlasError);
}

TEST_CASE("V^k families are nested and the eq:N identity holds") {
  KhomeoModel m = make_khomeo(8, 8, 4);
  PreshrinkResult pre = preshrink(m.atlas);
  Reduction v = build_reduction(pre.atlas, pre.realization);
  Reduction c = nested_reduction(pre.atlas, pre.realization, v);
  Q dv = compute_delta_v(pre.atlas, pre.realization, v);
  ConstantPack pack = constant_pack(pre.atlas, pre.realization, v, c, dv / 2);
  const Atlas& a = pre.atlas;
  for (int i = 0; i < a.n(); ++i)
    for (int k = 0; k < pack.M; ++k)
      REQUIRE(set_subset(vk_set(a, v, pack, i, k + 1), vk_set(a, v, pack, i, k)));
  // eq:N on a tame atlas: V^k_J ∩ π^{-1}(π(V^k_I)) = N^k_JI for I ⊊ J
  for (int i = 0; i < a.n(); ++i)
    for (int j : a.poset.up[i]) {
      if (j == i) continue;
      for (int k = 0; k <= pack.M; ++k) {
        IdSet vkj = vk_set(a, v, pack, j, k);
        std::set<int> vi_classes;
        for (int x : vk_set(a, v, pack, i, k))
          vi_classes.insert(pre.realization.class_of(i, x));
        IdSet brute;
        for (int y : vkj)
          if (vi_classes.count(pre.realization.class_of(j, y))) brute.push_back(y);
        REQUIRE(brute == core_piece(a, v, pack, i, j, k));
      }
    }
}
