#include <catch2/catch_amalgamated.hpp>

#include "kuratlas/examples.hpp"
#include "kuratlas/reduce.hpp"
#include "kuratlas/zeroset.hpp"

using namespace kuratlas;
using namespace kuratlas::examples;

namespace {

// Zero-obstruction resolution pieces: zeros are the reduction samples.
LocalZeroSet orbifold_zeros(const Atlas& atlas, const Reduction& v) {
  LocalZeroSet z;
  for (int i = 0; i < atlas.n(); ++i)
    for (int x : v.V[i]) z.zeros.push_back({i, PlPoint::sample(x), 1});
  return z;
}

// Hand reduction of a football with genuinely overlapping pieces, so that
// the covering morphisms and the frontier circles show up.
Reduction overlapping_football_reduction(const FootballModel& m) {
  const Atlas& a = m.atlas;
  Reduction red;
  red.V.assign(3, {});
  int i1 = a.poset.id("1"), i2 = a.poset.id("2"), i12 = a.poset.id("12");
  // V1: latitudes <= c2+2 in chart 1; V2: latitudes >= c1-2; V12: the band
  for (int id = 0; id < m.w1_count(); ++id) {
    int r = id == 0 ? 0 : 1 + (id - 1) / (2 * m.nq);
    if (r <= m.c2 + 2) red.V[i1].push_back(id);
  }
  for (int id = 0; id < m.w2_count(); ++id) {
    int r = id == 0 ? 0 : 1 + (id - 1) / (3 * m.nq);
    int lat = m.L - r;
    if (lat >= m.c1 - 2) red.V[i2].push_back(id);
  }
  red.V[i12] = a.charts[i12].active;
  for (auto& s : red.V) s = set_sorted(s);
  return red;
}

}  // namespace

TEST_CASE("football (carved reduction): weighting table and pushforward") {
  FootballModel m = make_football(6, 24, 16, 8);
  Realization r = realize(m.atlas);
  Reduction v = build_reduction(m.atlas, r);
  LocalZeroSet zeros = orbifold_zeros(m.atlas, v);
  WnbGroupoid g = zero_groupoid(m.atlas, v, zeros);
  CheckReport cl = check_groupoid_closure(g);
  INFO(cl.first_failure());
  CHECK(cl.ok());
  WnbGroupoid gh = hausdorff_quotient(m.atlas, v, g);
  WeightedCount w = weighting(m.atlas, gh);
  const Atlas& a = m.atlas;
  int i1 = a.poset.id("1"), i2 = a.poset.id("2"), i12 = a.poset.id("12");
  for (auto& p : w.points) {
    bool in1 = false, in2 = false, in12 = false;
    for (int o : p.members) {
      if (gh.objects[o].chart == i1) in1 = true;
      if (gh.objects[o].chart == i2) in2 = true;
      if (gh.objects[o].chart == i12) in12 = true;
    }
    if (in1) CHECK(p.lambda == Q(1, 2));
    if (in2) CHECK(p.lambda == Q(1, 3));
    if (!in1 && !in2 && in12) CHECK(p.lambda == Q(1, 6));
  }
  // pushforward: 1 at every non-pole sample, 1/|Γ| at the poles
  std::map<int, Q> push = pushforward(m.atlas, gh, w);
  for (int p = 0; p < m.x_count(); ++p) {
    if (p == m.x_id(0, 0))
      CHECK(push[p] == Q(1, 2));
    else if (p == m.x_id(m.L, 0))
      CHECK(push[p] == Q(1, 3));
    else
      CHECK(push[p] == Q(1));
  }
}

TEST_CASE("football (overlapping reduction): covering morphisms and frontier") {
  FootballModel m = make_football(6, 24, 16, 8);
  Realization r = realize(m.atlas);
  Reduction v = overlapping_football_reduction(m);
  CheckReport rep = check_reduction(m.atlas, r, v);
  INFO(rep.first_failure());
  REQUIRE(rep.ok());
  LocalZeroSet zeros = orbifold_zeros(m.atlas, v);
  WnbGroupoid g = zero_groupoid(m.atlas, v, zeros);
  WnbGroupoid gh = hausdorff_quotient(m.atlas, v, g);
  // frontier circles of the lifted pieces exist here
  CHECK_FALSE(gh.frontier_edges.empty());
  WeightedCount w = weighting(m.atlas, gh);
  // the 1 = 1/2 vs 3·(1/6) bookkeeping: classes meeting V1 weigh 1/2 even
  // when counted in the transition chart
  const Atlas& a = m.atlas;
  int i1 = a.poset.id("1"), i2 = a.poset.id("2");
  for (auto& p : w.points) {
    bool in1 = false, in2 = false;
    for (int o : p.members) {
      if (gh.objects[o].chart == i1) in1 = true;
      if (gh.objects[o].chart == i2) in2 = true;
    }
    if (in1) CHECK(p.lambda == Q(1, 2));
    if (in2) CHECK(p.lambda == Q(1, 3));
  }
  std::map<int, Q> push = pushforward(m.atlas, gh, w);
  for (int p = 0; p < m.x_count(); ++p) {
    if (p == m.x_id(0, 0))
      CHECK(push[p] == Q(1, 2));
    else if (p == m.x_id(m.L, 0))
      CHECK(push[p] == Q(1, 3));
    else
      CHECK(push[p] == Q(1));
  }
}

TEST_CASE("noneffective quotient: weighting is constantly one half") {
  NoneffectiveModel m = make_noneffective_s1(6, 1);
  // single-chart view: restrict to the basic chart over the circle with the
  // trivial Z2 action (the totally noneffective case)
  Atlas a;
  a.poset = make_poset({"1"}, {});
  a.charts = {m.atlas.charts[m.atlas.poset.id("1")]};
  a.x_space = m.atlas.x_space;
  a.metric_certificate = true;
  Realization r = realize(a);
  Reduction v;
  v.V = {a.charts[0].active};
  LocalZeroSet zeros = orbifold_zeros(a, v);
  WnbGroupoid gh = hausdorff_quotient(a, v, zero_groupoid(a, v, zeros));
  WeightedCount w = weighting(a, gh);
  for (auto& p : w.points) CHECK(p.lambda == Q(1, 2));
  std::map<int, Q> push = pushforward(a, gh, w);
  for (auto& [xid, val] : push) CHECK(val == Q(1, 2));
}

TEST_CASE("empty zero set gives count zero") {
  WeightedCount w;
  CHECK(vfc_count(w) == 0);
}

TEST_CASE("quotient point ids are stable across runs") {
  FootballModel m = make_football(6, 24, 16, 8);
  Realization r = realize(m.atlas);
  Reduction v = build_reduction(m.atlas, r);
  LocalZeroSet zeros = orbifold_zeros(m.atlas, v);
  auto run = [&]() {
    WnbGroupoid gh = hausdorff_quotient(m.atlas, v, zero_groupoid(m.atlas, v, zeros));
    WeightedCount w = weighting(m.atlas, gh);
    std::set<std::string> keys;
    for (auto& p : w.points) keys.insert(p.key);
    return keys;
  };
  CHECK(run() == run());
}
