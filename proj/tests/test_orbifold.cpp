#include <catch2/catch_amalgamated.hpp>

#include "kuratlas/examples.hpp"
#include "kuratlas/orbifold.hpp"

using namespace kuratlas;
using namespace kuratlas::examples;

TEST_CASE("football is a strict orbifold atlas") {
  FootballModel m = make_football(4, 8, 5, 3);
  CheckReport rep = check_strict_orbifold(m.atlas);
  INFO(rep.first_failure());
  CHECK(rep.ok());
}

TEST_CASE("football completion: morphism counts and stabilizers") {
  FootballModel m = make_football(4, 8, 5, 3);
  EpGroupoid g = groupoid_completion(m.atlas);
  const Atlas& a = m.atlas;
  int i1 = a.poset.id("1"), i2 = a.poset.id("2"), i12 = a.poset.id("12");
  // |Mor(W1, W2)| = |W12| (Γ_∅ = {id})
  int count12 = 0;
  for (auto& mor : g.mors)
    if (mor.I == i1 && mor.J == i2) ++count12;
  CHECK(count12 == static_cast<int>(a.charts[i12].active.size()));
  // |Mor(x,x)| = |Γ^x|: 2 at the north-pole lift, 3 at the south, 1 at a
  // free sample
  int north = g.obj_id.at({i1, 0});
  int south = g.obj_id.at({i2, 0});
  CHECK(groupoid_stabilizer_order(g, north) == 2);
  CHECK(groupoid_stabilizer_order(g, south) == 3);
  int free1 = g.obj_id.at({i1, m.w1_id(2, 1)});
  CHECK(groupoid_stabilizer_order(g, free1) == 1);
}

TEST_CASE("football completion: category axioms exhaustively") {
  FootballModel m = make_football(3, 6, 4, 2);
  EpGroupoid g = groupoid_completion(m.atlas);
  CheckReport rep = check_ep_groupoid(g);
  INFO(rep.first_failure());
  CHECK(rep.ok());
}

TEST_CASE("completion restricted to one chart is the translation groupoid") {
  FootballModel m = make_football(3, 6, 4, 2);
  EpGroupoid g = groupoid_completion(m.atlas);
  const Atlas& a = m.atlas;
  int i1 = a.poset.id("1");
  int within = 0;
  for (auto& mor : g.mors)
    if (mor.I == i1 && mor.J == i1) ++within;
  CHECK(within == static_cast<int>(a.charts[i1].active.size()) *
                      a.charts[i1].group().n);
}

TEST_CASE("single group quotient completes to its translation groupoid") {
  PointZ2Model m = make_point_z2(2);
  EpGroupoid g = groupoid_completion(m.atlas);
  CHECK(g.mors.size() == m.atlas.charts[0].active.size() * 2);
  CheckReport rep = check_ep_groupoid(g);
  INFO(rep.first_failure());
  CHECK(rep.ok());
}

TEST_CASE("football resolution weighting matches the worked table") {
  FootballModel m = make_football(6, 24, 16, 8);
  Realization r = realize(m.atlas);
  ResolutionResult res = resolution(m.atlas, r);
  const Atlas& a = m.atlas;
  int i1 = a.poset.id("1"), i2 = a.poset.id("2");
  for (auto& p : res.weights.points) {
    bool in1 = false, in2 = false;
    for (int o : p.members) {
      if (res.groupoid.objects[o].chart == i1) in1 = true;
      if (res.groupoid.objects[o].chart == i2) in2 = true;
    }
    if (in1) CHECK(p.lambda == Q(1, 2));
    else if (in2) CHECK(p.lambda == Q(1, 3));
    else CHECK(p.lambda == Q(1, 6));
  }
  for (int p = 0; p < m.x_count(); ++p) {
    if (p == m.x_id(0, 0)) CHECK(res.pushforward[p] == Q(1, 2));
    else if (p == m.x_id(m.L, 0)) CHECK(res.pushforward[p] == Q(1, 3));
    else CHECK(res.pushforward[p] == Q(1));
  }
}
