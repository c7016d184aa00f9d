#include <catch2/catch_amalgamated.hpp>

#include "kuratlas/examples.hpp"

using namespace kuratlas;
using namespace kuratlas::examples;

TEST_CASE("single chart atlas: realization is the orbit set") {
  PointZ2Model m = make_point_z2(2);
  Realization r = realize(m.atlas);
  auto [reps, rep_of] = m.atlas.charts[0].orbits();
  CHECK(r.class_count == static_cast<int>(reps.size()));
}

TEST_CASE("metrizability-failure atlas is tame with strong cocycle") {
  KhomeoModel m = make_khomeo();
  CheckReport s = m.atlas.check_structure();
  INFO(s.first_failure());
  REQUIRE(s.ok());
  CheckReport c = check_cocycle(m.atlas, CocycleLevel::Strong);
  CHECK(c.ok());
  CheckReport t = check_tame(m.atlas);
  INFO(t.first_failure());
  CHECK(t.ok());
}

TEST_CASE("metrizability-failure atlas realization matches the glued model") {
  KhomeoModel m = make_khomeo();
  Realization r = realize(m.atlas);
  // classes: negative line samples + positive columns glued along y = 0
  int expect = (m.Lneg + 1) + m.Lpos + m.Lpos * 2 * m.H;
  CHECK(r.class_count == expect);
  // iota injective and defined everywhere
  for (int p = 0; p < m.atlas.x_space.n; ++p) CHECK(r.iota[p] >= 0);
}

TEST_CASE("football realization bijects with the sphere sample") {
  FootballModel m = make_football(6, 10, 7, 3);
  Realization r = realize(m.atlas);
  CHECK(r.class_count == m.x_count());
  CheckReport t = check_tame(m.atlas);
  INFO(t.first_failure());
  CHECK(t.ok());
}

TEST_CASE("filtration clauses pass on a standard atlas") {
  KhomeoModel m = make_khomeo();
  CheckReport f = filtration(m.atlas);
  INFO(f.first_failure());
  CHECK(f.ok());
}

TEST_CASE("cocycle diagnostics catch a trimmed domain") {
  // Build a 3-element chain atlas and break eq:cocycle by deleting a sample
  // from U_IK's domain.
  KhomeoModel m = make_khomeo();
  Atlas a = m.atlas;
  // chain needs I < J < K: add change 1 -> 2? The poset has no 3-chain, so
  // instead re-run on a poset with a chain by relabeling: use charts 1 < 2 <
  // 12 where 1 < 2 via the same line inclusion.
  a.poset = make_poset({"1", "2", "12"}, {{"1", "2"}, {"2", "12"}, {"1", "12"}});
  CoordinateChange c12 = a.changes.at({0, 2});  // 1 -> 12 data works for 1 -> 2
  a.changes[{0, 1}] = c12;
  CheckReport weak = check_cocycle(a, CocycleLevel::Weak);
  INFO(weak.first_failure());
  CHECK(weak.ok());
  CheckReport coc = check_cocycle(a, CocycleLevel::Cocycle);
  CHECK(coc.ok());
  // now delete one domain sample of U_IK
  Atlas b = a;
  auto& cc = b.changes.at({0, 2});
  int victim = cc.domain.back();
  cc.domain = set_minus(cc.domain, IdSet{victim});
  cc.rho[m.grid_id(victim - m.Lneg, 0)] = -1;
  cc.lifted = set_minus(cc.lifted, IdSet{m.grid_id(victim - m.Lneg, 0)});
  CheckReport weak2 = check_cocycle(b, CocycleLevel::Weak);
  CHECK(weak2.ok());
  CheckReport coc2 = check_cocycle(b, CocycleLevel::Cocycle);
  CHECK_FALSE(coc2.ok());
}

TEST_CASE("eps_set closed form matches union-find on the worked example") {
  KhomeoModel m = make_khomeo();
  Realization r = realize(m.atlas);
  int i1 = m.atlas.poset.id("1"), i12 = m.atlas.poset.id("12");
  // V1 = (-inf, 2): samples strictly below 2
  IdSet v1;
  for (int x = -m.Lneg; x < 2; ++x) v1.push_back(m.u1_id(x));
  IdSet eps = eps_set(m.atlas, r, i1, i12, set_sorted(v1));
  CHECK(eps == IdSet{m.grid_id(1, 0)});
  // S_I = U_I, J = I
  IdSet all1 = m.atlas.charts[i1].active;
  CHECK(eps_set(m.atlas, r, i1, i1, all1) == all1);
  // disjoint-index clause: eps through zero sets only
  int i2 = m.atlas.poset.id("2");
  IdSet v1b;
  for (int x = -m.Lneg; x <= 3; ++x) v1b.push_back(m.u1_id(x));
  IdSet eps2 = eps_set(m.atlas, r, i1, i2, set_sorted(v1b));
  IdSet expect;
  for (int x = 1; x <= 3; ++x) expect.push_back(m.grid_id(x, 0));
  CHECK(eps2 == set_sorted(expect));
}

TEST_CASE("two-step equivalence matches the union-find closure when tame") {
  KhomeoModel m = make_khomeo(4, 4, 2);
  Realization r = realize(m.atlas);
  CheckReport rep = check_two_step(m.atlas, r);
  INFO(rep.first_failure());
  CHECK(rep.ok());
}

TEST_CASE("goodness: unshrunk fails the metrizability proxy at the origin") {
  KhomeoModel m = make_khomeo();
  Realization r = realize(m.atlas);
  CheckReport g = check_good(m.atlas, r);
  CHECK_FALSE(g.ok());
  bool witness_at_origin = false;
  for (auto& it : g.items)
    if (it.check == "good.(iii)-admissible-metric" && !it.pass &&
        it.witness.find("X sample " + std::to_string(m.x_id(0))) != std::string::npos)
      witness_at_origin = true;
  CHECK(witness_at_origin);
}

TEST_CASE("the hand shrinking validates structurally but is not tame") {
  // The worked shrinking (-inf,2) / (1,inf)xR is a shrinking, not a taming:
  // the image identity fails on the trimmed transition domain. The good
  // shrinking comes out of the taming iteration instead.
  KhomeoModel m = make_khomeo();
  Atlas sh = khomeo_hand_shrinking(m);
  CheckReport s = sh.check_structure();
  INFO(s.first_failure());
  REQUIRE(s.ok());
  CheckReport w = check_cocycle(sh, CocycleLevel::Weak);
  CHECK(w.ok());
  CHECK_FALSE(check_tame(sh).ok());
}

TEST_CASE("goodness: one-chart atlas is good trivially") {
  PointZ2Model m = make_point_z2(2);
  Realization r = realize(m.atlas);
  CheckReport g = check_good(m.atlas, r);
  INFO(g.first_failure());
  CHECK(g.ok());
}

TEST_CASE("intermediate view: noneffective-style halving of sheets") {
  FootballModel m = make_football(4, 8, 5, 3);
  IntermediateView v = intermediate(m.atlas);
  int i12 = m.atlas.poset.id("12");
  // 6 sheets per band sample collapse to one orbit each
  CHECK(v.active_reps[i12].size() == static_cast<size_t>(m.band() * m.nq));
}

TEST_CASE("noneffective circle atlas validates; sheets halve intermediately") {
  NoneffectiveModel m = make_noneffective_s1(6, 1);
  CheckReport s = m.atlas.check_structure();
  INFO(s.first_failure());
  REQUIRE(s.ok());
  CHECK(check_tame(m.atlas).ok());
  IntermediateView v = intermediate(m.atlas);
  int i2 = m.atlas.poset.id("2"), i12 = m.atlas.poset.id("12");
  // the two sheets of the transition chart collapse to one copy of the
  // quotiented chart-2 sample
  CHECK(v.active_reps[i12].size() == v.active_reps[i2].size());
  // the covering kernels act freely (structure check covers it; assert the
  // kernel sizes are as in the worked example)
  const auto& c1 = m.atlas.change(m.atlas.poset.id("1"), i12);
  CHECK(c1.rho_gamma.kernel().size() == 2);
}

TEST_CASE("realization equals the realization of the intermediate view") {
  FootballModel m = make_football(4, 8, 5, 3);
  Realization r = realize(m.atlas);
  IntermediateView v = intermediate(m.atlas);
  // every class meets each chart in at most one orbit, and classes are
  // reached by orbit reps: counting classes through reps must agree
  std::set<int> via_reps;
  for (int i = 0; i < m.atlas.n(); ++i)
    for (int x : v.active_reps[i]) via_reps.insert(r.class_of(i, x));
  CHECK(static_cast<int>(via_reps.size()) == r.class_count);
}
