#include <catch2/catch_amalgamated.hpp>

#include "kuratlas/examples.hpp"

using namespace kuratlas;
using namespace kuratlas::examples;

TEST_CASE("football charts and coverings validate") {
  FootballModel m = make_football(6, 10, 7, 3);
  CheckReport rep = m.atlas.check_structure();
  INFO(rep.first_failure());
  CHECK(rep.ok());
}

TEST_CASE("football covering kernel is Z/3 acting freely") {
  FootballModel m = make_football(4, 8, 5, 3);
  const Atlas& a = m.atlas;
  const auto& cc = a.change(a.poset.id("1"), a.poset.id("12"));
  IdSet ker = cc.rho_gamma.kernel();
  CHECK(ker.size() == 3);
  CheckReport rep = check_group_covering(a.charts[a.poset.id("1")],
                                         a.charts[a.poset.id("12")], cc);
  INFO(rep.first_failure());
  CHECK(rep.ok());
}

TEST_CASE("identity covering passes trivially") {
  KhomeoModel m = make_khomeo();
  const Atlas& a = m.atlas;
  const auto& cc = a.change(a.poset.id("2"), a.poset.id("12"));
  CheckReport rep = check_group_covering(a.charts[a.poset.id("2")],
                                         a.charts[a.poset.id("12")], cc);
  CHECK(rep.ok());
}

TEST_CASE("trivially-acting declared kernel fails freeness with a witness") {
  // Z/2 acting trivially on a two-sample chart, declared as the kernel of a
  // covering onto the trivial group.
  KuranishiChart ci;
  ci.q.domain = SampledSpace::from_table(2, {Q(0), Q(1), Q(1), Q(0)}, Q(1, 2));
  ci.q.group = FiniteGroup::trivial();
  ci.q.action.perm = {{0, 1}};
  ci.active = {0, 1};
  ci.obstruction_dim = 0;
  ci.obs_action = {QMat(0, 0)};
  ci.section = {QVec{}, QVec{}};
  ci.footprint_map = {{0, 0}, {1, 1}};

  KuranishiChart cj = ci;
  cj.q.group = FiniteGroup::cyclic(2);
  cj.q.action.perm = {{0, 1}, {0, 1}};  // trivial action
  cj.obs_action = {QMat(0, 0), QMat(0, 0)};

  CoordinateChange cc;
  cc.domain = {0, 1};
  cc.lifted = {0, 1};
  cc.rho = {0, 1};
  cc.rho_gamma.map = {0, 0};
  cc.rho_gamma.split = {0};
  cc.phihat = QMat(0, 0);

  CheckReport rep = check_group_covering(ci, cj, cc);
  CHECK_FALSE(rep.ok());
  bool saw_freeness = false;
  for (auto& it : rep.items)
    if (it.check == "covering.kernel-free" && !it.pass) saw_freeness = true;
  CHECK(saw_freeness);
}

TEST_CASE("restriction of a chart hits exactly the requested footprint") {
  FootballModel m = make_football(4, 8, 5, 3);
  const Atlas& a = m.atlas;
  const auto& k1 = a.charts[a.poset.id("1")];
  // annulus footprint: latitudes 2..4
  IdSet fprime;
  for (int lat = 2; lat <= 4; ++lat)
    for (int ang = 0; ang < m.nq; ++ang) fprime.push_back(m.x_id(lat, ang));
  fprime = set_sorted(fprime);
  KuranishiChart r = restrict_chart(k1, fprime);
  CHECK(r.footprint() == fprime);
  CHECK(r.action().invariant(r.active));
  // restriction of the restriction equals direct restriction
  IdSet fsmall;
  for (int ang = 0; ang < m.nq; ++ang) fsmall.push_back(m.x_id(3, ang));
  fsmall = set_sorted(fsmall);
  KuranishiChart r2 = restrict_chart(r, fsmall);
  KuranishiChart rd = restrict_chart(k1, fsmall);
  CHECK(r2.footprint() == rd.footprint());
  // full-footprint restriction keeps the footprint
  KuranishiChart rf = restrict_chart(k1, k1.footprint());
  CHECK(rf.footprint() == k1.footprint());
}

TEST_CASE("point/Z2 chart passes checks including orientation compatibility") {
  PointZ2Model m = make_point_z2();
  CheckReport rep = m.atlas.charts[0].check();
  INFO(rep.first_failure());
  CHECK(rep.ok());
}

TEST_CASE("index condition: equal dimension iso reduces to rho invertibility") {
  KhomeoModel m = make_khomeo();
  const Atlas& a = m.atlas;
  int i2 = a.poset.id("2"), i12 = a.poset.id("12");
  // give the identity change its lifted triangulation: the full grid
  CoordinateChange cc = a.change(i2, i12);
  for (int x = 1; x < m.Lpos; ++x)
    for (int y = -m.H; y < m.H; ++y) {
      cc.lifted_tri.simplices.push_back(
          {m.grid_id(x, y), m.grid_id(x + 1, y), m.grid_id(x + 1, y + 1)});
      cc.lifted_tri.orient.push_back(1);
      cc.lifted_tri.simplices.push_back(
          {m.grid_id(x, y), m.grid_id(x + 1, y + 1), m.grid_id(x, y + 1)});
      cc.lifted_tri.orient.push_back(1);
    }
  Atlas b = m.atlas;
  b.charts[i12].tri = cc.lifted_tri;
  CheckReport rep = check_index_condition(b.charts[i2], b.charts[i12], cc);
  INFO(rep.first_failure());
  CHECK(rep.ok());
}

TEST_CASE("index condition fails when the cokernel is not covered") {
  // s_J ≡ 0 with dim E_J = 1 > dim E_I = 0: every zero simplex witnesses.
  KuranishiChart ci;
  ci.q.domain = SampledSpace::from_table(2, {Q(0), Q(1), Q(1), Q(0)}, Q(1, 2));
  ci.q.group = FiniteGroup::trivial();
  ci.q.action.perm = {{0, 1}};
  ci.active = {0, 1};
  ci.obstruction_dim = 0;
  ci.obs_action = {QMat(0, 0)};
  ci.section = {QVec{}, QVec{}};
  ci.footprint_map = {{0, 0}, {1, 1}};

  KuranishiChart cj;
  int n = 4;  // 2x2 grid, 1-simplices along a line suffice
  std::vector<Q> tab(16, Q(0));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) tab[i * 4 + j] = Q(std::abs(i - j));
  cj.q.domain = SampledSpace::from_table(n, tab, Q(1, 2));
  cj.q.group = FiniteGroup::trivial();
  cj.q.action.perm = {{0, 1, 2, 3}};
  cj.active = {0, 1, 2, 3};
  cj.obstruction_dim = 1;
  cj.obs_action = {QMat::identity(1)};
  cj.section.assign(4, QVec{Q(0)});  // s_J ≡ 0
  for (int i = 0; i < 4; ++i) cj.footprint_map[i] = std::min(i, 1);
  cj.tri.simplices = {{0, 1}, {1, 2}, {2, 3}};
  cj.tri.orient = {1, 1, 1};

  CoordinateChange cc;
  cc.domain = {0, 1};
  cc.lifted = {0, 1};
  cc.rho = {0, 1, -1, -1};
  cc.rho_gamma.map = {0};
  cc.rho_gamma.split = {0};
  cc.phihat = QMat(1, 0);
  cc.lifted_tri.simplices = {{0, 1}};
  cc.lifted_tri.orient = {1};

  CheckReport rep = check_index_condition(ci, cj, cc);
  CHECK_FALSE(rep.ok());
}

TEST_CASE("composition with the identity change returns the original") {
  KhomeoModel m = make_khomeo();
  const Atlas& a = m.atlas;
  int i1 = a.poset.id("1"), i2 = a.poset.id("2"), i12 = a.poset.id("12");
  const auto& c1 = a.change(i1, i12);
  const auto& c2 = a.change(i2, i12);
  (void)c2;
  // compose (1 -> 12) with the identity-style (12 = 12): model by composing
  // with the 2 -> 12 identity covering reversed is not defined; instead use
  // the chain 1 -> 12 -> 12 via an identity change on 12.
  CoordinateChange idc;
  idc.domain = a.charts[i12].active;
  idc.lifted = a.charts[i12].active;
  idc.rho.resize(a.charts[i12].space().n);
  for (int i = 0; i < a.charts[i12].space().n; ++i) idc.rho[i] = i;
  idc.rho_gamma.map = {0};
  idc.rho_gamma.split = {0};
  idc.phihat = QMat::identity(1);
  CoordinateChange comp =
      compose_changes(a.charts[i1], a.charts[i12], a.charts[i12], c1, idc);
  CHECK(comp.domain == c1.domain);
  CHECK(comp.lifted == c1.lifted);
  CHECK(comp.rho == c1.rho);
  CheckReport rep = check_group_covering(a.charts[i1], a.charts[i12], comp);
  INFO(rep.first_failure());
  CHECK(rep.ok());
}

TEST_CASE("fiber size equals kernel order across a covering") {
  FootballModel m = make_football(4, 8, 5, 3);
  const Atlas& a = m.atlas;
  for (auto& [key, cc] : a.changes) {
    IdSet ker = cc.rho_gamma.kernel();
    std::map<int, int> fiber;
    for (int y : cc.lifted) fiber[cc.rho[y]]++;
    for (auto& [x, c] : fiber) REQUIRE(c == static_cast<int>(ker.size()));
  }
}
