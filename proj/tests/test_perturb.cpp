#include <catch2/catch_amalgamated.hpp>

#include "kuratlas/examples.hpp"
#include "kuratlas/reduce.hpp"
#include "kuratlas/perturb.hpp"
#include "kuratlas/zeroset.hpp"

using namespace kuratlas;
using namespace kuratlas::examples;

namespace {

struct Pipeline {
  Atlas atlas;
  Realization r;
  Reduction v, c;
  ConstantPack pack;

  explicit Pipeline(const Atlas& a) : atlas(a), r(realize(a)) {
    v = build_reduction(atlas, r);
    c = nested_reduction(atlas, r, v);
    Q dv = compute_delta_v(atlas, r, v);
    pack = constant_pack(atlas, r, v, c, dv / 2);
  }
};

}  // namespace

TEST_CASE("point/Z2: adapted perturbation with a single half-weighted zero") {
  PointZ2Model m = make_point_z2(3, Q(1, 2));
  Pipeline p(m.atlas);
  Perturbation nu = build_perturbation(p.atlas, p.r, p.v, p.c, p.pack, 1);
  CheckReport rep = check_adapted(p.atlas, p.r, p.v, p.c, p.pack, nu);
  INFO(rep.first_failure());
  CHECK(rep.ok());
  LocalZeroSet zeros = zero_set(p.atlas, p.v, nu);
  REQUIRE(zeros.zeros.size() == 1);
  CHECK(zeros.zeros[0].sign == 1);
  WnbGroupoid g = zero_groupoid(p.atlas, p.v, zeros);
  WnbGroupoid gh = hausdorff_quotient(p.atlas, p.v, g);
  WeightedCount w = weighting(p.atlas, gh);
  CHECK(vfc_count(w) == Q(1, 2));
}

TEST_CASE("point/Z2: three seeds give identical virtual counts") {
  PointZ2Model m = make_point_z2(3, Q(1, 2));
  Pipeline p(m.atlas);
  std::vector<Q> counts;
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    Perturbation nu = build_perturbation(p.atlas, p.r, p.v, p.c, p.pack, seed);
    LocalZeroSet zeros = zero_set(p.atlas, p.v, nu);
    WnbGroupoid gh = hausdorff_quotient(p.atlas, p.v, zero_groupoid(p.atlas, p.v, zeros));
    counts.push_back(vfc_count(weighting(p.atlas, gh)));
  }
  CHECK(counts[0] == Q(1, 2));
  CHECK(counts[0] == counts[1]);
  CHECK(counts[1] == counts[2]);
}

TEST_CASE("adaptedness diagnostics catch a degenerate perturbation") {
  PointZ2Model m = make_point_z2(3, Q(1, 2));
  Pipeline p(m.atlas);
  // ν = −s flattens the perturbed section to zero: transversality fails
  Perturbation flat;
  flat.nu.resize(1);
  flat.nu[0].resize(m.atlas.charts[0].space().n);
  for (int x = 0; x < m.atlas.charts[0].space().n; ++x)
    flat.nu[0][x] = Q(-1) * m.atlas.charts[0].section[x];
  CheckReport rep = check_adapted(p.atlas, p.r, p.v, p.c, p.pack, flat);
  CHECK_FALSE(rep.ok());
  bool clause_b = false;
  for (auto& it : rep.items)
    if (it.check == "adapted.b-transverse" && !it.pass) clause_b = true;
  CHECK(clause_b);
}

TEST_CASE("zero transport and kernel invariance hold on built data") {
  PointZ2Model m = make_point_z2(3, Q(1, 2));
  Pipeline p(m.atlas);
  Perturbation nu = build_perturbation(p.atlas, p.r, p.v, p.c, p.pack, 7);
  LocalZeroSet zeros = zero_set(p.atlas, p.v, nu);
  CheckReport rep = check_zero_transport(p.atlas, p.v, p.pack, zeros);
  INFO(rep.first_failure());
  CHECK(rep.ok());
}

TEST_CASE("simple transverse 1-simplex zero has sign +1") {
  // s+ν the identity on a pair of 1-simplices straddling 0
  Triangulation tri;
  tri.simplices = {{0, 1}, {1, 2}};
  tri.orient = {1, 1};
  std::vector<QVec> section = {QVec{Q(-1)}, QVec{Q(1, 2)}, QVec{Q(2)}};
  auto zs = pl_zeros(tri, section, {0, 1, 2});
  REQUIRE(zs.size() == 1);
  CHECK(zs[0].sign == 1);
  CHECK(zs[0].point.support == IdSet{0, 1});
}
