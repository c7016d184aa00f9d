#pragma once

#include "kuratlas/atlas.hpp"
#include "kuratlas/examples.hpp"

namespace kuratlas {
namespace examples {

/// Rational point on the L1 unit circle at parameter t of n, walked
/// counterclockwise from (1,0); antipodal at t + n/2 when n is even.
inline QVec square_dir(int t, int n) {
  t = ((t % n) + n) % n;
  Q s = Q(4 * t, n);  // perimeter parameter in [0,4)
  int side = 0;
  while (Q(side + 1) <= s) ++side;
  Q frac = s - side;
  switch (side) {
    case 0: return {Q(1) - frac, frac};
    case 1: return {-frac, Q(1) - frac};
    case 2: return {frac - 1, -frac};
    default: return {frac, frac - 1};
  }
}

/// ---------------------------------------------------------------------
/// Trivial-isotropy sphere model on the L1 sphere: latitude/angle grid with
/// rational ambient coordinates, two cap charts overlapping in a band, the
/// rotation field about the polar axis (index +1 at each pole), and rational
/// tangent frames given by dropping the z coordinate.
/// ---------------------------------------------------------------------
struct SphereModel {
  Atlas atlas;             // 2-chart + band orbifold atlas, trivial isotropy
  int L, na, c1, c2;
  std::vector<QVec> pos;   // per X sample, ambient Q^3
  // frame data per X sample: tangent lift columns (3x2) and normal column
  std::vector<QMat> tangent_lift;
  std::vector<QVec> normal;
  // the rotation field in frame coordinates, per X sample
  std::vector<QVec> field;
  Triangulation x_tri;     // full triangulation of the sphere sample

  int x_count() const { return 2 + (L - 1) * na; }
  int x_id(int lat, int ang) const {
    if (lat == 0) return 0;
    if (lat == L) return 1;
    return 2 + (lat - 1) * na + ((ang % na) + na) % na;
  }
  // chart sample layouts: chart1 covers lat in [0..c1], chart2 [c2..L],
  // chart12 the band [c2..c1]; samples are indexed by the same (lat, ang).
  int w1_id(int lat, int ang) const {
    if (lat == 0) return 0;
    return 1 + (lat - 1) * na + ((ang % na) + na) % na;
  }
  int w1_count() const { return 1 + c1 * na; }
  int w2_id(int lat, int ang) const {  // lat in [c2..L]
    if (lat == L) return 0;
    return 1 + (L - 1 - lat) * na + ((ang % na) + na) % na;
  }
  int w2_count() const { return 1 + (L - c2) * na; }
  int w12_id(int lat, int ang) const {  // lat in [c2..c1]
    return (lat - c2) * na + ((ang % na) + na) % na;
  }
  int w12_count() const { return (c1 - c2 + 1) * na; }
};

inline SphereModel make_s2_tangent(int na = 8, int L = 12, int c1 = 8, int c2 = 4) {
  SphereModel m;
  m.L = L;
  m.na = na;
  m.c1 = c1;
  m.c2 = c2;
  int nx = m.x_count();
  m.pos.resize(nx);
  m.pos[0] = {Q(0), Q(0), Q(1)};
  m.pos[1] = {Q(0), Q(0), Q(-1)};
  for (int lat = 1; lat < L; ++lat) {
    Q z = Q(L - 2 * lat, L);
    Q rho = Q(1) - q_abs(z);
    for (int a = 0; a < na; ++a) {
      QVec d = square_dir(a, na);
      m.pos[m.x_id(lat, a)] = {rho * d[0], rho * d[1], z};
    }
  }
  // frames: project to the (x,y) plane; tangent plane spanned by the
  // rotation vector and a meridian edge, lifted so the projection is the
  // identity. Poles carry the standard frame.
  m.tangent_lift.resize(nx);
  m.normal.resize(nx);
  m.field.resize(nx);
  for (int p = 0; p < nx; ++p) {
    const QVec& x = m.pos[p];
    // constant vertical complement: with xy-projection frames the splitting
    // det [t1 t2 e_z] is identically 1, so the orientation is coherent
    m.normal[p] = {Q(0), Q(0), Q(1)};
    if (p <= 1) {
      QMat t(3, 2);
      t.at(0, 0) = 1;
      t.at(1, 1) = 1;
      m.tangent_lift[p] = t;
      m.field[p] = {Q(0), Q(0)};
      continue;
    }
    QVec u1 = {-x[1], x[0], Q(0)};
    // meridian direction: toward the south pole along z
    QVec u2 = {x[0], x[1], x[2] - 2};
    // solve for columns t1, t2 in span(u1,u2) with xy-projection e1, e2
    QMat proj(2, 2);
    proj.at(0, 0) = u1[0];
    proj.at(0, 1) = u2[0];
    proj.at(1, 0) = u1[1];
    proj.at(1, 1) = u2[1];
    QMat t(3, 2);
    for (int col = 0; col < 2; ++col) {
      QVec e = {Q(col == 0 ? 1 : 0), Q(col == 1 ? 1 : 0)};
      auto ab = q_solve(proj, e);
      if (!ab) fail(Errc::TrivializationInvalid, "tangent frame degenerate");
      for (int rr = 0; rr < 3; ++rr)
        t.at(rr, col) = (*ab)[0] * u1[rr] + (*ab)[1] * u2[rr];
    }
    m.tangent_lift[p] = t;
    m.field[p] = {-x[1], x[0]};  // rotation field in xy-projection frame
  }
  // X triangulation: pole fans and band quads split along a fixed diagonal
  for (int a = 0; a < na; ++a) {
    m.x_tri.simplices.push_back({m.x_id(0, 0), m.x_id(1, a), m.x_id(1, a + 1)});
    m.x_tri.orient.push_back(1);
    m.x_tri.simplices.push_back({m.x_id(L, 0), m.x_id(L - 1, a), m.x_id(L - 1, a + 1)});
    m.x_tri.orient.push_back(1);
  }
  for (int lat = 1; lat + 1 < L; ++lat)
    for (int a = 0; a < na; ++a) {
      m.x_tri.simplices.push_back(
          {m.x_id(lat, a), m.x_id(lat + 1, a), m.x_id(lat + 1, a + 1)});
      m.x_tri.orient.push_back(1);
      m.x_tri.simplices.push_back(
          {m.x_id(lat, a), m.x_id(lat + 1, a + 1), m.x_id(lat, a + 1)});
      m.x_tri.orient.push_back(1);
    }

  // the two cap charts and the band transition chart, trivial isotropy
  auto metric_fn = [m](int i, int j) {
    Q d(0);
    for (int k = 0; k < 3; ++k) d += q_abs(m.pos[i][k] - m.pos[j][k]);
    return d;
  };
  Q h = Q(1, 2 * std::max(L, na));

  auto make_chart = [&](int which) {
    KuranishiChart k;
    int count = which == 0 ? m.w1_count() : (which == 1 ? m.w2_count() : m.w12_count());
    // value capture only: the lambda outlives this scope inside SampledSpace
    SphereModel geo = m;
    auto to_x = [geo, which, L, na, c2](int id) {
      if (which == 0) {
        if (id == 0) return geo.x_id(0, 0);
        return geo.x_id(1 + (id - 1) / na, (id - 1) % na);
      }
      if (which == 1) {
        if (id == 0) return geo.x_id(L, 0);
        return geo.x_id(L - 1 - (id - 1) / na, (id - 1) % na);
      }
      return geo.x_id(c2 + id / na, id % na);
    };
    k.q.domain = SampledSpace::from_fn(
        count, [metric_fn, to_x](int i, int j) { return metric_fn(to_x(i), to_x(j)); },
        h);
    k.q.group = FiniteGroup::trivial();
    k.q.action.perm.assign(1, std::vector<int>(count));
    for (int i = 0; i < count; ++i) k.q.action.perm[0][i] = i;
    k.active = k.q.domain.all();
    k.obstruction_dim = 0;
    k.obs_action.assign(1, QMat(0, 0));
    k.section.assign(count, QVec{});
    for (int i = 0; i < count; ++i) k.footprint_map[i] = to_x(i);
    return k;
  };
  KuranishiChart k1 = make_chart(0), k2 = make_chart(1), k12 = make_chart(2);
  // chart triangulations (pole fans + quads), matching the sample layouts
  for (int a = 0; a < na; ++a) {
    k1.tri.simplices.push_back({0, m.w1_id(1, a), m.w1_id(1, a + 1)});
    k1.tri.orient.push_back(1);
    k2.tri.simplices.push_back({0, m.w2_id(L - 1, a), m.w2_id(L - 1, a + 1)});
    k2.tri.orient.push_back(1);
  }
  for (int lat = 1; lat < c1; ++lat)
    for (int a = 0; a < na; ++a) {
      k1.tri.simplices.push_back(
          {m.w1_id(lat, a), m.w1_id(lat + 1, a), m.w1_id(lat + 1, a + 1)});
      k1.tri.orient.push_back(1);
      k1.tri.simplices.push_back(
          {m.w1_id(lat, a), m.w1_id(lat + 1, a + 1), m.w1_id(lat, a + 1)});
      k1.tri.orient.push_back(1);
    }
  for (int lat = c2; lat + 1 < L; ++lat)
    for (int a = 0; a < na; ++a) {
      k2.tri.simplices.push_back(
          {m.w2_id(lat, a), m.w2_id(lat + 1, a), m.w2_id(lat + 1, a + 1)});
      k2.tri.orient.push_back(1);
      k2.tri.simplices.push_back(
          {m.w2_id(lat, a), m.w2_id(lat + 1, a + 1), m.w2_id(lat, a + 1)});
      k2.tri.orient.push_back(1);
    }
  for (int lat = c2; lat < c1; ++lat)
    for (int a = 0; a < na; ++a) {
      k12.tri.simplices.push_back(
          {m.w12_id(lat, a), m.w12_id(lat + 1, a), m.w12_id(lat + 1, a + 1)});
      k12.tri.orient.push_back(1);
      k12.tri.simplices.push_back(
          {m.w12_id(lat, a), m.w12_id(lat + 1, a + 1), m.w12_id(lat, a + 1)});
      k12.tri.orient.push_back(1);
    }

  Atlas& a = m.atlas;
  a.poset = make_poset({"1", "2", "12"}, {{"1", "12"}, {"2", "12"}});
  a.charts = {k1, k2, k12};
  a.x_space = SampledSpace::from_fn(nx, metric_fn, h);
  a.flag = AtlasFlag::Standard;
  a.metric_certificate = true;

  auto add_change = [&](int src, int lo) {
    CoordinateChange cc;
    cc.rho.assign(m.w12_count(), -1);
    for (int lat = c2; lat <= c1; ++lat)
      for (int ang = 0; ang < na; ++ang) {
        int w = m.w12_id(lat, ang);
        int tgt = lo == 0 ? m.w1_id(lat, ang) : m.w2_id(lat, ang);
        cc.rho[w] = tgt;
        cc.domain.push_back(tgt);
        cc.lifted.push_back(w);
      }
    cc.domain = set_sorted(cc.domain);
    cc.lifted = set_sorted(cc.lifted);
    cc.rho_gamma.map = {0};
    cc.rho_gamma.split = {0};
    cc.phihat = QMat(0, 0);
    a.changes[{src, a.poset.id("12")}] = cc;
  };
  add_change(a.poset.id("1"), 0);
  add_change(a.poset.id("2"), 1);
  return m;
}

/// Frame field values of the rotation section on a chart of the sphere model
/// (frame = xy-projection everywhere).
inline std::vector<QVec> sphere_section_on_chart(const SphereModel& m, int chart) {
  const KuranishiChart& ch = m.atlas.charts[chart];
  std::vector<QVec> vals(ch.space().n);
  for (int i = 0; i < ch.space().n; ++i) vals[i] = m.field[ch.footprint_map.at(i)];
  return vals;
}

/// ---------------------------------------------------------------------
/// Football tangent model: the orbifold football with a rank-2 bundle whose
/// fiber actions are the chart group representations (−I of order 2 and the
/// rational order-3 matrix), and section values winding once around each
/// cone point. The transition chart is realized as the connected Z6 cover
/// of the band (CRT sheet coordinate), which also carries the triangulation.
/// ---------------------------------------------------------------------
struct FootballTangentModel {
  Atlas atlas;
  int L, nq, c1, c2;
  // section frame values per chart
  std::vector<std::vector<QVec>> section_values;
  std::vector<std::vector<QMat>> fiber_action;

  int x_count() const { return 2 + (L - 1) * nq; }
  int x_id(int lat, int ang) const {
    if (lat == 0) return 0;
    if (lat == L) return 1;
    return 2 + (lat - 1) * nq + ((ang % nq) + nq) % nq;
  }
  int w1_id(int r, int t) const {
    if (r == 0) return 0;
    return 1 + (r - 1) * 2 * nq + ((t % (2 * nq)) + 2 * nq) % (2 * nq);
  }
  int w1_count() const { return 1 + c1 * 2 * nq; }
  int w2_id(int r, int t) const {
    if (r == 0) return 0;
    return 1 + (r - 1) * 3 * nq + ((t % (3 * nq)) + 3 * nq) % (3 * nq);
  }
  int w2_count() const { return 1 + (L - c2) * 3 * nq; }
  // transition chart: cylinder lat in [c2..c1] x A in Z_{6nq}
  int w12_id(int lat, int A) const {
    return (lat - c2) * 6 * nq + ((A % (6 * nq)) + 6 * nq) % (6 * nq);
  }
  int w12_count() const { return (c1 - c2 + 1) * 6 * nq; }
};

/// order-3 rational matrix (companion of x^2 + x + 1)
inline QMat order3_matrix() {
  QMat m(2, 2);
  m.at(0, 0) = 0;
  m.at(0, 1) = -1;
  m.at(1, 0) = 1;
  m.at(1, 1) = -1;
  return m;
}

inline QVec mat_pow_apply(const QMat& m, int k, const QVec& v) {
  QVec r = v;
  for (int t = 0; t < k; ++t) r = m.apply(r);
  return r;
}

inline FootballTangentModel make_football_tangent(int nq = 6, int L = 24, int c1 = 16,
                                                  int c2 = 8) {
  FootballTangentModel m;
  m.L = L;
  m.nq = nq;
  m.c1 = c1;
  m.c2 = c2;
  Q h(1);
  auto angdist = [](int a, int b, int mod) {
    int d = std::abs(a - b) % mod;
    return Q(std::min(d, mod - d));
  };

  // direction fields: e on 2nq with e(t+nq) = -e(t); f on 3nq with
  // f(t+nq) = M3 f(t), interpolating the orbit triangle of (1,0)
  QMat M3 = order3_matrix();
  auto e_dir = [&](int t) { return square_dir(t, 2 * nq); };
  auto f_dir = [&](int t) {
    t = ((t % (3 * nq)) + 3 * nq) % (3 * nq);
    int block = t / nq;
    Q lam = Q(t % nq, nq);
    QVec v = {Q(1) - lam, lam};  // edge from (1,0) to (0,1)
    return mat_pow_apply(M3, block, v);
  };

  // chart 1: cap with Z2
  KuranishiChart k1;
  auto w1_rt = [=](int id) {
    if (id == 0) return std::pair<int, int>{0, 0};
    int k = id - 1;
    return std::pair<int, int>{1 + k / (2 * nq), k % (2 * nq)};
  };
  k1.q.domain = SampledSpace::from_fn(
      m.w1_count(),
      [=](int i, int j) {
        auto [ri, ti] = w1_rt(i);
        auto [rj, tj] = w1_rt(j);
        return std::min(Q(std::abs(ri - rj)) + angdist(ti, tj, 2 * nq), Q(ri + rj));
      },
      h);
  k1.q.group = FiniteGroup::cyclic(2);
  k1.q.action.perm.assign(2, std::vector<int>(m.w1_count()));
  for (int id = 0; id < m.w1_count(); ++id) {
    auto [r, t] = w1_rt(id);
    k1.q.action.perm[0][id] = id;
    k1.q.action.perm[1][id] = r == 0 ? 0 : m.w1_id(r, t + nq);
  }
  k1.active = k1.q.domain.all();
  k1.obstruction_dim = 0;
  k1.obs_action.assign(2, QMat(0, 0));
  k1.section.assign(m.w1_count(), QVec{});
  for (int id = 0; id < m.w1_count(); ++id) {
    auto [r, t] = w1_rt(id);
    k1.footprint_map[id] = m.x_id(r, t % nq);
  }
  // pole fan + quads
  for (int t = 0; t < 2 * nq; ++t) {
    k1.tri.simplices.push_back({0, m.w1_id(1, t), m.w1_id(1, t + 1)});
    k1.tri.orient.push_back(1);
  }
  for (int r = 1; r < c1; ++r)
    for (int t = 0; t < 2 * nq; ++t) {
      k1.tri.simplices.push_back({m.w1_id(r, t), m.w1_id(r + 1, t), m.w1_id(r + 1, t + 1)});
      k1.tri.orient.push_back(1);
      k1.tri.simplices.push_back({m.w1_id(r, t), m.w1_id(r + 1, t + 1), m.w1_id(r, t + 1)});
      k1.tri.orient.push_back(1);
    }

  // chart 2: cap with Z3 (ring r corresponds to latitude L - r)
  KuranishiChart k2;
  auto w2_rt = [=](int id) {
    if (id == 0) return std::pair<int, int>{0, 0};
    int k = id - 1;
    return std::pair<int, int>{1 + k / (3 * nq), k % (3 * nq)};
  };
  k2.q.domain = SampledSpace::from_fn(
      m.w2_count(),
      [=](int i, int j) {
        auto [ri, ti] = w2_rt(i);
        auto [rj, tj] = w2_rt(j);
        return std::min(Q(std::abs(ri - rj)) + angdist(ti, tj, 3 * nq), Q(ri + rj));
      },
      h);
  k2.q.group = FiniteGroup::cyclic(3);
  k2.q.action.perm.assign(3, std::vector<int>(m.w2_count()));
  for (int id = 0; id < m.w2_count(); ++id) {
    auto [r, t] = w2_rt(id);
    for (int g = 0; g < 3; ++g)
      k2.q.action.perm[g][id] = r == 0 ? 0 : m.w2_id(r, t + g * nq);
  }
  k2.active = k2.q.domain.all();
  k2.obstruction_dim = 0;
  k2.obs_action.assign(3, QMat(0, 0));
  k2.section.assign(m.w2_count(), QVec{});
  for (int id = 0; id < m.w2_count(); ++id) {
    auto [r, t] = w2_rt(id);
    k2.footprint_map[id] = m.x_id(L - r, t % nq);
  }
  for (int t = 0; t < 3 * nq; ++t) {
    k2.tri.simplices.push_back({0, m.w2_id(1, t), m.w2_id(1, t + 1)});
    k2.tri.orient.push_back(1);
  }
  for (int r = 1; r < L - c2; ++r)
    for (int t = 0; t < 3 * nq; ++t) {
      k2.tri.simplices.push_back({m.w2_id(r, t), m.w2_id(r + 1, t), m.w2_id(r + 1, t + 1)});
      k2.tri.orient.push_back(1);
      k2.tri.simplices.push_back({m.w2_id(r, t), m.w2_id(r + 1, t + 1), m.w2_id(r, t + 1)});
      k2.tri.orient.push_back(1);
    }

  // chart 12: connected Z6 cylinder cover of the band
  KuranishiChart k12;
  int n12 = m.w12_count();
  auto w12_la = [=](int id) {
    return std::pair<int, int>{c2 + id / (6 * nq), id % (6 * nq)};
  };
  k12.q.domain = SampledSpace::from_fn(
      n12,
      [=](int i, int j) {
        auto [li, ai] = w12_la(i);
        auto [lj, aj] = w12_la(j);
        // compatible with both covering projections: max of the two cone
        // metrics through the projections
        Q d1 = std::min(Q(std::abs(li - lj)) + angdist(ai % (2 * nq), aj % (2 * nq), 2 * nq),
                        Q(li + lj));
        Q d2 = std::min(Q(std::abs(li - lj)) +
                            angdist(ai % (3 * nq), aj % (3 * nq), 3 * nq),
                        Q(2 * L - li - lj));
        return std::max(d1, d2);
      },
      h);
  k12.q.group = FiniteGroup::product(FiniteGroup::cyclic(2), FiniteGroup::cyclic(3));
  // CRT sheet shift: (g1,g2) acts by A += nq*s with s = 3*g1*(3 inverse mod 2)...
  // solve s mod 6 with s ≡ g1 (mod 2), s ≡ g2 (mod 3): s = 3*g1 + 4*g2 mod 6
  k12.q.action.perm.assign(6, std::vector<int>(n12));
  for (int id = 0; id < n12; ++id) {
    auto [lat, A] = w12_la(id);
    for (int g = 0; g < 6; ++g) {
      int g1 = g / 3, g2 = g % 3;
      int s = (3 * g1 + 4 * g2) % 6;
      k12.q.action.perm[g][id] = m.w12_id(lat, A + nq * s);
    }
  }
  k12.active = k12.q.domain.all();
  k12.obstruction_dim = 0;
  k12.obs_action.assign(6, QMat(0, 0));
  k12.section.assign(n12, QVec{});
  for (int id = 0; id < n12; ++id) {
    auto [lat, A] = w12_la(id);
    k12.footprint_map[id] = m.x_id(lat, A % nq);
  }
  for (int lat = c2; lat < c1; ++lat)
    for (int A = 0; A < 6 * nq; ++A) {
      k12.tri.simplices.push_back(
          {m.w12_id(lat, A), m.w12_id(lat + 1, A), m.w12_id(lat + 1, A + 1)});
      k12.tri.orient.push_back(1);
      k12.tri.simplices.push_back(
          {m.w12_id(lat, A), m.w12_id(lat + 1, A + 1), m.w12_id(lat, A + 1)});
      k12.tri.orient.push_back(1);
    }

  Atlas& a = m.atlas;
  a.poset = make_poset({"1", "2", "12"}, {{"1", "12"}, {"2", "12"}});
  a.charts = {k1, k2, k12};
  a.x_space = SampledSpace::from_fn(
      m.x_count(),
      [=](int i, int j) {
        auto latang = [=](int id) {
          if (id == 0) return std::pair<int, int>{0, 0};
          if (id == 1) return std::pair<int, int>{L, 0};
          int k = id - 2;
          return std::pair<int, int>{1 + k / nq, k % nq};
        };
        auto [li, ai] = latang(i);
        auto [lj, aj] = latang(j);
        Q direct = Q(std::abs(li - lj)) + angdist(ai, aj, nq);
        return std::min(direct, std::min(Q(li + lj), Q(2 * L - li - lj)));
      },
      h);
  a.flag = AtlasFlag::Standard;
  a.metric_certificate = true;

  // changes: A mod 2nq and A mod 3nq are the covering projections
  CoordinateChange c1c;
  c1c.rho.assign(n12, -1);
  for (int id = 0; id < n12; ++id) {
    auto [lat, A] = w12_la(id);
    c1c.rho[id] = m.w1_id(lat, A % (2 * nq));
    c1c.lifted.push_back(id);
    c1c.domain.push_back(c1c.rho[id]);
  }
  c1c.domain = set_sorted(c1c.domain);
  c1c.lifted = set_sorted(c1c.lifted);
  c1c.rho_gamma.map.resize(6);
  for (int g = 0; g < 6; ++g) c1c.rho_gamma.map[g] = g / 3;
  c1c.rho_gamma.split = {0, 3};
  c1c.phihat = QMat(0, 0);
  a.changes[{a.poset.id("1"), a.poset.id("12")}] = c1c;

  CoordinateChange c2c;
  c2c.rho.assign(n12, -1);
  for (int id = 0; id < n12; ++id) {
    auto [lat, A] = w12_la(id);
    c2c.rho[id] = m.w2_id(L - lat, A % (3 * nq));
    c2c.lifted.push_back(id);
    c2c.domain.push_back(c2c.rho[id]);
  }
  c2c.domain = set_sorted(c2c.domain);
  c2c.lifted = set_sorted(c2c.lifted);
  c2c.rho_gamma.map.resize(6);
  for (int g = 0; g < 6; ++g) c2c.rho_gamma.map[g] = g % 3;
  c2c.rho_gamma.split = {0, 1, 2};
  c2c.phihat = QMat(0, 0);
  a.changes[{a.poset.id("2"), a.poset.id("12")}] = c2c;

  // bundle data: fiber actions and winding section values
  QMat minus = QMat::identity(2);
  minus.at(0, 0) = -1;
  minus.at(1, 1) = -1;
  m.fiber_action.resize(3);
  m.fiber_action[a.poset.id("1")] = {QMat::identity(2), minus};
  m.fiber_action[a.poset.id("2")] = {QMat::identity(2), M3, M3.mul(M3)};
  // transition chart group (g1,g2) acts on the fiber by (-1)^{g1} M3^{g2}
  std::vector<QMat> f12(6, QMat::identity(2));
  for (int g = 0; g < 6; ++g) {
    int g1 = g / 3, g2 = g % 3;
    QMat mm = QMat::identity(2);
    for (int t = 0; t < g2; ++t) mm = M3.mul(mm);
    if (g1) mm = minus.mul(mm);
    f12[g] = mm;
  }
  m.fiber_action[a.poset.id("12")] = f12;

  m.section_values.resize(3);
  auto& s1 = m.section_values[a.poset.id("1")];
  s1.assign(m.w1_count(), QVec{Q(0), Q(0)});
  for (int id = 1; id < m.w1_count(); ++id) {
    auto [r, t] = w1_rt(id);
    QVec d = e_dir(t);
    s1[id] = {Q(r) * d[0], Q(r) * d[1]};
  }
  auto& s2 = m.section_values[a.poset.id("2")];
  s2.assign(m.w2_count(), QVec{Q(0), Q(0)});
  for (int id = 1; id < m.w2_count(); ++id) {
    auto [r, t] = w2_rt(id);
    QVec d = f_dir(t);
    s2[id] = {Q(r) * d[0], Q(r) * d[1]};
  }
  // the transition chart carries the chart-1 pullback as its frame values
  auto& s12 = m.section_values[a.poset.id("12")];
  s12.assign(n12, QVec{Q(0), Q(0)});
  for (int id = 0; id < n12; ++id) s12[id] = s1[c1c.rho[id]];
  return m;
}

}  // namespace examples
}  // namespace kuratlas
