#pragma once

#include <string>
#include <vector>

#include "kuratlas/atlas.hpp"

namespace kuratlas {
namespace examples {

/// ---------------------------------------------------------------------
/// Football orbifold: sphere with cone points of order 2 (north) and 3
/// (south). Charts: polar caps with rotation actions, transition chart the
/// 6-sheeted fiber product over the equatorial band. Trivial obstruction.
///
/// Latitude levels 0..L (poles at the ends), nq samples per quotient ring.
/// Chart 1 covers latitudes [0, c1], chart 2 covers [c2, L], band [c2, c1].
/// All metrics are exact path metrics (radial and angular steps of length 1).
/// ---------------------------------------------------------------------
struct FootballModel {
  Atlas atlas;
  int L, nq, c1, c2;

  int x_count() const { return 2 + (L - 1) * nq; }
  int x_id(int lat, int ang) const {
    if (lat == 0) return 0;
    if (lat == L) return 1;
    return 2 + (lat - 1) * nq + (ang % nq + nq) % nq;
  }
  // chart 1: pole + rings 1..c1 with 2nq samples
  int w1_id(int r, int t) const {
    if (r == 0) return 0;
    return 1 + (r - 1) * 2 * nq + (t % (2 * nq) + 2 * nq) % (2 * nq);
  }
  int w1_count() const { return 1 + c1 * 2 * nq; }
  // chart 2: pole + rings 1..(L-c2) with 3nq samples; ring r is latitude L-r
  int w2_id(int r, int t) const {
    if (r == 0) return 0;
    return 1 + (r - 1) * 3 * nq + (t % (3 * nq) + 3 * nq) % (3 * nq);
  }
  int w2_count() const { return 1 + (L - c2) * 3 * nq; }
  // chart 12: band lat in [c2..c1], sample (lat, a, u, v)
  int band() const { return c1 - c2 + 1; }
  int w12_id(int lat, int a, int u, int v) const {
    return (((lat - c2) * nq + (a % nq + nq) % nq) * 2 + u) * 3 + v;
  }
  int w12_count() const { return band() * nq * 6; }
  struct W12 {
    int lat, a, u, v;
  };
  W12 w12_of(int id) const {
    W12 w;
    w.v = id % 3;
    id /= 3;
    w.u = id % 2;
    id /= 2;
    w.a = id % nq;
    w.lat = c2 + id / nq;
    return w;
  }
};

namespace detail {

inline Q angdist(int a, int b, int mod) {
  int d = std::abs(a - b) % mod;
  return Q(std::min(d, mod - d));
}

}  // namespace detail

inline FootballModel make_football(int nq = 8, int L = 12, int c1 = 8, int c2 = 4,
                                   Q h = Q(1)) {
  FootballModel m;
  m.L = L;
  m.nq = nq;
  m.c1 = c1;
  m.c2 = c2;

  // X: path metric on the sphere grid
  auto x_latang = [=](int id) {
    if (id == 0) return std::pair<int, int>{0, 0};
    if (id == 1) return std::pair<int, int>{L, 0};
    int k = id - 2;
    return std::pair<int, int>{1 + k / nq, k % nq};
  };
  SampledSpace X = SampledSpace::from_fn(
      m.x_count(),
      [=](int i, int j) {
        auto [li, ai] = x_latang(i);
        auto [lj, aj] = x_latang(j);
        Q direct = Q(std::abs(li - lj)) + detail::angdist(ai, aj, nq);
        Q north = Q(li + lj);
        Q south = Q(2 * L - li - lj);
        return std::min(direct, std::min(north, south));
      },
      h);

  // chart 1
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
        Q direct = Q(std::abs(ri - rj)) + detail::angdist(ti, tj, 2 * nq);
        return std::min(direct, Q(ri + rj));
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

  // chart 2
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
        Q direct = Q(std::abs(ri - rj)) + detail::angdist(ti, tj, 3 * nq);
        return std::min(direct, Q(ri + rj));
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

  // chart 12: fiber product over the band
  KuranishiChart k12;
  int n12 = m.w12_count();
  k12.q.domain = SampledSpace::from_fn(
      n12,
      [=](int i, int j) {
        auto wi = m.w12_of(i);
        auto wj = m.w12_of(j);
        // components in chart 1 / chart 2 coordinates
        Q d1 = std::min(Q(std::abs(wi.lat - wj.lat)) +
                            detail::angdist(wi.a + wi.u * nq, wj.a + wj.u * nq, 2 * nq),
                        Q(wi.lat + wj.lat));
        Q d2 = std::min(
            Q(std::abs(wi.lat - wj.lat)) +
                detail::angdist(wi.a + wi.v * nq, wj.a + wj.v * nq, 3 * nq),
            Q(2 * L - wi.lat - wj.lat));
        return std::max(d1, d2);
      },
      h);
  k12.q.group = FiniteGroup::product(FiniteGroup::cyclic(2), FiniteGroup::cyclic(3));
  k12.q.action.perm.assign(6, std::vector<int>(n12));
  for (int id = 0; id < n12; ++id) {
    auto w = m.w12_of(id);
    for (int g = 0; g < 6; ++g) {
      int gu = g / 3, gv = g % 3;
      k12.q.action.perm[g][id] =
          m.w12_id(w.lat, w.a, (w.u + gu) % 2, (w.v + gv) % 3);
    }
  }
  k12.active = k12.q.domain.all();
  k12.obstruction_dim = 0;
  k12.obs_action.assign(6, QMat(0, 0));
  k12.section.assign(n12, QVec{});
  for (int id = 0; id < n12; ++id) {
    auto w = m.w12_of(id);
    k12.footprint_map[id] = m.x_id(w.lat, w.a);
  }

  Atlas& a = m.atlas;
  a.poset = make_poset({"1", "2", "12"}, {{"1", "12"}, {"2", "12"}});
  a.charts = {k1, k2, k12};
  a.x_space = X;
  a.flag = AtlasFlag::Standard;

  // change 1 -> 12
  CoordinateChange c1c;
  for (int id = 0; id < m.w1_count(); ++id) {
    auto [r, t] = w1_rt(id);
    if (r >= c2 && r <= c1) c1c.domain.push_back(id);
  }
  c1c.domain = set_sorted(c1c.domain);
  c1c.lifted = k12.q.domain.all();
  c1c.rho.assign(n12, -1);
  for (int id = 0; id < n12; ++id) {
    auto w = m.w12_of(id);
    c1c.rho[id] = m.w1_id(w.lat, w.a + w.u * nq);
  }
  c1c.rho_gamma.map.resize(6);
  for (int g = 0; g < 6; ++g) c1c.rho_gamma.map[g] = g / 3;
  c1c.rho_gamma.split = {0, 3};
  c1c.phihat = QMat(0, 0);
  a.changes[{a.poset.id("1"), a.poset.id("12")}] = c1c;

  // change 2 -> 12
  CoordinateChange c2c;
  for (int id = 0; id < m.w2_count(); ++id) {
    auto [r, t] = w2_rt(id);
    int lat = L - r;
    if (lat >= c2 && lat <= c1) c2c.domain.push_back(id);
  }
  c2c.domain = set_sorted(c2c.domain);
  c2c.lifted = k12.q.domain.all();
  c2c.rho.assign(n12, -1);
  for (int id = 0; id < n12; ++id) {
    auto w = m.w12_of(id);
    c2c.rho[id] = m.w2_id(L - w.lat, w.a + w.v * nq);
  }
  c2c.rho_gamma.map.resize(6);
  for (int g = 0; g < 6; ++g) c2c.rho_gamma.map[g] = g % 3;
  c2c.rho_gamma.split = {0, 1, 2};
  c2c.phihat = QMat(0, 0);
  a.changes[{a.poset.id("2"), a.poset.id("12")}] = c2c;

  a.metric_certificate = true;  // realization carries the X path metric
  return m;
}

/// ---------------------------------------------------------------------
/// The failure-of-metrizability example: X a sampled line, one zero-
/// obstruction chart over the whole line, one rank-one chart over the
/// positive half plane, transition chart equal to the second chart. Tame but
/// not good; the frontier of the positive footprint at the origin is the
/// non-metrizability witness.
/// ---------------------------------------------------------------------
struct KhomeoModel {
  Atlas atlas;
  int Lneg, Lpos, H;  // line samples -Lneg..Lpos, grid height -H..H

  int x_id(int x) const { return x + Lneg; }
  int u1_id(int x) const { return x + Lneg; }
  int u1_count() const { return Lneg + Lpos + 1; }
  // grid: x in 1..Lpos, y in -H..H
  int grid_id(int x, int y) const { return (x - 1) * (2 * H + 1) + (y + H); }
  int grid_count() const { return Lpos * (2 * H + 1); }
  std::pair<int, int> grid_of(int id) const {
    return {1 + id / (2 * H + 1), id % (2 * H + 1) - H};
  }
};

inline KhomeoModel make_khomeo(int Lneg = 8, int Lpos = 8, int H = 4, Q h = Q(1)) {
  KhomeoModel m;
  m.Lneg = Lneg;
  m.Lpos = Lpos;
  m.H = H;

  SampledSpace X = SampledSpace::from_fn(
      m.u1_count(), [](int i, int j) { return Q(std::abs(i - j)); }, h);

  KuranishiChart k1;
  k1.q.domain = X;
  k1.q.group = FiniteGroup::trivial();
  k1.q.action.perm.assign(1, std::vector<int>(m.u1_count()));
  for (int i = 0; i < m.u1_count(); ++i) k1.q.action.perm[0][i] = i;
  k1.active = X.all();
  k1.obstruction_dim = 0;
  k1.obs_action.assign(1, QMat(0, 0));
  k1.section.assign(m.u1_count(), QVec{});
  for (int i = 0; i < m.u1_count(); ++i) k1.footprint_map[i] = i;

  auto make_grid_chart = [&]() {
    KuranishiChart k;
    int n = m.grid_count();
    k.q.domain = SampledSpace::from_fn(
        n,
        [m](int i, int j) {
          auto [xi, yi] = m.grid_of(i);
          auto [xj, yj] = m.grid_of(j);
          return Q(std::abs(xi - xj) + std::abs(yi - yj));
        },
        h);
    k.q.group = FiniteGroup::trivial();
    k.q.action.perm.assign(1, std::vector<int>(n));
    for (int i = 0; i < n; ++i) k.q.action.perm[0][i] = i;
    k.active = k.q.domain.all();
    k.obstruction_dim = 1;
    k.obs_action.assign(1, QMat::identity(1));
    k.section.assign(n, QVec{Q(0)});
    for (int i = 0; i < n; ++i) {
      auto [x, y] = m.grid_of(i);
      k.section[i] = QVec{Q(y)};
      if (y == 0) k.footprint_map[i] = m.x_id(x);
    }
    return k;
  };
  KuranishiChart k2 = make_grid_chart();
  KuranishiChart k12 = make_grid_chart();

  Atlas& a = m.atlas;
  a.poset = make_poset({"1", "2", "12"}, {{"1", "12"}, {"2", "12"}});
  a.charts = {k1, k2, k12};
  a.x_space = X;
  a.flag = AtlasFlag::Standard;

  CoordinateChange c1c;
  for (int x = 1; x <= Lpos; ++x) c1c.domain.push_back(m.u1_id(x));
  c1c.domain = set_sorted(c1c.domain);
  c1c.rho.assign(m.grid_count(), -1);
  for (int x = 1; x <= Lpos; ++x) {
    c1c.lifted.push_back(m.grid_id(x, 0));
    c1c.rho[m.grid_id(x, 0)] = m.u1_id(x);
  }
  c1c.lifted = set_sorted(c1c.lifted);
  c1c.rho_gamma.map = {0};
  c1c.rho_gamma.split = {0};
  c1c.phihat = QMat(1, 0);
  a.changes[{a.poset.id("1"), a.poset.id("12")}] = c1c;

  CoordinateChange c2c;
  c2c.domain = k2.q.domain.all();
  c2c.lifted = k12.q.domain.all();
  c2c.rho.assign(m.grid_count(), -1);
  for (int i = 0; i < m.grid_count(); ++i) c2c.rho[i] = i;
  c2c.rho_gamma.map = {0};
  c2c.rho_gamma.split = {0};
  c2c.phihat = QMat::identity(1);
  a.changes[{a.poset.id("2"), a.poset.id("12")}] = c2c;
  return m;
}

/// Hand shrinking of the metrizability example: U1' = x <= b1,
/// U2' = U12' = x >= b2 (strictly positive), per the worked reduction.
inline Atlas khomeo_hand_shrinking(const KhomeoModel& m, int b1 = 2, int b2 = 2) {
  Atlas a = m.atlas;
  IdSet u1p, gridp;
  for (int x = -m.Lneg; x <= b1; ++x) u1p.push_back(m.u1_id(x));
  for (int x = b2; x <= m.Lpos; ++x)
    for (int y = -m.H; y <= m.H; ++y) gridp.push_back(m.grid_id(x, y));
  a.charts[a.poset.id("1")].active = set_sorted(u1p);
  a.charts[a.poset.id("2")].active = set_sorted(gridp);
  a.charts[a.poset.id("12")].active = set_sorted(gridp);
  // change domains follow as preimages
  auto& c1c = a.changes.at({a.poset.id("1"), a.poset.id("12")});
  IdSet dom1, lift1;
  for (int x = std::max(1, b2); x <= b1; ++x) {
    dom1.push_back(m.u1_id(x));
    lift1.push_back(m.grid_id(x, 0));
  }
  c1c.domain = set_sorted(dom1);
  c1c.lifted = set_sorted(lift1);
  for (int i = 0; i < m.grid_count(); ++i)
    if (!set_contains(c1c.lifted, i)) c1c.rho[i] = -1;
  auto& c2c = a.changes.at({a.poset.id("2"), a.poset.id("12")});
  c2c.domain = a.charts[a.poset.id("2")].active;
  c2c.lifted = a.charts[a.poset.id("12")].active;
  for (int i = 0; i < m.grid_count(); ++i)
    c2c.rho[i] = set_contains(c2c.lifted, i) ? i : -1;
  a.shrunk_from_tame = true;
  return a;
}

/// ---------------------------------------------------------------------
/// Noneffective point quotient: X = pt/Z2 with a rank-2 obstruction and the
/// antipodal action on the chart. Single positive transverse zero after a
/// constant perturbation gives virtual count 1/2.
/// Grid: obstruction-space samples (i, j)·g on [-R..R]^2.
/// ---------------------------------------------------------------------
struct PointZ2Model {
  Atlas atlas;
  int R;
  Q g;  // grid step
  int id(int i, int j) const { return (i + R) * (2 * R + 1) + (j + R); }
  std::pair<int, int> of(int id) const {
    return {id / (2 * R + 1) - R, id % (2 * R + 1) - R};
  }
};

inline PointZ2Model make_point_z2(int R = 3, Q g = Q(1, 2)) {
  PointZ2Model m;
  m.R = R;
  m.g = g;
  int n = (2 * R + 1) * (2 * R + 1);

  SampledSpace X = SampledSpace::from_table(1, {Q(0)}, g);

  KuranishiChart k;
  k.q.domain = SampledSpace::from_fn(
      n,
      [m](int a, int b) {
        auto [ia, ja] = m.of(a);
        auto [ib, jb] = m.of(b);
        return m.g * Q(std::max(std::abs(ia - ib), std::abs(ja - jb)));
      },
      g);
  k.q.group = FiniteGroup::cyclic(2);
  k.q.action.perm.assign(2, std::vector<int>(n));
  for (int a = 0; a < n; ++a) {
    auto [i, j] = m.of(a);
    k.q.action.perm[0][a] = a;
    k.q.action.perm[1][a] = m.id(-i, -j);
  }
  k.active = k.q.domain.all();
  k.obstruction_dim = 2;
  QMat minus = QMat::identity(2);
  minus.at(0, 0) = -1;
  minus.at(1, 1) = -1;
  k.obs_action = {QMat::identity(2), minus};
  k.section.assign(n, QVec{});
  for (int a = 0; a < n; ++a) {
    auto [i, j] = m.of(a);
    k.section[a] = QVec{m.g * i, m.g * j};
  }
  k.footprint_map[m.id(0, 0)] = 0;
  // triangulation: squares split along the main diagonal, equivariantly
  for (int i = -R; i < R; ++i)
    for (int j = -R; j < R; ++j) {
      k.tri.simplices.push_back({m.id(i, j), m.id(i + 1, j), m.id(i + 1, j + 1)});
      k.tri.orient.push_back(1);
      k.tri.simplices.push_back({m.id(i, j), m.id(i + 1, j + 1), m.id(i, j + 1)});
      k.tri.orient.push_back(1);
    }

  Atlas& a = m.atlas;
  a.poset = make_poset({"1"}, {});
  a.charts = {k};
  a.x_space = X;
  a.flag = AtlasFlag::Standard;
  a.metric_certificate = true;
  return m;
}

/// ---------------------------------------------------------------------
/// Randomized filtered weak atlases for the taming suite: a zero-obstruction
/// line chart plus a rank-one grid chart (optionally with the y-flip Z2
/// action), with random trims of the non-zero transition samples. Trims
/// break the tameness identities while keeping the atlas weak and filtered.
/// ---------------------------------------------------------------------
inline Atlas make_random_weak(uint64_t seed) {
  Rng rng(seed);
  int Lneg = 3 + static_cast<int>(rng.below(3));
  int Lpos = 4 + static_cast<int>(rng.below(3));
  int H = 2 + static_cast<int>(rng.below(2));

  KhomeoModel m = make_khomeo(Lneg, Lpos, H);
  Atlas a = m.atlas;
  int i2 = a.poset.id("2"), i12 = a.poset.id("12");

  // random trims of non-zero grid samples
  IdSet trim;
  int count = 1 + static_cast<int>(rng.below(4));
  for (int t = 0; t < count; ++t) {
    int x = 1 + static_cast<int>(rng.below(m.Lpos));
    int y = 1 + static_cast<int>(rng.below(m.H));
    if (rng.below(2)) y = -y;
    trim.push_back(m.grid_id(x, y));
  }
  trim = set_sorted(trim);
  // choose where the trim applies: the transition chart, the basic chart,
  // or both (each choice yields a different non-tame configuration)
  int mode = static_cast<int>(rng.below(3));
  IdSet t12 = (mode != 1) ? trim : IdSet{};
  IdSet t2 = (mode != 0) ? trim : IdSet{};
  a.charts[i12].active = set_minus(a.charts[i12].active, t12);
  a.charts[i2].active = set_minus(a.charts[i2].active, t2);
  IdSet both = set_union(t12, t2);
  auto& c2c = a.changes.at({i2, i12});
  c2c.domain = set_minus(c2c.domain, both);
  c2c.lifted = set_minus(c2c.lifted, both);
  for (int y : both) c2c.rho[y] = -1;
  return a;
}

/// ---------------------------------------------------------------------
/// Noneffective circle example: X = S¹; chart 1 the circle with Z2 acting
/// trivially and no obstruction, chart 2 the circle times a rank-2
/// obstruction with the antipodal fiber action, and the transition chart
/// two sheets interchanged by either group factor (the covering kernels
/// then act freely).
/// ---------------------------------------------------------------------
struct NoneffectiveModel {
  Atlas atlas;
  int n, R;
  Q g;
  // chart 2 / x-major sample layout: (x, e-grid point)
  int fib() const { return (2 * R + 1) * (2 * R + 1); }
  int u2_id(int x, int i, int j) const {
    return x * fib() + (i + R) * (2 * R + 1) + (j + R);
  }
  // chart 12: sheet beta in {0,1}
  int u12_id(int beta, int x, int i, int j) const {
    return beta * n * fib() + u2_id(x, i, j);
  }
  struct P12 {
    int beta, x, i, j;
  };
  P12 p12_of(int id) const {
    P12 p;
    p.beta = id / (n * fib());
    int rest = id % (n * fib());
    p.x = rest / fib();
    rest %= fib();
    p.i = rest / (2 * R + 1) - R;
    p.j = rest % (2 * R + 1) - R;
    return p;
  }
};

inline NoneffectiveModel make_noneffective_s1(int n = 8, int R = 1, Q g = Q(1)) {
  NoneffectiveModel m;
  m.n = n;
  m.R = R;
  m.g = g;
  auto circ = [n](int a, int b) {
    int d = std::abs(a - b) % n;
    return Q(std::min(d, n - d));
  };

  SampledSpace X = SampledSpace::from_fn(n, circ, Q(1));

  KuranishiChart k1;
  k1.q.domain = X;
  k1.q.group = FiniteGroup::cyclic(2);
  k1.q.action.perm.assign(2, std::vector<int>(n));
  for (int x = 0; x < n; ++x) {
    k1.q.action.perm[0][x] = x;
    k1.q.action.perm[1][x] = x;  // totally noneffective
  }
  k1.active = X.all();
  k1.obstruction_dim = 0;
  k1.obs_action.assign(2, QMat(0, 0));
  k1.section.assign(n, QVec{});
  for (int x = 0; x < n; ++x) k1.footprint_map[x] = x;

  KuranishiChart k2;
  int n2 = n * m.fib();
  k2.q.domain = SampledSpace::from_fn(
      n2,
      [m, circ](int a, int b) {
        int fx = a / m.fib(), fy = b / m.fib();
        int ra = a % m.fib(), rb = b % m.fib();
        int ia = ra / (2 * m.R + 1), ja = ra % (2 * m.R + 1);
        int ib = rb / (2 * m.R + 1), jb = rb % (2 * m.R + 1);
        return circ(fx, fy) +
               m.g * Q(std::max(std::abs(ia - ib), std::abs(ja - jb)));
      },
      Q(1));
  k2.q.group = FiniteGroup::cyclic(2);
  k2.q.action.perm.assign(2, std::vector<int>(n2));
  QMat minus2 = QMat::identity(2);
  minus2.at(0, 0) = -1;
  minus2.at(1, 1) = -1;
  for (int id = 0; id < n2; ++id) {
    int x = id / m.fib();
    int rest = id % m.fib();
    int i = rest / (2 * R + 1) - R, j = rest % (2 * R + 1) - R;
    k2.q.action.perm[0][id] = id;
    k2.q.action.perm[1][id] = m.u2_id(x, -i, -j);
  }
  k2.active = k2.q.domain.all();
  k2.obstruction_dim = 2;
  k2.obs_action = {QMat::identity(2), minus2};
  k2.section.assign(n2, QVec{});
  for (int id = 0; id < n2; ++id) {
    int rest = id % m.fib();
    int i = rest / (2 * R + 1) - R, j = rest % (2 * R + 1) - R;
    k2.section[id] = QVec{m.g * i, m.g * j};
    if (i == 0 && j == 0) k2.footprint_map[id] = id / m.fib();
  }

  // chart 12: two sheets, group Z2 x Z2 acting by
  // (γ1,γ2)·(x,e)_β = (x, γ2 e)_{γ1 γ2 β}
  KuranishiChart k12;
  int n12 = 2 * n2;
  k12.q.domain = SampledSpace::from_fn(
      n12,
      [m, circ](int a, int b) {
        auto pa = m.p12_of(a);
        auto pb = m.p12_of(b);
        Q base = circ(pa.x, pb.x) +
                 m.g * Q(std::max(std::abs(pa.i - pb.i), std::abs(pa.j - pb.j)));
        return base + (pa.beta == pb.beta ? Q(0) : Q(2));
      },
      Q(1));
  k12.q.group = FiniteGroup::product(FiniteGroup::cyclic(2), FiniteGroup::cyclic(2));
  k12.q.action.perm.assign(4, std::vector<int>(n12));
  for (int id = 0; id < n12; ++id) {
    auto p = m.p12_of(id);
    for (int gq = 0; gq < 4; ++gq) {
      int g1 = gq / 2, g2 = gq % 2;
      int ni = g2 ? -p.i : p.i, nj = g2 ? -p.j : p.j;
      int nb = (p.beta + g1 + g2) % 2;
      k12.q.action.perm[gq][id] = m.u12_id(nb, p.x, ni, nj);
    }
  }
  k12.active = k12.q.domain.all();
  k12.obstruction_dim = 2;
  k12.obs_action = {QMat::identity(2), minus2, QMat::identity(2), minus2};
  k12.section.assign(n12, QVec{});
  for (int id = 0; id < n12; ++id) {
    auto p = m.p12_of(id);
    k12.section[id] = QVec{m.g * p.i, m.g * p.j};
    if (p.i == 0 && p.j == 0) k12.footprint_map[id] = p.x;
  }

  Atlas& a = m.atlas;
  a.poset = make_poset({"1", "2", "12"}, {{"1", "12"}, {"2", "12"}});
  a.charts = {k1, k2, k12};
  a.x_space = X;
  a.flag = AtlasFlag::Standard;
  a.metric_certificate = true;

  CoordinateChange c1c;
  c1c.domain = k1.q.domain.all();
  for (int beta = 0; beta < 2; ++beta)
    for (int x = 0; x < n; ++x) c1c.lifted.push_back(m.u12_id(beta, x, 0, 0));
  c1c.lifted = set_sorted(c1c.lifted);
  c1c.rho.assign(n12, -1);
  for (int id : c1c.lifted) c1c.rho[id] = m.p12_of(id).x;
  c1c.rho_gamma.map = {0, 0, 1, 1};  // (γ1,γ2) -> γ1
  c1c.rho_gamma.split = {0, 2};
  c1c.phihat = QMat(2, 0);
  a.changes[{a.poset.id("1"), a.poset.id("12")}] = c1c;

  CoordinateChange c2c;
  c2c.domain = k2.q.domain.all();
  c2c.lifted = k12.q.domain.all();
  c2c.rho.assign(n12, -1);
  for (int id = 0; id < n12; ++id) {
    auto p = m.p12_of(id);
    c2c.rho[id] = m.u2_id(p.x, p.i, p.j);
  }
  c2c.rho_gamma.map = {0, 1, 0, 1};  // (γ1,γ2) -> γ2
  c2c.rho_gamma.split = {0, 1};
  c2c.phihat = QMat::identity(2);
  a.changes[{a.poset.id("2"), a.poset.id("12")}] = c2c;
  return m;
}

}  // namespace examples
}  // namespace kuratlas
