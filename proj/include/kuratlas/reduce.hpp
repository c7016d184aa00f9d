#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kuratlas/atlas.hpp"
#include "kuratlas/cover.hpp"

namespace kuratlas {

/// Reduction of a good atlas: Γ-invariant V_I ⋐ U_I whose closures only meet
/// when indices are comparable, covering the zero set.
struct Reduction {
  std::vector<IdSet> V;
};

/// Rational stand-ins for the quarter powers of 2 used by the constant zoo.
/// Directions: C14 ≥ 2^{-1/4} (so 1 − C14 underestimates 1 − 2^{-1/4} and
/// η0 stays upper-bound-safe), C12 ≥ 2^{-1/2}, C34 ≤ 2^{-3/4}; then
/// C34/C12 < C14 keeps the core-trapping inequality chain intact.
inline const Q kC14 = Q(840897, 1000000);
inline const Q kC12 = Q(707107, 1000000);
inline const Q kC34 = Q(594603, 1000000);

inline Q quarter_factor(int quarters) {
  // 2^{-q/4} stand-in for q = 0..3
  switch (((quarters % 4) + 4) % 4) {
    case 0: return Q(1);
    case 1: return kC14;
    case 2: return kC12;
    default: return kC34;
  }
}

/// radius 2^{-k-λ}·base with λ = quarters/4, exact dyadic integer part.
inline Q dyadic_radius(const Q& base, int k, int quarters = 0) {
  Q r = base * quarter_factor(quarters);
  int whole = k + quarters / 4;
  for (int t = 0; t < whole; ++t) r /= 2;
  return r;
}

/// Multi-source shortest-path field over realization classes, edges within
/// charts weighted by chart distances. Unreached classes get the sentinel.
struct ClassField {
  std::map<int, Q> dist;  // class id -> distance
  Q sentinel;
};

inline ClassField quotient_distance_field(const Atlas& atlas, const Realization& r,
                                          const std::set<int>& sources) {
  ClassField f;
  Q cap(1);
  for (int i = 0; i < atlas.n(); ++i) {
    Q diam(0);
    const auto& ch = atlas.charts[i];
    for (int a : ch.active)
      for (int b : ch.active) diam = std::max(diam, ch.space().dist(a, b));
    cap += diam;
  }
  f.sentinel = cap;
  std::set<int> classes(r.cls.begin(), r.cls.end());
  for (int c : classes) f.dist[c] = sources.count(c) ? Q(0) : cap;
  // members per class
  std::map<int, std::vector<std::pair<int, int>>> members;
  for (size_t o = 0; o < r.objects.size(); ++o)
    members[r.cls[o]].push_back(r.objects[o]);
  std::set<int> todo = classes;
  while (!todo.empty()) {
    int best = -1;
    Q bd = cap + 1;
    for (int c : todo)
      if (f.dist[c] < bd) {
        bd = f.dist[c];
        best = c;
      }
    if (best < 0 || bd >= cap) break;
    todo.erase(best);
    for (auto [i, x] : members[best]) {
      const auto& ch = atlas.charts[i];
      for (int y : ch.active) {
        int cy = r.class_of(i, y);
        Q nd = bd + ch.space().dist(x, y);
        if (nd < f.dist[cy]) f.dist[cy] = nd;
      }
    }
  }
  return f;
}

/// Reduction invariants, all exact.
inline CheckReport check_reduction(const Atlas& atlas, const Realization& r,
                                   const Reduction& red) {
  CheckReport rep;
  int n = atlas.n();
  // (i): invariance, zero contact, and the finite precompactness margin
  bool inv = true, zc = true, marg = true;
  std::string wi, wz, wm;
  for (int i = 0; i < n; ++i) {
    const auto& ch = atlas.charts[i];
    if (!ch.action().invariant(red.V[i])) {
      inv = false;
      wi = "V_" + atlas.poset.labels[i] + " not pulled back from the intermediate level";
    }
    if (!red.V[i].empty() && set_intersect(red.V[i], ch.zero_set()).empty()) {
      zc = false;
      wz = "V_" + atlas.poset.labels[i] + " misses the zero set";
    }
    if (!red.V[i].empty()) {
      IdSet inactive = set_minus(ch.space().all(), ch.active);
      if (!inactive.empty() && ch.space().set_dist(red.V[i], inactive) < ch.space().h) {
        marg = false;
        wm = "V_" + atlas.poset.labels[i] + " has no margin against the removed domain";
      }
    }
  }
  rep.add("reduction.invariant", inv, wi);
  rep.add("reduction.zero-contact", zc, wz);
  rep.add("reduction.margin", marg, wm);
  // (ii): comparable closures
  bool comp = true;
  std::string wc;
  std::vector<std::set<int>> cl_classes(n);
  for (int i = 0; i < n; ++i)
    for (int x : atlas.charts[i].closure(red.V[i]))
      cl_classes[i].insert(r.class_of(i, x));
  for (int i = 0; i < n && comp; ++i)
    for (int j = i + 1; j < n && comp; ++j) {
      if (atlas.poset.leq(i, j) || atlas.poset.leq(j, i)) continue;
      for (int c : cl_classes[i])
        if (cl_classes[j].count(c)) {
          comp = false;
          wc = "π(cl V_" + atlas.poset.labels[i] + ") meets π(cl V_" +
               atlas.poset.labels[j] + ")";
          break;
        }
    }
  rep.add("reduction.comparable-closures", comp, wc);
  // (iii): zero-set coverage
  bool cov = true;
  std::string wv;
  std::set<int> vclasses;
  for (int i = 0; i < n; ++i)
    for (int x : red.V[i]) vclasses.insert(r.class_of(i, x));
  for (int p = 0; p < atlas.x_space.n && cov; ++p) {
    if (r.iota[p] < 0) continue;
    if (!vclasses.count(r.iota[p])) {
      cov = false;
      wv = "ι(X) not covered at X sample " + std::to_string(p);
    }
  }
  rep.add("reduction.covers-zero-set", cov, wv);
  // restriction property: the reduced relation equals the global relation
  // restricted to ⊔V_I
  {
    std::vector<std::pair<int, int>> objs;
    std::map<std::pair<int, int>, int> oid;
    for (int i = 0; i < n; ++i)
      for (int x : red.V[i]) {
        oid[{i, x}] = static_cast<int>(objs.size());
        objs.push_back({i, x});
      }
    UnionFind uf(objs.size());
    for (int i = 0; i < n; ++i) {
      const auto& ch = atlas.charts[i];
      for (int x : red.V[i])
        for (int g = 0; g < ch.group().n; ++g) {
          int y = ch.action().apply(g, x);
          if (set_contains(red.V[i], y)) uf.unite(oid[{i, x}], oid[{i, y}]);
        }
    }
    for (auto& [key, cc] : atlas.changes) {
      auto [i, j] = key;
      for (int y : atlas.lifted(i, j)) {
        if (!set_contains(red.V[j], y)) continue;
        int x = cc.rho[y];
        if (set_contains(red.V[i], x)) uf.unite(oid[{j, y}], oid[{i, x}]);
      }
    }
    bool match = true;
    std::string wr;
    for (size_t a = 0; a < objs.size() && match; ++a)
      for (size_t b = a + 1; b < objs.size(); ++b) {
        bool local = uf.same(static_cast<int>(a), static_cast<int>(b));
        bool global = r.class_of(objs[a].first, objs[a].second) ==
                      r.class_of(objs[b].first, objs[b].second);
        if (local != global) {
          match = false;
          wr = "reduced relation differs from the restricted global relation";
          break;
        }
      }
    rep.add("reduction.realization-injects", match, wr);
  }
  return rep;
}

/// Constructive reduction of a good atlas: cover-reduce the footprints, lift
/// with exact zero traces, carve the incomparable interaction sets.
inline Reduction build_reduction(const Atlas& atlas, const Realization& r) {
  int n = atlas.n();
  Cover fcover;
  fcover.space = atlas.x_space;
  fcover.poset = atlas.poset;
  fcover.sets.resize(n);
  for (int i = 0; i < n; ++i) fcover.sets[i] = atlas.footprint(i);
  CoverReduction zred = cover_reduction(fcover);

  // lift: W_I with W ∩ zeros = ψ^{-1}(Z_I) and cl_h(W) ∩ zeros ⊂ ψ^{-1}(cl_h Z_I)
  std::vector<IdSet> W(n);
  for (int i = 0; i < n; ++i) {
    const auto& ch = atlas.charts[i];
    IdSet zpre;
    for (int x : ch.zero_set())
      if (set_contains(zred.zsets[i], ch.footprint_map.at(x))) zpre.push_back(x);
    zpre = set_sorted(zpre);
    if (zpre.empty()) {
      W[i] = {};
      continue;
    }
    IdSet zcl;
    IdSet zclx = atlas.x_space.closure(zred.zsets[i]);
    for (int x : ch.zero_set())
      if (set_contains(zclx, ch.footprint_map.at(x))) zcl.push_back(x);
    zcl = set_sorted(zcl);
    std::vector<Q> schedule = {ch.space().h, ch.space().h / 2, ch.space().h / 4, Q(0)};
    for (const Q& rr : schedule) {
      IdSet w = rr == 0 ? zpre : set_intersect(ch.space().closure_r(zpre, rr), ch.active);
      w = set_intersect(ch.action().saturate(w), ch.active);
      w = set_minus(w, set_minus(ch.zero_set(), zpre));
      IdSet wcl = ch.closure(w);
      bool ok = set_subset(set_intersect(wcl, ch.zero_set()), zcl);
      if (ok) {
        W[i] = w;
        break;
      }
    }
    if (W[i].empty())
      fail(Errc::ResolutionTooCoarse,
           "cannot lift the cover reduction into chart " + atlas.poset.labels[i]);
  }

  // carve: remove neighbourhoods of Y_IJ = cl W_I ∩ π^{-1}(π(cl W_J)) for
  // incomparable J
  Reduction red;
  red.V.assign(n, {});
  for (int i = 0; i < n; ++i) {
    const auto& ch = atlas.charts[i];
    IdSet zpre;
    for (int x : ch.zero_set())
      if (set_contains(zred.zsets[i], ch.footprint_map.at(x))) zpre.push_back(x);
    zpre = set_sorted(zpre);
    IdSet zclpre;
    {
      IdSet zclx = atlas.x_space.closure(zred.zsets[i]);
      for (int x : ch.zero_set())
        if (set_contains(zclx, ch.footprint_map.at(x))) zclpre.push_back(x);
      zclpre = set_sorted(zclpre);
    }
    IdSet v = W[i];
    for (int j = 0; j < n; ++j) {
      if (j == i || atlas.poset.leq(i, j) || atlas.poset.leq(j, i)) continue;
      if (W[j].empty() || v.empty()) continue;
      std::set<int> cl_j_classes;
      for (int y : atlas.charts[j].closure(W[j]))
        cl_j_classes.insert(r.class_of(j, y));
      IdSet yij;
      for (int x : ch.closure(W[i]))
        if (cl_j_classes.count(r.class_of(i, x))) yij.push_back(x);
      if (yij.empty()) continue;
      // margin-h neighbourhood, backing off to keep the zero closure intact
      std::vector<Q> schedule = {ch.space().h, ch.space().h / 2, ch.space().h / 4,
                                 Q(0)};
      IdSet nbhd;
      bool chosen = false;
      for (const Q& rr : schedule) {
        nbhd = rr == 0 ? yij : set_intersect(ch.space().closure_r(yij, rr), ch.active);
        if (set_intersect(nbhd, zclpre).empty()) {
          chosen = true;
          break;
        }
      }
      if (!chosen)
        fail(Errc::ResolutionTooCoarse,
             "carving for the incomparable pair " + atlas.poset.labels[i] + "," +
                 atlas.poset.labels[j] + " would cut the zero set");
      v = set_minus(v, nbhd);
    }
    red.V[i] = v;
  }
  CheckReport rep = check_reduction(atlas, r, red);
  if (!rep.ok()) fail(Errc::ResolutionTooCoarse, rep.first_failure());
  return red;
}

/// Nested reduction: margin-h contraction of each V_I, all invariants kept.
inline Reduction nested_reduction(const Atlas& atlas, const Realization& r,
                                  const Reduction& v) {
  Reduction c;
  c.V.assign(atlas.n(), {});
  for (int i = 0; i < atlas.n(); ++i) {
    const auto& ch = atlas.charts[i];
    IdSet rest = set_minus(ch.active, v.V[i]);
    if (v.V[i].empty()) continue;
    if (rest.empty()) {
      c.V[i] = v.V[i];
      continue;
    }
    IdSet ci;
    for (int x : v.V[i])
      if (ch.space().dist_to_set(x, rest) >= ch.space().h) ci.push_back(x);
    c.V[i] = ci;
  }
  CheckReport rep = check_reduction(atlas, r, c);
  if (!rep.ok()) fail(Errc::ResolutionTooCoarse, rep.first_failure());
  return c;
}

/// The constant zoo of the perturbation construction.
struct ConstantPack {
  Q delta;
  Q delta_v;
  Q eta0;
  std::optional<Q> sigma;  // nullopt = +infinity sentinel (no section values)
  int M = 1;               // max level
  int denom_bound = 1000000;

  Q eta(int k, int quarters = 0) const { return dyadic_radius(eta0, k, quarters); }
  Q radius(int k, int quarters = 0) const { return dyadic_radius(delta, k, quarters); }
};

/// V^k_I = B^I_{2^{-k}δ}(V_I) at quarter resolution.
inline IdSet vk_set(const Atlas& atlas, const Reduction& v, const ConstantPack& pack,
                    int i, int k, int quarters = 0) {
  if (v.V[i].empty()) return {};
  return atlas.charts[i].ball(v.V[i], pack.radius(k, quarters));
}

/// Core piece N^k_{JI} = V^k_J ∩ φ_IJ(V^k_I ∩ U_IJ), as a lifted sample set.
inline IdSet core_piece(const Atlas& atlas, const Reduction& v,
                        const ConstantPack& pack, int i, int j, int k,
                        int quarters = 0) {
  IdSet vki = vk_set(atlas, v, pack, i, k, quarters);
  IdSet vkj = vk_set(atlas, v, pack, j, k, quarters);
  IdSet img = atlas.phi_image(i, j, set_intersect(vki, atlas.dom(i, j)));
  return set_intersect(img, vkj);
}

inline IdSet core(const Atlas& atlas, const Reduction& v, const ConstantPack& pack,
                  int j, int k, int quarters = 0) {
  IdSet out;
  for (int i : atlas.poset.down[j]) {
    if (i == j) continue;
    out = set_union(out, core_piece(atlas, v, pack, i, j, k, quarters));
  }
  return out;
}

/// δ_V: maximal margin satisfying the ball and disjointness constraints,
/// computed over the finite sample lattice.
inline Q compute_delta_v(const Atlas& atlas, const Realization& r, const Reduction& v) {
  std::optional<Q> best;
  for (int i = 0; i < atlas.n(); ++i) {
    if (v.V[i].empty()) continue;
    const auto& ch = atlas.charts[i];
    IdSet outside = set_minus(ch.space().all(), ch.active);
    if (!outside.empty()) {
      Q d = ch.space().set_dist(v.V[i], outside) / 2;
      if (!best || d < *best) best = d;
    }
  }
  // disjointness of 2δ-neighbourhoods of incomparable closures in |K|
  for (int i = 0; i < atlas.n(); ++i)
    for (int j = i + 1; j < atlas.n(); ++j) {
      if (atlas.poset.leq(i, j) || atlas.poset.leq(j, i)) continue;
      if (v.V[i].empty() || v.V[j].empty()) continue;
      std::set<int> src_i, src_j;
      for (int x : atlas.charts[i].closure(v.V[i])) src_i.insert(r.class_of(i, x));
      for (int x : atlas.charts[j].closure(v.V[j])) src_j.insert(r.class_of(j, x));
      ClassField fi = quotient_distance_field(atlas, r, src_i);
      ClassField fj = quotient_distance_field(atlas, r, src_j);
      std::optional<Q> minmax;
      for (auto& [c, di] : fi.dist) {
        Q mx = std::max(di, fj.dist.at(c));
        if (!minmax || mx < *minmax) minmax = mx;
      }
      if (minmax) {
        Q d = *minmax / 2;
        if (!best || d < *best) best = d;
      }
    }
  if (!best) {
    // no constraints bind: fall back to the resolution scale
    return atlas.x_space.h;
  }
  return *best;
}

/// Assemble and verify the constant pack.
inline ConstantPack constant_pack(const Atlas& atlas, const Realization& r,
                                  const Reduction& v, const Reduction& c, Q delta) {
  ConstantPack pack;
  pack.delta_v = compute_delta_v(atlas, r, v);
  if (delta >= pack.delta_v)
    fail(Errc::DeltaTooLarge, "δ = " + q_to_string(delta) + " >= δ_V = " +
                                  q_to_string(pack.delta_v));
  pack.delta = delta;
  pack.eta0 = (Q(1) - kC14) * delta;
  int M = 1;
  for (int i = 0; i < atlas.n(); ++i) M = std::max(M, atlas.poset.level(i));
  pack.M = M;

  // σ(δ,V,C): min over J of the section norms outside the pulled-back C
  // and the core neighbourhoods
  std::optional<Q> sigma;
  for (int j = 0; j < atlas.n(); ++j) {
    if (v.V[j].empty()) continue;
    const auto& ch = atlas.charts[j];
    int lvl = atlas.poset.level(j);
    IdSet region = vk_set(atlas, v, pack, j, lvl);
    // C̃_J = ⋃_{K ⊇ J} φ_JK^{-1}(C_K)
    IdSet ctil = set_intersect(c.V[j], ch.active);
    for (int k : atlas.poset.up[j]) {
      if (k == j) continue;
      ctil = set_union(ctil, atlas.phi_preimage(j, k, c.V[k]));
    }
    region = set_minus(region, ctil);
    for (int i : atlas.poset.down[j]) {
      if (i == j) continue;
      IdSet npiece = core_piece(atlas, v, pack, i, j, lvl - 1, 3);  // N^{|J|-1/4}
      if (npiece.empty()) continue;
      IdSet ball = ch.ball(npiece, pack.eta(lvl - 1, 2));  // η_{|J|-1/2}
      region = set_minus(region, ball);
    }
    for (int x : region) {
      Q norm = qvec_max_norm(ch.section[x]);
      if (!sigma || norm < *sigma) sigma = norm;
    }
  }
  pack.sigma = sigma;
  if (sigma && *sigma == 0)
    fail(Errc::ResolutionTooCoarse,
         "σ(δ,V,C) vanished: a zero sample escapes the cores and the nested reduction");

  // eq:fantastic, checked samplewise: B_{η_k}(V^{k+1/2}) ⊂ V^k. Finite
  // sample sets are closed, so the closure in the inclusion is the set
  // itself; cl_h stays reserved for the separation proxies.
  for (int i = 0; i < atlas.n(); ++i) {
    if (v.V[i].empty()) continue;
    for (int k = 0; k <= M; ++k) {
      IdSet half = vk_set(atlas, v, pack, i, k, 2);
      IdSet blown = atlas.charts[i].ball(half, pack.eta(k));
      if (!set_subset(blown, vk_set(atlas, v, pack, i, k)))
        fail(Errc::ResolutionTooCoarse, "eq:fantastic fails at " +
                                            atlas.poset.labels[i] + ", k=" +
                                            std::to_string(k));
    }
  }
  // eq:useful core trapping: im φ_IJ ∩ B_{η_{k+1/2}}(N^{k+3/4}) ⊂ N^{k+1/2}
  for (auto& [key, cc] : atlas.changes) {
    auto [i, j] = key;
    IdSet img = atlas.lifted(i, j);
    for (int k = 0; k <= M; ++k) {
      IdSet n34 = core_piece(atlas, v, pack, i, j, k, 3);
      if (n34.empty()) continue;
      IdSet ball = atlas.charts[j].ball(n34, pack.eta(k, 2));
      IdSet lhs = set_intersect(img, ball);
      if (!set_subset(lhs, core_piece(atlas, v, pack, i, j, k, 2)))
        fail(Errc::ResolutionTooCoarse, "eq:useful fails at " + atlas.poset.labels[i] +
                                            "->" + atlas.poset.labels[j] + ", k=" +
                                            std::to_string(k));
    }
  }
  return pack;
}

}  // namespace kuratlas
