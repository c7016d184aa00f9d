#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "kuratlas/reduce.hpp"
#include "kuratlas/zeroset.hpp"

namespace kuratlas {

/// A strict orbifold atlas is an atlas with zero-rank obstruction spaces and
/// total footprint maps, satisfying the strong cocycle condition.
inline CheckReport check_strict_orbifold(const Atlas& atlas) {
  CheckReport rep;
  bool rank0 = true, total = true;
  std::string wr, wt;
  for (int i = 0; i < atlas.n(); ++i) {
    if (atlas.charts[i].obstruction_dim != 0) {
      rank0 = false;
      wr = "chart " + atlas.poset.labels[i] + " has obstruction rank";
    }
    for (int x : atlas.charts[i].active)
      if (!atlas.charts[i].footprint_map.count(x)) {
        total = false;
        wt = "footprint map not total on chart " + atlas.poset.labels[i];
        break;
      }
  }
  rep.add("orbatlas.rank-zero", rank0, wr);
  rep.add("orbatlas.footprints-total", total, wt);
  rep.merge(atlas.check_structure());
  rep.merge(check_cocycle(atlas, CocycleLevel::Strong));
  return rep;
}

/// Product structure of the chart groups over the minimal elements, with
/// mixed-radix indexing (sorted minimal ids, most significant first).
struct ProductStructure {
  std::vector<IdSet> factors;             // per chart: minimal poset ids
  std::vector<std::vector<int>> radix;    // matching factor group orders

  std::vector<int> tuple_of(int chart, int g) const {
    std::vector<int> t(radix[chart].size());
    for (int k = static_cast<int>(radix[chart].size()) - 1; k >= 0; --k) {
      t[k] = g % radix[chart][k];
      g /= radix[chart][k];
    }
    return t;
  }

  int element_of(int chart, const std::vector<int>& t) const {
    int g = 0;
    for (size_t k = 0; k < t.size(); ++k) g = g * radix[chart][k] + t[k];
    return g;
  }

  /// Embed an element supported on a sub-tuple (by minimal ids) into Γ_chart.
  int embed(int chart, const std::map<int, int>& support) const {
    std::vector<int> t(radix[chart].size(), 0);
    for (size_t k = 0; k < factors[chart].size(); ++k) {
      auto it = support.find(factors[chart][k]);
      if (it != support.end()) t[k] = it->second;
    }
    return element_of(chart, t);
  }

  /// Extract the sub-tuple over a set of minimal ids.
  std::map<int, int> restrict(int chart, int g, const IdSet& minimals) const {
    std::vector<int> t = tuple_of(chart, g);
    std::map<int, int> out;
    for (size_t k = 0; k < factors[chart].size(); ++k)
      if (set_contains(minimals, factors[chart][k])) out[factors[chart][k]] = t[k];
    return out;
  }
};

/// Derive and validate the product structure: group orders multiply along
/// the minimal factors and the covering surjections are the canonical
/// projections in the mixed-radix encoding.
inline ProductStructure product_structure(const Atlas& atlas) {
  ProductStructure ps;
  ps.factors.resize(atlas.n());
  ps.radix.resize(atlas.n());
  for (int i = 0; i < atlas.n(); ++i) {
    ps.factors[i] = atlas.poset.m_of(i);
    int prod = 1;
    for (int h : ps.factors[i]) {
      ps.radix[i].push_back(atlas.charts[h].group().n);
      prod *= atlas.charts[h].group().n;
    }
    if (prod != atlas.charts[i].group().n)
      fail(Errc::CompletionFailure, "group of " + atlas.poset.labels[i] +
                                        " is not the product of its factors");
  }
  for (auto& [key, cc] : atlas.changes) {
    auto [i, j] = key;
    for (int g = 0; g < atlas.charts[j].group().n; ++g) {
      std::map<int, int> sub = ps.restrict(j, g, ps.factors[i]);
      if (cc.rho_gamma.map[g] != ps.embed(i, sub))
        fail(Errc::CompletionFailure,
             "covering surjection " + atlas.poset.labels[i] + "<-" +
                 atlas.poset.labels[j] + " is not the canonical projection");
    }
  }
  return ps;
}

/// Étale proper groupoid presented by explicit object and morphism tables.
struct EpGroupoid {
  // objects: (component, sample); components correspond to atlas charts
  std::vector<std::pair<int, int>> objects;
  std::map<std::pair<int, int>, int> obj_id;

  struct Mor {
    int I, J;   // component indices
    int z;      // sample of the join chart W_{I∪J}
    int gamma;  // element of Γ_{I∩J} embedded in Γ_I
    int src, dst;  // object ids
  };
  std::vector<Mor> mors;
  std::map<std::tuple<int, int, int, int>, int> mor_id;

  // composition table: (a, b) -> c for composable pairs (dst(a) == src(b))
  std::map<std::pair<int, int>, int> comp;
  std::vector<int> inverse;

  int source(int m) const { return mors[m].src; }
  int target(int m) const { return mors[m].dst; }

  IdSet mor_between(int x, int y) const {
    IdSet out;
    for (size_t m = 0; m < mors.size(); ++m)
      if (mors[m].src == x && mors[m].dst == y) out.push_back(static_cast<int>(m));
    return out;
  }

  UnionFind orbits() const {
    UnionFind uf(objects.size());
    for (auto& m : mors) uf.unite(m.src, m.dst);
    return uf;
  }
};

/// Groupoid completion of a strict orbifold atlas:
/// Mor(W_I, W_J) = W_{I∪J} × Γ_{I∩J}, with sources and targets through the
/// covering projections and composition by the unique lift.
inline EpGroupoid groupoid_completion(const Atlas& atlas) {
  ProductStructure ps = product_structure(atlas);
  EpGroupoid g;
  for (int i = 0; i < atlas.n(); ++i)
    for (int x : atlas.charts[i].active) {
      g.obj_id[{i, x}] = static_cast<int>(g.objects.size());
      g.objects.push_back({i, x});
    }
  // rho from the join chart down to a factor chart (identity when equal)
  auto rho_down = [&](int u, int i, int z) {
    if (u == i) return z;
    return atlas.change(i, u).rho[z];
  };
  // morphism enumeration
  for (int i = 0; i < atlas.n(); ++i)
    for (int j = 0; j < atlas.n(); ++j) {
      auto l = atlas.poset.lub2(i, j);
      if (!l) continue;
      int u = *l;
      auto glb = atlas.poset.glb2(i, j);
      // Γ_{I∩J} as elements of Γ_I
      IdSet gammas;
      if (glb) {
        IdSet mins = atlas.poset.m_of(*glb);
        for (int gg = 0; gg < atlas.charts[*glb].group().n; ++gg) {
          // embed Γ_{I∩J} into Γ_I through the tuple support
          std::map<int, int> sup = ps.restrict(*glb, gg, mins);
          gammas.push_back(ps.embed(i, sup));
        }
        gammas = set_sorted(gammas);
      } else {
        gammas = {0};
      }
      for (int z : atlas.charts[u].active)
        for (int gamma : gammas) {
          int src_sample = atlas.charts[i].action().apply(
              atlas.charts[i].group().inv(gamma), rho_down(u, i, z));
          int dst_sample = rho_down(u, j, z);
          EpGroupoid::Mor m;
          m.I = i;
          m.J = j;
          m.z = z;
          m.gamma = gamma;
          m.src = g.obj_id.at({i, src_sample});
          m.dst = g.obj_id.at({j, dst_sample});
          g.mor_id[{i, j, z, gamma}] = static_cast<int>(g.mors.size());
          g.mors.push_back(m);
        }
    }
  // inverses: (I,J,z,γ) -> (J,I,γ^{-1}z,γ^{-1})
  g.inverse.assign(g.mors.size(), -1);
  for (size_t m = 0; m < g.mors.size(); ++m) {
    const auto& mm = g.mors[m];
    int u = *atlas.poset.lub2(mm.I, mm.J);
    // γ acts on W_{I∪J} through its embedding into Γ_{I∪J}
    auto glb = atlas.poset.glb2(mm.I, mm.J);
    int gamma_u = 0;
    if (glb) {
      std::map<int, int> sup =
          ps.restrict(mm.I, mm.gamma, atlas.poset.m_of(*glb));
      gamma_u = ps.embed(u, sup);
    }
    int ginv_u = atlas.charts[u].group().inv(gamma_u);
    int zi = atlas.charts[u].action().apply(ginv_u, mm.z);
    int gamma_inv_j = 0;
    if (glb) {
      std::map<int, int> sup =
          ps.restrict(mm.I, atlas.charts[mm.I].group().inv(mm.gamma),
                      atlas.poset.m_of(*glb));
      gamma_inv_j = ps.embed(mm.J, sup);
    }
    auto it = g.mor_id.find({mm.J, mm.I, zi, gamma_inv_j});
    if (it == g.mor_id.end())
      fail(Errc::CompletionFailure, "inverse morphism missing");
    g.inverse[m] = it->second;
  }
  // composition by the unique lift (v, α): decompose the group parts over
  // the minimal factors and solve the two covering equations, asserting
  // existence and uniqueness per instance.
  // fibers of each covering over its domain samples
  std::map<std::pair<int, int>, std::map<int, IdSet>> fibers;
  for (auto& [key, cc] : atlas.changes) {
    auto& f = fibers[key];
    for (int y : atlas.lifted(key.first, key.second)) f[cc.rho[y]].push_back(y);
  }
  auto fiber_over = [&](int a, int u, int x) -> IdSet {
    if (a == u) return {x};
    return fibers.at({a, u}).at(x);
  };
  // in-morphisms indexed by source object for the composability scan
  std::map<int, IdSet> out_of;
  for (size_t m = 0; m < g.mors.size(); ++m)
    out_of[g.mors[m].src].push_back(static_cast<int>(m));
  for (size_t a = 0; a < g.mors.size(); ++a) {
    const auto& ma = g.mors[a];
    for (int bi : out_of[ma.dst]) {
      const auto& mb = g.mors[bi];
      if (mb.I != ma.J) continue;
      int i = ma.I, j = ma.J, k = mb.J;
      auto lik = atlas.poset.lub2(i, k);
      IdSet omega_gen = set_union(atlas.poset.m_of(i),
                                  set_union(atlas.poset.m_of(j), atlas.poset.m_of(k)));
      auto lstat = atlas.poset.lub_status(omega_gen);
      if (!lik || lstat.kind != IndexPoset::LubStatus::Value)
        fail(Errc::CompletionFailure,
             "composable morphisms with no join of endpoints");
      int omega = lstat.value;
      IdSet mi = atlas.poset.m_of(i), mj = atlas.poset.m_of(j),
            mk = atlas.poset.m_of(k);
      // γ over m(I)∩m(J), δ over m(J)∩m(K)
      std::map<int, int> gamma_t = ps.restrict(i, ma.gamma, set_intersect(mi, mj));
      std::map<int, int> delta_t = ps.restrict(j, mb.gamma, set_intersect(mj, mk));
      std::map<int, int> gamma_ijk, gamma_ij_not_k, delta_ijk;
      for (auto& [h, e] : gamma_t)
        (set_contains(mk, h) ? gamma_ijk : gamma_ij_not_k)[h] = e;
      for (auto& [h, e] : delta_t)
        if (set_contains(mi, h)) delta_ijk[h] = e;
      int ij = *atlas.poset.lub2(i, j);
      int jk = *atlas.poset.lub2(j, k);
      int iku = *lik;
      const auto& gu_ij = atlas.charts[ij];
      // right-hand sides
      int g_ijnk_ij = ps.embed(ij, gamma_ij_not_k);
      int rhs2_sample = atlas.charts[jk].action().apply(
          atlas.charts[jk].group().inv(ps.embed(jk, gamma_ij_not_k)), mb.z);
      // candidates for α over (m(I)∩m(K))∖m(J)
      IdSet alpha_support = set_minus(set_intersect(mi, mk), mj);
      std::vector<std::map<int, int>> alphas;
      {
        std::vector<int> orders;
        for (int h : alpha_support) orders.push_back(atlas.charts[h].group().n);
        std::vector<int> idx(orders.size(), 0);
        while (true) {
          std::map<int, int> a_t;
          for (size_t t = 0; t < alpha_support.size(); ++t)
            a_t[alpha_support[t]] = idx[t];
          alphas.push_back(a_t);
          size_t t = 0;
          while (t < idx.size() && ++idx[t] == orders[t]) idx[t++] = 0;
          if (t == idx.size()) break;
          if (idx.empty()) break;
        }
        if (alphas.empty()) alphas.push_back({});
      }
      int found = -1;
      std::map<int, int> found_alpha;
      for (int v : fiber_over(jk, omega, rhs2_sample)) {
        int v_ij = omega == ij ? v : atlas.changes.at({ij, omega}).rho[v];
        for (auto& a_t : alphas) {
          int lhs = gu_ij.action().apply(
              gu_ij.group().op(
                  gu_ij.group().inv(g_ijnk_ij),
                  gu_ij.group().op(ps.embed(ij, a_t), ps.embed(ij, delta_t))),
              ma.z);
          if (v_ij == lhs) {
            if (found >= 0 && !(found == v && found_alpha == a_t))
              fail(Errc::CompletionFailure, "composite lift not unique");
            found = v;
            found_alpha = a_t;
          }
        }
      }
      if (found < 0)
        fail(Errc::CompletionFailure, "composite lift does not exist");
      int vprime = iku == omega ? found : atlas.changes.at({iku, omega}).rho[found];
      // composite group part α · δ_IJK · γ_IJK in Γ_I
      int comp_gamma = atlas.charts[i].group().op(
          ps.embed(i, found_alpha),
          atlas.charts[i].group().op(ps.embed(i, delta_ijk), ps.embed(i, gamma_ijk)));
      auto it = g.mor_id.find({i, k, vprime, comp_gamma});
      if (it == g.mor_id.end())
        fail(Errc::CompletionFailure, "composite morphism missing from the table");
      g.comp[{static_cast<int>(a), bi}] = it->second;
    }
  }
  return g;
}

/// Category axioms for the completed groupoid, checked exhaustively:
/// composition closes, is associative, identities and inverses behave.
inline CheckReport check_ep_groupoid(const EpGroupoid& g) {
  CheckReport rep;
  std::map<int, IdSet> out_of;
  for (size_t m = 0; m < g.mors.size(); ++m)
    out_of[g.mors[m].src].push_back(static_cast<int>(m));
  bool assoc = true;
  std::string wa;
  for (auto& [ab, c1] : g.comp) {
    auto [a, b] = ab;
    if (!assoc) break;
    auto it = out_of.find(g.mors[b].dst);
    if (it == out_of.end()) continue;
    for (int c : it->second) {
      if (g.mors[b].J != g.mors[c].I) continue;
      auto bc = g.comp.find({b, c});
      auto ab_c = g.comp.find({c1, c});
      auto a_bc = bc != g.comp.end() ? g.comp.find({a, bc->second}) : g.comp.end();
      if (bc == g.comp.end() || ab_c == g.comp.end() || a_bc == g.comp.end() ||
          ab_c->second != a_bc->second) {
        assoc = false;
        wa = "associativity fails at morphisms " + std::to_string(a) + "," +
             std::to_string(b) + "," + std::to_string(c);
        break;
      }
    }
  }
  rep.add("groupoid.associative", assoc, wa);
  bool invs = true;
  for (size_t m = 0; m < g.mors.size() && invs; ++m) {
    int mi = g.inverse[m];
    if (mi < 0 || g.inverse[mi] != static_cast<int>(m)) invs = false;
    if (g.mors[mi].src != g.mors[m].dst || g.mors[mi].dst != g.mors[m].src)
      invs = false;
  }
  rep.add("groupoid.inverses", invs, "inverse table broken");
  return rep;
}

/// Stabilizer order of an object: |Mor(x, x)|.
inline int groupoid_stabilizer_order(const EpGroupoid& g, int x) {
  return static_cast<int>(g.mor_between(x, x).size());
}

/// Finite orbifold groupoid given by plain tables (input to the
/// atlas-from-groupoid construction).
struct FiniteGroupoid {
  int n_objects = 0;
  std::vector<int> footprint;  // object -> Y sample
  struct Mor {
    int src, dst;
  };
  std::vector<Mor> mors;
  std::vector<int> inverse;
  std::map<std::pair<int, int>, int> comp;

  IdSet mor_between(int x, int y) const {
    IdSet out;
    for (size_t m = 0; m < mors.size(); ++m)
      if (mors[m].src == x && mors[m].dst == y) out.push_back(static_cast<int>(m));
    return out;
  }

  UnionFind orbits() const {
    UnionFind uf(n_objects);
    for (auto& m : mors) uf.unite(m.src, m.dst);
    return uf;
  }
};

inline FiniteGroupoid to_finite_groupoid(const EpGroupoid& g, const Atlas& atlas) {
  FiniteGroupoid out;
  out.n_objects = static_cast<int>(g.objects.size());
  out.footprint.resize(out.n_objects);
  for (int o = 0; o < out.n_objects; ++o) {
    auto [i, x] = g.objects[o];
    out.footprint[o] = atlas.charts[i].footprint_map.at(x);
  }
  for (auto& m : g.mors) out.mors.push_back({m.src, m.dst});
  out.inverse = g.inverse;
  out.comp = g.comp;
  return out;
}

/// Morita proxy: orbit spaces biject (through the footprints) and matching
/// orbits have the same stabilizer-order multiset.
inline CheckReport check_morita_proxy(const EpGroupoid& a, const Atlas& atlas_a,
                                      const FiniteGroupoid& b) {
  CheckReport rep;
  UnionFind ua = a.orbits();
  UnionFind ub = b.orbits();
  std::map<int, int> fa, fb;  // Y sample -> orbit root
  std::map<int, int> sa, sb;  // Y sample -> stabilizer order of one member
  bool ok = true;
  std::string wit;
  for (size_t o = 0; o < a.objects.size(); ++o) {
    auto [i, x] = a.objects[o];
    int y = atlas_a.charts[i].footprint_map.at(x);
    int root = ua.find(static_cast<int>(o));
    if (fa.count(y) && fa[y] != root) {
      ok = false;
      wit = "two orbits over one Y sample (left)";
    }
    fa[y] = root;
    sa[y] = groupoid_stabilizer_order(a, static_cast<int>(o));
  }
  for (int o = 0; o < b.n_objects; ++o) {
    int y = b.footprint[o];
    int root = ub.find(o);
    if (fb.count(y) && fb[y] != root) {
      ok = false;
      wit = "two orbits over one Y sample (right)";
    }
    fb[y] = root;
    sb[y] = static_cast<int>(b.mor_between(o, o).size());
  }
  rep.add("morita.orbit-bijection", ok && fa.size() == fb.size(), wit);
  bool stab = true;
  for (auto& [y, s] : sa)
    if (!sb.count(y) || sb[y] != s) {
      stab = false;
      wit = "stabilizer order differs over Y sample " + std::to_string(y);
      break;
    }
  rep.add("morita.stabilizer-orders", stab, wit);
  return rep;
}

/// Resolution of a good strict orbifold atlas: the reduction-based wnb
/// groupoid with weights 1/|Γ_I| and the pushforward of its weighting.
struct ResolutionResult {
  Reduction v;
  WnbGroupoid groupoid;
  WeightedCount weights;
  std::map<int, Q> pushforward;  // Λ_Y on X samples
};

inline ResolutionResult resolution(const Atlas& atlas, const Realization& r) {
  ResolutionResult res;
  res.v = build_reduction(atlas, r);
  LocalZeroSet zeros;
  for (int i = 0; i < atlas.n(); ++i)
    for (int x : res.v.V[i]) zeros.zeros.push_back({i, PlPoint::sample(x), 1});
  WnbGroupoid g = zero_groupoid(atlas, res.v, zeros);
  res.groupoid = hausdorff_quotient(atlas, res.v, g);
  res.weights = weighting(atlas, res.groupoid);
  res.pushforward = kuratlas::pushforward(atlas, res.groupoid, res.weights);
  return res;
}

}  // namespace kuratlas
