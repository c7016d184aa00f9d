#pragma once
#include <array>
#include <set>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kuratlas/chart.hpp"
#include "kuratlas/poset.hpp"
#include "kuratlas/report.hpp"

namespace kuratlas {

enum class AtlasFlag { Standard, SemiAdditive, Tameable };

/// Kuranishi atlas: charts and coordinate changes over a minimally generated
/// poset of index labels, with the carrier space X.
struct Atlas {
  IndexPoset poset;
  std::optional<TauMap> tau;
  std::vector<KuranishiChart> charts;  // per poset element
  std::map<std::pair<int, int>, CoordinateChange> changes;
  SampledSpace x_space;
  AtlasFlag flag = AtlasFlag::Standard;

  // provenance: set by the taming pipeline when this atlas is a shrinking of
  // a tame atlas (the metrizability route of the goodness lemma), and by
  // constructions that come with an admissible ambient metric.
  bool shrunk_from_tame = false;
  bool metric_certificate = false;

  int n() const { return poset.n(); }

  bool has_change(int i, int j) const { return changes.count({i, j}) > 0; }

  const CoordinateChange& change(int i, int j) const {
    auto it = changes.find({i, j});
    if (it == changes.end())
      fail(Errc::DomainMismatch, "missing coordinate change " + poset.labels[i] +
                                     " -> " + poset.labels[j]);
    return it->second;
  }

  IdSet footprint(int i) const { return charts[i].footprint(); }

  /// Membership of sample y of chart j in the filtration slice s_J^{-1}(E_IJ).
  bool in_subbundle(int i, int j, int y) const {
    if (i == j) return true;
    return q_in_col_space(change(i, j).phihat, charts[j].section[y]);
  }

  /// U_IJ at sample level (Γ-invariant); U_II := U_I.
  IdSet dom(int i, int j) const {
    if (i == j) return charts[i].active;
    if (!poset.leq(i, j)) return {};
    if (!has_change(i, j)) return {};
    return set_intersect(change(i, j).domain, charts[i].active);
  }

  /// T̃U_IJ at sample level; T̃U_JJ := U_J.
  IdSet lifted(int i, int j) const {
    if (i == j) return charts[j].active;
    if (!has_change(i, j)) return {};
    return set_intersect(change(i, j).lifted, charts[j].active);
  }

  /// Image of U_IK under φ̲_IJ, as a Γ_J-invariant sample set in U_J:
  /// the lifted samples over U_IK.
  IdSet phi_image(int i, int j, const IdSet& sub) const {
    if (i == j) return set_intersect(sub, charts[i].active);
    IdSet out;
    const CoordinateChange& cc = change(i, j);
    for (int y : lifted(i, j))
      if (set_contains(sub, cc.rho[y])) out.push_back(y);
    return out;
  }

  /// Preimage under φ̲_IJ of a Γ_J-invariant set A ⊂ U_J.
  IdSet phi_preimage(int i, int j, const IdSet& a) const {
    if (i == j) return set_intersect(a, charts[i].active);
    IdSet out;
    const CoordinateChange& cc = change(i, j);
    for (int y : lifted(i, j))
      if (set_contains(a, y)) out.push_back(cc.rho[y]);
    return set_sorted(out);
  }

  /// Structural validation: charts, coverings, compatibilities, cover of X.
  CheckReport check_structure(bool deep = false) const {
    CheckReport rep;
    for (int i = 0; i < n(); ++i) {
      CheckReport c = charts[i].check(deep);
      for (auto& it : c.items)
        rep.add("chart[" + poset.labels[i] + "]." + it.check, it.pass, it.witness);
    }
    for (auto& [key, cc] : changes) {
      auto [i, j] = key;
      std::string tag = "change[" + poset.labels[i] + "->" + poset.labels[j] + "].";
      CheckReport g = check_group_covering(charts[i], charts[j], cc);
      CheckReport c = check_change_compat(charts[i], charts[j], cc);
      for (auto& it : g.items) rep.add(tag + it.check, it.pass, it.witness);
      for (auto& it : c.items) rep.add(tag + it.check, it.pass, it.witness);
    }
    // footprints of basic charts cover X
    IdSet u;
    for (int i = 0; i < n(); ++i)
      if (poset.is_minimal(i)) u = set_union(u, footprint(i));
    rep.add("atlas.footprints-cover", u == x_space.all(),
            "basic footprints do not cover X");
    // comparable pairs carry changes
    bool all_changes = true;
    std::string wit;
    for (int i = 0; i < n(); ++i)
      for (int j : poset.up[i])
        if (j != i && !has_change(i, j)) {
          all_changes = false;
          wit = "missing change " + poset.labels[i] + " -> " + poset.labels[j];
        }
    rep.add("atlas.changes-present", all_changes, wit);
    return rep;
  }
};

/// Realization |K|: union-find closure of the relation generated by group
/// orbits and covering-map identifications, with the zero-set embedding ι.
struct Realization {
  std::vector<std::pair<int, int>> objects;  // (chart, sample)
  std::map<std::pair<int, int>, int> obj_id;
  std::vector<int> cls;   // object -> canonical class id (root object)
  std::vector<int> iota;  // X sample -> class id, -1 if uncovered
  int class_count = 0;

  int id(int chart, int sample) const {
    auto it = obj_id.find({chart, sample});
    return it == obj_id.end() ? -1 : it->second;
  }

  int class_of(int chart, int sample) const {
    int o = id(chart, sample);
    return o < 0 ? -1 : cls[o];
  }

  /// members of the class of object o
  IdSet members(int c) const {
    IdSet out;
    for (size_t o = 0; o < cls.size(); ++o)
      if (cls[o] == c) out.push_back(static_cast<int>(o));
    return out;
  }
};

inline Realization realize(const Atlas& atlas) {
  Realization r;
  for (int i = 0; i < atlas.n(); ++i)
    for (int x : atlas.charts[i].active) {
      r.obj_id[{i, x}] = static_cast<int>(r.objects.size());
      r.objects.push_back({i, x});
    }
  UnionFind uf(r.objects.size());
  for (int i = 0; i < atlas.n(); ++i) {
    const auto& ch = atlas.charts[i];
    for (int x : ch.active)
      for (int g = 0; g < ch.group().n; ++g)
        uf.unite(r.obj_id.at({i, x}), r.obj_id.at({i, ch.action().apply(g, x)}));
  }
  for (auto& [key, cc] : atlas.changes) {
    auto [i, j] = key;
    for (int y : atlas.lifted(i, j)) {
      int x = cc.rho[y];
      if (set_contains(atlas.charts[i].active, x))
        uf.unite(r.obj_id.at({j, y}), r.obj_id.at({i, x}));
    }
  }
  r.cls.resize(r.objects.size());
  std::map<int, int> seen;
  for (size_t o = 0; o < r.objects.size(); ++o) r.cls[o] = uf.find(static_cast<int>(o));
  for (int c : r.cls)
    if (!seen.count(c)) seen[c] = 1;
  r.class_count = static_cast<int>(seen.size());

  // zero-set clause: related samples agree on zero status and footprint
  std::map<int, std::pair<bool, int>> zero_info;  // class -> (is_zero, x point)
  for (size_t o = 0; o < r.objects.size(); ++o) {
    auto [i, x] = r.objects[o];
    bool z = atlas.charts[i].is_zero_sample(x);
    int fx = -1;
    if (z) {
      auto it = atlas.charts[i].footprint_map.find(x);
      fx = it == atlas.charts[i].footprint_map.end() ? -1 : it->second;
    }
    auto prev = zero_info.find(r.cls[o]);
    if (prev == zero_info.end()) {
      zero_info[r.cls[o]] = {z, fx};
    } else if (prev->second.first != z) {
      fail(Errc::RealizationInconsistent,
           "zero sample related to a non-zero sample in class of chart " +
               atlas.poset.labels[i]);
    } else if (z && prev->second.second != fx) {
      fail(Errc::RealizationInconsistent,
           "related zero samples with distinct footprints");
    }
  }
  // ι: X -> classes, injectivity
  r.iota.assign(atlas.x_space.n, -1);
  std::map<int, int> iota_inv;
  for (int i = 0; i < atlas.n(); ++i) {
    const auto& ch = atlas.charts[i];
    for (int x : ch.zero_set()) {
      int p = ch.footprint_map.at(x);
      int c = r.class_of(i, x);
      if (r.iota[p] >= 0 && r.iota[p] != c)
        fail(Errc::RealizationInconsistent,
             "ι not well defined at X sample " + std::to_string(p));
      r.iota[p] = c;
    }
  }
  for (int p = 0; p < atlas.x_space.n; ++p) {
    if (r.iota[p] < 0) continue;
    auto it = iota_inv.find(r.iota[p]);
    if (it != iota_inv.end() && it->second != p)
      fail(Errc::RealizationInconsistent, "ι not injective at X sample " +
                                              std::to_string(p));
    iota_inv[r.iota[p]] = p;
  }
  return r;
}

/// Cocycle diagnostics at the requested level.
enum class CocycleLevel { Weak, Cocycle, Strong };

inline CheckReport check_cocycle(const Atlas& atlas, CocycleLevel level) {
  CheckReport rep;
  std::vector<std::array<int, 3>> chains;
  for (int i = 0; i < atlas.n(); ++i)
    for (int j : atlas.poset.up[i]) {
      if (j == i) continue;
      for (int k : atlas.poset.up[j])
        if (k != j) chains.push_back({i, j, k});
    }
  for (auto [i, j, k] : chains) {
    std::string tag = atlas.poset.labels[i] + "<" + atlas.poset.labels[j] + "<" +
                      atlas.poset.labels[k];
    const auto& cij = atlas.change(i, j);
    const auto& cjk = atlas.change(j, k);
    const auto& cik = atlas.change(i, k);
    // weak: ρ_IK = ρ_IJ∘ρ_JK on T̃U_IK ∩ ρ_JK^{-1}(T̃U_IJ ∩ U_JK)
    bool weak = true;
    std::string wit;
    IdSet lift_jk = atlas.lifted(j, k);
    IdSet overlap;
    for (int z : set_intersect(atlas.lifted(i, k), lift_jk)) {
      int y = cjk.rho[z];
      if (set_contains(atlas.lifted(i, j), y) && set_contains(atlas.dom(j, k), y))
        overlap.push_back(z);
    }
    for (int z : overlap)
      if (cik.rho[z] != cij.rho[cjk.rho[z]]) {
        weak = false;
        wit = "ρ_IK != ρ_IJ∘ρ_JK at sample " + std::to_string(z);
        break;
      }
    if (weak) {
      // group and obstruction parts must also agree
      for (int g = 0; g < atlas.charts[k].group().n && weak; ++g)
        if (cik.rho_gamma.map[g] != cij.rho_gamma.map[cjk.rho_gamma.map[g]]) {
          weak = false;
          wit = "ρ^Γ composite mismatch";
        }
      if (weak && !(cik.phihat == cjk.phihat.mul(cij.phihat))) {
        weak = false;
        wit = "φ̂ composite mismatch";
      }
    }
    rep.add("cocycle.weak[" + tag + "]", weak, wit);
    if (level == CocycleLevel::Weak) continue;

    // cocycle: U_IJ ∩ φ_IJ^{-1}(U_JK) ⊂ U_IK (intermediate level)
    IdSet pre = atlas.phi_preimage(i, j, atlas.dom(j, k));
    IdSet lhs = set_intersect(atlas.dom(i, j), pre);
    bool coc = set_subset(lhs, atlas.dom(i, k));
    rep.add("cocycle.extension[" + tag + "]", coc,
            "U_IJ ∩ φ^{-1}(U_JK) escapes U_IK");
    if (level == CocycleLevel::Strong) {
      bool strong = lhs == atlas.dom(i, k);
      rep.add("cocycle.strong[" + tag + "]", strong,
              "U_IJ ∩ φ^{-1}(U_JK) != U_IK");
    }
  }
  if (chains.empty()) rep.add("cocycle.vacuous", true);
  return rep;
}

/// Filtration clauses (i)-(iv) for the canonical markers E_IJ = U_J × φ̂(E_I).
inline CheckReport filtration(const Atlas& atlas) {
  CheckReport rep;
  rep.add("filtration.(i)", true);  // E_JJ = E_J, E_{∅J} = im 0 by construction
  // (ii): φ̂_JK φ̂_IJ spans φ̂_IK(E_I) for I ⊂ J ⊊ K
  bool c2 = true;
  std::string w2;
  for (int i = 0; i < atlas.n() && c2; ++i)
    for (int j : atlas.poset.up[i]) {
      for (int k : atlas.poset.up[j]) {
        if (k == j) continue;
        const QMat& pik = atlas.change(i, k).phihat;
        QMat comp = atlas.change(j, k).phihat;
        if (i != j) comp = comp.mul(atlas.change(i, j).phihat);
        size_t ra = q_rank(comp), rb = q_rank(pik), rc = q_rank(comp.hcat(pik));
        if (!(ra == rb && rb == rc)) {
          c2 = false;
          w2 = "im φ̂_JK φ̂_IJ != im φ̂_IK at " + atlas.poset.labels[i] + "<" +
               atlas.poset.labels[j] + "<" + atlas.poset.labels[k];
          break;
        }
      }
      if (!c2) break;
    }
  rep.add("filtration.(ii)", c2, w2);
  // (iii): im φ̂_IJ ∩ im φ̂_HJ = im φ̂_{(I∧H)J}
  bool c3 = true;
  std::string w3;
  for (int j = 0; j < atlas.n() && c3; ++j) {
    for (int i : atlas.poset.down[j]) {
      for (int h : atlas.poset.down[j]) {
        if (i >= h) continue;
        QMat A = (i == j) ? QMat::identity(atlas.charts[j].obstruction_dim)
                          : atlas.change(i, j).phihat;
        QMat B = (h == j) ? QMat::identity(atlas.charts[j].obstruction_dim)
                          : atlas.change(h, j).phihat;
        auto g = atlas.poset.glb2(i, h);
        QMat C = g ? ((*g == j) ? QMat::identity(atlas.charts[j].obstruction_dim)
                                : atlas.change(*g, j).phihat)
                   : QMat(atlas.charts[j].obstruction_dim, 0);
        if (!q_col_space_intersection_equals(A, B, C)) {
          c3 = false;
          w3 = "E_IJ ∩ E_HJ != E_(I∧H)J at I=" + atlas.poset.labels[i] + ", H=" +
               atlas.poset.labels[h] + ", J=" + atlas.poset.labels[j];
          break;
        }
      }
      if (!c3) break;
    }
  }
  rep.add("filtration.(iii)", c3, w3);
  // (iv): lifted domains sit in the subbundle slice (declared-open variant
  // checked when a marker is present)
  bool c4 = true;
  std::string w4;
  for (auto& [key, cc] : atlas.changes) {
    CheckReport sub = check_lifted_in_preimage(atlas.charts[key.second], cc);
    if (!sub.ok()) {
      c4 = false;
      w4 = "at " + atlas.poset.labels[key.first] + "->" +
           atlas.poset.labels[key.second] + ": " + sub.first_failure();
      break;
    }
  }
  rep.add("filtration.(iv)", c4, w4);
  return rep;
}

/// Tameness: the two domain identities at the intermediate level, with the
/// empty-set conventions, plus the nesting consequence eq:tame4 and the
/// closed-image consequence eq:tame3 (the J = K case of the second identity).
inline CheckReport check_tame(const Atlas& atlas) {
  CheckReport rep;
  bool t1 = true, t2 = true, t4 = true, te = true;
  std::string w1, w2, w4, we;
  for (int i = 0; i < atlas.n(); ++i) {
    for (int j : atlas.poset.up[i]) {
      for (int k : atlas.poset.up[i]) {
        if (j > k) continue;
        // eq:tame1: U_IJ ∩ U_IK = U_I(J∨K)
        auto l = atlas.poset.lub2(j, k);
        IdSet lhs = set_intersect(atlas.dom(i, j), atlas.dom(i, k));
        IdSet rhs = l ? atlas.dom(i, *l) : IdSet{};
        if (lhs != rhs && t1) {
          t1 = false;
          w1 = "U_IJ ∩ U_IK != U_I(J∨K) at I=" + atlas.poset.labels[i] + ", J=" +
               atlas.poset.labels[j] + ", K=" + atlas.poset.labels[k];
          if (!lhs.empty() && rhs.empty() && !l)
            w1 += " (footprint join missing)";
        }
      }
      // eq:tame4: U_IK ⊂ U_IJ for I ≤ J ≤ K
      for (int k : atlas.poset.up[j])
        if (t4 && !set_subset(atlas.dom(i, k), atlas.dom(i, j))) {
          t4 = false;
          w4 = "U_IK ⊄ U_IJ at I=" + atlas.poset.labels[i] + ", J=" +
               atlas.poset.labels[j] + ", K=" + atlas.poset.labels[k];
        }
      // eq:tame2 (K ranges over up(J), K = J gives eq:tame3)
      for (int k : atlas.poset.up[j]) {
        IdSet lhs = atlas.phi_image(i, j, set_intersect(atlas.dom(i, k), atlas.dom(i, j)));
        IdSet sub;
        for (int y : atlas.dom(j, k))
          if (atlas.in_subbundle(i, j, y)) sub.push_back(y);
        if (lhs != sub && t2) {
          t2 = false;
          w2 = "φ_IJ(U_IK) != U_JK ∩ s_J^{-1}(E_IJ) at I=" + atlas.poset.labels[i] +
               ", J=" + atlas.poset.labels[j] + ", K=" + atlas.poset.labels[k];
        }
      }
    }
  }
  // empty-set conventions: F_J ∩ F_K = F_{J∨K} and ψ_J^{-1}(F_K) = zero part
  // of U_JK
  for (int j = 0; j < atlas.n() && te; ++j) {
    for (int k = 0; k < atlas.n() && te; ++k) {
      auto l = atlas.poset.lub2(j, k);
      IdSet lhs = set_intersect(atlas.footprint(j), atlas.footprint(k));
      IdSet rhs = l ? atlas.footprint(*l) : IdSet{};
      if (lhs != rhs) {
        te = false;
        we = "F_J ∩ F_K != F_(J∨K) at J=" + atlas.poset.labels[j] + ", K=" +
             atlas.poset.labels[k];
      }
    }
    for (int k : atlas.poset.up[j]) {
      IdSet zero_dom;
      for (int y : atlas.dom(j, k))
        if (atlas.charts[j].is_zero_sample(y)) zero_dom.push_back(y);
      IdSet psi_pre;
      IdSet fk = atlas.footprint(k);
      for (int y : atlas.charts[j].zero_set())
        if (set_contains(fk, atlas.charts[j].footprint_map.at(y)))
          psi_pre.push_back(y);
      if (zero_dom != set_sorted(psi_pre) && te) {
        te = false;
        we = "ψ_J^{-1}(F_K) != zero trace of U_JK at J=" + atlas.poset.labels[j] +
             ", K=" + atlas.poset.labels[k];
      }
    }
  }
  rep.add("tame.eq:tame1", t1, w1);
  rep.add("tame.eq:tame2", t2, w2);
  rep.add("tame.eq:tame4", t4, w4);
  rep.add("tame.empty-conventions", te, we);
  return rep;
}

/// ε_J(S_I): both the union-find value and the closed-form value of the
/// two-step lemma, asserted equal.
inline IdSet eps_set(const Atlas& atlas, const Realization& r, int i, int j,
                     const IdSet& s_i) {
  // brute force via the realization
  std::set<int> classes;
  for (int x : s_i) {
    int c = r.class_of(i, x);
    if (c >= 0) classes.insert(c);
  }
  IdSet brute;
  for (int y : atlas.charts[j].active)
    if (classes.count(r.class_of(j, y))) brute.push_back(y);

  // closed form
  IdSet closed;
  auto l = atlas.poset.lub2(i, j);
  if (!l) {
    // ε_J(S_I) = ψ_J^{-1}(ψ_I(s_I^{-1}(0) ∩ S_I))
    IdSet xpts;
    for (int x : s_i)
      if (atlas.charts[i].is_zero_sample(x))
        xpts.push_back(atlas.charts[i].footprint_map.at(x));
    xpts = set_sorted(xpts);
    for (int y : atlas.charts[j].zero_set())
      if (set_contains(xpts, atlas.charts[j].footprint_map.at(y)))
        closed.push_back(y);
  } else {
    int u = *l;
    // φ_{I(I∨J)}(U_{I(I∨J)} ∩ S_I): lifted samples over S_I
    IdSet up_img = atlas.phi_image(i, u, set_intersect(atlas.dom(i, u), s_i));
    // φ_{J(I∨J)}^{-1}( ... )
    closed = atlas.phi_preimage(j, u, up_img);
  }
  closed = set_sorted(closed);
  if (brute != closed)
    fail(Errc::FormulaMismatch,
         "ε_J closed form disagrees with union-find at I=" + atlas.poset.labels[i] +
             ", J=" + atlas.poset.labels[j]);
  return brute;
}

/// Two-step equivalence of the taming lemma: (I,x) ~ (J,y) iff both map to a
/// common point of U_{I∨J}. Checked against the union-find closure.
inline CheckReport check_two_step(const Atlas& atlas, const Realization& r) {
  CheckReport rep;
  bool ok = true;
  std::string wit;
  auto reaches = [&](int i, int u, int x, int z) {
    // (I,x) ⪯ (U,z)? z ∈ lifted_IU with ρ(z) in the Γ_I-orbit of x
    if (i == u) return set_contains(atlas.charts[i].action().orbit(x), z);
    if (!set_contains(atlas.lifted(i, u), z)) return false;
    int px = atlas.change(i, u).rho[z];
    return set_contains(atlas.charts[i].action().orbit(x), px);
  };
  for (int i = 0; i < atlas.n() && ok; ++i)
    for (int j = i; j < atlas.n() && ok; ++j) {
      auto l = atlas.poset.lub2(i, j);
      for (int x : atlas.charts[i].active) {
        for (int y : atlas.charts[j].active) {
          bool related = r.class_of(i, x) == r.class_of(j, y);
          bool two_step = false;
          if (l) {
            for (int z : atlas.charts[*l].active)
              if (reaches(i, *l, x, z) && reaches(j, *l, y, z)) {
                two_step = true;
                break;
              }
          }
          if (!two_step && !l) {
            // zero-set clause
            if (atlas.charts[i].is_zero_sample(x) && atlas.charts[j].is_zero_sample(y))
              two_step = atlas.charts[i].footprint_map.at(x) ==
                         atlas.charts[j].footprint_map.at(y);
          }
          if (!two_step && l && atlas.charts[i].is_zero_sample(x) &&
              atlas.charts[j].is_zero_sample(y))
            two_step = atlas.charts[i].footprint_map.at(x) ==
                       atlas.charts[j].footprint_map.at(y);
          if (related != two_step) {
            ok = false;
            wit = "two-step vs closure mismatch at (" + atlas.poset.labels[i] + "," +
                  std::to_string(x) + ") ~ (" + atlas.poset.labels[j] + "," +
                  std::to_string(y) + ")";
            break;
          }
        }
        if (!ok) break;
      }
    }
  rep.add("tame.two-step-equivalence", ok, wit);
  return rep;
}

/// Quotient metric on realization classes: shortest chains of chart
/// distances (orbit-minimized), capped at the global diameter.
struct QuotientMetric {
  std::vector<int> class_ids;          // canonical class object-ids
  std::map<int, int> index_of;         // class id -> dense index
  std::vector<std::vector<Q>> d;       // dense matrix
  Q cap = Q(0);

  Q dist(int ca, int cb) const { return d[index_of.at(ca)][index_of.at(cb)]; }
};

inline QuotientMetric quotient_metric(const Atlas& atlas, const Realization& r) {
  QuotientMetric qm;
  std::set<int> cset(r.cls.begin(), r.cls.end());
  qm.class_ids.assign(cset.begin(), cset.end());
  for (size_t t = 0; t < qm.class_ids.size(); ++t)
    qm.index_of[qm.class_ids[t]] = static_cast<int>(t);
  size_t m = qm.class_ids.size();
  // cap: one plus the max chart distance sum, a safe unreachable sentinel
  Q cap(1);
  for (int i = 0; i < atlas.n(); ++i) {
    Q diam(0);
    const auto& ch = atlas.charts[i];
    for (int a : ch.active)
      for (int b : ch.active) diam = std::max(diam, ch.space().dist(a, b));
    cap += diam;
  }
  qm.cap = cap;
  qm.d.assign(m, std::vector<Q>(m, cap));
  for (size_t t = 0; t < m; ++t) qm.d[t][t] = 0;
  for (int i = 0; i < atlas.n(); ++i) {
    const auto& ch = atlas.charts[i];
    for (int a : ch.active)
      for (int b : ch.active) {
        int ca = qm.index_of.at(r.class_of(i, a));
        int cb = qm.index_of.at(r.class_of(i, b));
        Q dd = ch.space().dist(a, b);
        if (dd < qm.d[ca][cb]) {
          qm.d[ca][cb] = dd;
          qm.d[cb][ca] = dd;
        }
      }
  }
  for (size_t k = 0; k < m; ++k)
    for (size_t a = 0; a < m; ++a) {
      if (qm.d[a][k] == cap) continue;
      for (size_t b = 0; b < m; ++b) {
        Q via = qm.d[a][k] + qm.d[k][b];
        if (via < qm.d[a][b]) {
          qm.d[a][b] = via;
        }
      }
    }
  return qm;
}

/// Goodness diagnostics in the finite model:
///  (ii) π injective on each chart (on orbit classes),
///  (iv) closed coordinate-change images within their subbundle slice,
///  (iii) metrizability: chartwise (1±h)-comparability of the quotient
///        metric, together with one admissibility route: preshrunk-tame
///        provenance, an ambient metric certificate, or absence of the
///        rank-increasing footprint-frontier defect,
///  (i) recorded as closed-relation + (iv).
inline CheckReport check_good(const Atlas& atlas, const Realization& r) {
  CheckReport rep;
  // (ii)
  bool inj = true;
  std::string wi;
  for (int i = 0; i < atlas.n() && inj; ++i) {
    std::map<int, int> by_class;  // class -> orbit rep
    const auto& ch = atlas.charts[i];
    for (int x : ch.active) {
      int c = r.class_of(i, x);
      int orep = ch.action().orbit(x)[0];
      auto it = by_class.find(c);
      if (it == by_class.end())
        by_class[c] = orep;
      else if (it->second != orep) {
        inj = false;
        wi = "π not injective on chart " + atlas.poset.labels[i];
        break;
      }
    }
  }
  rep.add("good.(ii)-chartwise-injective", inj, wi);

  // (iv)
  bool closed = true;
  std::string wc;
  for (auto& [key, cc] : atlas.changes) {
    auto [i, j] = key;
    IdSet img = atlas.lifted(i, j);
    if (img.empty()) continue;
    IdSet slice;
    for (int y : atlas.charts[j].active)
      if (atlas.in_subbundle(i, j, y)) slice.push_back(y);
    IdSet cl = set_intersect(atlas.charts[j].closure(img), slice);
    if (!set_subset(cl, img)) {
      closed = false;
      wc = "im φ_" + atlas.poset.labels[i] + atlas.poset.labels[j] +
           " not cl_h-closed in its slice";
      break;
    }
  }
  rep.add("good.(iv)-closed-images", closed, wc);
  rep.add("good.(i)-hausdorff-proxy", closed, wc);

  // (iii) comparability
  QuotientMetric qm = quotient_metric(atlas, r);
  bool comp = true;
  std::string wm;
  Q lo = Q(1) - atlas.x_space.h;
  for (int i = 0; i < atlas.n() && comp; ++i) {
    const auto& ch = atlas.charts[i];
    for (int a : ch.active) {
      for (int b : ch.active) {
        Q chart_d = ch.space().dist(a, b);
        Q quot_d = qm.dist(r.class_of(i, a), r.class_of(i, b));
        // orbit-minimized chart distance is the intermediate pullback
        Q orb_d = chart_d;
        for (int g = 0; g < ch.group().n; ++g)
          orb_d = std::min(orb_d, ch.space().dist(a, ch.action().apply(g, b)));
        if (quot_d > orb_d || quot_d < lo * orb_d) {
          comp = false;
          wm = "quotient metric not (1±h)-comparable on chart " +
               atlas.poset.labels[i];
          break;
        }
      }
      if (!comp) break;
    }
  }
  rep.add("good.(iii)-metric-comparable", comp, wm);

  // (iii) admissibility route
  bool route = atlas.shrunk_from_tame || atlas.metric_certificate;
  std::string wr;
  if (!route) {
    // frontier defect: a rank-increasing change with footprint not
    // cl_h-closed inside the smaller-index footprint
    bool defect = false;
    for (auto& [key, cc] : atlas.changes) {
      auto [i, j] = key;
      if (q_rank(cc.phihat) >= static_cast<size_t>(atlas.charts[j].obstruction_dim))
        continue;  // no rank increase
      IdSet fi = atlas.footprint(i);
      IdSet fj = atlas.footprint(j);
      if (fj.empty()) continue;
      IdSet frontier = set_minus(set_intersect(atlas.x_space.closure(fj), fi), fj);
      if (!frontier.empty()) {
        defect = true;
        int p = frontier[0];
        int witness = -1;
        for (int x : atlas.charts[i].zero_set())
          if (atlas.charts[i].footprint_map.at(x) == p) witness = x;
        wr = "rank-increasing change " + atlas.poset.labels[i] + "->" +
             atlas.poset.labels[j] + ": footprint frontier at X sample " +
             std::to_string(p) + " (chart sample " + std::to_string(witness) + ")";
        break;
      }
    }
    route = !defect;
  }
  rep.add("good.(iii)-admissible-metric", route, wr);
  return rep;
}

/// Intermediate atlas view: orbit spaces with induced data. The realization
/// of the intermediate view coincides with the atlas realization.
struct IntermediateView {
  std::vector<IdSet> reps;              // orbit reps per chart (full domain)
  std::vector<std::vector<int>> rep_of; // per chart: sample -> orbit rep
  std::vector<IdSet> active_reps;       // reps of active orbits
  std::map<std::pair<int, int>, std::vector<int>> phi;  // rep in U_IJ -> rep in U_J
};

inline IntermediateView intermediate(const Atlas& atlas) {
  IntermediateView v;
  v.reps.resize(atlas.n());
  v.rep_of.resize(atlas.n());
  v.active_reps.resize(atlas.n());
  for (int i = 0; i < atlas.n(); ++i) {
    auto [reps, rep_of] = atlas.charts[i].orbits();
    v.reps[i] = reps;
    v.rep_of[i] = rep_of;
    IdSet act;
    for (int x : atlas.charts[i].active) act.push_back(rep_of[x]);
    v.active_reps[i] = set_sorted(act);
  }
  for (auto& [key, cc] : atlas.changes) {
    auto [i, j] = key;
    std::vector<int> map(atlas.charts[i].space().n, -1);
    for (int y : atlas.lifted(i, j)) {
      int x = v.rep_of[i][cc.rho[y]];
      if (map[x] < 0) map[x] = v.rep_of[j][y];
    }
    v.phi[key] = map;
  }
  return v;
}

}  // namespace kuratlas
