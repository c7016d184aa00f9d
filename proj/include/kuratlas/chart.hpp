#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kuratlas/group.hpp"
#include "kuratlas/pl.hpp"
#include "kuratlas/report.hpp"
#include "kuratlas/space.hpp"

namespace kuratlas {

/// Group quotient (U, Γ): sampled domain with a finite group acting by
/// sample permutations that are isometries of the metric table.
struct GroupQuotient {
  SampledSpace domain;
  FiniteGroup group;
  GroupAction action;

  CheckReport check() const {
    CheckReport rep;
    rep.merge(group.check_table());
    rep.merge(action.check_homomorphism(group));
    bool iso = true;
    std::string wit;
    for (int g = 0; g < group.n && iso; ++g)
      for (int i = 0; i < domain.n && iso; ++i)
        for (int j = 0; j < domain.n; ++j)
          if (domain.dist(i, j) != domain.dist(action.apply(g, i), action.apply(g, j))) {
            iso = false;
            wit = "element " + std::to_string(g) + " is not an isometry";
            break;
          }
    rep.add("quotient.isometric", iso, wit);
    return rep;
  }
};

/// Kuranishi chart with finite isotropy: domain sample + obstruction data +
/// equivariant PL section + footprint map. `active` is the current domain of
/// the chart in an atlas; the sampled geometry underneath never changes, so
/// shrinkings keep honest distance margins against what was removed.
struct KuranishiChart {
  GroupQuotient q;
  IdSet active;

  int obstruction_dim = 0;
  std::vector<QMat> obs_action;  // per group element, m×m rational
  int obs_sign = 1;              // orientation sign of the obstruction frame

  std::vector<QVec> section;         // per sample, length m
  std::map<int, int> footprint_map;  // zero sample -> X sample
  Triangulation tri;                 // optional PL structure

  const SampledSpace& space() const { return q.domain; }
  const FiniteGroup& group() const { return q.group; }
  const GroupAction& action() const { return q.action; }

  bool is_zero_sample(int x) const { return qvec_is_zero(section[x]); }

  IdSet zero_set() const {
    IdSet z;
    for (int x : active)
      if (is_zero_sample(x)) z.push_back(x);
    return z;
  }

  IdSet footprint() const {
    IdSet f;
    for (int x : zero_set()) {
      auto it = footprint_map.find(x);
      if (it != footprint_map.end()) f.push_back(it->second);
    }
    return set_sorted(f);
  }

  /// cl_h within the active domain.
  IdSet closure(const IdSet& s) const {
    return set_intersect(space().closure(s), active);
  }

  IdSet ball(const IdSet& s, const Q& r) const {
    return set_intersect(space().ball(s, r), active);
  }

  /// Orbit representatives over the full domain (intermediate points).
  std::pair<IdSet, std::vector<int>> orbits() const { return action().orbit_reps(); }

  /// sign(det dγ) on simplex t, relative to declared simplex orientations.
  /// γ must map simplices to simplices; the affine comparison reduces to the
  /// parity of the induced vertex reordering.
  std::optional<int> action_sign_on_simplex(int g, int t) const {
    const auto& sx = tri.simplices[t];
    std::vector<int> img;
    img.reserve(sx.size());
    for (int v : sx) img.push_back(action().apply(g, v));
    IdSet key = set_sorted(img);
    for (size_t u = 0; u < tri.simplices.size(); ++u) {
      if (set_sorted(tri.simplices[u]) != key) continue;
      // parity of img relative to stored order of simplex u
      std::vector<int> pos(img.size());
      for (size_t i = 0; i < img.size(); ++i) {
        const auto& su = tri.simplices[u];
        pos[i] = static_cast<int>(std::find(su.begin(), su.end(), img[i]) - su.begin());
      }
      int parity = 1;
      for (size_t i = 0; i < pos.size(); ++i)
        for (size_t j = i + 1; j < pos.size(); ++j)
          if (pos[i] > pos[j]) parity = -parity;
      return parity * tri.orient[t] * tri.orient[static_cast<int>(u)];
    }
    return std::nullopt;  // image is not a simplex
  }

  CheckReport check(bool metric_axioms = false) const {
    CheckReport rep;
    if (metric_axioms) rep.merge(space().check_metric());
    rep.merge(q.check());
    rep.add("chart.active-invariant", action().invariant(active),
            "active domain is not Γ-invariant");
    // section equivariance s(γx) = γ·s(x)
    bool equi = true;
    std::string wit;
    for (int g = 0; g < group().n && equi; ++g)
      for (int x = 0; x < space().n; ++x) {
        QVec lhs = section[action().apply(g, x)];
        QVec rhs = obs_action.empty() ? section[x] : obs_action[g].apply(section[x]);
        if (lhs != rhs) {
          equi = false;
          wit = "s(γx) != γ·s(x) at γ=" + std::to_string(g) + ", x=" + std::to_string(x);
          break;
        }
      }
    rep.add("chart.section-equivariant", equi, wit);
    // footprint constant on orbits and injective on orbit classes
    bool fp = true;
    std::string fw;
    std::map<int, IdSet> preimage;  // X id -> zero orbit reps
    auto [reps, rep_of] = orbits();
    for (int x : zero_set()) {
      auto it = footprint_map.find(x);
      if (it == footprint_map.end()) {
        fp = false;
        fw = "zero sample " + std::to_string(x) + " has no footprint image";
        break;
      }
      for (int g = 0; g < group().n; ++g) {
        int y = action().apply(g, x);
        auto jt = footprint_map.find(y);
        if (jt == footprint_map.end() || jt->second != it->second) {
          fp = false;
          fw = "footprint not constant on the orbit of " + std::to_string(x);
          break;
        }
      }
      preimage[it->second] = set_union(preimage[it->second], IdSet{rep_of[x]});
    }
    for (auto& [xid, orbs] : preimage)
      if (orbs.size() > 1) {
        fp = false;
        fw = "two zero orbits share footprint point " + std::to_string(xid);
      }
    rep.add("chart.footprint-bijection", fp, fw);
    // orientation compatibility: sign(det dγ|_U)·sign(det γ|_E) = +1
    if (!tri.empty()) {
      bool orient = true;
      std::string ow;
      for (int g = 0; g < group().n && orient; ++g) {
        int esign = obs_action.empty() ? 1 : q_sign(q_det(obs_action[g]));
        if (obstruction_dim == 0) esign = 1;
        for (size_t t = 0; t < tri.simplices.size(); ++t) {
          auto us = action_sign_on_simplex(g, static_cast<int>(t));
          if (!us) {
            orient = false;
            ow = "γ=" + std::to_string(g) + " does not preserve the triangulation";
            break;
          }
          if (*us * esign != 1) {
            orient = false;
            ow = "orientation flipped by γ=" + std::to_string(g) + " at simplex " +
                 std::to_string(t);
            break;
          }
        }
      }
      rep.add("chart.orientation-compatible", orient, ow);
    }
    return rep;
  }
};

/// Coordinate change data between charts I ≤ J, given by a group covering of
/// a Γ_I-invariant subset of U_I by a Γ_J-invariant lifted domain in U_J.
struct CoordinateChange {
  IdSet domain;             // U_IJ ⊂ U_I
  IdSet lifted;             // T̃U_IJ ⊂ U_J
  std::vector<int> rho;     // per U_J sample: image in U_I, or -1 off lifted
  GroupSurjection rho_gamma;  // Γ_J -> Γ_I with splitting
  QMat phihat;              // m_J × m_I
  Triangulation lifted_tri; // triangulation of the lifted domain (optional)
  std::optional<IdSet> open_set;  // declared-open marker in U_J

  int rho_of(int y) const { return rho[y]; }

  PlPoint rho_point(const PlPoint& p) const { return p.mapped(rho); }
};

/// Restriction to a footprint subset F′ ⊂ F: the new domain is the preimage
/// of an intermediate set whose zero trace is exactly ψ̲⁻¹(F′); the margin-h
/// neighbourhood variant is used when the subset leaves room.
inline KuranishiChart restrict_chart(const KuranishiChart& chart, const IdSet& fprime) {
  if (fprime.empty()) fail(Errc::EmptyRestriction, "restriction to empty footprint");
  IdSet f = chart.footprint();
  if (!set_subset(fprime, f))
    fail(Errc::DomainMismatch, "F' is not a subset of the footprint");
  IdSet keep_zeros, drop_zeros;
  for (int x : chart.zero_set()) {
    int fx = chart.footprint_map.at(x);
    if (set_contains(fprime, fx))
      keep_zeros.push_back(x);
    else
      drop_zeros.push_back(x);
  }
  keep_zeros = set_sorted(keep_zeros);
  drop_zeros = set_sorted(drop_zeros);
  IdSet dom = set_intersect(chart.space().closure(keep_zeros), chart.active);
  dom = chart.action().saturate(set_minus(dom, drop_zeros));
  dom = set_intersect(dom, chart.active);
  dom = set_minus(dom, drop_zeros);
  KuranishiChart out = chart;
  out.active = set_sorted(set_union(dom, keep_zeros));
  // Γ-invariance: zero orbits map to one footprint point, so saturation
  // cannot reintroduce dropped zeros.
  if (!chart.action().invariant(out.active))
    fail(Errc::DomainMismatch, "restriction produced a non-invariant domain");
  return out;
}

/// Group-covering diagnostic for a coordinate change (Def of group covering
/// clauses plus the stabilizer isomorphism and the equivariance ladder).
inline CheckReport check_group_covering(const KuranishiChart& ci,
                                        const KuranishiChart& cj,
                                        const CoordinateChange& cc) {
  CheckReport rep;
  rep.merge(cc.rho_gamma.check(cj.group(), ci.group()));

  bool dom_ok = set_subset(cc.domain, ci.active) && set_subset(cc.lifted, cj.active);
  rep.add("covering.domains-within-charts", dom_ok, "domain or lifted domain escapes");
  rep.add("covering.domain-invariant", ci.action().invariant(cc.domain),
          "U_IJ not Γ_I-invariant");
  rep.add("covering.lifted-invariant", cj.action().invariant(cc.lifted),
          "T̃U_IJ not Γ_J-invariant");

  bool rho_dom = static_cast<int>(cc.rho.size()) == cj.space().n;
  for (int y = 0; y < cj.space().n && rho_dom; ++y) {
    bool inl = set_contains(cc.lifted, y);
    if (inl != (cc.rho[y] >= 0)) rho_dom = false;
    if (inl && !set_contains(cc.domain, cc.rho[y])) rho_dom = false;
  }
  rep.add("covering.rho-well-defined", rho_dom, "ρ domain/image mismatch");
  if (!rep.ok()) return rep;

  // freeness of ker ρ^Γ on the lifted domain
  IdSet ker = cc.rho_gamma.kernel();
  auto fixed = cj.action().fixed_point(ker, cc.lifted);
  rep.add("covering.kernel-free", !fixed,
          fixed ? "kernel element " + std::to_string(fixed->first) +
                      " fixes lifted sample " + std::to_string(fixed->second)
                : "");

  // equivariance ladder ρ(γ·x̃) = ρ^Γ(γ)·ρ(x̃)
  bool equiv = true;
  std::string ew;
  for (int g = 0; g < cj.group().n && equiv; ++g)
    for (int y : cc.lifted) {
      int lhs = cc.rho[cj.action().apply(g, y)];
      int rhs = ci.action().apply(cc.rho_gamma.map[g], cc.rho[y]);
      if (lhs != rhs) {
        equiv = false;
        ew = "ρ(γx̃) != ρ^Γ(γ)ρ(x̃) at γ=" + std::to_string(g) + ", x̃=" + std::to_string(y);
        break;
      }
    }
  rep.add("covering.equivariance", equiv, ew);

  // quotient bijection: fibers are exactly ker-orbits, image is U_IJ,
  // and distinct ker-orbits have distinct images.
  bool quot = true;
  std::string qw;
  std::map<int, IdSet> fiber;
  for (int y : cc.lifted) fiber[cc.rho[y]].push_back(y);
  for (int x : cc.domain)
    if (!fiber.count(x)) {
      quot = false;
      qw = "ρ misses U_IJ sample " + std::to_string(x);
      break;
    }
  for (auto& [x, ys] : fiber) {
    if (!quot) break;
    if (static_cast<int>(ys.size()) != static_cast<int>(ker.size())) {
      quot = false;
      qw = "fiber over " + std::to_string(x) + " has size " +
           std::to_string(ys.size()) + " != |ker| = " + std::to_string(ker.size());
      break;
    }
    // single ker-orbit
    IdSet orb;
    for (int k : ker) orb.push_back(cj.action().apply(k, ys[0]));
    if (set_sorted(orb) != set_sorted(ys)) {
      quot = false;
      qw = "fiber over " + std::to_string(x) + " is not one kernel orbit";
    }
  }
  rep.add("covering.quotient-bijection", quot, qw);

  // stabilizer isomorphism Γ^x̃ ≅ Γ^{ρ(x̃)}
  bool stab = true;
  std::string sw;
  for (int y : cc.lifted) {
    IdSet sy = cj.action().stabilizer(y);
    IdSet sx = ci.action().stabilizer(cc.rho[y]);
    IdSet image;
    for (int g : sy) image.push_back(cc.rho_gamma.map[g]);
    image = set_sorted(image);
    if (image != sx || image.size() != sy.size()) {
      stab = false;
      sw = "stabilizers differ over lifted sample " + std::to_string(y);
      break;
    }
  }
  rep.add("covering.stabilizer-isomorphism", stab, sw);
  return rep;
}

/// Section/footprint compatibility of a coordinate change:
/// s_J = φ̂ ∘ s_I ∘ ρ and ψ_J = ψ_I ∘ ρ on zero samples of the lifted set.
inline CheckReport check_change_compat(const KuranishiChart& ci,
                                       const KuranishiChart& cj,
                                       const CoordinateChange& cc) {
  CheckReport rep;
  bool sec = true;
  std::string sw;
  for (int y : cc.lifted) {
    if (cj.section[y] != cc.phihat.apply(ci.section[cc.rho[y]])) {
      sec = false;
      sw = "s_J != φ̂∘s_I∘ρ at lifted sample " + std::to_string(y);
      break;
    }
  }
  rep.add("change.section-compat", sec, sw);
  bool fp = true;
  std::string fw;
  for (int y : cc.lifted) {
    if (!cj.is_zero_sample(y)) continue;
    auto a = cj.footprint_map.find(y);
    auto b = ci.footprint_map.find(cc.rho[y]);
    if (a == cj.footprint_map.end() || b == ci.footprint_map.end() ||
        a->second != b->second) {
      fp = false;
      fw = "ψ_J != ψ_I∘ρ at zero sample " + std::to_string(y);
      break;
    }
  }
  rep.add("change.footprint-compat", fp, fw);
  return rep;
}

namespace detail {

/// Edge-coordinate differential of a PL section on an ordered simplex:
/// columns are f(v_k) − f(v_0).
inline QMat simplex_differential(const std::vector<QVec>& section,
                                 const std::vector<int>& simplex) {
  size_t m = section[simplex[0]].size();
  QMat D(m, simplex.size() - 1);
  for (size_t k = 1; k < simplex.size(); ++k)
    for (size_t i = 0; i < m; ++i)
      D.at(i, k - 1) = section[simplex[k]][i] - section[simplex[0]][i];
  return D;
}

/// Kernel basis of a matrix (columns), exact.
inline QMat kernel_basis(const QMat& A) {
  // reduce and read off free columns
  QMat M = A;
  size_t n = M.rows, m = M.cols;
  std::vector<int> pivot_of_col(m, -1);
  size_t r = 0;
  for (size_t c = 0; c < m && r < n; ++c) {
    size_t piv = r;
    while (piv < n && M.at(piv, c) == 0) ++piv;
    if (piv == n) continue;
    if (piv != r)
      for (size_t j = 0; j < m; ++j) std::swap(M.at(piv, j), M.at(r, j));
    for (size_t i = 0; i < n; ++i) {
      if (i == r || M.at(i, c) == 0) continue;
      Q f = M.at(i, c) / M.at(r, c);
      for (size_t j = c; j < m; ++j) M.at(i, j) -= f * M.at(r, j);
    }
    pivot_of_col[c] = static_cast<int>(r);
    ++r;
  }
  std::vector<size_t> free_cols;
  for (size_t c = 0; c < m; ++c)
    if (pivot_of_col[c] < 0) free_cols.push_back(c);
  QMat K(m, free_cols.size());
  for (size_t t = 0; t < free_cols.size(); ++t) {
    size_t fc = free_cols[t];
    K.at(fc, t) = 1;
    for (size_t c = 0; c < m; ++c) {
      int pr = pivot_of_col[c];
      if (pr < 0) continue;
      K.at(c, t) = -M.at(pr, fc) / M.at(pr, c);
    }
  }
  return K;
}

}  // namespace detail

/// Index condition at zero simplices of the lifted domain: the face inclusion
/// identifies kernels, and φ̂ covers the cokernel with the exact intersection
/// law im ds_J ∩ im φ̂ = φ̂(im ds_IJ).
inline CheckReport check_index_condition(const KuranishiChart& ci,
                                         const KuranishiChart& cj,
                                         const CoordinateChange& cc) {
  CheckReport rep;
  if (cc.lifted_tri.empty() && cj.tri.empty()) {
    // No PL structure: the submanifold requirement is imposed as an input
    // constraint; in the equal-dimension case the condition reduces to ρ
    // invertibility, which the covering check certifies.
    rep.add("index.no-pl-structure", true);
    return rep;
  }
  // s_IJ = s_I ∘ ρ on the lifted domain
  std::vector<QVec> s_ij(cj.space().n, qvec_zero(ci.obstruction_dim));
  for (int y : cc.lifted) s_ij[y] = ci.section[cc.rho[y]];

  bool ok = true;
  std::string wit;
  for (size_t st = 0; st < cc.lifted_tri.simplices.size() && ok; ++st) {
    const auto& sigma = cc.lifted_tri.simplices[st];
    // does the interpolant of s_IJ on sigma vanish somewhere?
    std::vector<QVec> vals;
    for (int v : sigma) vals.push_back(s_ij[v]);
    bool meets_zero = false;
    {
      // a zero exists in the closed simplex iff the affine solve lands with
      // nonnegative coordinates, or some vertex vanishes
      for (auto& v : vals)
        if (qvec_is_zero(v)) meets_zero = true;
      if (!meets_zero && vals[0].size() + 1 == sigma.size()) {
        auto sol = pl_solve_simplex(vals);
        if (sol && sol->in_closed) meets_zero = true;
      }
    }
    if (!meets_zero) continue;
    QMat B = detail::simplex_differential(s_ij, sigma);
    // find containing top simplices of U_J
    IdSet skey = set_sorted(sigma);
    bool contained = false;
    for (size_t tt = 0; tt < cj.tri.simplices.size(); ++tt) {
      const auto& tau = cj.tri.simplices[tt];
      if (!set_subset(skey, set_sorted(tau))) continue;
      contained = true;
      QMat A = detail::simplex_differential(cj.section, tau);
      // embed sigma's edge space into tau's edge space
      QMat E(tau.size() - 1, sigma.size() - 1);
      auto pos_in_tau = [&](int v) {
        return static_cast<int>(std::find(tau.begin(), tau.end(), v) - tau.begin());
      };
      for (size_t k = 1; k < sigma.size(); ++k) {
        int pk = pos_in_tau(sigma[k]);
        int p0 = pos_in_tau(sigma[0]);
        if (pk > 0) E.at(pk - 1, k - 1) += 1;
        if (p0 > 0) E.at(p0 - 1, k - 1) -= 1;
      }
      // (i) kernels: E(ker B) ⊂ ker A with equal dimensions
      QMat KB = detail::kernel_basis(B);
      QMat EK = E.mul(KB);
      QMat AEK = A.mul(EK);
      bool kernels = true;
      for (auto& e : AEK.a)
        if (e != 0) kernels = false;
      size_t dim_ker_A = A.cols - q_rank(A);
      if (q_rank(KB) != dim_ker_A) kernels = false;
      if (!kernels) {
        ok = false;
        wit = "kernel identification fails at lifted simplex " + std::to_string(st);
        break;
      }
      // (ii) cokernels: E_J = im A + im φ̂, im A ∩ im φ̂ = φ̂(im B)
      if (q_rank(A.hcat(cc.phihat)) != static_cast<size_t>(cj.obstruction_dim)) {
        ok = false;
        wit = "E_J != im ds_J + im φ̂ at lifted simplex " + std::to_string(st);
        break;
      }
      if (!q_col_space_intersection_equals(A, cc.phihat, cc.phihat.mul(B))) {
        ok = false;
        wit = "im ds_J ∩ im φ̂ != φ̂(im ds_I) at lifted simplex " + std::to_string(st);
        break;
      }
    }
    if (!contained) {
      ok = false;
      wit = "lifted simplex " + std::to_string(st) + " is not a face of the chart triangulation";
    }
  }
  rep.add("index.condition", ok, wit);
  return rep;
}

/// Filtration clause (iv) proxy: T̃U_IJ ⊂ s_J^{-1}(im φ̂); with a declared
/// open marker, equality with the marked slice.
inline CheckReport check_lifted_in_preimage(const KuranishiChart& cj,
                                            const CoordinateChange& cc) {
  CheckReport rep;
  IdSet pre;
  for (int y : cj.active)
    if (q_in_col_space(cc.phihat, cj.section[y])) pre.push_back(y);
  bool incl = set_subset(cc.lifted, pre);
  rep.add("change.lifted-in-subbundle", incl,
          "T̃U_IJ escapes s_J^{-1}(φ̂ E_I)");
  if (cc.open_set) {
    IdSet expect = set_intersect(pre, *cc.open_set);
    rep.add("change.lifted-open-slice", cc.lifted == expect,
            "T̃U_IJ != s_J^{-1}(φ̂ E_I) ∩ declared-open set");
  }
  return rep;
}

/// Composite coordinate change I ≤ J ≤ K per the composition lemma.
inline CoordinateChange compose_changes(const KuranishiChart& ci,
                                        const KuranishiChart& cj,
                                        const KuranishiChart& ck,
                                        const CoordinateChange& cij,
                                        const CoordinateChange& cjk) {
  (void)ci;
  CoordinateChange out;
  // lifted = {z in lifted_JK : ρ_JK(z) ∈ T̃U_IJ}
  for (int z : cjk.lifted) {
    int y = cjk.rho[z];
    if (set_contains(cij.lifted, y)) out.lifted.push_back(z);
  }
  out.lifted = set_sorted(out.lifted);
  out.rho.assign(ck.space().n, -1);
  IdSet dom;
  for (int z : out.lifted) {
    int x = cij.rho[cjk.rho[z]];
    out.rho[z] = x;
    dom.push_back(x);
  }
  out.domain = set_sorted(dom);
  if (out.domain.empty() && !cij.domain.empty() && !cjk.domain.empty()) {
    // footprints overlap but the chained domains miss each other
    fail(Errc::DomainMismatch, "composite coordinate change has empty domain");
  }
  out.rho_gamma.map.resize(ck.group().n);
  for (int g = 0; g < ck.group().n; ++g)
    out.rho_gamma.map[g] = cij.rho_gamma.map[cjk.rho_gamma.map[g]];
  out.rho_gamma.split.resize(cij.rho_gamma.split.size());
  for (size_t t = 0; t < cij.rho_gamma.split.size(); ++t)
    out.rho_gamma.split[t] = cjk.rho_gamma.split[cij.rho_gamma.split[t]];
  out.phihat = cjk.phihat.mul(cij.phihat);
  // Composite lifted triangulation: when the chain is equidimensional the
  // composite lifted set is a subcomplex of the J→K lifted triangulation.
  if (ci.obstruction_dim == cj.obstruction_dim) {
    for (size_t t = 0; t < cjk.lifted_tri.simplices.size(); ++t) {
      bool in = true;
      for (int v : cjk.lifted_tri.simplices[t])
        if (!set_contains(out.lifted, v)) in = false;
      if (in) {
        out.lifted_tri.simplices.push_back(cjk.lifted_tri.simplices[t]);
        out.lifted_tri.orient.push_back(cjk.lifted_tri.orient[t]);
      }
    }
  }
  return out;
}

}  // namespace kuratlas
