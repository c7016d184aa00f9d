#pragma once

#include <map>
#include <string>
#include <vector>

#include "kuratlas/perturb.hpp"
#include "kuratlas/tame.hpp"
#include "kuratlas/zeroset.hpp"

namespace kuratlas {

/// Per-letter data of a semi-additive atlas: obstruction blocks and groups
/// indexed by the alphabet, plus the letter footprints.
struct SemiAdditiveData {
  std::vector<std::string> alphabet;
  std::vector<int> dim;             // dim E_α
  std::vector<FiniteGroup> group;   // Γ_α
  std::vector<IdSet> footprint;     // F_α ⊂ X samples
};

namespace detail {

/// canonical block inclusion E_{τ(I)} -> E_{τ(J)} over sorted letters
inline QMat block_inclusion(const SemiAdditiveData& sd, const IdSet& sub,
                            const IdSet& super) {
  int rows = 0, cols = 0;
  std::map<int, int> row_off, col_off;
  for (int a : super) {
    row_off[a] = rows;
    rows += sd.dim[a];
  }
  for (int a : sub) {
    col_off[a] = cols;
    cols += sd.dim[a];
  }
  QMat m(rows, cols);
  for (int a : sub)
    for (int t = 0; t < sd.dim[a]; ++t) m.at(row_off[a] + t, col_off[a] + t) = 1;
  return m;
}

}  // namespace detail

/// Semi-additivity diagnostic: the τ-compatibility of groups, obstruction
/// spaces, footprints, and the canonical form of the coordinate changes,
/// with the minimal-generation check delegated.
inline CheckReport check_semiadditive(const Atlas& atlas, const SemiAdditiveData& sd) {
  CheckReport rep;
  if (!atlas.tau) {
    rep.add("semiadd.tau-present", false, "no τ-map on the atlas");
    return rep;
  }
  rep.merge(check_minimally_generated(atlas.poset, &*atlas.tau));
  bool dims = true, groups = true, feet = true, changes = true;
  std::string wd, wg, wf, wc;
  for (int i = 0; i < atlas.n(); ++i) {
    const IdSet& tau_i = atlas.tau->tau[i];
    int want = 0, order = 1;
    for (int a : tau_i) {
      want += sd.dim[a];
      order *= sd.group[a].n;
    }
    if (atlas.charts[i].obstruction_dim != want) {
      dims = false;
      wd = "E_" + atlas.poset.labels[i] + " is not the τ-product";
    }
    if (atlas.charts[i].group().n != order) {
      groups = false;
      wg = "Γ_" + atlas.poset.labels[i] + " is not the τ-product";
    }
    IdSet f;
    bool first = true;
    for (int a : tau_i) {
      f = first ? sd.footprint[a] : set_intersect(f, sd.footprint[a]);
      first = false;
    }
    if (atlas.footprint(i) != f) {
      feet = false;
      wf = "F_" + atlas.poset.labels[i] + " != F_{τ(I)}";
    }
  }
  for (auto& [key, cc] : atlas.changes) {
    auto [i, j] = key;
    QMat want = detail::block_inclusion(sd, atlas.tau->tau[i], atlas.tau->tau[j]);
    if (!(cc.phihat == want)) {
      changes = false;
      wc = "φ̂ not the canonical inclusion at " + atlas.poset.labels[i] + "->" +
           atlas.poset.labels[j];
    }
    // ρ^Γ is the projection: kernel order = product over τ(J)∖τ(I)
    int kord = 1;
    for (int a : set_minus(atlas.tau->tau[j], atlas.tau->tau[i])) kord *= sd.group[a].n;
    if (static_cast<int>(cc.rho_gamma.kernel().size()) != kord) {
      changes = false;
      wc = "ρ^Γ kernel is not Γ_{τ(J)∖τ(I)} at " + atlas.poset.labels[i] + "->" +
           atlas.poset.labels[j];
    }
  }
  rep.add("semiadd.obstruction-products", dims, wd);
  rep.add("semiadd.group-products", groups, wg);
  rep.add("semiadd.footprints", feet, wf);
  rep.add("semiadd.canonical-changes", changes, wc);
  return rep;
}

/// ---------------------------------------------------------------------
/// Products.
/// ---------------------------------------------------------------------

/// Staircase product of two triangulations (shuffle simplices with parity
/// orientations). Sample ids combine as a * n2 + b.
inline Triangulation product_triangulation(const Triangulation& t1,
                                           const Triangulation& t2, int n2) {
  Triangulation out;
  if (t1.empty() || t2.empty()) return out;
  for (size_t s1 = 0; s1 < t1.simplices.size(); ++s1)
    for (size_t s2 = 0; s2 < t2.simplices.size(); ++s2) {
      const auto& a = t1.simplices[s1];
      const auto& b = t2.simplices[s2];
      size_t p = a.size() - 1, q = b.size() - 1;
      // monotone lattice paths from (0,0) to (p,q)
      std::vector<std::pair<std::vector<int>, int>> paths;  // path, parity
      std::function<void(size_t, size_t, std::vector<int>&, int)> rec =
          [&](size_t i, size_t j, std::vector<int>& acc, int parity) {
            if (i == p && j == q) {
              paths.push_back({acc, parity});
              return;
            }
            if (i < p) {
              acc.push_back(0);
              rec(i + 1, j, acc, parity);
              acc.pop_back();
            }
            if (j < q) {
              // crossing parity: moving in the second factor past remaining
              // first-factor steps flips by (p - i)
              acc.push_back(1);
              rec(i, j + 1, acc, parity * (((p - i) % 2) ? -1 : 1));
              acc.pop_back();
            }
          };
      std::vector<int> acc;
      rec(0, 0, acc, 1);
      for (auto& [path, parity] : paths) {
        std::vector<int> simplex;
        size_t i = 0, j = 0;
        simplex.push_back(a[0] * n2 + b[0]);
        for (int step : path) {
          if (step == 0)
            ++i;
          else
            ++j;
          simplex.push_back(a[i] * n2 + b[j]);
        }
        out.simplices.push_back(simplex);
        out.orient.push_back(t1.orient[s1] * t2.orient[s2] * parity);
      }
    }
  return out;
}

/// Product of two atlases over the product poset, with product charts,
/// groups, sections, footprints, and coordinate changes.
inline Atlas product_atlas(const Atlas& a1, const Atlas& a2) {
  Atlas out;
  out.poset = make_product_poset(a1.poset, a2.poset);
  out.flag = AtlasFlag::SemiAdditive;
  out.metric_certificate = a1.metric_certificate && a2.metric_certificate;
  int nx2 = a2.x_space.n;
  {
    const SampledSpace& X1 = a1.x_space;
    const SampledSpace& X2 = a2.x_space;
    out.x_space = SampledSpace::from_fn(
        X1.n * X2.n,
        [X1, X2, nx2](int p, int q) {
          return std::max(X1.dist(p / nx2, q / nx2), X2.dist(p % nx2, q % nx2));
        },
        std::min(X1.h, X2.h));
  }
  // product τ over the disjoint alphabet (minimal labels of both factors)
  TauMap tau;
  IdSet min1 = a1.poset.minimal_elements(), min2 = a2.poset.minimal_elements();
  for (int h : min1) tau.alphabet.push_back("L:" + a1.poset.labels[h]);
  for (int h : min2) tau.alphabet.push_back("R:" + a2.poset.labels[h]);
  tau.tau.resize(out.poset.n());

  out.charts.resize(out.poset.n());
  for (int i1 = 0; i1 < a1.poset.n(); ++i1)
    for (int i2 = 0; i2 < a2.poset.n(); ++i2) {
      int idx = out.poset.id(a1.poset.labels[i1] + "*" + a2.poset.labels[i2]);
      const KuranishiChart& c1 = a1.charts[i1];
      const KuranishiChart& c2 = a2.charts[i2];
      KuranishiChart k;
      int n2 = c2.space().n;
      SampledSpace s1 = c1.space(), s2 = c2.space();
      k.q.domain = SampledSpace::from_fn(
          s1.n * n2,
          [s1, s2, n2](int p, int q) {
            return std::max(s1.dist(p / n2, q / n2), s2.dist(p % n2, q % n2));
          },
          std::min(s1.h, s2.h));
      k.q.group = FiniteGroup::product(c1.group(), c2.group());
      k.q.action.perm.assign(k.q.group.n, std::vector<int>(s1.n * n2));
      for (int g = 0; g < k.q.group.n; ++g) {
        int g1 = g / c2.group().n, g2 = g % c2.group().n;
        for (int x = 0; x < s1.n * n2; ++x)
          k.q.action.perm[g][x] =
              c1.action().apply(g1, x / n2) * n2 + c2.action().apply(g2, x % n2);
      }
      IdSet act;
      for (int x : c1.active)
        for (int y : c2.active) act.push_back(x * n2 + y);
      k.active = set_sorted(act);
      k.obstruction_dim = c1.obstruction_dim + c2.obstruction_dim;
      k.obs_action.resize(k.q.group.n);
      for (int g = 0; g < k.q.group.n; ++g) {
        int g1 = g / c2.group().n, g2 = g % c2.group().n;
        QMat m(k.obstruction_dim, k.obstruction_dim);
        for (int r = 0; r < c1.obstruction_dim; ++r)
          for (int c = 0; c < c1.obstruction_dim; ++c)
            m.at(r, c) = c1.obs_action[g1].at(r, c);
        for (int r = 0; r < c2.obstruction_dim; ++r)
          for (int c = 0; c < c2.obstruction_dim; ++c)
            m.at(c1.obstruction_dim + r, c1.obstruction_dim + c) =
                c2.obs_action[g2].at(r, c);
        k.obs_action[g] = m;
      }
      k.section.resize(s1.n * n2);
      for (int x = 0; x < s1.n; ++x)
        for (int y = 0; y < n2; ++y) {
          QVec v = c1.section[x];
          for (const auto& e : c2.section[y]) v.push_back(e);
          k.section[x * n2 + y] = v;
        }
      for (auto& [zx, fx] : c1.footprint_map)
        for (auto& [zy, fy] : c2.footprint_map)
          k.footprint_map[zx * n2 + zy] = fx * nx2 + fy;
      k.tri = product_triangulation(c1.tri, c2.tri, n2);
      out.charts[idx] = k;
      // τ of the product chart: letters of both factors
      IdSet t;
      for (size_t t1 = 0; t1 < min1.size(); ++t1)
        if (set_contains(a1.poset.m_of(i1), min1[t1])) t.push_back(static_cast<int>(t1));
      for (size_t t2 = 0; t2 < min2.size(); ++t2)
        if (set_contains(a2.poset.m_of(i2), min2[t2]))
          t.push_back(static_cast<int>(min1.size() + t2));
      tau.tau[idx] = set_sorted(t);
    }
  out.tau = tau;

  // product coordinate changes for comparable product pairs
  for (int i1 = 0; i1 < a1.poset.n(); ++i1)
    for (int i2 = 0; i2 < a2.poset.n(); ++i2)
      for (int j1 : a1.poset.up[i1])
        for (int j2 : a2.poset.up[i2]) {
          if (j1 == i1 && j2 == i2) continue;
          int src = out.poset.id(a1.poset.labels[i1] + "*" + a2.poset.labels[i2]);
          int dst = out.poset.id(a1.poset.labels[j1] + "*" + a2.poset.labels[j2]);
          const KuranishiChart& cj1 = a1.charts[j1];
          const KuranishiChart& cj2 = a2.charts[j2];
          int nj2 = cj2.space().n;
          int ni2 = a2.charts[i2].space().n;
          CoordinateChange cc;
          // factor data, with the identity change convention on equal indices
          auto dom1 = a1.dom(i1, j1);
          auto dom2 = a2.dom(i2, j2);
          auto lift1 = a1.lifted(i1, j1);
          auto lift2 = a2.lifted(i2, j2);
          auto rho1 = [&](int y) {
            return i1 == j1 ? y : a1.change(i1, j1).rho[y];
          };
          auto rho2 = [&](int y) {
            return i2 == j2 ? y : a2.change(i2, j2).rho[y];
          };
          for (int x : dom1)
            for (int y : dom2) cc.domain.push_back(x * ni2 + y);
          cc.domain = set_sorted(cc.domain);
          cc.rho.assign(cj1.space().n * nj2, -1);
          for (int x : lift1)
            for (int y : lift2) {
              int id = x * nj2 + y;
              cc.lifted.push_back(id);
              cc.rho[id] = rho1(x) * ni2 + rho2(y);
            }
          cc.lifted = set_sorted(cc.lifted);
          int gj = cj1.group().n * cj2.group().n;
          cc.rho_gamma.map.resize(gj);
          for (int g = 0; g < gj; ++g) {
            int g1 = g / cj2.group().n, g2 = g % cj2.group().n;
            int h1 = i1 == j1 ? g1 : a1.change(i1, j1).rho_gamma.map[g1];
            int h2 = i2 == j2 ? g2 : a2.change(i2, j2).rho_gamma.map[g2];
            cc.rho_gamma.map[g] = h1 * a2.charts[i2].group().n + h2;
          }
          int gi = a1.charts[i1].group().n * a2.charts[i2].group().n;
          cc.rho_gamma.split.resize(gi);
          for (int g = 0; g < gi; ++g) {
            int g1 = g / a2.charts[i2].group().n, g2 = g % a2.charts[i2].group().n;
            int h1 = i1 == j1 ? g1 : a1.change(i1, j1).rho_gamma.split[g1];
            int h2 = i2 == j2 ? g2 : a2.change(i2, j2).rho_gamma.split[g2];
            cc.rho_gamma.split[g] = h1 * cj2.group().n + h2;
          }
          // φ̂: block product of the factor inclusions
          QMat p1 = i1 == j1 ? QMat::identity(a1.charts[i1].obstruction_dim)
                             : a1.change(i1, j1).phihat;
          QMat p2 = i2 == j2 ? QMat::identity(a2.charts[i2].obstruction_dim)
                             : a2.change(i2, j2).phihat;
          QMat ph(cj1.obstruction_dim + cj2.obstruction_dim,
                  a1.charts[i1].obstruction_dim + a2.charts[i2].obstruction_dim);
          for (size_t r = 0; r < p1.rows; ++r)
            for (size_t c = 0; c < p1.cols; ++c) ph.at(r, c) = p1.at(r, c);
          for (size_t r = 0; r < p2.rows; ++r)
            for (size_t c = 0; c < p2.cols; ++c)
              ph.at(cj1.obstruction_dim + r, a1.charts[i1].obstruction_dim + c) =
                  p2.at(r, c);
          cc.phihat = ph;
          // lifted triangulation: product of the factor lifted structures
          const Triangulation& lt1 =
              i1 == j1 ? cj1.tri : a1.change(i1, j1).lifted_tri;
          const Triangulation& lt2 =
              i2 == j2 ? cj2.tri : a2.change(i2, j2).lifted_tri;
          cc.lifted_tri = product_triangulation(lt1, lt2, nj2);
          out.changes[{src, dst}] = cc;
        }
  return out;
}

/// The per-letter data of a product atlas (factor letters side by side).
inline SemiAdditiveData product_semiadd_data(const Atlas& a1, const Atlas& a2,
                                             const Atlas& prod) {
  SemiAdditiveData sd;
  sd.alphabet = prod.tau->alphabet;
  IdSet min1 = a1.poset.minimal_elements(), min2 = a2.poset.minimal_elements();
  int nx2 = a2.x_space.n;
  for (int h : min1) {
    sd.dim.push_back(a1.charts[h].obstruction_dim);
    sd.group.push_back(a1.charts[h].group());
    IdSet f;
    for (int p : a1.footprint(h))
      for (int q = 0; q < nx2; ++q) f.push_back(p * nx2 + q);
    sd.footprint.push_back(set_sorted(f));
  }
  for (int h : min2) {
    sd.dim.push_back(a2.charts[h].obstruction_dim);
    sd.group.push_back(a2.charts[h].group());
    IdSet f;
    for (int q : a2.footprint(h))
      for (int p = 0; p < a1.x_space.n; ++p) f.push_back(p * nx2 + q);
    sd.footprint.push_back(set_sorted(f));
  }
  return sd;
}

/// Seeded reduction for good semi-additive atlases: cover-reduce inside the
/// given footprint seeds, lift into the given invariant seed domains, carve
/// the incomparable interactions.
inline Reduction reduction_semiadd(const Atlas& atlas, const Realization& r,
                                   const std::vector<IdSet>& p_seeds,
                                   const std::vector<IdSet>& w_seeds) {
  // cover reduction of the seeded footprint cover
  Cover cover;
  cover.space = atlas.x_space;
  cover.poset = atlas.poset;
  cover.sets = p_seeds;
  CoverReduction zred = cover_reduction(cover);
  int n = atlas.n();
  Reduction red;
  red.V.assign(n, {});
  std::vector<IdSet> w(n);
  for (int i = 0; i < n; ++i) {
    const auto& ch = atlas.charts[i];
    IdSet zpre;
    for (int x : set_intersect(w_seeds[i], ch.active))
      if (ch.is_zero_sample(x) &&
          set_contains(zred.zsets[i], ch.footprint_map.at(x)))
        zpre.push_back(x);
    zpre = set_sorted(zpre);
    if (zpre.empty()) continue;
    std::vector<Q> schedule = {ch.space().h, ch.space().h / 2, Q(0)};
    for (const Q& rr : schedule) {
      IdSet cand = rr == 0 ? zpre
                           : set_intersect(ch.space().closure_r(zpre, rr),
                                           set_intersect(w_seeds[i], ch.active));
      cand = set_intersect(ch.action().saturate(cand),
                           set_intersect(w_seeds[i], ch.active));
      cand = set_minus(cand, set_minus(ch.zero_set(), zpre));
      IdSet zclx = atlas.x_space.closure(zred.zsets[i]);
      IdSet zcl;
      for (int x : ch.zero_set())
        if (set_contains(zclx, ch.footprint_map.at(x))) zcl.push_back(x);
      if (set_subset(set_intersect(ch.closure(cand), ch.zero_set()), set_sorted(zcl))) {
        w[i] = cand;
        break;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (w[i].empty()) continue;
    const auto& ch = atlas.charts[i];
    IdSet v = w[i];
    for (int j = 0; j < n; ++j) {
      if (j == i || atlas.poset.leq(i, j) || atlas.poset.leq(j, i)) continue;
      if (w[j].empty() || v.empty()) continue;
      std::set<int> clj;
      for (int y : atlas.charts[j].closure(w[j])) clj.insert(r.class_of(j, y));
      IdSet yij;
      for (int x : ch.closure(w[i]))
        if (clj.count(r.class_of(i, x))) yij.push_back(x);
      if (yij.empty()) continue;
      IdSet zpre;
      for (int x : ch.zero_set())
        if (set_contains(atlas.x_space.closure(zred.zsets[i]), ch.footprint_map.at(x)))
          zpre.push_back(x);
      std::vector<Q> schedule = {ch.space().h, ch.space().h / 2, Q(0)};
      IdSet nbhd;
      bool ok = false;
      for (const Q& rr : schedule) {
        nbhd = rr == 0 ? yij : set_intersect(ch.space().closure_r(yij, rr), ch.active);
        if (set_intersect(nbhd, set_sorted(zpre)).empty()) {
          ok = true;
          break;
        }
      }
      if (!ok)
        fail(Errc::ResolutionTooCoarse, "seeded carving cuts the zero set at " +
                                            atlas.poset.labels[i]);
      v = set_minus(v, nbhd);
    }
    red.V[i] = v;
  }
  CheckReport rep = check_reduction(atlas, r, red);
  if (!rep.ok()) fail(Errc::ResolutionTooCoarse, rep.first_failure());
  return red;
}

/// ---------------------------------------------------------------------
/// Canonical tameable extension of a semi-additive atlas: charts indexed by
/// sets of basic indices, obstruction spaces with duplicated letter factors,
/// diagonal group actions, and domains fibered over the source charts by the
/// kernel of the summing projection σ. Kernel ranks up to one are
/// materialized with a fiber grid.
/// ---------------------------------------------------------------------
struct TameableExtension {
  Atlas extension;
  std::vector<int> ell;                      // K' chart -> source chart
  std::vector<std::map<int, int>> mult;      // per K' chart: α -> m_{α,K}
  std::vector<QMat> sigma;                   // per K' chart: E' -> E_{ℓ(K)}
  std::vector<std::vector<int>> f_base;      // per K' chart: sample -> base sample
  std::vector<QMat> lift;                    // canonical section of σ
};

inline TameableExtension tameable_extension(const Atlas& source,
                                            const SemiAdditiveData& sd,
                                            int fiber_radius = 4, Q fiber_step = Q(1)) {
  if (!source.tau) fail(Errc::HypothesisViolated, "source atlas carries no τ-map");
  const TauMap& tau = *source.tau;
  IdSet minimals = source.poset.minimal_elements();
  // index set: subsets of basic charts with nonempty footprint intersection
  std::vector<IdSet> subsets;
  std::vector<std::string> labels;
  for (unsigned mask = 1; mask < (1u << minimals.size()); ++mask) {
    IdSet s;
    for (size_t t = 0; t < minimals.size(); ++t)
      if (mask & (1u << t)) s.push_back(minimals[t]);
    IdSet f;
    bool first = true;
    for (int b : s) {
      f = first ? source.footprint(b) : set_intersect(f, source.footprint(b));
      first = false;
    }
    if (f.empty()) continue;
    subsets.push_back(s);
    std::string lab;
    for (size_t t = 0; t < s.size(); ++t)
      lab += (t ? "+" : "") + source.poset.labels[s[t]];
    labels.push_back(lab);
  }
  std::vector<std::pair<std::string, std::string>> order;
  for (size_t i = 0; i < subsets.size(); ++i)
    for (size_t j = 0; j < subsets.size(); ++j)
      if (i != j && set_subset(subsets[i], subsets[j]))
        order.emplace_back(labels[i], labels[j]);

  TameableExtension ext;
  Atlas& out = ext.extension;
  out.poset = make_poset(labels, order);
  out.x_space = source.x_space;
  out.flag = AtlasFlag::Tameable;
  out.metric_certificate = source.metric_certificate;
  int n = out.poset.n();
  out.charts.resize(n);
  ext.ell.resize(n);
  ext.mult.resize(n);
  ext.sigma.resize(n);
  ext.lift.resize(n);
  ext.f_base.resize(n);

  // block layouts: per K, blocks are the basic indices in order; a block for
  // basic s has the letters τ(s) in order
  struct Layout {
    int dims = 0;
    std::map<std::pair<int, int>, int> offset;  // (basic, letter) -> offset
  };
  std::vector<Layout> lay(n);
  // the source charts carry letter-block layouts over sorted τ(I)
  auto source_offset = [&](int chart, int letter) {
    int off = 0;
    for (int a : tau.tau[chart]) {
      if (a == letter) return off;
      off += sd.dim[a];
    }
    fail(Errc::HypothesisViolated, "letter missing from the source layout");
  };

  for (int k = 0; k < n; ++k) {
    const IdSet& S = subsets[k];
    auto l = source.poset.lub_status(S);
    if (l.kind != IndexPoset::LubStatus::Value)
      fail(Errc::GenerationFailure, "extension index with no source join at " + labels[k]);
    ext.ell[k] = l.value;
    for (int b : S)
      for (int a : tau.tau[b]) {
        ext.mult[k][a] += 1;
        lay[k].offset[{b, a}] = lay[k].dims;
        lay[k].dims += sd.dim[a];
      }
    // dim E'_K = Σ_α m_{α,K}·dim E_α
    int want = 0;
    for (auto& [a, mm] : ext.mult[k]) want += mm * sd.dim[a];
    if (want != lay[k].dims)
      fail(Errc::HypothesisViolated, "extension dimension bookkeeping broken");
    int src = ext.ell[k];
    int src_dim = source.charts[src].obstruction_dim;
    // σ_K sums the letter copies, lift_K fills the first copy
    QMat sg(src_dim, lay[k].dims), lf(lay[k].dims, src_dim);
    std::map<int, bool> first_copy;
    for (int b : S)
      for (int a : tau.tau[b]) {
        int off = lay[k].offset.at({b, a});
        int soff = source_offset(src, a);
        for (int t = 0; t < sd.dim[a]; ++t) sg.at(soff + t, off + t) = 1;
        if (!first_copy[a]) {
          for (int t = 0; t < sd.dim[a]; ++t) lf.at(off + t, soff + t) = 1;
          first_copy[a] = true;
        }
      }
    ext.sigma[k] = sg;
    ext.lift[k] = lf;
  }

  // charts: fibered over the source by the kernel of σ
  for (int k = 0; k < n; ++k) {
    int src = ext.ell[k];
    const KuranishiChart& base = source.charts[src];
    int kdim = lay[k].dims - base.obstruction_dim;
    if (kdim > 1)
      fail(Errc::SizeLimit, "tameable extension fibers of rank > 1 at " + labels[k]);
    KuranishiChart ch;
    ch.obstruction_dim = lay[k].dims;
    if (kdim == 0) {
      ch.q = base.q;
      ch.active = base.active;
      ch.tri = base.tri;
      ch.section.resize(base.space().n);
      for (int x = 0; x < base.space().n; ++x)
        ch.section[x] = ext.lift[k].apply(base.section[x]);
      ch.footprint_map = base.footprint_map;
      ch.obs_action.resize(base.group().n);
      for (int g = 0; g < base.group().n; ++g)
        ch.obs_action[g] =
            ext.lift[k].mul(base.obs_action[g]).mul(ext.sigma[k]);
      ext.f_base[k].resize(base.space().n);
      for (int x = 0; x < base.space().n; ++x) ext.f_base[k][x] = x;
      out.charts[k] = ch;
      continue;
    }
    // kernel basis vector (rank one): the duplicated letter has a one-dim
    // block; the kernel is spanned by (second copy − first copy)
    int dup_letter = -1;
    for (auto& [a, mm] : ext.mult[k])
      if (mm > 1) dup_letter = a;
    if (dup_letter < 0 || sd.dim[dup_letter] != 1)
      fail(Errc::SizeLimit, "unsupported kernel shape at " + labels[k]);
    QVec bvec(lay[k].dims, Q(0));
    {
      int seen = 0;
      for (int b : subsets[k])
        for (int a : tau.tau[b])
          if (a == dup_letter) {
            bvec[lay[k].offset.at({b, a})] = (seen == 0) ? Q(-1) : Q(1);
            if (++seen == 2) break;
          }
    }
    int F = 2 * fiber_radius + 1;
    int nb = base.space().n;
    ext.f_base[k].resize(static_cast<size_t>(nb) * F);
    auto fid = [F](int u, int t) { return u * F + t; };
    // metric: max of the base metric and the fiber offset distance
    SampledSpace bs = base.space();
    Q step = fiber_step;
    int R = fiber_radius;
    ch.q.domain = SampledSpace::from_fn(
        nb * F,
        [bs, F, step](int p, int q) {
          Q fiber = q_abs(step * Q((p % F) - (q % F)));
          return std::max(bs.dist(p / F, q / F), fiber);
        },
        bs.h);
    ch.q.group = base.group();
    ch.q.action.perm.assign(base.group().n, std::vector<int>(nb * F));
    // the duplicated letter acts on the fiber coordinate by its scalar
    for (int g = 0; g < base.group().n; ++g) {
      // scalar through: σ-compatible action on the kernel vector
      QVec img = ext.lift[k].mul(base.obs_action[g]).mul(ext.sigma[k]).apply(bvec);
      // general diagonal action on E'_K: per-block letter action
      // (recomputed below); the kernel scalar is read off the dup block
      Q scalar(0);
      for (size_t t0 = 0; t0 < bvec.size(); ++t0)
        if (bvec[t0] != 0) {
          scalar = img[t0] / bvec[t0];
          break;
        }
      int sgn = q_sign(scalar);
      if (q_abs(scalar) != 1)
        fail(Errc::SizeLimit, "kernel action is not ±1 at " + labels[k]);
      for (int u = 0; u < nb; ++u)
        for (int t = 0; t < F; ++t) {
          int tt = sgn > 0 ? t : (F - 1 - t);
          ch.q.action.perm[g][fid(u, t)] = fid(base.action().apply(g, u), tt);
        }
    }
    IdSet act;
    for (int u : base.active)
      for (int t = 0; t < F; ++t) act.push_back(fid(u, t));
    ch.active = set_sorted(act);
    // obstruction action: blockwise diagonal letter actions
    ch.obs_action.resize(base.group().n);
    for (int g = 0; g < base.group().n; ++g)
      ch.obs_action[g] = ext.lift[k].mul(base.obs_action[g]).mul(ext.sigma[k]);
    // the lift∘act∘σ composite is the correct diagonal action only on the
    // image of lift; extend over the kernel through the scalar action
    for (int g = 0; g < base.group().n; ++g) {
      QMat& m = ch.obs_action[g];
      QVec img = m.apply(bvec);
      // replace by: act(lift σ v) + scalar·(kernel part)
      // for rank-one kernels: m := m + scalar·b·(b^T normalized) − b·(σ-part)
      // handled by direct construction: columns of the true action
      QMat full(lay[k].dims, lay[k].dims);
      // basis: lift columns + bvec
      // act on lift columns via m; act on bvec via its scalar
      QVec bimg = img;  // placeholder; recompute scalar
      Q scalar(0);
      for (size_t t0 = 0; t0 < bvec.size(); ++t0)
        if (bvec[t0] != 0) {
          // the blockwise action multiplies both copies by the same letter
          // action, so the kernel vector scales by that letter scalar
          scalar = Q(1);
          break;
        }
      // letter scalar: the dup letter has dim one, read its action entry
      {
        int soff = source_offset(src, dup_letter);
        scalar = base.obs_action[g].at(soff, soff);
      }
      // full = m on im(lift) ⊕ scalar on span(b): build by solving the
      // coordinates (lift|b) is a basis of E'_K
      QMat basis(lay[k].dims, lay[k].dims);
      for (int c0 = 0; c0 < base.obstruction_dim; ++c0)
        for (int r0 = 0; r0 < lay[k].dims; ++r0)
          basis.at(r0, c0) = ext.lift[k].at(r0, c0);
      for (int r0 = 0; r0 < lay[k].dims; ++r0)
        basis.at(r0, base.obstruction_dim) = bvec[r0];
      // images of the basis columns
      QMat images(lay[k].dims, lay[k].dims);
      for (int c0 = 0; c0 < base.obstruction_dim; ++c0) {
        QVec col(base.obstruction_dim, Q(0));
        col[c0] = 1;
        QVec im = ext.lift[k].apply(base.obs_action[g].apply(col));
        for (int r0 = 0; r0 < lay[k].dims; ++r0) images.at(r0, c0) = im[r0];
      }
      for (int r0 = 0; r0 < lay[k].dims; ++r0)
        images.at(r0, base.obstruction_dim) = scalar * bvec[r0];
      // full := images · basis^{-1}: solve basis^T X^T = images^T columnwise
      QMat fullm(lay[k].dims, lay[k].dims);
      for (int r0 = 0; r0 < lay[k].dims; ++r0) {
        // solve basis · x = images column r? full·basis = images
        QVec rhs(lay[k].dims);
        for (int t0 = 0; t0 < lay[k].dims; ++t0) rhs[t0] = images.at(t0, r0);
        (void)rhs;
      }
      // direct: full·basis = images  =>  full = images·basis^{-1}
      // invert basis by solving basis·Y = I
      QMat binv(lay[k].dims, lay[k].dims);
      for (int c0 = 0; c0 < lay[k].dims; ++c0) {
        QVec e(lay[k].dims, Q(0));
        e[c0] = 1;
        auto sol = q_solve(basis, e);
        if (!sol) fail(Errc::HypothesisViolated, "extension basis singular");
        for (int r0 = 0; r0 < lay[k].dims; ++r0) binv.at(r0, c0) = (*sol)[r0];
      }
      m = images.mul(binv);
    }
    // section: lift(s(u)) + t·step·b
    ch.section.resize(nb * F);
    for (int u = 0; u < nb; ++u) {
      QVec base_lift = ext.lift[k].apply(base.section[u]);
      for (int t = 0; t < F; ++t) {
        QVec v = base_lift;
        Q off = step * Q(t - R);
        for (int r0 = 0; r0 < lay[k].dims; ++r0) v[r0] += off * bvec[r0];
        ch.section[fid(u, t)] = v;
      }
    }
    // zeros: e' = 0 needs t-offset cancelling the lift; since σ(e') = s(u),
    // zeros sit exactly over base zeros at the t with lift+tb = 0, i.e. the
    // base zero with t such that 0 + t·b = 0: t = R (offset 0)
    for (auto& [z, fx] : base.footprint_map) ch.footprint_map[fid(z, R)] = fx;
    for (int u = 0; u < nb; ++u) ext.f_base[k].resize(nb * F);
    for (int u = 0; u < nb; ++u)
      for (int t = 0; t < F; ++t) ext.f_base[k][fid(u, t)] = u;
    // triangulation: base edges × fiber squares, split along the graph
    // slice of the second-copy-zero when it crosses diagonally
    if (!base.tri.empty()) {
      if (base.tri.dim() != 1)
        fail(Errc::SizeLimit, "fibered extension triangulation needs 1-dim bases");
      // slice t-index over a base sample: t with s-second-copy zero:
      // block of the SECOND dup copy vanishes at offset = +s_α(u)/step...
      auto slice_t = [&](int u) -> std::optional<int> {
        // e'(u, t) second-copy component: read through bvec support
        // second copy has bvec entry +1
        int comp = -1;
        for (size_t t0 = 0; t0 < bvec.size(); ++t0)
          if (bvec[t0] == 1) comp = static_cast<int>(t0);
        QVec base_lift = ext.lift[k].apply(base.section[u]);
        // solve base_lift[comp] + off = 0 → off = -base_lift[comp]
        Q off = -base_lift[comp];
        Q tq = off / step + R;
        if (denominator(Q(tq)) != 1) return std::nullopt;
        long ti = tq.convert_to<long>();
        if (ti < 0 || ti >= F) return std::nullopt;
        return static_cast<int>(ti);
      };
      (void)slice_t;
      for (size_t e = 0; e < base.tri.simplices.size(); ++e) {
        int u1 = base.tri.simplices[e][0], u2 = base.tri.simplices[e][1];
        int o = base.tri.orient[e];
        auto s1 = slice_t(u1), s2 = slice_t(u2);
        for (int t = 0; t + 1 < F; ++t) {
          bool anti = s1 && s2 && *s1 == t + 1 && *s2 == t;
          if (!anti) {
            ch.tri.simplices.push_back({fid(u1, t), fid(u2, t), fid(u2, t + 1)});
            ch.tri.orient.push_back(o);
            ch.tri.simplices.push_back({fid(u1, t), fid(u2, t + 1), fid(u1, t + 1)});
            ch.tri.orient.push_back(o);
          } else {
            ch.tri.simplices.push_back({fid(u1, t + 1), fid(u1, t), fid(u2, t)});
            ch.tri.orient.push_back(o);
            ch.tri.simplices.push_back({fid(u1, t + 1), fid(u2, t), fid(u2, t + 1)});
            ch.tri.orient.push_back(o);
          }
        }
      }
    }
    out.charts[k] = ch;
  }

  // coordinate changes K ⊂ L
  for (int k = 0; k < n; ++k)
    for (int l : out.poset.up[k]) {
      if (l == k) continue;
      int sk = ext.ell[k], sl = ext.ell[l];
      CoordinateChange cc;
      int nl = out.charts[l].space().n;
      cc.rho.assign(nl, -1);
      // φ̂': block inclusion of K's blocks into L's blocks
      QMat ph(lay[l].dims, lay[k].dims);
      for (auto& [key, off_k] : lay[k].offset) {
        int off_l = lay[l].offset.at(key);
        int d = sd.dim[key.second];
        for (int t = 0; t < d; ++t) ph.at(off_l + t, off_k + t) = 1;
      }
      cc.phihat = ph;
      // group maps from the source change ℓK ≤ ℓL (identity when equal)
      if (sk == sl) {
        cc.rho_gamma.map.resize(source.charts[sl].group().n);
        cc.rho_gamma.split.resize(source.charts[sk].group().n);
        for (int g = 0; g < source.charts[sl].group().n; ++g) cc.rho_gamma.map[g] = g;
        for (int g = 0; g < source.charts[sk].group().n; ++g) cc.rho_gamma.split[g] = g;
      } else {
        cc.rho_gamma = source.change(sk, sl).rho_gamma;
      }
      // lifted set: samples of U'_L whose section value lies in im φ̂' and
      // whose base lies over the source lifted set; ρ' drops to U'_K
      IdSet src_lift = sk == sl ? source.charts[sl].active : source.lifted(sk, sl);
      auto src_rho = [&](int u) {
        return sk == sl ? u : source.change(sk, sl).rho[u];
      };
      int FK = out.charts[k].space().n / source.charts[sk].space().n;
      int FL = nl / source.charts[sl].space().n;
      for (int y = 0; y < nl; ++y) {
        int ub = ext.f_base[l][y];
        if (!set_contains(src_lift, ub)) continue;
        if (!q_in_col_space(ph, out.charts[l].section[y])) continue;
        // ρ': base drops through the source covering; the fiber coordinate
        // of the image is determined by matching the section values
        int xb = src_rho(ub);
        int found = -1;
        for (int t = 0; t < FK; ++t) {
          int cand = xb * FK + t;
          if (ext.lift[l].mul(ext.sigma[l]).rows == 0) {
          }
          // match: φ̂'(section_K(cand)) == section_L(y)
          if (cc.phihat.apply(out.charts[k].section[cand]) ==
              out.charts[l].section[y]) {
            found = cand;
            break;
          }
        }
        if (found < 0) continue;  // slice misses the grid: not lifted
        cc.lifted.push_back(y);
        cc.rho[y] = found;
        cc.domain.push_back(found);
      }
      cc.lifted = set_sorted(cc.lifted);
      cc.domain = set_sorted(cc.domain);
      // domain completion: eq:UKL' takes the full fiber over the source
      // change domain
      IdSet dom;
      IdSet src_dom = sk == sl ? source.charts[sk].active : source.dom(sk, sl);
      for (int x = 0; x < out.charts[k].space().n; ++x)
        if (set_contains(src_dom, ext.f_base[k][x])) dom.push_back(x);
      // ρ' must cover exactly the Γ-saturation of the matched samples; keep
      // the matched set as the domain (the grid realizes that part)
      cc.domain = set_intersect(set_sorted(dom), out.charts[k].active);
      // restrict: only samples actually hit by ρ' remain in the domain
      IdSet hit;
      for (int y : cc.lifted) hit.push_back(cc.rho[y]);
      cc.domain = set_sorted(hit);
      // lifted triangulation for equal-rank fibers
      if (!out.charts[l].tri.empty() && FK == FL) {
        for (size_t t = 0; t < out.charts[l].tri.simplices.size(); ++t) {
          bool in = true;
          for (int v : out.charts[l].tri.simplices[t])
            if (!set_contains(cc.lifted, v)) in = false;
          if (in) {
            cc.lifted_tri.simplices.push_back(out.charts[l].tri.simplices[t]);
            cc.lifted_tri.orient.push_back(out.charts[l].tri.orient[t]);
          }
        }
      } else if (!out.charts[l].tri.empty() && !source.charts[sk].tri.empty() &&
                 source.charts[sk].tri.dim() == 1 && FK == 1) {
        // basic K: the lifted set is a one-dimensional slice subcomplex
        // (edges of the fibered chart between adjacent lifted samples)
        for (int y1 : cc.lifted)
          for (int y2 : cc.lifted) {
            if (y1 >= y2) continue;
            int b1 = ext.f_base[l][y1], b2 = ext.f_base[l][y2];
            for (size_t e = 0; e < source.charts[sl].tri.simplices.size(); ++e) {
              const auto& be = source.charts[sl].tri.simplices[e];
              if ((be[0] == b1 && be[1] == b2)) {
                cc.lifted_tri.simplices.push_back({y1, y2});
                cc.lifted_tri.orient.push_back(source.charts[sl].tri.orient[e]);
              } else if (be[0] == b2 && be[1] == b1) {
                cc.lifted_tri.simplices.push_back({y2, y1});
                cc.lifted_tri.orient.push_back(source.charts[sl].tri.orient[e]);
              }
            }
          }
      }
      out.changes[{k, l}] = cc;
    }

  // invariants: σ_L ∘ φ̂'_KL = φ̂_{ℓKℓL} ∘ σ_K and footprints
  for (int k = 0; k < n; ++k)
    for (int l : out.poset.up[k]) {
      if (l == k) continue;
      int sk = ext.ell[k], sl = ext.ell[l];
      QMat left = ext.sigma[l].mul(out.change(k, l).phihat);
      QMat src_ph = sk == sl ? QMat::identity(source.charts[sk].obstruction_dim)
                             : source.change(sk, sl).phihat;
      QMat right = src_ph.mul(ext.sigma[k]);
      if (!(left == right))
        fail(Errc::HypothesisViolated,
             "σ∘φ̂' != φ̂∘σ at " + out.poset.labels[k] + "->" + out.poset.labels[l]);
    }
  for (int k = 0; k < n; ++k) {
    if (out.footprint(k) != source.footprint(ext.ell[k]))
      fail(Errc::HypothesisViolated, "F'_K != F_{ℓ(K)} at " + out.poset.labels[k]);
    // f_K restricts to a bijection of zero sets
    IdSet zk = out.charts[k].zero_set();
    IdSet zb;
    for (int x : zk) zb.push_back(ext.f_base[k][x]);
    if (set_sorted(zb) != source.charts[ext.ell[k]].zero_set() ||
        zb.size() != zk.size())
      fail(Errc::HypothesisViolated,
           "f_K is not a zero-set bijection at " + out.poset.labels[k]);
  }
  return ext;
}

}  // namespace kuratlas
