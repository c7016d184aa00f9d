#pragma once

#include <map>
#include <string>
#include <vector>

#include "kuratlas/poset.hpp"
#include "kuratlas/report.hpp"
#include "kuratlas/space.hpp"
#include "kuratlas/util.hpp"

namespace kuratlas {

/// Open cover of a sampled space indexed by a (minimally generated) poset.
struct Cover {
  SampledSpace space;
  IndexPoset poset;
  std::vector<IdSet> sets;  // per poset element

  CheckReport check_valid() const {
    CheckReport rep;
    IdSet u;
    for (const auto& s : sets) u = set_union(u, s);
    rep.add("cover.covers", u == space.all(), "union of sets misses a point");
    return rep;
  }

  /// P_I ∩ P_J ⊂ P_{I∨J}, with P undefined-join meaning empty intersection.
  CheckReport check_intersection_law() const {
    CheckReport rep;
    bool ok = true;
    std::string wit;
    for (int i = 0; i < poset.n() && ok; ++i)
      for (int j = i + 1; j < poset.n() && ok; ++j) {
        IdSet inter = set_intersect(sets[i], sets[j]);
        if (inter.empty()) continue;
        auto l = poset.lub2(i, j);
        if (!l) {
          ok = false;
          wit = "P_" + poset.labels[i] + " ∩ P_" + poset.labels[j] +
                " nonempty but no join exists";
        } else if (!set_subset(inter, sets[*l])) {
          ok = false;
          wit = "P_" + poset.labels[i] + " ∩ P_" + poset.labels[j] +
                " not inside P_" + poset.labels[*l];
        }
      }
    rep.add("cover.intersection-law", ok, wit);
    return rep;
  }
};

/// Shrinking of an open cover: margin-h contraction with the ball-witness
/// guarantee that every nonempty intersection survives.
inline Cover shrink_cover(const Cover& cover) {
  const SampledSpace& X = cover.space;
  int n = cover.poset.n();
  // delta: min over nonempty F_I of max_x min_{i in I, F_i proper} d(x, X\F_i)
  auto inner_margin = [&](int x, const IdSet& members) {
    bool first = true;
    Q best(0);
    for (int i : members) {
      IdSet comp = set_minus(X.all(), cover.sets[i]);
      if (comp.empty()) continue;  // whole-space member, nothing to shrink against
      Q d = X.dist_to_set(x, comp);
      if (first || d < best) {
        best = d;
        first = false;
      }
    }
    if (first) return Q(-1);  // sentinel: unconstrained
    return best;
  };
  Q delta(0);
  bool delta_set = false;
  int tight_index = -1;
  for (int iI = 0; iI < n; ++iI) {
    // footprint of element iI is the stored set; members = containing basics
    IdSet members;
    for (int h : cover.poset.m_of(iI)) members.push_back(h);
    if (cover.sets[iI].empty()) continue;
    Q best(0);
    bool any = false;
    for (int x : cover.sets[iI]) {
      Q m = inner_margin(x, members);
      if (m < 0) { any = true; best = Q(0); continue; }  // unconstrained point
      if (!any || m > best) {
        best = m;
        any = true;
      }
    }
    Q di = best;
    // unconstrained-only footprints impose no bound
    bool constrained = false;
    for (int i : members)
      if (set_minus(X.all(), cover.sets[i]).size()) constrained = true;
    if (!constrained) continue;
    if (!delta_set || di < delta) {
      delta = di;
      delta_set = true;
      tight_index = iI;
    }
  }
  if (delta_set && delta < X.h)
    fail(Errc::ResolutionTooCoarse,
         "no margin-h shrinking preserves nonemptiness of F_" +
             cover.poset.labels[tight_index]);

  Cover out = cover;
  for (int i = 0; i < n; ++i) {
    if (!cover.poset.is_minimal(i)) continue;
    IdSet comp = set_minus(X.all(), cover.sets[i]);
    if (comp.empty()) continue;  // nothing to shrink against
    IdSet shrunk;
    for (int x : cover.sets[i])
      if (X.dist_to_set(x, comp) >= X.h) shrunk.push_back(x);
    out.sets[i] = shrunk;
  }
  // non-minimal sets follow as intersections of their minimal members
  for (int i = 0; i < n; ++i) {
    if (cover.poset.is_minimal(i)) continue;
    IdSet inter;
    bool first = true;
    for (int hId : cover.poset.m_of(i)) {
      inter = first ? out.sets[hId] : set_intersect(inter, out.sets[hId]);
      first = false;
    }
    out.sets[i] = set_intersect(inter, cover.sets[i]);
  }
  // coverage and nerve
  IdSet u;
  for (int i = 0; i < n; ++i)
    if (cover.poset.is_minimal(i)) u = set_union(u, out.sets[i]);
  if (u != X.all()) {
    IdSet missing = set_minus(X.all(), u);
    fail(Errc::ResolutionTooCoarse,
         "shrunk cover misses sample " + std::to_string(missing[0]));
  }
  for (int i = 0; i < n; ++i)
    if (!cover.sets[i].empty() && out.sets[i].empty())
      fail(Errc::ResolutionTooCoarse,
           "shrinking empties F_" + cover.poset.labels[i]);
  return out;
}

struct NestedFamilies {
  // families[t] for t = 0..2*depth, families[2*depth] = input sets.
  // P^k = families[2k-1], Q^k = families[2k].
  std::vector<std::vector<IdSet>> families;
  Q min_shrink_margin = Q(0);

  const std::vector<IdSet>& P(int k) const { return families[2 * k - 1]; }
  const std::vector<IdSet>& Qf(int k) const { return families[2 * k]; }
};

namespace detail {

/// One shrink+enlarge round of the Lemma-on-cover-reductions proof:
/// contract every set by the largest dyadic margin that keeps coverage, then
/// restore the intersection law by the inductive union over collections with
/// the given join.
inline std::vector<IdSet> cover_round(const SampledSpace& X, const IndexPoset& poset,
                                      const std::vector<IdSet>& P, Q* used_radius) {
  int n = poset.n();
  // shrink radius schedule: radii > h keep cl_h-closures inside the next
  // family up; smaller fallbacks may lose that property, which the final
  // reduction checks catch.
  std::vector<Q> schedule = {2 * X.h,     Q(3) * X.h / 2, Q(5) * X.h / 4,
                             Q(9) * X.h / 8, X.h,         X.h / 2,
                             X.h / 4,     Q(0)};
  std::vector<IdSet> Qp(n);
  Q radius(0);
  for (const Q& r : schedule) {
    for (int i = 0; i < n; ++i) {
      IdSet comp = set_minus(X.all(), P[i]);
      if (comp.empty() || r == 0) {
        Qp[i] = P[i];
        continue;
      }
      IdSet s;
      for (int x : P[i])
        if (X.dist_to_set(x, comp) >= r) s.push_back(x);
      Qp[i] = s;
    }
    IdSet u;
    for (int i = 0; i < n; ++i) u = set_union(u, Qp[i]);
    if (u == X.all()) {
      radius = r;
      break;
    }
  }
  if (used_radius) *used_radius = radius;

  // enlargement in increasing level order
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return poset.level(a) < poset.level(b); });
  std::vector<IdSet> Qe = Qp;
  for (int i : order) {
    // collections S of proper lower elements with join i
    IdSet strictly_below = set_minus(poset.down[i], IdSet{i});
    size_t k = strictly_below.size();
    if (k > 16) fail(Errc::SizeLimit, "cover enlargement enumeration too large");
    IdSet acc = Qp[i];
    for (size_t mask = 1; mask < (size_t(1) << k); ++mask) {
      IdSet S;
      for (size_t t = 0; t < k; ++t)
        if (mask & (size_t(1) << t)) S.push_back(strictly_below[t]);
      LubResult l = poset.lub(S);
      if (!std::holds_alternative<int>(l) || std::get<int>(l) != i) continue;
      IdSet inter = Qe[S[0]];
      for (size_t t = 1; t < S.size() && !inter.empty(); ++t)
        inter = set_intersect(inter, Qe[S[t]]);
      acc = set_union(acc, inter);
    }
    Qe[i] = acc;
  }
  // law check (exact)
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      IdSet inter = set_intersect(Qe[i], Qe[j]);
      if (inter.empty()) continue;
      auto l = poset.lub2(i, j);
      if (!l || !set_subset(inter, Qe[*l]))
        fail(Errc::ResolutionTooCoarse,
             "intersection law lost in enlargement at " + poset.labels[i] + "," +
                 poset.labels[j]);
    }
  return Qe;
}

}  // namespace detail

/// Interleaved families Q^0 ⋐ P^1 ⋐ Q^1 ⋐ … ⋐ Q^M := P, each satisfying the
/// intersection law.
inline NestedFamilies nested_families(const Cover& cover, int depth) {
  CheckReport law = cover.check_intersection_law();
  if (!law.ok()) fail(Errc::HypothesisViolated, law.first_failure());
  NestedFamilies out;
  out.families.assign(2 * depth + 1, {});
  out.families[2 * depth] = cover.sets;
  bool margin_set = false;
  for (int t = 2 * depth - 1; t >= 0; --t) {
    Q used(0);
    out.families[t] =
        detail::cover_round(cover.space, cover.poset, out.families[t + 1], &used);
    if (!margin_set || used < out.min_shrink_margin) {
      out.min_shrink_margin = used;
      margin_set = true;
    }
  }
  return out;
}

/// Cover reduction data: Z_I ⋐ P_I with comparable-closure contacts and full
/// coverage.
struct CoverReduction {
  IndexPoset poset;
  std::vector<IdSet> zsets;
  Q margin = Q(0);

  CheckReport check(const SampledSpace& X, const std::vector<IdSet>& psets) const {
    CheckReport rep;
    // (i) margin
    bool mi = true;
    std::string wit;
    for (int i = 0; i < poset.n(); ++i) {
      if (zsets[i].empty()) continue;
      auto m = X.margin(zsets[i], psets[i]);
      if (m && *m < margin) {
        mi = false;
        wit = "Z_" + poset.labels[i] + " closer than margin to complement of P";
      }
    }
    rep.add("cover_reduction.margin", mi, wit);
    // (ii) comparability of cl_h contacts
    bool ci = true;
    for (int i = 0; i < poset.n() && ci; ++i)
      for (int j = i + 1; j < poset.n() && ci; ++j) {
        if (zsets[i].empty() || zsets[j].empty()) continue;
        if (poset.leq(i, j) || poset.leq(j, i)) continue;
        IdSet ci_ = X.closure(zsets[i]);
        IdSet cj_ = X.closure(zsets[j]);
        if (!set_intersect(ci_, cj_).empty()) {
          ci = false;
          wit = "cl_h Z_" + poset.labels[i] + " meets cl_h Z_" + poset.labels[j] +
                " though incomparable";
        }
      }
    rep.add("cover_reduction.comparable", ci, wit);
    // (iii) coverage
    IdSet u;
    for (const auto& z : zsets) u = set_union(u, z);
    rep.add("cover_reduction.covers", u == X.all(), "Z sets do not cover");
    return rep;
  }
};

/// Constructive cover reduction: Z_I := P_I^{|I|} ∖ ⋃_{|J|>|I|} cl_h(Q_J^{|I|}).
inline CoverReduction cover_reduction(const Cover& cover) {
  const SampledSpace& X = cover.space;
  const IndexPoset& poset = cover.poset;
  int n = poset.n();
  int M = 0;
  for (int i = 0; i < n; ++i) M = std::max(M, poset.level(i));
  NestedFamilies fam = nested_families(cover, M);

  CoverReduction red;
  red.poset = poset;
  red.zsets.assign(n, {});
  for (int i = 0; i < n; ++i) {
    int k = poset.level(i);
    IdSet z = fam.P(k)[i];
    for (int j = 0; j < n; ++j) {
      if (poset.level(j) <= k) continue;
      if (z.empty()) break;
      IdSet clq = X.closure(fam.Qf(k)[j]);
      z = set_minus(z, clq);
    }
    red.zsets[i] = z;
  }
  // exact margin over the construction
  bool first = true;
  Q margin(0);
  for (int i = 0; i < n; ++i) {
    if (red.zsets[i].empty()) continue;
    auto m = X.margin(red.zsets[i], cover.sets[i]);
    if (!m) continue;
    if (first || *m < margin) {
      margin = *m;
      first = false;
    }
  }
  red.margin = first ? X.h : margin;

  CheckReport rep = red.check(X, cover.sets);
  if (!rep.ok()) fail(Errc::ResolutionTooCoarse, rep.first_failure());
  return red;
}

/// Lemma-on-open-sets construction (set category, no metric): given a closed
/// Z ⊂ U′ with relatively open Z_i and opens W_K with W_K ∩ Z = Z_K, produce
/// U_K ⊂ W_K with U_K ∩ Z = Z_K and U_J ∩ U_K = U_{J∪K}.
///
/// Keys are bitmasks over {0..N-1}; W must be provided for every nonempty
/// mask. The choice freedom is resolved by the greedy largest admissible
/// index set per point (ascending index order), which makes the output
/// deterministic.
inline std::map<unsigned, IdSet> set_reduction(const IdSet& uprime, const IdSet& z,
                                               const std::vector<IdSet>& z_i,
                                               const std::map<unsigned, IdSet>& W) {
  size_t N = z_i.size();
  if (N > 16) fail(Errc::SizeLimit, "set_reduction with more than 16 indices");
  auto z_of_mask = [&](unsigned K) {
    IdSet r = z;
    for (size_t t = 0; t < N; ++t)
      if (K & (1u << t)) r = set_intersect(r, z_i[t]);
    return r;
  };
  for (unsigned K = 1; K < (1u << N); ++K) {
    auto it = W.find(K);
    if (it == W.end()) fail(Errc::HypothesisViolated, "missing W_K for a mask");
    IdSet zk = z_of_mask(K);
    if (set_intersect(it->second, z) != zk)
      fail(Errc::HypothesisViolated,
           "W_K ∩ Z != Z_K at mask " + std::to_string(K));
  }
  // per-point admissible index set
  std::map<int, unsigned> A;
  for (int x : uprime) {
    unsigned a = 0;
    if (set_contains(z, x)) {
      for (size_t t = 0; t < N; ++t)
        if (set_contains(z_i[t], x)) a |= (1u << t);
    } else {
      for (size_t t = 0; t < N; ++t) {
        unsigned cand = a | (1u << t);
        // all nonempty submasks of cand that contain t must have x in W
        bool ok = true;
        unsigned rest = cand & ~(1u << t);
        unsigned sub = rest;
        while (true) {
          unsigned K = sub | (1u << t);
          if (!set_contains(W.at(K), x)) {
            ok = false;
            break;
          }
          if (sub == 0) break;
          sub = (sub - 1) & rest;
        }
        if (ok) a = cand;
      }
    }
    A[x] = a;
  }
  std::map<unsigned, IdSet> out;
  for (unsigned K = 1; K < (1u << N); ++K) {
    IdSet uk;
    for (int x : uprime)
      if ((A[x] & K) == K) uk.push_back(x);
    out[K] = uk;
  }
  // exact post-conditions
  for (unsigned K = 1; K < (1u << N); ++K) {
    if (!set_subset(out[K], W.at(K)))
      fail(Errc::HypothesisViolated, "output escaped W_K");
    if (set_intersect(out[K], z) != z_of_mask(K))
      fail(Errc::HypothesisViolated, "output zero-trace wrong");
    for (unsigned J = 1; J < (1u << N); ++J)
      if (set_intersect(out[J], out[K]) != out[J | K])
        fail(Errc::HypothesisViolated, "intersection law violated in output");
  }
  return out;
}

}  // namespace kuratlas
