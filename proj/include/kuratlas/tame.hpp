#pragma once

#include <map>
#include <string>
#include <vector>

#include "kuratlas/atlas.hpp"
#include "kuratlas/cover.hpp"

namespace kuratlas {

/// Per-level record of the taming iteration: the domain sets after each
/// completed level, plus the footprint-shrinking margin.
struct ShrinkingPlan {
  std::vector<std::map<std::pair<int, int>, IdSet>> levels;
  Q footprint_margin = Q(0);
};

namespace detail {

/// The taming iteration indexes joins by sets of minimal elements; this
/// requires m(J∨K) = m(J) ∪ m(K), which holds for the subset-shaped posets
/// of standard and tameable atlases.
inline void require_join_compatible(const IndexPoset& p) {
  for (int j = 0; j < p.n(); ++j)
    for (int k = j; k < p.n(); ++k) {
      auto l = p.lub2(j, k);
      if (!l) continue;
      if (p.m_of(*l) != set_union(p.m_of(j), p.m_of(k)))
        fail(Errc::HypothesisViolated,
             "poset joins are not generated by minimal elements at " +
                 p.labels[j] + "," + p.labels[k] + " (atlas not tameable)");
    }
}

}  // namespace detail

/// Constructive taming of a filtered weak atlas (standard or tameable flag):
/// footprint shrinking, margin-h level-0 domains, then per-level Step A
/// (the open-set lemma) and Step B (subbundle carving).
inline Atlas tame_shrink(const Atlas& atlas, ShrinkingPlan* plan_out = nullptr) {
  detail::require_join_compatible(atlas.poset);
  const IndexPoset& poset = atlas.poset;
  int n = poset.n();
  bool input_tame = check_tame(atlas).ok();

  // footprint shrinking
  Cover fcover;
  fcover.space = atlas.x_space;
  fcover.poset = poset;
  fcover.sets.resize(n);
  for (int i = 0; i < n; ++i) fcover.sets[i] = atlas.footprint(i);
  Cover fshrunk = shrink_cover(fcover);

  // level 0 domains: margin-h neighbourhoods of the shrunk zero sets with
  // exact zero traces, saturated under the group actions
  std::map<std::pair<int, int>, IdSet> D;
  for (int i = 0; i < n; ++i) {
    const auto& ch = atlas.charts[i];
    IdSet zprime;
    for (int x : ch.zero_set())
      if (set_contains(fshrunk.sets[i], ch.footprint_map.at(x))) zprime.push_back(x);
    zprime = set_sorted(zprime);
    if (zprime.empty() && !fshrunk.sets[i].empty())
      fail(Errc::ResolutionTooCoarse,
           "no zero samples over the shrunk footprint of " + poset.labels[i]);
    IdSet u0 = ch.closure(zprime);
    u0 = set_intersect(ch.action().saturate(u0), ch.active);
    IdSet other_zeros = set_minus(ch.zero_set(), zprime);
    u0 = set_minus(u0, other_zeros);
    D[{i, i}] = u0;
  }
  for (int i = 0; i < n; ++i)
    for (int j : poset.up[i]) {
      if (j == i) continue;
      IdSet dij;
      const auto& cc = atlas.change(i, j);
      for (int y : atlas.lifted(i, j)) {
        if (set_contains(D[{j, j}], y) && set_contains(D[{i, i}], cc.rho[y]) &&
            set_contains(cc.domain, cc.rho[y]))
          dij.push_back(cc.rho[y]);
      }
      D[{i, j}] = set_sorted(dij);
    }

  ShrinkingPlan plan;
  plan.levels.push_back(D);

  int M = 0;
  for (int i = 0; i < n; ++i) M = std::max(M, poset.level(i));

  // helper: image of D[(i,j)] under phi (lifted samples over the set)
  auto image_of = [&](int i, int j, const IdSet& sub) {
    return atlas.phi_image(i, j, sub);
  };
  auto subbundle_slice = [&](int i, int j, const IdSet& within) {
    IdSet s;
    for (int y : within)
      if (atlas.in_subbundle(i, j, y)) s.push_back(y);
    return s;
  };

  for (int k = 1; k <= M; ++k) {
    // ---- Step A: indices of level k
    for (int i = 0; i < n; ++i) {
      if (poset.level(i) != k) continue;
      // minimal elements that extend I inside the poset
      IdSet mi = poset.m_of(i);
      IdSet extenders;
      for (int j : poset.up[i])
        extenders = set_union(extenders, set_minus(poset.m_of(j), mi));
      if (extenders.empty()) continue;
      size_t N = extenders.size();
      if (N > 16) fail(Errc::SizeLimit, "taming mask enumeration too large");
      auto join_of_mask = [&](unsigned mask) -> std::optional<int> {
        IdSet gen = mi;
        for (size_t t = 0; t < N; ++t)
          if (mask & (1u << t)) gen.push_back(extenders[t]);
        auto st = poset.lub_status(set_sorted(gen));
        if (st.kind != IndexPoset::LubStatus::Value) return std::nullopt;
        // the join must be generated exactly by these minimal elements
        if (poset.m_of(st.value) != set_sorted(gen)) return std::nullopt;
        return st.value;
      };
      IdSet uprime = D[{i, i}];
      // Z: zero part plus the images of the lower-level transition domains
      IdSet z = set_intersect(atlas.charts[i].zero_set(), uprime);
      for (int h : poset.down[i]) {
        if (h == i) continue;
        z = set_union(z, set_intersect(image_of(h, i, D[{h, i}]), uprime));
      }
      std::vector<IdSet> z_i(N);
      for (size_t t = 0; t < N; ++t) {
        auto kk = join_of_mask(1u << t);
        z_i[t] = kk ? set_intersect(D[{i, *kk}], z) : IdSet{};
      }
      std::map<unsigned, IdSet> W;
      for (unsigned mask = 1; mask < (1u << N); ++mask) {
        auto kk = join_of_mask(mask);
        if (!kk) {
          W[mask] = {};
          continue;
        }
        IdSet w = uprime;
        for (int j : poset.up[i]) {
          if (!poset.leq(j, *kk)) continue;
          // φ_IJ^{-1}(D[(J,K)]) ∩ D[(I,J)]   (J = I gives D[(I,K)] ∩ U')
          IdSet pre;
          if (j == i) {
            pre = D[{i, *kk}];
          } else {
            const auto& cc = atlas.change(i, j);
            IdSet djk = D[{j, *kk}];
            for (int y : atlas.lifted(i, j))
              if (set_contains(djk, y)) pre.push_back(cc.rho[y]);
            pre = set_intersect(set_sorted(pre), D[{i, j}]);
          }
          w = set_intersect(w, pre);
        }
        W[mask] = w;
      }
      std::map<unsigned, IdSet> us;
      try {
        us = set_reduction(uprime, z, z_i, W);
      } catch (const AtlasError& e) {
        fail(Errc::ResolutionTooCoarse, "taming level " + std::to_string(k) +
                                            " at " + poset.labels[i] + ": " + e.what());
      }
      for (unsigned mask = 1; mask < (1u << N); ++mask) {
        auto kk = join_of_mask(mask);
        if (!kk) continue;
        // The greedy choice is a function of memberships in Γ_I-invariant
        // sets, so the output is invariant; keep a cheap guard.
        IdSet u = us[mask];
        if (!atlas.charts[i].action().invariant(u))
          fail(Errc::ResolutionTooCoarse,
               "taming produced a non-invariant domain at " + poset.labels[i]);
        D[{i, *kk}] = u;
      }
    }
    // ---- Step B: carve higher-level pairs
    for (int j = 0; j < n; ++j) {
      if (poset.level(j) <= k) continue;
      for (int kk : poset.up[j]) {
        IdSet cur = D[{j, kk}];
        for (int i : poset.down[j]) {
          if (poset.level(i) != k || i == j) continue;
          IdSet slice = subbundle_slice(i, j, cur);
          IdSet img = image_of(i, j, D[{i, j}]);
          cur = set_minus(cur, set_minus(slice, img));
        }
        D[{j, kk}] = cur;
      }
    }
    plan.levels.push_back(D);
  }

  // assemble the output atlas
  Atlas out = atlas;
  for (int i = 0; i < n; ++i) out.charts[i].active = D[{i, i}];
  for (auto& [key, cc] : out.changes) {
    auto [i, j] = key;
    IdSet dom = set_intersect(D[{i, j}], D[{i, i}]);
    const auto& orig = atlas.change(i, j);
    IdSet lift;
    for (int y : atlas.lifted(i, j))
      if (set_contains(dom, orig.rho[y]) && set_contains(D[{j, j}], y))
        lift.push_back(y);
    lift = set_sorted(lift);
    cc.domain = dom;
    cc.lifted = lift;
    for (int y = 0; y < static_cast<int>(cc.rho.size()); ++y)
      if (!set_contains(lift, y)) cc.rho[y] = -1;
    cc.open_set.reset();
    // trim the lifted triangulation to the new lifted set
    Triangulation t;
    for (size_t s = 0; s < cc.lifted_tri.simplices.size(); ++s) {
      bool in = true;
      for (int v : cc.lifted_tri.simplices[s])
        if (!set_contains(lift, v)) in = false;
      if (in) {
        t.simplices.push_back(cc.lifted_tri.simplices[s]);
        t.orient.push_back(cc.lifted_tri.orient[s]);
      }
    }
    cc.lifted_tri = t;
  }
  out.shrunk_from_tame = input_tame || atlas.shrunk_from_tame;

  // post-conditions: shrinking laws, nerve, tameness
  for (int i = 0; i < n; ++i) {
    IdSet ztrace;
    for (int x : out.charts[i].zero_set())
      if (set_contains(fshrunk.sets[i], out.charts[i].footprint_map.at(x)))
        ztrace.push_back(x);
    if (out.charts[i].zero_set() != set_sorted(ztrace))
      fail(Errc::ResolutionTooCoarse,
           "taming lost the zero-set condition at " + poset.labels[i]);
    if (!atlas.footprint(i).empty() && out.footprint(i).empty())
      fail(Errc::ResolutionTooCoarse,
           "taming emptied the footprint of " + poset.labels[i]);
  }
  // U_IJ' = U_I' ∩ φ^{-1}(U_J')
  for (auto& [key, cc] : out.changes) {
    auto [i, j] = key;
    IdSet expect;
    const auto& orig = atlas.change(i, j);
    for (int y : atlas.lifted(i, j))
      if (set_contains(out.charts[j].active, y) &&
          set_contains(out.charts[i].active, orig.rho[y]))
        expect.push_back(orig.rho[y]);
    expect = set_sorted(expect);
    if (cc.domain != expect)
      fail(Errc::ResolutionTooCoarse,
           "shrinking law U_IJ' = U_I' ∩ φ^{-1}(U_J') fails at " +
               poset.labels[i] + "->" + poset.labels[j]);
  }
  CheckReport tame_rep = check_tame(out);
  if (!tame_rep.ok())
    fail(Errc::ResolutionTooCoarse, "taming output not tame: " + tame_rep.first_failure());

  plan.footprint_margin = atlas.x_space.h;
  if (plan_out) *plan_out = plan;
  return out;
}

/// Second shrinking of a tame atlas, with the quotient metric and the
/// goodness verdict of the preshrunk result.
struct PreshrinkResult {
  Atlas atlas;
  Realization realization;
  QuotientMetric metric;
};

inline PreshrinkResult preshrink(const Atlas& tame_atlas) {
  CheckReport t = check_tame(tame_atlas);
  if (!t.ok())
    fail(Errc::HypothesisViolated, "preshrink requires a tame atlas: " + t.first_failure());
  PreshrinkResult res;
  res.atlas = tame_shrink(tame_atlas);
  res.atlas.shrunk_from_tame = true;
  res.realization = realize(res.atlas);
  res.metric = quotient_metric(res.atlas, res.realization);
  CheckReport g = check_good(res.atlas, res.realization);
  if (!g.ok())
    fail(Errc::ResolutionTooCoarse, "preshrunk atlas not good: " + g.first_failure());
  return res;
}

}  // namespace kuratlas
