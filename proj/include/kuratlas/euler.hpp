#pragma once

#include <map>
#include <vector>

#include "kuratlas/orbifold.hpp"

namespace kuratlas {

/// Orbibundle section data over a strict orbifold atlas: per-chart frame
/// values of one section with the matching fiber group representations.
/// Transition charts stack the pulled-back factor components; the lift along
/// the partition of unity reproduces them per the Euler-class recipe.
struct OrbibundleSection {
  int rank = 0;
  std::vector<std::vector<QVec>> values;      // per chart, per sample
  std::vector<std::vector<QMat>> fiber_action;  // per chart, per group element
};

inline CheckReport check_orbibundle(const Atlas& atlas, const OrbibundleSection& b) {
  CheckReport rep;
  bool equi = true, invert = true;
  std::string we, wi;
  for (int i = 0; i < atlas.n() && equi; ++i) {
    const auto& ch = atlas.charts[i];
    if (!atlas.poset.is_minimal(i)) continue;  // basic trivializations
    for (int g = 0; g < ch.group().n && equi; ++g) {
      if (q_sign(q_det(b.fiber_action[i][g])) == 0) {
        invert = false;
        wi = "singular fiber action at chart " + atlas.poset.labels[i];
      }
      for (int x : ch.active) {
        if (b.values[i][ch.action().apply(g, x)] !=
            b.fiber_action[i][g].apply(b.values[i][x])) {
          equi = false;
          we = "section not equivariant at chart " + atlas.poset.labels[i];
          break;
        }
      }
    }
  }
  rep.add("orbibundle.fiber-actions-invertible", invert, wi);
  rep.add("orbibundle.section-equivariant", equi, we);
  return rep;
}

/// Partition of unity from a cover reduction of the footprints:
/// ρ_i(x) = d(x, ⋃_{J: i ∉ m(J)} cl_h Z_J), β_i = ρ_i / Σ ρ_j.
struct Partition {
  std::vector<std::vector<Q>> beta;  // per minimal chart, per X sample
};

inline Partition partition_of_unity(const Atlas& atlas,
                                    const std::vector<IdSet>& zx) {
  const SampledSpace& X = atlas.x_space;
  IdSet minimals = atlas.poset.minimal_elements();
  std::vector<std::vector<Q>> rho(atlas.n());
  for (int i : minimals) {
    IdSet avoid;
    for (int j = 0; j < atlas.n(); ++j)
      if (!set_contains(atlas.poset.m_of(j), i))
        avoid = set_union(avoid, X.closure(zx[j]));
    rho[i].assign(X.n, Q(0));
    for (int x = 0; x < X.n; ++x)
      rho[i][x] = avoid.empty() ? Q(1) : X.dist_to_set(x, avoid);
  }
  Partition out;
  out.beta.resize(atlas.n());
  for (int x = 0; x < X.n; ++x) {
    Q total(0);
    for (int i : minimals) total += rho[i][x];
    if (total == 0)
      fail(Errc::PartitionDegenerate,
           "Σρ vanishes at X sample " + std::to_string(x));
    for (int i : minimals) {
      if (out.beta[i].empty()) out.beta[i].assign(X.n, Q(0));
      out.beta[i][x] = rho[i][x] / total;
    }
  }
  return out;
}

struct EulerResult {
  Q count;
  LocalZeroSet zeros;
  WeightedCount weights;
  Reduction v;
};

/// Euler class of an orbibundle through the Kuranishi chart construction:
/// reduce the footprint cover, lift the section with the partition of unity,
/// extract the chartwise perturbed zero sets (asserted to coincide with the
/// unscaled section zeros), and take the weighted count.
inline EulerResult euler_method2(const Atlas& atlas, const Realization& r,
                                 const OrbibundleSection& bundle,
                                 const std::vector<IdSet>* zx_given = nullptr) {
  CheckReport brep = check_orbibundle(atlas, bundle);
  if (!brep.ok()) fail(Errc::TrivializationInvalid, brep.first_failure());

  // footprint cover reduction
  std::vector<IdSet> zx;
  if (zx_given) {
    zx = *zx_given;
  } else {
    Cover fcover;
    fcover.space = atlas.x_space;
    fcover.poset = atlas.poset;
    fcover.sets.resize(atlas.n());
    for (int i = 0; i < atlas.n(); ++i) fcover.sets[i] = atlas.footprint(i);
    zx = cover_reduction(fcover).zsets;
  }
  Partition part = partition_of_unity(atlas, zx);

  // chart-level reduction pieces V_I = ψ^{-1}(Z_I)
  EulerResult res;
  res.v.V.assign(atlas.n(), {});
  for (int i = 0; i < atlas.n(); ++i) {
    IdSet v;
    for (int x : atlas.charts[i].active)
      if (set_contains(zx[i], atlas.charts[i].footprint_map.at(x))) v.push_back(x);
    res.v.V[i] = set_sorted(v);
  }
  CheckReport vrep = check_reduction(atlas, r, res.v);
  if (!vrep.ok()) fail(Errc::ResolutionTooCoarse, vrep.first_failure());

  // chartwise zero extraction of the lifted sections
  IdSet minimals = atlas.poset.minimal_elements();
  for (int i = 0; i < atlas.n(); ++i) {
    if (res.v.V[i].empty()) continue;
    const auto& ch = atlas.charts[i];
    if (atlas.poset.is_minimal(i)) {
      // scaled section β_i · v_i and the unscaled v_i must have the same
      // zeros with equal signs on the reduction piece
      std::vector<QVec> scaled(ch.space().n, qvec_zero(bundle.rank));
      for (int x = 0; x < ch.space().n; ++x)
        scaled[x] = part.beta[i][ch.footprint_map.at(x)] * bundle.values[i][x];
      auto z_scaled = pl_zeros(ch.tri, scaled, res.v.V[i]);
      auto z_plain = pl_zeros(ch.tri, bundle.values[i], res.v.V[i]);
      if (z_scaled.size() != z_plain.size())
        fail(Errc::FormulaMismatch,
             "lifted zero set differs from the section zero set on chart " +
                 atlas.poset.labels[i]);
      for (size_t t = 0; t < z_scaled.size(); ++t) {
        if (!(z_scaled[t].point == z_plain[t].point) ||
            z_scaled[t].sign != z_plain[t].sign)
          fail(Errc::FormulaMismatch,
               "lifted zero mismatch on chart " + atlas.poset.labels[i]);
        res.zeros.zeros.push_back({i, z_scaled[t].point, z_scaled[t].sign});
      }
    } else {
      // transition chart: the lifted perturbation stacks the pulled-back
      // factor components; in the piecewise-linear model its zeros must be
      // confined to the basic pieces, so the stacked interpolant may not
      // vanish here.
      IdSet mins = atlas.poset.m_of(i);
      int stack = bundle.rank * static_cast<int>(mins.size());
      std::vector<QVec> vals(ch.space().n, qvec_zero(stack));
      for (int x : res.v.V[i]) {
        QVec v;
        int xid = ch.footprint_map.at(x);
        for (size_t t = 0; t < mins.size(); ++t) {
          int f = mins[t];
          const auto& cc = atlas.change(f, i);
          QVec comp = bundle.values[f][cc.rho[x]];
          for (const auto& e : comp) v.push_back(part.beta[f][xid] * e);
        }
        vals[x] = v;
      }
      for (int t : ch.tri.simplices_in(res.v.V[i])) {
        std::vector<QVec> vv;
        for (int vtx : ch.tri.simplices[t]) vv.push_back(vals[vtx]);
        if (detail::simplex_may_vanish(vv))
          fail(Errc::FormulaMismatch,
               "section zero meets a transition region; refine the reduction");
      }
    }
  }

  WnbGroupoid g = zero_groupoid(atlas, res.v, res.zeros);
  WnbGroupoid gh = hausdorff_quotient(atlas, res.v, g);
  res.weights = weighting(atlas, gh);
  res.count = vfc_count(res.weights);
  return res;
}

/// Method-1 data: a trivialised complement, T ⊕ T⊥ ≅ X × Q^m, presented by
/// per-sample tangent and complement columns over a triangulated base.
struct Method1Data {
  int rank = 0;        // rank of T
  int ambient = 0;     // m
  Triangulation x_tri;
  std::vector<QMat> tangent_cols;  // per sample, m × rank
  std::vector<QMat> normal_cols;   // per sample, m × (m − rank)
  std::vector<QVec> section;       // per sample, frame values of ν^X (rank)
  int fiber_steps = 1;             // fiber grid: t in {−s..s}
  Q fiber_scale = Q(4);
  // frame-based cross-check; disable for twisted (unorientable) frames,
  // where only the fibered count is meaningful
  bool check_base = true;
};

/// Single-chart Euler class: zeros of the fibered section ι̂ + ι_T∘ν^X∘π on
/// the product of the base triangulation with the fiber grid, cross-checked
/// against the signed base count of ν^X.
inline Q euler_method1(const Method1Data& d) {
  int m = d.ambient;
  int corank = m - d.rank;
  // validate the trivialization
  for (size_t x = 0; x < d.tangent_cols.size(); ++x) {
    QMat full = d.tangent_cols[x].hcat(d.normal_cols[x]);
    if (q_rank(full) != static_cast<size_t>(m))
      fail(Errc::TrivializationInvalid,
           "T ⊕ T⊥ columns singular at sample " + std::to_string(x));
  }
  // fiber grid indexing: sample id = base * F + fiber index
  int steps = d.fiber_steps;
  std::vector<IdSet> fiber_pts;  // per fiber coordinate tuple
  int F = 1;
  for (int t = 0; t < corank; ++t) F *= (2 * steps + 1);
  auto fiber_of = [&](int f) {
    QVec v(corank);
    for (int t = corank - 1; t >= 0; --t) {
      v[t] = d.fiber_scale * Q(f % (2 * steps + 1) - steps, steps);
      f /= (2 * steps + 1);
    }
    return v;
  };
  int nb = static_cast<int>(d.tangent_cols.size());
  auto fid = [&](int base, int f) { return base * F + f; };
  // values of the fibered section
  std::vector<QVec> vals(static_cast<size_t>(nb) * F, qvec_zero(m));
  for (int b = 0; b < nb; ++b) {
    QVec tang = d.tangent_cols[b].apply(d.section[b]);
    for (int f = 0; f < F; ++f) {
      QVec nv = d.normal_cols[b].apply(fiber_of(f));
      vals[fid(b, f)] = tang + nv;
    }
  }
  // product triangulation: base simplex × fiber box path (staircase over
  // the grid's coordinate segments). For corank 1 this is the prism split.
  if (corank != 1)
    fail(Errc::SizeLimit, "method-1 fiber grids implemented for corank 1");
  Triangulation tri;
  IdSet all;
  for (int id = 0; id < nb * F; ++id) all.push_back(id);
  for (size_t s = 0; s < d.x_tri.simplices.size(); ++s) {
    const auto& base = d.x_tri.simplices[s];
    for (int seg = 0; seg < 2 * steps; ++seg) {
      // prism between fiber levels seg, seg+1 over an ordered d-simplex:
      // staircase tetrahedra (v0..vk at lo, vk..vd at hi)
      size_t dd = base.size();
      for (size_t k = 0; k < dd; ++k) {
        std::vector<int> simplex;
        for (size_t t0 = 0; t0 <= k; ++t0) simplex.push_back(fid(base[t0], seg));
        for (size_t t1 = k; t1 < dd; ++t1) simplex.push_back(fid(base[t1], seg + 1));
        tri.simplices.push_back(simplex);
        tri.orient.push_back(d.x_tri.orient[s] * ((k % 2) ? -1 : 1));
      }
    }
  }
  Q total(0);
  for (const PlZero& z : pl_zeros(tri, vals, all)) total += z.sign;
  if (d.check_base) {
    // oracle: signed base count of ν^X in its frames
    Q oracle(0);
    IdSet ab;
    for (int b = 0; b < nb; ++b) ab.push_back(b);
    for (const PlZero& z : pl_zeros(d.x_tri, d.section, ab)) oracle += z.sign;
    if (total != oracle)
      fail(Errc::FormulaMismatch,
           "fibered count " + q_to_string(total) +
               " differs from the signed base count " + q_to_string(oracle));
  }
  return total;
}

}  // namespace kuratlas
