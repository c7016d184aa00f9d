#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kuratlas/reduce.hpp"

namespace kuratlas {

/// Reduced perturbation: per-index sample maps into the obstruction spaces,
/// supported on the enlarged domains V^{|I|}_I. Not required to be
/// equivariant.
struct Perturbation {
  std::vector<std::vector<QVec>> nu;  // per chart, per sample (full domain)
  uint64_t seed = 0;

  const QVec& at(int chart, int sample) const { return nu[chart][sample]; }
};

struct ZeroPoint {
  int chart;
  PlPoint point;
  int sign;
};

struct LocalZeroSet {
  std::vector<ZeroPoint> zeros;
};

namespace detail {

/// Closed-simplex zero existence for a possibly singular interpolant (used
/// by the transversality clause: a singular simplex that can carry a zero is
/// rejected conservatively).
inline bool simplex_may_vanish(const std::vector<QVec>& vals) {
  size_t d1 = vals.size(), m = vals[0].size();
  QMat A(m + 1, d1);
  QVec b(m + 1, Q(0));
  for (size_t k = 0; k < d1; ++k) {
    for (size_t i = 0; i < m; ++i) A.at(i, k) = vals[k][i];
    A.at(m, k) = 1;
  }
  b[m] = 1;
  auto sol = q_solve(A, b);
  return sol.has_value();
}

/// T̃V^k piece of a change at level k: lifted samples over V^k_I inside V^k_J.
inline IdSet tilde_vk(const Atlas& atlas, const Reduction& v, const ConstantPack& pack,
                      int i, int j, int k, int quarters = 0) {
  return core_piece(atlas, v, pack, i, j, k, quarters);
}

}  // namespace detail

/// s_I + ν_I as a per-sample section.
inline std::vector<QVec> perturbed_section(const Atlas& atlas, const Perturbation& nu,
                                           int i) {
  std::vector<QVec> s = atlas.charts[i].section;
  for (size_t x = 0; x < s.size(); ++x)
    if (!nu.nu[i][x].empty()) s[x] = s[x] + nu.nu[i][x];
  return s;
}

/// The five adaptedness clauses, verified exactly on samples over the V^k
/// families.
inline CheckReport check_adapted(const Atlas& atlas, const Realization& r,
                                 const Reduction& v, const Reduction& c,
                                 const ConstantPack& pack, const Perturbation& nu,
                                 int level_cap = 1 << 20) {
  CheckReport rep;
  int n = atlas.n();
  std::set<int> c_classes;
  for (int i = 0; i < n; ++i)
    for (int x : c.V[i]) c_classes.insert(r.class_of(i, x));

  bool a_ok = true, b_ok = true, c_ok = true, d_ok = true, e_ok = true;
  std::string wa, wb, wc, wd, we;
  for (int k = 1; k <= pack.M; ++k) {
    // a) compatibility on the level-k enlargements
    for (auto& [key, cc] : atlas.changes) {
      auto [h, i] = key;
      if (atlas.poset.level(i) > k || atlas.poset.level(i) > level_cap) continue;
      for (int y : detail::tilde_vk(atlas, v, pack, h, i, k)) {
        QVec lhs = nu.at(i, y);
        QVec rhs = cc.phihat.apply(nu.at(h, cc.rho[y]));
        if (lhs.empty()) lhs = qvec_zero(atlas.charts[i].obstruction_dim);
        if (rhs.empty()) rhs = qvec_zero(atlas.charts[i].obstruction_dim);
        if (lhs != rhs && a_ok) {
          a_ok = false;
          wa = "ν_" + atlas.poset.labels[i] + " != φ̂∘ν_" + atlas.poset.labels[h] +
               "∘ρ at lifted sample " + std::to_string(y);
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      if (atlas.poset.level(i) > k || atlas.poset.level(i) > level_cap) continue;
      const auto& ch = atlas.charts[i];
      IdSet vk = vk_set(atlas, v, pack, i, k);
      if (vk.empty()) continue;
      // b) transversality of the perturbed interpolant
      if (!ch.tri.empty()) {
        std::vector<QVec> s = perturbed_section(atlas, nu, i);
        for (int t : ch.tri.simplices_in(vk)) {
          std::vector<QVec> vals;
          for (int vtx : ch.tri.simplices[t]) vals.push_back(s[vtx]);
          auto sol = pl_solve_simplex(vals);
          if (!sol && detail::simplex_may_vanish(vals) && b_ok) {
            b_ok = false;
            wb = "singular interpolant with a possible zero at chart " +
                 atlas.poset.labels[i] + ", simplex " + std::to_string(t);
          }
        }
      }
      // c) strong admissibility with radius η_k
      for (int h : atlas.poset.down[i]) {
        if (h == i) continue;
        IdSet corek = core_piece(atlas, v, pack, h, i, k);
        if (corek.empty()) continue;
        const QMat& ph = atlas.change(h, i).phihat;
        for (int y : ch.ball(corek, pack.eta(k))) {
          QVec val = nu.at(i, y);
          if (val.empty()) continue;
          if (!q_in_col_space(ph, val) && c_ok) {
            c_ok = false;
            wc = "ν_" + atlas.poset.labels[i] +
                 " leaves φ̂(E_H) on the η-neighbourhood of the core, sample " +
                 std::to_string(y);
          }
        }
      }
      // d) zero containment in π^{-1}(π(C))
      if (!ch.tri.empty()) {
        std::vector<QVec> s = perturbed_section(atlas, nu, i);
        IdSet allowed;
        for (int x : ch.active)
          if (c_classes.count(r.class_of(i, x))) allowed.push_back(x);
        try {
          for (const PlZero& z : pl_zeros(ch.tri, s, vk))
            if (!z.point.inside(allowed) && d_ok) {
              d_ok = false;
              wd = "perturbed zero escapes π^{-1}(π(C)) at chart " +
                   atlas.poset.labels[i];
            }
        } catch (const AtlasError& e) {
          if (d_ok) {
            d_ok = false;
            wd = std::string("zero extraction failed: ") + e.what();
          }
        }
      } else if (ch.obstruction_dim == 0) {
        IdSet allowed;
        for (int x : ch.active)
          if (c_classes.count(r.class_of(i, x))) allowed.push_back(x);
        for (int x : vk)
          if (!set_contains(allowed, x) && d_ok) {
            d_ok = false;
            wd = "zero sample escapes π^{-1}(π(C)) at chart " + atlas.poset.labels[i];
          }
      }
      // e) smallness
      if (pack.sigma) {
        for (int x : vk) {
          if (nu.at(i, x).empty()) continue;
          if (qvec_max_norm(nu.at(i, x)) >= *pack.sigma && e_ok) {
            e_ok = false;
            we = "‖ν_" + atlas.poset.labels[i] + "‖ >= σ at sample " +
                 std::to_string(x);
          }
        }
      }
    }
  }
  rep.add("adapted.a-compatible", a_ok, wa);
  rep.add("adapted.b-transverse", b_ok, wb);
  rep.add("adapted.c-strongly-admissible", c_ok, wc);
  rep.add("adapted.d-zeros-contained", d_ok, wd);
  rep.add("adapted.e-small", e_ok, we);
  return rep;
}

/// Level-iterated construction: pull back over the enlarged cores with the
/// fiber-constant rule and a rational cutoff, then rejection-sample a seeded
/// transversality term in the complement until the clauses verify.
inline Perturbation build_perturbation(const Atlas& atlas, const Realization& r,
                                       const Reduction& v, const Reduction& c,
                                       const ConstantPack& pack, uint64_t seed,
                                       int budget = 1000) {
  int n = atlas.n();
  Perturbation nu;
  nu.seed = seed;
  nu.nu.resize(n);
  for (int i = 0; i < n; ++i)
    nu.nu[i].assign(atlas.charts[i].space().n, QVec{});
  Rng rng(seed);

  // amplitude for random draws: below σ when finite, else the δ scale
  Q amp = pack.sigma ? *pack.sigma / 2 : pack.delta;
  int denom = 64;

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return atlas.poset.level(a) < atlas.poset.level(b);
  });

  for (int j : order) {
    const auto& ch = atlas.charts[j];
    int lvl = atlas.poset.level(j);
    IdSet domain = vk_set(atlas, v, pack, j, lvl);
    if (domain.empty()) continue;
    int m = ch.obstruction_dim;
    if (m == 0) continue;  // zero-rank charts carry the zero perturbation

    // core pullback with the fiber-constant rule: for each sample in the
    // cutoff window, copy the pulled-back value at the nearest core sample
    // of the maximal participating lower index.
    std::vector<QVec> base(ch.space().n, QVec{});
    IdSet frozen;  // samples whose value is prescribed by compatibility
    {
      // maximal lower indices first
      IdSet lowers = set_minus(atlas.poset.down[j], IdSet{j});
      std::sort(lowers.begin(), lowers.end(), [&](int a, int b) {
        return atlas.poset.level(a) > atlas.poset.level(b);
      });
      IdSet window_all;
      for (int h : lowers) {
        IdSet core_h = detail::tilde_vk(atlas, v, pack, h, j, lvl - 1, 2);
        if (core_h.empty()) continue;
        const auto& cc = atlas.change(h, j);
        Q eta_a = pack.eta(lvl - 1, 2);
        Q eta_b = pack.eta(lvl - 1, 3);
        IdSet window = ch.ball(core_h, eta_a);
        for (int y : set_intersect(window, domain)) {
          if (!base[y].empty()) continue;  // a larger H already decided
          // nearest core sample (deterministic: min distance then min id)
          int best = core_h[0];
          Q bd = ch.space().dist(y, core_h[0]);
          for (int z : core_h) {
            Q d = ch.space().dist(y, z);
            if (d < bd) {
              bd = d;
              best = z;
            }
          }
          QVec pulled = cc.phihat.apply(nu.at(h, cc.rho[best]).empty()
                                            ? qvec_zero(atlas.charts[h].obstruction_dim)
                                            : nu.at(h, cc.rho[best]));
          if (set_contains(core_h, y)) {
            // on the core itself compatibility fixes the value exactly
            pulled = cc.phihat.apply(nu.at(h, cc.rho[y]).empty()
                                         ? qvec_zero(atlas.charts[h].obstruction_dim)
                                         : nu.at(h, cc.rho[y]));
            base[y] = pulled;
            frozen.push_back(y);
          } else {
            // cutoff between η_{k+1/2} and η_{k+3/4}
            Q beta = bd <= eta_b ? Q(1)
                                 : std::max(Q(0), Q((eta_a - bd) / (eta_a - eta_b)));
            base[y] = beta * pulled;
            frozen.push_back(y);
          }
        }
        window_all = set_union(window_all, window);
      }
      frozen = set_sorted(frozen);
    }

    // rejection loop over the free region
    IdSet free_region = set_minus(domain, frozen);
    bool accepted = false;
    std::string last_fail;
    for (int attempt = 0; attempt <= budget; ++attempt) {
      for (int y : ch.space().all()) nu.nu[j][y] = QVec{};
      for (int y : frozen) nu.nu[j][y] = base[y];
      for (int y : free_region) {
        QVec val(m, Q(0));
        if (attempt > 0) {
          for (int t = 0; t < m; ++t) {
            int64_t numer = rng.range(-denom, denom);
            val[t] = amp * Q(numer, denom * 2);
          }
        }
        nu.nu[j][y] = val;
      }
      // clause check restricted to the levels decided so far
      CheckReport rep = check_adapted(atlas, r, v, c, pack, nu, lvl);
      bool ok = true;
      for (auto& it : rep.items)
        if (!it.pass) {
          ok = false;
          last_fail = it.check + ": " + it.witness;
        }
      if (ok) {
        accepted = true;
        break;
      }
    }
    if (!accepted)
      fail(Errc::RejectionBudgetExceeded,
           "perturbation for " + atlas.poset.labels[j] + " rejected " +
               std::to_string(budget) + " times; last failure: " + last_fail);
  }
  CheckReport final_rep = check_adapted(atlas, r, v, c, pack, nu);
  if (!final_rep.ok())
    fail(Errc::RejectionBudgetExceeded,
         "adaptedness lost after assembly: " + final_rep.first_failure());
  return nu;
}

/// Oriented local zero sets of the perturbed sections over the base V sets.
inline LocalZeroSet zero_set(const Atlas& atlas, const Reduction& v,
                             const Perturbation& nu) {
  LocalZeroSet out;
  for (int i = 0; i < atlas.n(); ++i) {
    const auto& ch = atlas.charts[i];
    if (v.V[i].empty()) continue;
    if (ch.obstruction_dim == 0 || ch.tri.empty()) {
      // zero-rank charts: the zero set is the whole reduction piece
      if (ch.obstruction_dim == 0) {
        for (int x : v.V[i]) out.zeros.push_back({i, PlPoint::sample(x), 1});
        continue;
      }
      fail(Errc::DegenerateSimplex,
           "chart " + atlas.poset.labels[i] + " has obstruction rank but no triangulation");
    }
    std::vector<QVec> s = perturbed_section(atlas, nu, i);
    for (const PlZero& z : pl_zeros(ch.tri, s, v.V[i])) {
      int sign = z.sign * ch.obs_sign;
      out.zeros.push_back({i, z.point, sign});
    }
  }
  return out;
}

/// Transport invariant: a lifted zero maps to a zero with equal sign, and the
/// kernel group permutes lifted zeros.
inline CheckReport check_zero_transport(const Atlas& atlas, const Reduction& v,
                                        const ConstantPack& pack,
                                        const LocalZeroSet& zeros) {
  CheckReport rep;
  bool ok = true, inv = true;
  std::string wit, winv;
  std::map<int, std::vector<const ZeroPoint*>> per_chart;
  for (auto& z : zeros.zeros) per_chart[z.chart].push_back(&z);
  for (auto& [key, cc] : atlas.changes) {
    auto [i, j] = key;
    IdSet tv = detail::tilde_vk(atlas, v, pack, i, j, 0);
    // on the base V sets: T̃V_IJ = lifted ∩ V_J ∩ ρ^{-1}(V_I)
    IdSet tvb;
    for (int y : atlas.lifted(i, j))
      if (set_contains(v.V[j], y) && set_contains(v.V[i], cc.rho[y]))
        tvb.push_back(y);
    tvb = set_sorted(tvb);
    for (const ZeroPoint* z : per_chart[j]) {
      if (!z->point.inside(tvb)) continue;
      PlPoint img = z->point.mapped(cc.rho);
      bool found = false;
      for (const ZeroPoint* w : per_chart[i])
        if (w->point == img) {
          found = true;
          if (w->sign != z->sign && ok) {
            ok = false;
            wit = "sign flip across " + atlas.poset.labels[i] + "->" +
                  atlas.poset.labels[j];
          }
        }
      if (!found && ok) {
        ok = false;
        wit = "lifted zero has no image zero across " + atlas.poset.labels[i] +
              "->" + atlas.poset.labels[j];
      }
    }
    // kernel invariance of lifted zeros
    IdSet ker = cc.rho_gamma.kernel();
    for (const ZeroPoint* z : per_chart[j]) {
      if (!z->point.inside(tvb)) continue;
      for (int g : ker) {
        PlPoint moved = z->point.mapped(atlas.charts[j].action().perm[g]);
        bool found = false;
        for (const ZeroPoint* w : per_chart[j])
          if (w->point == moved) found = true;
        if (!found && inv) {
          inv = false;
          winv = "kernel action does not permute lifted zeros at " +
                 atlas.poset.labels[j];
        }
      }
    }
  }
  rep.add("zeros.transport", ok, wit);
  rep.add("zeros.kernel-invariance", inv, winv);
  return rep;
}

}  // namespace kuratlas
