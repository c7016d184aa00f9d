#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kuratlas/rational.hpp"
#include "kuratlas/report.hpp"
#include "kuratlas/util.hpp"

namespace kuratlas {

/// Compact metric space represented by a finite rational point sample with a
/// resolution parameter h (the closure radius for cl_h).
///
/// Metric backends: an explicit symmetric table, or point coordinates with an
/// L1/Linf base distance, optionally averaged over a finite group of
/// coordinate permutations (group averaging keeps distances rational and
/// makes them invariant).
struct SampledSpace {
  int n = 0;
  Q h = Q(1);

  // backend: explicit table, coordinates, or a closed-form distance function
  std::vector<Q> table;  // row-major n*n when nonempty
  std::vector<QVec> coords;
  bool use_l1 = true;                       // else Linf
  std::vector<std::vector<int>> avg_perms;  // group elements as sample perms
  std::vector<QMat> avg_mats;               // matching coordinate maps
  std::function<Q(int, int)> fn;

  static SampledSpace from_table(int n, std::vector<Q> tab, Q h) {
    SampledSpace s;
    s.n = n;
    s.h = h;
    s.table = std::move(tab);
    return s;
  }

  static SampledSpace from_coords(std::vector<QVec> pts, Q h, bool l1 = true) {
    SampledSpace s;
    s.n = static_cast<int>(pts.size());
    s.h = h;
    s.coords = std::move(pts);
    s.use_l1 = l1;
    return s;
  }

  static SampledSpace from_fn(int n, std::function<Q(int, int)> f, Q h) {
    SampledSpace s;
    s.n = n;
    s.h = h;
    s.fn = std::move(f);
    return s;
  }

  Q base_dist(const QVec& a, const QVec& b) const {
    if (use_l1) {
      Q d(0);
      for (size_t k = 0; k < a.size(); ++k) d += q_abs(a[k] - b[k]);
      return d;
    }
    return qvec_max_norm(a - b);
  }

  Q dist(int i, int j) const {
    if (!table.empty()) return table[static_cast<size_t>(i) * n + j];
    if (fn) return fn(i, j);
    if (avg_mats.empty()) return base_dist(coords[i], coords[j]);
    // group-averaged distance: (1/|G|) sum_g d(g.x, g.y)
    Q acc(0);
    for (const auto& m : avg_mats)
      acc += base_dist(m.apply(coords[i]), m.apply(coords[j]));
    return acc / Q(static_cast<int>(avg_mats.size()));
  }

  Q dist_to_set(int i, const IdSet& s) const {
    // +inf convention: nullopt
    Q best(0);
    bool first = true;
    for (int j : s) {
      Q d = dist(i, j);
      if (first || d < best) {
        best = d;
        first = false;
      }
      if (best == 0) break;
    }
    if (first) fail(Errc::MalformedPoset, "dist_to_set of empty set");
    return best;
  }

  IdSet all() const {
    IdSet r(n);
    for (int i = 0; i < n; ++i) r[i] = i;
    return r;
  }

  /// cl_h(S) within the carrier: { x : d(x, S) <= h }.
  IdSet closure(const IdSet& s) const { return closure_r(s, h); }

  IdSet closure_r(const IdSet& s, const Q& r) const {
    if (s.empty()) return {};
    IdSet out;
    for (int i = 0; i < n; ++i)
      if (dist_to_set(i, s) <= r) out.push_back(i);
    return out;
  }

  /// Open ball around a set: { x : d(x, S) < r }.
  IdSet ball(const IdSet& s, const Q& r) const {
    if (s.empty()) return {};
    IdSet out;
    for (int i = 0; i < n; ++i)
      if (dist_to_set(i, s) < r) out.push_back(i);
    return out;
  }

  /// min distance between two nonempty sets.
  Q set_dist(const IdSet& a, const IdSet& b) const {
    Q best(0);
    bool first = true;
    for (int i : a) {
      Q d = dist_to_set(i, b);
      if (first || d < best) {
        best = d;
        first = false;
      }
      if (best == 0) break;
    }
    if (first) fail(Errc::MalformedPoset, "set_dist of empty set");
    return best;
  }

  /// Margin of S against the complement of P (both subsets of the carrier):
  /// the finite-model rendering of S precompact-in-P. nullopt means +inf
  /// (complement empty).
  std::optional<Q> margin(const IdSet& s, const IdSet& p) const {
    IdSet comp = set_minus(all(), p);
    if (comp.empty() || s.empty()) return std::nullopt;
    return set_dist(s, comp);
  }

  CheckReport check_metric() const {
    CheckReport rep;
    bool ok = h > 0;
    rep.add("space.h-positive", ok, "resolution h must be > 0");
    if (!table.empty()) {
      bool sym = true, diag = true, tri = true;
      std::string wit;
      for (int i = 0; i < n && sym && diag; ++i) {
        if (dist(i, i) != 0) {
          diag = false;
          wit = "d(x,x) != 0 at " + std::to_string(i);
        }
        for (int j = 0; j < i; ++j)
          if (dist(i, j) != dist(j, i)) {
            sym = false;
            wit = "asymmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")";
          }
      }
      for (int i = 0; i < n && tri; ++i)
        for (int j = 0; j < n && tri; ++j)
          for (int k = 0; k < n; ++k)
            if (dist(i, j) > dist(i, k) + dist(k, j)) {
              tri = false;
              wit = "triangle inequality fails at (" + std::to_string(i) + "," +
                    std::to_string(j) + "," + std::to_string(k) + ")";
              break;
            }
      rep.add("space.metric-axioms", sym && diag && tri, wit);
    }
    return rep;
  }
};

}  // namespace kuratlas
