#pragma once

#include <map>
#include <optional>
#include <vector>

#include "kuratlas/rational.hpp"
#include "kuratlas/report.hpp"
#include "kuratlas/util.hpp"

namespace kuratlas {

/// Abstract triangulation: ordered top-dimensional simplices over sample ids
/// with a declared orientation sign each. No embedding is required; all PL
/// computations are barycentric.
struct Triangulation {
  std::vector<std::vector<int>> simplices;
  std::vector<int> orient;  // ±1 per simplex

  int dim() const {
    return simplices.empty() ? -1 : static_cast<int>(simplices[0].size()) - 1;
  }

  bool empty() const { return simplices.empty(); }

  /// simplices whose vertex set lies inside `s`.
  std::vector<int> simplices_in(const IdSet& s) const {
    std::vector<int> out;
    for (size_t t = 0; t < simplices.size(); ++t) {
      bool in = true;
      for (int v : simplices[t])
        if (!set_contains(s, v)) in = false;
      if (in) out.push_back(static_cast<int>(t));
    }
    return out;
  }
};

/// A PL zero: barycentric point inside (or on the boundary of) a simplex.
/// `support`/`weights` are the canonical form: vertices with positive weight,
/// sorted by vertex id. Sample-points of a space with no triangulation are
/// encoded as single-vertex zeros.
struct PlPoint {
  IdSet support;
  std::vector<Q> weights;  // matching support order, positive, sum 1

  bool is_sample() const { return support.size() == 1; }

  bool operator==(const PlPoint& o) const {
    return support == o.support && weights == o.weights;
  }
  bool operator<(const PlPoint& o) const {
    if (support != o.support) return support < o.support;
    for (size_t i = 0; i < weights.size(); ++i)
      if (weights[i] != o.weights[i]) return weights[i] < o.weights[i];
    return false;
  }

  static PlPoint sample(int v) { return {{v}, {Q(1)}}; }

  /// Membership in a sample set: every supporting vertex must belong.
  bool inside(const IdSet& s) const {
    for (int v : support)
      if (!set_contains(s, v)) return false;
    return true;
  }

  /// Push forward along a sample map (must be injective on the support).
  PlPoint mapped(const std::vector<int>& f) const {
    std::vector<std::pair<int, Q>> img;
    for (size_t i = 0; i < support.size(); ++i) {
      int w = f[support[i]];
      if (w < 0) fail(Errc::DomainMismatch, "PL point leaves the map domain");
      img.push_back({w, weights[i]});
    }
    std::sort(img.begin(), img.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    PlPoint out;
    for (auto& [w, q] : img) {
      if (!out.support.empty() && out.support.back() == w)
        fail(Errc::DomainMismatch, "sample map collapses a zero's support");
      out.support.push_back(w);
      out.weights.push_back(q);
    }
    return out;
  }
};

struct SimplexSolve {
  QVec bary;       // barycentric coordinates, length d+1
  Q det;           // determinant of the affine differential
  bool in_closed;  // all coordinates >= 0
};

/// Solve the affine interpolant of vertex values = 0 on one simplex.
/// vals[k] ∈ Q^m with m == d (square case). nullopt when the extended system
/// is singular (solution line parallels the simplex or degenerate values).
inline std::optional<SimplexSolve> pl_solve_simplex(const std::vector<QVec>& vals) {
  size_t d1 = vals.size();       // d+1 vertices
  size_t m = vals[0].size();     // target dimension
  if (m + 1 != d1) fail(Errc::DegenerateSimplex, "non-square PL solve");
  QMat A(m + 1, d1);
  QVec b(m + 1, Q(0));
  for (size_t k = 0; k < d1; ++k) {
    for (size_t i = 0; i < m; ++i) A.at(i, k) = vals[k][i];
    A.at(m, k) = 1;
  }
  b[m] = 1;
  // differential determinant
  QMat D(m, m);
  for (size_t k = 1; k < d1; ++k)
    for (size_t i = 0; i < m; ++i) D.at(i, k - 1) = vals[k][i] - vals[0][i];
  Q det = q_det(D);
  if (det == 0) return std::nullopt;  // non-transverse interpolant
  auto sol = q_solve(A, b);
  if (!sol) return std::nullopt;
  bool in_closed = true;
  for (const auto& l : *sol)
    if (l < 0) in_closed = false;
  return SimplexSolve{*sol, det, in_closed};
}

/// All zeros of the PL section over the simplices whose vertices lie in the
/// active set. Zeros are deduplicated by canonical support form and owned by
/// the lexicographically smallest simplex. A boundary zero with a singular
/// neighbour interpolant reports NonTransverseZero.
struct PlZero {
  PlPoint point;
  int owner_simplex;
  int sign;  // local degree (det * orientation for interior zeros)
};

namespace pl_detail {

/// Local degree of a zero sitting on a face or vertex: solve f = ε for a
/// deterministic generic small target over all simplices that contain the
/// zero, and sum the oriented determinant signs of the simplices hit in the
/// interior. Retries with smaller ε until no solution lands on a face.
inline int local_degree(const Triangulation& tri, const std::vector<QVec>& section,
                        const std::vector<int>& adjacent, const PlPoint& at) {
  size_t m = section[at.support[0]].size();
  for (int attempt = 0; attempt < 12; ++attempt) {
    Q tau = Q(1, 1 << 10);
    for (int t = 0; t < attempt; ++t) tau /= 64;
    QVec eps(m);
    Q comp = tau;
    for (size_t i = 0; i < m; ++i) {
      eps[i] = comp;
      comp /= 3 + static_cast<int>(i) + attempt;
    }
    int degree = 0;
    bool boundary_hit = false;
    for (int t : adjacent) {
      const auto& sx = tri.simplices[t];
      QMat A(m + 1, sx.size());
      QVec b(m + 1, Q(0));
      for (size_t k = 0; k < sx.size(); ++k) {
        for (size_t i = 0; i < m; ++i) A.at(i, k) = section[sx[k]][i];
        A.at(m, k) = 1;
      }
      for (size_t i = 0; i < m; ++i) b[i] = eps[i];
      b[m] = 1;
      QMat D(m, m);
      for (size_t k = 1; k < sx.size(); ++k)
        for (size_t i = 0; i < m; ++i)
          D.at(i, k - 1) = section[sx[k]][i] - section[sx[0]][i];
      Q det = q_det(D);
      if (det == 0) {
        auto sol = q_solve(A, b);
        if (sol) {
          boundary_hit = true;  // degenerate: retry with another target
          break;
        }
        continue;
      }
      auto sol = q_solve(A, b);
      if (!sol) continue;
      bool interior = true, face = false;
      for (const auto& l : *sol) {
        if (l < 0) interior = false;
        if (l == 0) face = true;
      }
      if (interior && face) {
        boundary_hit = true;
        break;
      }
      if (interior) degree += q_sign(det) * tri.orient[t];
    }
    if (!boundary_hit) return degree;
  }
  fail(Errc::DegenerateSimplex, "local degree did not stabilize");
}

}  // namespace pl_detail

inline std::vector<PlZero> pl_zeros(const Triangulation& tri,
                                    const std::vector<QVec>& section,
                                    const IdSet& active) {
  std::map<PlPoint, PlZero> found;
  for (int t : tri.simplices_in(active)) {
    const auto& sx = tri.simplices[t];
    std::vector<QVec> vals;
    vals.reserve(sx.size());
    for (int v : sx) vals.push_back(section[v]);
    auto sol = pl_solve_simplex(vals);
    if (!sol) {
      // Singular interpolant: only an error if the simplex actually carries
      // a zero of the interpolant; a cheap certificate is a vertex zero.
      for (const auto& val : vals)
        if (qvec_is_zero(val))
          fail(Errc::NonTransverseZero,
               "singular interpolant with a vertex zero at simplex " +
                   std::to_string(t));
      continue;
    }
    if (!sol->in_closed) continue;
    PlPoint p;
    for (size_t k = 0; k < sx.size(); ++k)
      if (sol->bary[k] > 0) {
        p.support.push_back(sx[k]);
        p.weights.push_back(sol->bary[k]);
      }
    // canonical order
    std::vector<size_t> idx(p.support.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return p.support[a] < p.support[b]; });
    PlPoint canon;
    for (size_t i : idx) {
      canon.support.push_back(p.support[i]);
      canon.weights.push_back(p.weights[i]);
    }
    int sign = q_sign(sol->det) * tri.orient[t];
    auto it = found.find(canon);
    if (it == found.end() || t < it->second.owner_simplex)
      found[canon] = PlZero{canon, t, sign};
  }
  std::vector<PlZero> out;
  for (auto& [p, z] : found) {
    // boundary zeros: replace the owner's determinant sign by the honest
    // local degree over all incident simplices
    const auto& owner = tri.simplices[z.owner_simplex];
    if (p.support.size() < owner.size()) {
      std::vector<int> adjacent;
      for (int t : tri.simplices_in(active)) {
        bool inc = true;
        for (int v : p.support)
          if (std::find(tri.simplices[t].begin(), tri.simplices[t].end(), v) ==
              tri.simplices[t].end())
            inc = false;
        if (inc) adjacent.push_back(t);
      }
      int deg = pl_detail::local_degree(tri, section, adjacent, p);
      if (deg == 0) continue;  // cancelling cone pair, no honest zero
      z.sign = deg;
    }
    out.push_back(z);
  }
  return out;
}

/// Evaluate a PL section at a barycentric point.
inline QVec pl_eval(const std::vector<QVec>& section, const PlPoint& p) {
  QVec v = qvec_zero(section.empty() ? 0 : section[0].size());
  for (size_t i = 0; i < p.support.size(); ++i)
    v = v + p.weights[i] * section[p.support[i]];
  return v;
}

}  // namespace kuratlas
