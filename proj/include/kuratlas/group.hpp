#pragma once

#include <map>
#include <string>
#include <vector>

#include "kuratlas/report.hpp"
#include "kuratlas/util.hpp"

namespace kuratlas {

/// Finite group given by a multiplication table. Element 0 is the identity.
struct FiniteGroup {
  int n = 1;
  std::vector<int> mul;  // n*n, mul[a*n+b] = a·b

  int op(int a, int b) const { return mul[a * n + b]; }

  int inv(int a) const {
    for (int b = 0; b < n; ++b)
      if (op(a, b) == 0) return b;
    fail(Errc::MalformedPoset, "group element without inverse");
  }

  static FiniteGroup trivial() {
    FiniteGroup g;
    g.n = 1;
    g.mul = {0};
    return g;
  }

  static FiniteGroup cyclic(int k) {
    FiniteGroup g;
    g.n = k;
    g.mul.assign(static_cast<size_t>(k) * k, 0);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) g.mul[a * k + b] = (a + b) % k;
    return g;
  }

  static FiniteGroup product(const FiniteGroup& a, const FiniteGroup& b) {
    FiniteGroup g;
    g.n = a.n * b.n;
    g.mul.assign(static_cast<size_t>(g.n) * g.n, 0);
    for (int x = 0; x < g.n; ++x)
      for (int y = 0; y < g.n; ++y) {
        int ax = x / b.n, bx = x % b.n, ay = y / b.n, by = y % b.n;
        g.mul[x * g.n + y] = a.op(ax, ay) * b.n + b.op(bx, by);
      }
    return g;
  }

  CheckReport check_table() const {
    CheckReport rep;
    bool ok = static_cast<int>(mul.size()) == n * n;
    for (int a = 0; a < n && ok; ++a)
      ok = op(0, a) == a && op(a, 0) == a;
    // associativity + inverses
    for (int a = 0; a < n && ok; ++a) {
      bool has_inv = false;
      for (int b = 0; b < n; ++b) {
        if (op(a, b) == 0) has_inv = true;
        for (int c = 0; c < n; ++c)
          if (op(op(a, b), c) != op(a, op(b, c))) ok = false;
      }
      if (!has_inv) ok = false;
    }
    rep.add("group.table", ok, "multiplication table is not a group");
    return rep;
  }
};

/// Group action on a finite sample set, one permutation per element.
struct GroupAction {
  std::vector<std::vector<int>> perm;  // perm[g][x]

  int apply(int g, int x) const { return perm[g][x]; }

  int set_size() const { return perm.empty() ? 0 : static_cast<int>(perm[0].size()); }

  CheckReport check_homomorphism(const FiniteGroup& g) const {
    CheckReport rep;
    bool ok = static_cast<int>(perm.size()) == g.n;
    int m = set_size();
    for (int a = 0; a < g.n && ok; ++a) {
      // bijectivity
      std::vector<char> seen(m, 0);
      for (int x = 0; x < m; ++x) {
        int y = perm[a][x];
        if (y < 0 || y >= m || seen[y]) {
          ok = false;
          break;
        }
        seen[y] = 1;
      }
      for (int b = 0; b < g.n && ok; ++b)
        for (int x = 0; x < m; ++x)
          if (perm[g.op(a, b)][x] != perm[a][perm[b][x]]) {
            ok = false;
            break;
          }
    }
    rep.add("action.homomorphism", ok, "action is not a permutation homomorphism");
    return rep;
  }

  IdSet orbit(int x) const {
    IdSet o;
    for (const auto& p : perm) o.push_back(p[x]);
    return set_sorted(o);
  }

  IdSet stabilizer(int x) const {
    IdSet s;
    for (size_t g = 0; g < perm.size(); ++g)
      if (perm[g][x] == x) s.push_back(static_cast<int>(g));
    return s;
  }

  /// Saturate a set under the action.
  IdSet saturate(const IdSet& s) const {
    IdSet out;
    for (int x : s)
      for (const auto& p : perm) out.push_back(p[x]);
    return set_sorted(out);
  }

  bool invariant(const IdSet& s) const { return saturate(s) == s; }

  /// Orbit representatives (min id) and the rep map.
  std::pair<IdSet, std::vector<int>> orbit_reps() const {
    int m = set_size();
    std::vector<int> rep_of(m, -1);
    IdSet reps;
    for (int x = 0; x < m; ++x) {
      if (rep_of[x] >= 0) continue;
      IdSet o = orbit(x);
      int r = o[0];
      reps.push_back(r);
      for (int y : o) rep_of[y] = r;
    }
    return {reps, rep_of};
  }

  /// Does the subgroup (list of elements) act freely on the set s?
  /// Returns a fixed sample on failure.
  std::optional<std::pair<int, int>> fixed_point(const IdSet& subgroup,
                                                 const IdSet& s) const {
    for (int g : subgroup) {
      if (g == 0) continue;
      for (int x : s)
        if (perm[g][x] == x) return std::make_pair(g, x);
    }
    return std::nullopt;
  }
};

/// Surjective homomorphism data between finite groups, with splitting.
struct GroupSurjection {
  std::vector<int> map;    // source elem -> target elem
  std::vector<int> split;  // target elem -> source elem (section)

  IdSet kernel() const {
    IdSet k;
    for (size_t g = 0; g < map.size(); ++g)
      if (map[g] == 0) k.push_back(static_cast<int>(g));
    return k;
  }

  CheckReport check(const FiniteGroup& src, const FiniteGroup& dst) const {
    CheckReport rep;
    bool hom = static_cast<int>(map.size()) == src.n && map[0] == 0;
    for (int a = 0; a < src.n && hom; ++a)
      for (int b = 0; b < src.n; ++b)
        if (map[src.op(a, b)] != dst.op(map[a], map[b])) {
          hom = false;
          break;
        }
    rep.add("surjection.homomorphism", hom, "not a homomorphism");
    std::vector<char> hit(dst.n, 0);
    for (int a = 0; a < src.n && a < static_cast<int>(map.size()); ++a)
      if (map[a] >= 0 && map[a] < dst.n) hit[map[a]] = 1;
    bool onto = true;
    for (char c : hit) onto = onto && c;
    rep.add("surjection.onto", onto, "not surjective");
    bool sec = static_cast<int>(split.size()) == dst.n;
    for (int t = 0; t < dst.n && sec; ++t)
      sec = split[t] >= 0 && split[t] < src.n && map[split[t]] == t;
    for (int a = 0; a < dst.n && sec; ++a)
      for (int b = 0; b < dst.n; ++b)
        if (split[dst.op(a, b)] != src.op(split[a], split[b])) {
          sec = false;
          break;
        }
    rep.add("surjection.splitting", sec, "splitting is not a group section");
    return rep;
  }
};

}  // namespace kuratlas
