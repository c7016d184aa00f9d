#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "kuratlas/perturb.hpp"

namespace kuratlas {

/// Weighted nonsingular branched zero groupoid: tagged zeros with source
/// weights 1/|Γ_I|, morphisms generated by the covering projections and the
/// kernel actions, and the frontier morphisms of the Hausdorff quotient.
struct WnbGroupoid {
  std::vector<ZeroPoint> objects;
  std::vector<Q> weight;  // per object: 1/|Γ_chart|
  // undirected morphism edges with the acting group element per edge
  // (identities are implicit); key is (min obj, max obj)
  std::map<std::pair<int, int>, std::set<int>> edges;
  std::set<std::pair<int, int>> frontier_edges;
  bool hausdorff_done = false;

  int find_object(int chart, const PlPoint& p) const {
    for (size_t o = 0; o < objects.size(); ++o)
      if (objects[o].chart == chart && objects[o].point == p)
        return static_cast<int>(o);
    return -1;
  }

  UnionFind closure() const {
    UnionFind uf(objects.size());
    for (auto& [e, alphas] : edges) uf.unite(e.first, e.second);
    for (auto& e : frontier_edges) uf.unite(e.first, e.second);
    return uf;
  }
};

namespace detail {

/// ker(ρ^Γ_{F I}) as elements of Γ_I; the Γ_{I∖F} of the standard case and
/// its tameable-atlas replacement at once. F == I gives {id}.
inline IdSet transport_kernel(const Atlas& atlas, int f, int i) {
  if (f == i) return {0};
  return atlas.change(f, i).rho_gamma.kernel();
}

/// T̃V_FI = T̃U_FI ∩ V_I ∩ ρ^{-1}(V_F), with the I = F convention V_I.
inline IdSet tilde_v(const Atlas& atlas, const Reduction& v, int f, int i) {
  if (f == i) return v.V[i];
  IdSet out;
  const auto& cc = atlas.change(f, i);
  for (int y : atlas.lifted(f, i))
    if (set_contains(v.V[i], y) && set_contains(v.V[f], cc.rho[y])) out.push_back(y);
  return set_sorted(out);
}

}  // namespace detail

/// Build the zero groupoid: objects the tagged zeros, morphisms the
/// completed set over chains F ≤ I ≤ J with the kernel actions.
inline WnbGroupoid zero_groupoid(const Atlas& atlas, const Reduction& v,
                                 const LocalZeroSet& zeros) {
  WnbGroupoid g;
  g.objects = zeros.zeros;
  g.weight.resize(g.objects.size());
  std::map<int, std::vector<int>> per_chart;
  for (size_t o = 0; o < g.objects.size(); ++o) {
    g.weight[o] = Q(1, atlas.charts[g.objects[o].chart].group().n);
    per_chart[g.objects[o].chart].push_back(static_cast<int>(o));
  }
  // morphism multiplicity guard: (src,dst) -> distinct transports
  std::map<std::pair<int, int>, std::set<std::pair<int, int>>> mult;

  for (int i = 0; i < atlas.n(); ++i) {
    for (int j : atlas.poset.up[i]) {
      IdSet tv_ij = detail::tilde_v(atlas, v, i, j);
      if (tv_ij.empty()) continue;
      for (int f : atlas.poset.down[i]) {
        IdSet tv_fj = detail::tilde_v(atlas, v, f, j);
        IdSet both = set_intersect(tv_ij, tv_fj);
        if (both.empty()) continue;
        IdSet kernel = detail::transport_kernel(atlas, f, i);
        for (int od : per_chart[j]) {
          const ZeroPoint& zy = g.objects[od];
          if (!zy.point.inside(both)) continue;
          PlPoint rho_y = (i == j)
                              ? zy.point
                              : zy.point.mapped(atlas.change(i, j).rho);
          for (int alpha : kernel) {
            int ainv = atlas.charts[i].group().inv(alpha);
            PlPoint src_pt = rho_y.mapped(atlas.charts[i].action().perm[ainv]);
            int os = g.find_object(i, src_pt);
            if (os < 0)
              fail(Errc::RealizationInconsistent,
                   "generated morphism source is not a zero (chart " +
                       atlas.poset.labels[i] + ")");
            if (os == od) continue;  // identity
            if (g.objects[os].sign != zy.sign)
              fail(Errc::OrientationClash,
                   "generated morphism relates opposite signs at charts " +
                       atlas.poset.labels[i] + "," + atlas.poset.labels[j]);
            auto key = std::minmax(os, od);
            g.edges[{key.first, key.second}].insert(alpha);
            mult[{os, od}].insert({i, alpha});
          }
        }
      }
    }
  }
  // nonsingularity: at most one morphism between any ordered pair
  for (auto& [pair, transports] : mult) {
    std::set<int> alphas;
    for (auto& [i, a] : transports) alphas.insert(a);
    if (alphas.size() > 1)
      fail(Errc::OrientationClash,
           "two distinct morphisms between one object pair (nonsingularity)");
  }
  return g;
}

/// Composite-closure diagnostic: any two-edge path closes with a stored edge
/// (the completed morphism set is closed under composition and inverses).
inline CheckReport check_groupoid_closure(const WnbGroupoid& g) {
  CheckReport rep;
  std::vector<IdSet> adj(g.objects.size());
  for (auto& [e, alphas] : g.edges) {
    adj[e.first].push_back(e.second);
    adj[e.second].push_back(e.first);
  }
  for (auto& a : adj) a = set_sorted(a);
  bool ok = true;
  std::string wit;
  for (size_t y = 0; y < adj.size() && ok; ++y)
    for (int x : adj[y])
      for (int z : adj[y]) {
        if (x == z || x == static_cast<int>(y) || z == static_cast<int>(y)) continue;
        if (!set_contains(adj[x], z)) {
          ok = false;
          wit = "path " + std::to_string(x) + "-" + std::to_string(y) + "-" +
                std::to_string(z) + " does not close";
          break;
        }
      }
  rep.add("groupoid.composite-closure", ok, wit);
  return rep;
}

/// Hausdorff quotient: add the frontier morphisms (kernel actions over
/// cl_h(T̃V) ∖ T̃V) and re-close.
inline WnbGroupoid hausdorff_quotient(const Atlas& atlas, const Reduction& v,
                                      const WnbGroupoid& g_in) {
  WnbGroupoid g = g_in;
  std::map<int, std::vector<int>> per_chart;
  for (size_t o = 0; o < g.objects.size(); ++o)
    per_chart[g.objects[o].chart].push_back(static_cast<int>(o));
  for (int j = 0; j < atlas.n(); ++j) {
    for (int f : atlas.poset.down[j]) {
      if (f == j) continue;
      IdSet tv = detail::tilde_v(atlas, v, f, j);
      if (tv.empty()) continue;
      IdSet cl = atlas.charts[j].closure(tv);
      IdSet kernel = detail::transport_kernel(atlas, f, j);
      for (int od : per_chart[j]) {
        const ZeroPoint& zy = g.objects[od];
        // on the frontier: inside the closure but not inside the set
        if (!zy.point.inside(cl) || zy.point.inside(tv)) continue;
        for (int alpha : kernel) {
          if (alpha == 0) continue;
          int ainv = atlas.charts[j].group().inv(alpha);
          PlPoint moved = zy.point.mapped(atlas.charts[j].action().perm[ainv]);
          int os = g.find_object(j, moved);
          if (os < 0 || os == od) continue;
          auto key = std::minmax(os, od);
          g.frontier_edges.insert({key.first, key.second});
        }
      }
    }
  }
  g.hausdorff_done = true;
  return g;
}

/// Weighted count data: quotient points with weight and sign.
struct WeightedCount {
  struct Point {
    Q lambda;
    int sign;
    IdSet members;  // object ids
    std::string key;
  };
  std::vector<Point> points;
  Q total = Q(0);
};

/// Λ from the maximal admissible chart, cross-checked against every other
/// chart meeting the quotient point; signs propagated.
inline WeightedCount weighting(const Atlas& atlas, const WnbGroupoid& g) {
  if (!g.hausdorff_done)
    fail(Errc::WeightInconsistent, "weighting requires the Hausdorff quotient");
  WeightedCount out;
  UnionFind uf = g.closure();
  std::map<int, IdSet> classes;
  for (size_t o = 0; o < g.objects.size(); ++o)
    classes[uf.find(static_cast<int>(o))].push_back(static_cast<int>(o));
  for (auto& [root, members] : classes) {
    // charts meeting the class
    std::map<int, int> count_per_chart;
    int sign = g.objects[members[0]].sign;
    for (int o : members) {
      count_per_chart[g.objects[o].chart]++;
      if (g.objects[o].sign != sign)
        fail(Errc::OrientationClash, "quotient point mixes signs");
    }
    // maximal chart in the poset order
    int maxc = -1;
    for (auto& [cidx, cnt] : count_per_chart)
      if (maxc < 0 || atlas.poset.leq(maxc, cidx)) maxc = cidx;
    Q lambda = Q(count_per_chart[maxc], atlas.charts[maxc].group().n);
    for (auto& [cidx, cnt] : count_per_chart) {
      Q other(cnt, atlas.charts[cidx].group().n);
      if (other != lambda)
        fail(Errc::WeightInconsistent,
             "weights disagree between charts " + atlas.poset.labels[maxc] +
                 " and " + atlas.poset.labels[cidx] + " (" + q_to_string(lambda) +
                 " vs " + q_to_string(other) + ")");
    }
    WeightedCount::Point p;
    p.lambda = lambda;
    p.sign = sign;
    p.members = members;
    // canonical id: hash of the sorted member descriptors
    std::string desc;
    for (int o : members) {
      desc += atlas.poset.labels[g.objects[o].chart] + ":";
      for (size_t t = 0; t < g.objects[o].point.support.size(); ++t)
        desc += std::to_string(g.objects[o].point.support[t]) + "*" +
                q_to_string(g.objects[o].point.weights[t]) + ",";
      desc += ";";
    }
    p.key = fnv1a_hex(desc);
    out.points.push_back(p);
    out.total += Q(sign) * lambda;
  }
  return out;
}

/// Exact rational dimension-0 virtual count.
inline Q vfc_count(const WeightedCount& w) { return w.total; }

/// Pushforward of Λ to X: per X sample, the sum of Λ over quotient points
/// whose objects map there. Objects must be sample points with total
/// footprint maps (the orbifold / resolution case).
inline std::map<int, Q> pushforward(const Atlas& atlas, const WnbGroupoid& g,
                                    const WeightedCount& w) {
  std::map<int, Q> out;
  for (auto& p : w.points) {
    int xid = -1;
    for (int o : p.members) {
      const ZeroPoint& z = g.objects[o];
      if (!z.point.is_sample())
        fail(Errc::DomainMismatch, "pushforward needs sample-point objects");
      auto it = atlas.charts[z.chart].footprint_map.find(z.point.support[0]);
      if (it == atlas.charts[z.chart].footprint_map.end())
        fail(Errc::DomainMismatch, "pushforward needs total footprint maps");
      if (xid >= 0 && xid != it->second)
        fail(Errc::DomainMismatch, "quotient point maps to two X samples");
      xid = it->second;
    }
    out[xid] += p.lambda;
  }
  return out;
}

}  // namespace kuratlas
