#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kuratlas/report.hpp"
#include "kuratlas/util.hpp"

namespace kuratlas {

constexpr size_t kPosetSizeCap = 1u << 16;

struct NoUpperBound {
  bool operator==(const NoUpperBound&) const { return true; }
};

using LubResult = std::variant<int, NoUpperBound>;

/// Finite poset of opaque index labels. The order is kept as per-element
/// up-sets (sorted ids). Labels are interned to ids on construction.
struct IndexPoset {
  std::vector<std::string> labels;
  std::map<std::string, int> id_of;
  std::vector<IdSet> up;    // up[i] = { j : i <= j }, includes i
  std::vector<IdSet> down;  // down[i] = { j : j <= i }, includes i

  int n() const { return static_cast<int>(labels.size()); }

  int id(const std::string& label) const {
    auto it = id_of.find(label);
    if (it == id_of.end()) fail(Errc::MalformedPoset, "unknown label " + label);
    return it->second;
  }

  bool leq(int a, int b) const { return set_contains(up[a], b); }

  bool is_minimal(int a) const { return down[a].size() == 1; }

  IdSet minimal_elements() const {
    IdSet m;
    for (int i = 0; i < n(); ++i)
      if (is_minimal(i)) m.push_back(i);
    return m;
  }

  /// m(J): minimal elements dominated by J.
  IdSet m_of(int j) const {
    IdSet r;
    for (int h : down[j])
      if (is_minimal(h)) r.push_back(h);
    return r;
  }

  /// |I| in the sense used by reductions and taming levels: |m(I)|.
  int level(int i) const { return static_cast<int>(m_of(i).size()); }

  /// Checks the partial-order axioms. Reflexivity and antisymmetry hold by
  /// representation; transitivity is verified by closure.
  CheckReport check_axioms() const {
    CheckReport rep;
    for (int a = 0; a < n(); ++a)
      for (int b : up[a]) {
        if (b != a && set_contains(up[b], a)) {
          rep.add("poset.antisymmetric", false,
                  labels[a] + " <= " + labels[b] + " <= " + labels[a]);
          return rep;
        }
        for (int c : up[b]) {
          if (!set_contains(up[a], c)) {
            rep.add("poset.transitive", false,
                    labels[a] + " <= " + labels[b] + " <= " + labels[c] +
                        " but not " + labels[a] + " <= " + labels[c]);
            return rep;
          }
        }
      }
    rep.add("poset.axioms", true);
    return rep;
  }

  struct LubStatus {
    enum Kind { Value, NoUpper, NoLeast } kind;
    int value = -1;
  };

  LubStatus lub_status(const IdSet& subset) const {
    if (subset.empty()) fail(Errc::MalformedPoset, "lub of empty subset");
    for (int s : subset)
      if (s < 0 || s >= n()) fail(Errc::MalformedPoset, "lub: id out of range");
    IdSet candidates = up[subset[0]];
    for (size_t k = 1; k < subset.size(); ++k)
      candidates = set_intersect(candidates, up[subset[k]]);
    if (candidates.empty()) return {LubStatus::NoUpper, -1};
    // least = a candidate below all candidates
    for (int c : candidates) {
      bool least = true;
      for (int d : candidates)
        if (!leq(c, d)) {
          least = false;
          break;
        }
      if (least) return {LubStatus::Value, c};
    }
    return {LubStatus::NoLeast, -1};
  }

  /// Least upper bound of a nonempty subset; NoUpperBound when no common
  /// upper bound exists.
  LubResult lub(const IdSet& subset) const {
    LubStatus s = lub_status(subset);
    if (s.kind == LubStatus::Value) return s.value;
    if (s.kind == LubStatus::NoUpper) return NoUpperBound{};
    fail(Errc::GenerationFailure,
         "subset has upper bounds but no least upper bound");
  }

  std::optional<int> lub2(int a, int b) const {
    LubResult r = lub(IdSet{std::min(a, b), std::max(a, b)});
    if (std::holds_alternative<int>(r)) return std::get<int>(r);
    return std::nullopt;
  }

  /// Greatest lower bound, partial (exists only under a common lower bound).
  std::optional<int> glb2(int a, int b) const {
    IdSet candidates = set_intersect(down[a], down[b]);
    if (candidates.empty()) return std::nullopt;
    for (int c : candidates) {
      bool greatest = true;
      for (int d : candidates)
        if (!leq(d, c)) {
          greatest = false;
          break;
        }
      if (greatest) return c;
    }
    return std::nullopt;  // lower bounds exist but no greatest one
  }
};

/// Builds a poset from labels and an order relation given as (a <= b) pairs;
/// reflexive/transitive closure is taken, antisymmetry is enforced.
inline IndexPoset make_poset(const std::vector<std::string>& labels,
                             const std::vector<std::pair<std::string, std::string>>& order) {
  if (labels.size() > kPosetSizeCap)
    fail(Errc::SizeLimit, "poset exceeds 2^16 elements");
  IndexPoset p;
  p.labels = labels;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    if (p.id_of.count(labels[i]))
      fail(Errc::MalformedPoset, "duplicate label " + labels[i]);
    p.id_of[labels[i]] = i;
  }
  int n = p.n();
  std::vector<std::vector<char>> leq(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i) leq[i][i] = 1;
  for (const auto& [a, b] : order) leq[p.id(a)][p.id(b)] = 1;
  // Floyd-Warshall style closure
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if (leq[i][k])
        for (int j = 0; j < n; ++j)
          if (leq[k][j]) leq[i][j] = 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      if (leq[i][j] && leq[j][i])
        fail(Errc::MalformedPoset, "order not antisymmetric at " + labels[i] +
                                       "," + labels[j]);
  p.up.assign(n, {});
  p.down.assign(n, {});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (leq[i][j]) {
        p.up[i].push_back(j);
        p.down[j].push_back(i);
      }
  for (auto& s : p.up) s = set_sorted(s);
  for (auto& s : p.down) s = set_sorted(s);
  return p;
}

/// Subset-poset constructor: labels are the given basic names; each family
/// member is a set of basic names, ordered by inclusion.
inline IndexPoset make_subset_poset(const std::vector<IdSet>& family,
                                    const std::vector<std::string>& basic_names) {
  std::vector<std::string> labels;
  labels.reserve(family.size());
  auto label_of = [&](const IdSet& s) {
    std::string l;
    for (size_t k = 0; k < s.size(); ++k) {
      if (k) l += ",";
      l += basic_names[s[k]];
    }
    return l;
  };
  for (const auto& s : family) labels.push_back(label_of(s));
  std::vector<std::pair<std::string, std::string>> order;
  for (size_t i = 0; i < family.size(); ++i)
    for (size_t j = 0; j < family.size(); ++j)
      if (i != j && set_subset(family[i], family[j]))
        order.emplace_back(labels[i], labels[j]);
  return make_poset(labels, order);
}

/// Product poset with the product order; labels "a*b".
inline IndexPoset make_product_poset(const IndexPoset& p1, const IndexPoset& p2) {
  std::vector<std::string> labels;
  std::vector<std::pair<std::string, std::string>> order;
  auto lab = [&](int a, int b) { return p1.labels[a] + "*" + p2.labels[b]; };
  for (int a = 0; a < p1.n(); ++a)
    for (int b = 0; b < p2.n(); ++b) labels.push_back(lab(a, b));
  for (int a = 0; a < p1.n(); ++a)
    for (int b = 0; b < p2.n(); ++b)
      for (int c : p1.up[a])
        for (int d : p2.up[b])
          if (c != a || d != b) order.emplace_back(lab(a, b), lab(c, d));
  return make_poset(labels, order);
}

/// τ-map into the power set of a finite alphabet.
struct TauMap {
  std::vector<std::string> alphabet;
  std::vector<IdSet> tau;  // per poset element, subset of alphabet ids

  IdSet tau_of(int i) const { return tau[i]; }
};

/// minimal_generators: m(J) with the guarantee lub(m(J)) == J.
inline IdSet minimal_generators(const IndexPoset& p, int j) {
  IdSet m = p.m_of(j);
  auto l = p.lub_status(m);
  if (l.kind != IndexPoset::LubStatus::Value || l.value != j)
    fail(Errc::GenerationFailure,
         "lub(m(J)) != J at J = " + p.labels[j] + " (poset not minimally generated)");
  return m;
}

/// Diagnostic for Definition-of-minimal-generation clauses (a)-(d) plus the
/// wedge identity on m(.). Optional tau checks run when tau is provided.
inline CheckReport check_minimally_generated(const IndexPoset& p,
                                             const TauMap* tau = nullptr) {
  CheckReport rep;
  CheckReport ax = p.check_axioms();
  rep.merge(ax);
  if (!ax.ok()) return rep;

  int n = p.n();
  // (a): every subset with an upper bound has a unique least upper bound.
  // Upper-bound sets are determined by their common up-set, so it suffices to
  // scan intersections of pairs/triples closure: any subset's upper-bound set
  // is an intersection of element up-sets; check all subsets up to closure by
  // checking every intersection reachable from pairs.
  bool clause_a = true;
  std::string wit_a;
  std::vector<IdSet> reachable;  // distinct nonempty upper-bound sets
  {
    std::vector<IdSet> work;
    for (int i = 0; i < n; ++i) work.push_back(p.up[i]);
    std::set<IdSet> seen(work.begin(), work.end());
    std::vector<std::pair<IdSet, IdSet>> owner;  // (upper set, witness subset)
    for (int i = 0; i < n; ++i) owner.push_back({p.up[i], {i}});
    for (size_t k = 0; k < owner.size(); ++k) {
      for (int i = 0; i < n; ++i) {
        IdSet nxt = set_intersect(owner[k].first, p.up[i]);
        if (nxt.empty()) continue;
        if (!seen.count(nxt)) {
          seen.insert(nxt);
          owner.push_back({nxt, set_union(owner[k].second, IdSet{i})});
        }
      }
    }
    for (auto& [ub, subset] : owner) {
      // least element of ub?
      bool has_least = false;
      for (int c : ub) {
        bool least = true;
        for (int d : ub)
          if (!p.leq(c, d)) {
            least = false;
            break;
          }
        if (least) {
          has_least = true;
          break;
        }
      }
      if (!has_least) {
        clause_a = false;
        wit_a = "subset {";
        for (size_t t = 0; t < subset.size(); ++t)
          wit_a += (t ? "," : "") + p.labels[subset[t]];
        wit_a += "} has upper bounds but no least one";
        break;
      }
    }
  }
  rep.add("minimal.(a)", clause_a, wit_a);

  // (b): J == lub(m(J))
  bool clause_b = true;
  std::string wit_b;
  for (int j = 0; j < n && clause_b; ++j) {
    IdSet m = p.m_of(j);
    auto l = p.lub_status(m);
    if (l.kind != IndexPoset::LubStatus::Value || l.value != j) {
      clause_b = false;
      wit_b = "J = " + p.labels[j] + " is not lub of its minimal elements";
    }
  }
  rep.add("minimal.(b)", clause_b, wit_b);

  // eq:wedge: m(I∧J) = m(I) ∩ m(J) whenever I∧J exists.
  if (clause_a && clause_b) {
    bool wedge = true;
    std::string wit_w;
    for (int i = 0; i < n && wedge; ++i)
      for (int j = i; j < n && wedge; ++j) {
        auto g = p.glb2(i, j);
        if (!g) continue;
        if (p.m_of(*g) != set_intersect(p.m_of(i), p.m_of(j))) {
          wedge = false;
          wit_w = "m(I∧J) != m(I)∩m(J) at I=" + p.labels[i] + ", J=" + p.labels[j];
        }
      }
    rep.add("minimal.eq:wedge", wedge, wit_w);
    // injectivity of J -> m(J)
    bool inj = true;
    std::string wit_i;
    for (int i = 0; i < n && inj; ++i)
      for (int j = i + 1; j < n && inj; ++j)
        if (p.m_of(i) == p.m_of(j)) {
          inj = false;
          wit_i = p.labels[i] + " and " + p.labels[j] + " dominate the same minimal set";
        }
    rep.add("minimal.iota_m-injective", inj, wit_i);
  }

  if (tau) {
    bool sizes = tau->tau.size() == static_cast<size_t>(n);
    rep.add("tau.domain", sizes, "tau not defined on every element");
    if (!sizes) return rep;
    // order-preserving injection
    bool opi = true;
    std::string wit;
    for (int i = 0; i < n && opi; ++i) {
      if (tau->tau[i].empty()) {
        opi = false;
        wit = "tau(" + p.labels[i] + ") empty";
        break;
      }
      for (int j = 0; j < n && opi; ++j) {
        if (i != j && tau->tau[i] == tau->tau[j]) {
          opi = false;
          wit = "tau not injective at " + p.labels[i] + "," + p.labels[j];
        }
        if (p.leq(i, j) && !set_subset(tau->tau[i], tau->tau[j])) {
          opi = false;
          wit = "tau not order preserving at " + p.labels[i] + " <= " + p.labels[j];
        }
      }
    }
    rep.add("tau.order-preserving-injection", opi, wit);

    // (c): tau(I∨J) = tau(I) ∪ tau(J)
    bool clause_c = true;
    std::string wit_c;
    for (int i = 0; i < n && clause_c; ++i)
      for (int j = 0; j < n && clause_c; ++j) {
        auto l = p.lub2(i, j);
        if (!l) continue;
        if (tau->tau[*l] != set_union(tau->tau[i], tau->tau[j])) {
          clause_c = false;
          wit_c = "tau(I∨J) != tau(I)∪tau(J) at I=" + p.labels[i] + ", J=" + p.labels[j];
        }
      }
    rep.add("minimal.(c)", clause_c, wit_c);

    // (d): completeness. For A in im(tau) and minimal H with tau(H) ⊂ A,
    // every B with tau(H) ⊂ B ⊂ A lies in im(tau).
    bool clause_d = true;
    std::string wit_d;
    std::set<IdSet> image(tau->tau.begin(), tau->tau.end());
    IdSet minimals = p.minimal_elements();
    for (int a = 0; a < n && clause_d; ++a) {
      const IdSet& A = tau->tau[a];
      for (int h : minimals) {
        const IdSet& TH = tau->tau[h];
        if (!set_subset(TH, A)) continue;
        // enumerate B between TH and A
        IdSet extra = set_minus(A, TH);
        size_t k = extra.size();
        if (k > 20) fail(Errc::SizeLimit, "tau completeness enumeration too large");
        for (size_t mask = 0; mask < (size_t(1) << k) && clause_d; ++mask) {
          IdSet B = TH;
          for (size_t t = 0; t < k; ++t)
            if (mask & (size_t(1) << t)) B.push_back(extra[t]);
          B = set_sorted(B);
          if (!image.count(B)) {
            clause_d = false;
            wit_d = "set between tau(" + p.labels[h] + ") and tau(" + p.labels[a] +
                    ") missing from im(tau)";
          }
        }
      }
    }
    rep.add("minimal.(d)", clause_d, wit_d);
  }
  return rep;
}

}  // namespace kuratlas
