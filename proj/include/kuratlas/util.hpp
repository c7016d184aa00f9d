#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace kuratlas {

/// Sorted-vector set helpers. Sample sets and index sets are kept as sorted
/// unique int vectors throughout.
using IdSet = std::vector<int>;

inline IdSet set_sorted(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline bool set_contains(const IdSet& s, int x) {
  return std::binary_search(s.begin(), s.end(), x);
}

inline IdSet set_union(const IdSet& a, const IdSet& b) {
  IdSet r;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}

inline IdSet set_intersect(const IdSet& a, const IdSet& b) {
  IdSet r;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(r));
  return r;
}

inline IdSet set_minus(const IdSet& a, const IdSet& b) {
  IdSet r;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(r));
  return r;
}

inline bool set_subset(const IdSet& a, const IdSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

/// Union-find with path compression.
struct UnionFind {
  std::vector<int> parent;

  explicit UnionFind(size_t n = 0) : parent(n) {
    for (size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
  }

  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }

  bool same(int a, int b) { return find(a) == find(b); }
};

/// FNV-1a, used for input hashes in run reports.
inline uint64_t fnv1a(const std::string& data) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fnv1a_hex(const std::string& data) {
  static const char* digits = "0123456789abcdef";
  uint64_t h = fnv1a(data);
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

/// Thread cap from ATLAS_THREADS (>= 1).
inline unsigned thread_cap() {
  if (const char* env = std::getenv("ATLAS_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
    return 1;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

/// Static partition parallel loop over [0, n); falls back to serial when the
/// cap or n is small.
inline void parallel_for(size_t n, const std::function<void(size_t)>& body) {
  unsigned cap = thread_cap();
  if (cap <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  unsigned workers = static_cast<unsigned>(std::min<size_t>(cap, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (size_t i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Deterministic 64-bit generator (splitmix) for seeded draws.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed + 0x9e3779b97f4a7c15ull) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// uniform in [0, n)
  uint64_t below(uint64_t n) { return n ? next() % n : 0; }

  /// uniform integer in [lo, hi]
  int64_t range(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
  }
};

}  // namespace kuratlas
