#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace kuratlas {

using Q = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline std::string q_to_string(const Q& q) {
  std::ostringstream os;
  os << numerator(q);
  if (denominator(q) != 1) os << "/" << denominator(q);
  return os.str();
}

inline Q q_parse(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Q(BigInt(s));
    BigInt num(s.substr(0, slash));
    BigInt den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Q(num, den);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad rational literal: " + s);
  }
}

inline Q q_abs(const Q& q) { return q < 0 ? Q(-q) : q; }

inline int q_sign(const Q& q) { return q < 0 ? -1 : (q > 0 ? 1 : 0); }

/// Vector in Q^n.
using QVec = std::vector<Q>;

inline QVec qvec_zero(size_t n) { return QVec(n, Q(0)); }

inline QVec operator+(const QVec& a, const QVec& b) {
  QVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline QVec operator-(const QVec& a, const QVec& b) {
  QVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline QVec operator*(const Q& c, const QVec& a) {
  QVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

inline bool qvec_is_zero(const QVec& a) {
  for (const auto& x : a)
    if (x != 0) return false;
  return true;
}

/// max-norm, the norm convention for obstruction vectors.
inline Q qvec_max_norm(const QVec& a) {
  Q m(0);
  for (const auto& x : a) {
    Q ax = q_abs(x);
    if (ax > m) m = ax;
  }
  return m;
}

/// Dense rational matrix, row-major.
struct QMat {
  size_t rows = 0, cols = 0;
  std::vector<Q> a;

  QMat() = default;
  QMat(size_t r, size_t c) : rows(r), cols(c), a(r * c, Q(0)) {}

  Q& at(size_t i, size_t j) { return a[i * cols + j]; }
  const Q& at(size_t i, size_t j) const { return a[i * cols + j]; }

  static QMat identity(size_t n) {
    QMat m(n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  bool operator==(const QMat& o) const {
    return rows == o.rows && cols == o.cols && a == o.a;
  }

  QVec apply(const QVec& v) const {
    QVec r(rows, Q(0));
    for (size_t i = 0; i < rows; ++i)
      for (size_t j = 0; j < cols; ++j)
        if (at(i, j) != 0) r[i] += at(i, j) * v[j];
    return r;
  }

  QMat mul(const QMat& o) const {
    QMat r(rows, o.cols);
    for (size_t i = 0; i < rows; ++i)
      for (size_t k = 0; k < cols; ++k) {
        if (at(i, k) == 0) continue;
        for (size_t j = 0; j < o.cols; ++j) r.at(i, j) += at(i, k) * o.at(k, j);
      }
    return r;
  }

  QMat hcat(const QMat& o) const {
    QMat r(rows, cols + o.cols);
    for (size_t i = 0; i < rows; ++i) {
      for (size_t j = 0; j < cols; ++j) r.at(i, j) = at(i, j);
      for (size_t j = 0; j < o.cols; ++j) r.at(i, cols + j) = o.at(i, j);
    }
    return r;
  }

  QMat col_subset(const std::vector<size_t>& idx) const {
    QMat r(rows, idx.size());
    for (size_t i = 0; i < rows; ++i)
      for (size_t j = 0; j < idx.size(); ++j) r.at(i, j) = at(i, idx[j]);
    return r;
  }
};

/// Row-echelon rank by fraction-free-ish Gaussian elimination (exact).
inline size_t q_rank(QMat m) {
  size_t r = 0;
  for (size_t c = 0; c < m.cols && r < m.rows; ++c) {
    size_t piv = r;
    while (piv < m.rows && m.at(piv, c) == 0) ++piv;
    if (piv == m.rows) continue;
    if (piv != r)
      for (size_t j = 0; j < m.cols; ++j) std::swap(m.at(piv, j), m.at(r, j));
    for (size_t i = r + 1; i < m.rows; ++i) {
      if (m.at(i, c) == 0) continue;
      Q f = m.at(i, c) / m.at(r, c);
      for (size_t j = c; j < m.cols; ++j) m.at(i, j) -= f * m.at(r, j);
    }
    ++r;
  }
  return r;
}

inline Q q_det(QMat m) {
  if (m.rows != m.cols) throw std::invalid_argument("det on non-square");
  Q det(1);
  size_t n = m.rows;
  for (size_t c = 0; c < n; ++c) {
    size_t piv = c;
    while (piv < n && m.at(piv, c) == 0) ++piv;
    if (piv == n) return Q(0);
    if (piv != c) {
      for (size_t j = 0; j < n; ++j) std::swap(m.at(piv, j), m.at(c, j));
      det = -det;
    }
    det *= m.at(c, c);
    for (size_t i = c + 1; i < n; ++i) {
      if (m.at(i, c) == 0) continue;
      Q f = m.at(i, c) / m.at(c, c);
      for (size_t j = c; j < n; ++j) m.at(i, j) -= f * m.at(c, j);
    }
  }
  return det;
}

/// Solve A x = b; returns nullopt when the system is inconsistent, and the
/// unique solution when A has full column rank. Underdetermined consistent
/// systems return one solution (free variables set to 0).
inline std::optional<QVec> q_solve(QMat A, QVec b) {
  size_t n = A.rows, m = A.cols;
  std::vector<size_t> pivot_col;
  size_t r = 0;
  for (size_t c = 0; c < m && r < n; ++c) {
    size_t piv = r;
    while (piv < n && A.at(piv, c) == 0) ++piv;
    if (piv == n) continue;
    if (piv != r) {
      for (size_t j = 0; j < m; ++j) std::swap(A.at(piv, j), A.at(r, j));
      std::swap(b[piv], b[r]);
    }
    for (size_t i = 0; i < n; ++i) {
      if (i == r || A.at(i, c) == 0) continue;
      Q f = A.at(i, c) / A.at(r, c);
      for (size_t j = c; j < m; ++j) A.at(i, j) -= f * A.at(r, j);
      b[i] -= f * b[r];
    }
    pivot_col.push_back(c);
    ++r;
  }
  for (size_t i = r; i < n; ++i)
    if (b[i] != 0) return std::nullopt;
  QVec x(m, Q(0));
  for (size_t k = 0; k < r; ++k) x[pivot_col[k]] = b[k] / A.at(k, pivot_col[k]);
  return x;
}

/// Is v in the column space of A?
inline bool q_in_col_space(const QMat& A, const QVec& v) {
  return q_solve(A, v).has_value();
}

/// dim(im A ∩ im B) = rank A + rank B − rank [A|B]
inline size_t q_col_space_intersection_dim(const QMat& A, const QMat& B) {
  return q_rank(A) + q_rank(B) - q_rank(A.hcat(B));
}

/// im C == im A ∩ im B, checked by inclusions and dimension count.
inline bool q_col_space_intersection_equals(const QMat& A, const QMat& B,
                                            const QMat& C) {
  size_t want = q_col_space_intersection_dim(A, B);
  if (q_rank(C) != want) return false;
  for (size_t j = 0; j < C.cols; ++j) {
    QVec col(C.rows);
    for (size_t i = 0; i < C.rows; ++i) col[i] = C.at(i, j);
    if (!q_in_col_space(A, col) || !q_in_col_space(B, col)) return false;
  }
  return true;
}

}  // namespace kuratlas
