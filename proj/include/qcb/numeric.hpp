// Exact number types and small integer linear algebra used by the lattice and
// series layers.  Everything is rational arithmetic on tiny matrices; no
// floating point anywhere.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcb {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

using IVec = std::vector<Int>;
using QVec = std::vector<Rat>;
using IMat = std::vector<IVec>;  // row-major
using QMat = std::vector<QVec>;

inline Int igcd(Int a, Int b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline Int imod(const Int& a, const Int& m) {  // representative in [0, m)
  Int r = a % m;
  if (r < 0) r += m;
  return r;
}

inline Int vec_gcd(const IVec& v) {
  Int g = 0;
  for (const auto& x : v) g = igcd(g, x);
  return g;
}

inline IVec primitive(IVec v) {
  Int g = vec_gcd(v);
  if (g > 1)
    for (auto& x : v) x /= g;
  return v;
}

inline bool is_zero(const IVec& v) {
  for (const auto& x : v)
    if (x != 0) return false;
  return true;
}

inline IVec vneg(IVec v) {
  for (auto& x : v) x = -x;
  return v;
}

inline std::string vec_str(const IVec& v) {
  std::string s = "(";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += v[i].str();
  }
  return s + ")";
}

// Determinant by fraction-free (Bareiss) elimination.
inline Int idet(IMat a) {
  const size_t n = a.size();
  if (n == 0) return 1;
  Int prev = 1;
  int sign = 1;
  for (size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      size_t p = k + 1;
      while (p < n && a[p][k] == 0) ++p;
      if (p == n) return 0;
      std::swap(a[k], a[p]);
      sign = -sign;
    }
    for (size_t i = k + 1; i < n; ++i)
      for (size_t j = k + 1; j < n; ++j)
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

// Solve A x = b over Q; A square nonsingular (columns of A given row-major).
inline QVec qsolve(QMat a, QVec b) {
  const size_t n = a.size();
  for (size_t k = 0; k < n; ++k) {
    size_t p = k;
    while (p < n && a[p][k] == 0) ++p;
    if (p == n) throw std::runtime_error("qsolve: singular matrix");
    std::swap(a[k], a[p]);
    std::swap(b[k], b[p]);
    Rat piv = a[k][k];
    for (size_t j = k; j < n; ++j) a[k][j] /= piv;
    b[k] /= piv;
    for (size_t i = 0; i < n; ++i) {
      if (i == k || a[i][k] == 0) continue;
      Rat f = a[i][k];
      for (size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  return b;
}

// Column-style Hermite normal form of the lattice spanned by the columns of G
// (an n x m matrix, m >= n, full rank n).  Returns an n x n lower-triangular
// basis with positive diagonal and reduced off-diagonal entries.
inline IMat hnf_basis(IMat g) {
  const size_t n = g.size();
  const size_t m = n ? g[0].size() : 0;
  size_t col = 0;
  for (size_t row = 0; row < n; ++row) {
    // clear row entries right of `col` by column gcd steps
    while (true) {
      size_t p = col;
      while (p < m && g[row][p] == 0) ++p;
      if (p == m) break;
      if (p != col)
        for (size_t i = 0; i < n; ++i) std::swap(g[i][p], g[i][col]);
      bool done = true;
      for (size_t j = col + 1; j < m; ++j) {
        if (g[row][j] == 0) continue;
        done = false;
        Int q = g[row][j] / g[row][col];
        for (size_t i = 0; i < n; ++i) g[i][j] -= q * g[i][col];
        if (g[row][j] != 0)
          for (size_t i = 0; i < n; ++i) std::swap(g[i][j], g[i][col]);
      }
      if (done) break;
    }
    if (col < m && g[row][col] != 0) {
      if (g[row][col] < 0)
        for (size_t i = 0; i < n; ++i) g[i][col] = -g[i][col];
      // reduce earlier columns against this pivot
      for (size_t j = 0; j < col; ++j) {
        Int q = g[row][j] / g[row][col];
        if (g[row][j] - q * g[row][col] < 0) q -= 1;  // floor division
        if (q != 0)
          for (size_t i = 0; i < n; ++i) g[i][j] -= q * g[i][col];
      }
      ++col;
    }
  }
  if (col != n) throw std::runtime_error("hnf_basis: generators not full rank");
  // assemble square basis (columns 0..n-1), reorder to lower-triangular shape
  IMat b(n, IVec(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) b[i][j] = g[i][j];
  return b;
}

// Diagonalization of an n x m integer matrix by unimodular row/column
// operations, tracking only the row transform U (U*A*V = diag).  The diagonal
// is not normalized to a divisibility chain; callers that need the group
// structure of coker(A) use the raw diagonal (the group is cyclic iff the
// entries are pairwise coprime, and then U^-1*(1,...,1) generates).
struct Smith {
  IVec divisors;  // raw diagonal, nonnegative
  IMat u;         // n x n unimodular
};

inline Smith smith(IMat a) {
  const size_t n = a.size();
  const size_t m = n ? a[0].size() : 0;
  IMat u(n, IVec(n, 0));
  for (size_t i = 0; i < n; ++i) u[i][i] = 1;
  size_t t = 0;
  const size_t rank_bound = std::min(n, m);
  IVec divs;
  while (t < rank_bound) {
    // find pivot: nonzero entry in submatrix [t.., t..]
    size_t pi = t, pj = t;
    bool found = false;
    for (size_t i = t; i < n && !found; ++i)
      for (size_t j = t; j < m && !found; ++j)
        if (a[i][j] != 0) {
          pi = i;
          pj = j;
          found = true;
        }
    if (!found) break;
    std::swap(a[t], a[pi]);
    std::swap(u[t], u[pi]);
    for (size_t i = 0; i < n; ++i) std::swap(a[i][pj], a[i][t]);
    while (true) {
      bool clean = true;
      for (size_t i = t + 1; i < n; ++i) {
        if (a[i][t] == 0) continue;
        Int q = a[i][t] / a[t][t];
        for (size_t j = 0; j < m; ++j) a[i][j] -= q * a[t][j];
        for (size_t j = 0; j < n; ++j) u[i][j] -= q * u[t][j];
        if (a[i][t] != 0) {
          std::swap(a[t], a[i]);
          std::swap(u[t], u[i]);
          clean = false;
        }
      }
      for (size_t j = t + 1; j < m; ++j) {
        if (a[t][j] == 0) continue;
        Int q = a[t][j] / a[t][t];
        for (size_t i = 0; i < n; ++i) a[i][j] -= q * a[i][t];
        if (a[t][j] != 0) {
          for (size_t i = 0; i < n; ++i) std::swap(a[i][t], a[i][j]);
          clean = false;
        }
      }
      if (clean) break;
    }
    divs.push_back(a[t][t] < 0 ? Int(-a[t][t]) : a[t][t]);
    ++t;
  }
  return {divs, u};
}

}  // namespace qcb
