// Exact truncated power series in two variables (u,v) over Q, with optional
// semi-invariant weight tags for a mu_r-action.
#pragma once

#include "numeric.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>

namespace qcb {

struct SeriesError : std::runtime_error {
  enum Code { WeightMismatch, ZeroWithinTruncation, BadParameter } code;
  SeriesError(Code c, const std::string& m) : std::runtime_error(m), code(c) {}
};

// declares the series semi-invariant: i*wu + j*wv = residue (mod r) for every
// stored monomial u^i v^j
struct WeightTag {
  Int r, wu, wv, residue;
  bool operator==(const WeightTag& o) const {
    return r == o.r && wu == o.wu && wv == o.wv && residue == o.residue;
  }
  bool compatible(const WeightTag& o) const {
    return r == o.r && wu == o.wu && wv == o.wv;
  }
};

class TruncatedSeries {
 public:
  int N = 10;  // coefficients are trusted for total degree <= N
  std::map<std::pair<int, int>, Rat> c;
  std::optional<WeightTag> weight;

  static TruncatedSeries zero(int N) { return TruncatedSeries(N); }
  static TruncatedSeries constant(const Rat& x, int N);
  static TruncatedSeries one(int N) { return constant(1, N); }
  static TruncatedSeries monomial(int i, int j, const Rat& coef, int N);
  static TruncatedSeries u(int N) { return monomial(1, 0, 1, N); }
  static TruncatedSeries v(int N) { return monomial(0, 1, 1, N); }

  TruncatedSeries() = default;
  explicit TruncatedSeries(int n) : N(n) {}

  Rat coef(int i, int j) const;
  void set(int i, int j, const Rat& x);
  bool is_zero() const { return c.empty(); }
  int order() const;                       // lowest total degree; -1 if zero
  TruncatedSeries leading_form() const;    // homogeneous part of lowest degree
  TruncatedSeries truncate(int newN) const;
  TruncatedSeries shift_v(const Rat& t) const;  // s(u, v+t)

  TruncatedSeries with_weight(const WeightTag& w) const;  // validates
  void check_weight() const;

  std::string str() const;        // sorted "i j num/den" lines
  static TruncatedSeries parse(const std::string& text, int N);

  bool same_coeffs(const TruncatedSeries& o) const { return c == o.c; }
};

TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries operator-(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries operator-(const TruncatedSeries& a);
TruncatedSeries operator*(const Rat& x, const TruncatedSeries& a);
TruncatedSeries spow(const TruncatedSeries& a, int k);

// equality of zero loci: a == unit * b or a == -unit * b within truncation
bool equal_up_to_unit(const TruncatedSeries& a, const TruncatedSeries& b);

}  // namespace qcb
