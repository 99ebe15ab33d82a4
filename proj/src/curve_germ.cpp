#include "qcb/curve_germ.hpp"

#include <algorithm>

namespace qcb {

namespace {

[[noreturn]] void zero_err() {
  throw SeriesError(SeriesError::ZeroWithinTruncation,
                    "curve germ vanishes within the stored truncation");
}

// ---- univariate polynomial helpers over Q (low degree first) ----

using Poly = std::vector<Rat>;

int pdeg(const Poly& p) {
  for (int i = (int)p.size() - 1; i >= 0; --i)
    if (p[i] != 0) return i;
  return -1;
}

Rat peval(const Poly& p, const Rat& t) {
  Rat r = 0;
  for (int i = (int)p.size() - 1; i >= 0; --i) r = r * t + p[i];
  return r;
}

// deflate by the root t (assumes p(t) == 0)
Poly deflate(const Poly& p, const Rat& t) {
  int d = pdeg(p);
  Poly q(d, Rat(0));
  Rat carry = 0;
  for (int i = d; i >= 1; --i) {
    carry = p[i] + carry * t;
    q[i - 1] = carry;
  }
  return q;
}

std::vector<Int> divisors(Int n) {
  if (n < 0) n = -n;
  std::vector<Int> out;
  for (Int d = 1; d * d <= n; ++d)
    if (n % d == 0) {
      out.push_back(d);
      if (d * d != n) out.push_back(n / d);
    }
  return out;
}

// all rational roots of p, repeated with multiplicity; p is reduced in place
std::vector<Rat> strip_rational_roots(Poly& p) {
  std::vector<Rat> roots;
  while (true) {
    int d = pdeg(p);
    if (d <= 0) break;
    // trailing zero coefficients mean the root 0
    while (pdeg(p) > 0 && p[0] == 0) {
      roots.push_back(0);
      p.erase(p.begin());
    }
    d = pdeg(p);
    if (d <= 0) break;
    // clear denominators
    using boost::multiprecision::denominator;
    using boost::multiprecision::numerator;
    Int den = 1;
    for (int i = 0; i <= d; ++i)
      den = den / igcd(den, Int(denominator(p[i]))) * Int(denominator(p[i]));
    std::vector<Int> ip(d + 1);
    for (int i = 0; i <= d; ++i)
      ip[i] = Int(numerator(p[i])) * (den / Int(denominator(p[i])));
    bool found = false;
    for (const Int& a : divisors(ip[0])) {
      for (const Int& b : divisors(ip[d])) {
        for (int sgn : {1, -1}) {
          Rat t(sgn * a, b);
          if (peval(p, t) == 0) {
            roots.push_back(t);
            p = deflate(p, t);
            found = true;
            break;
          }
        }
        if (found) break;
      }
      if (found) break;
    }
    if (!found) break;
  }
  return roots;
}

// monic square root of a monic even-degree polynomial, if it exists
std::optional<Poly> monic_sqrt(const Poly& p) {
  int d = pdeg(p);
  if (d < 0 || d % 2 != 0) return std::nullopt;
  int h = d / 2;
  Poly q(h + 1, Rat(0));
  q[h] = 1;
  for (int k = h - 1; k >= 0; --k) {
    // coefficient of t^(h+k) in q^2 must match p
    Rat acc = 0;
    for (int i = k + 1; i < h; ++i)
      if (h + k - i <= h) acc += q[i] * q[h + k - i];
    q[k] = (p[h + k] - acc) / 2;
  }
  // verify
  Poly sq(d + 1, Rat(0));
  for (int i = 0; i <= h; ++i)
    for (int j = 0; j <= h; ++j) sq[i + j] += q[i] * q[j];
  for (int i = 0; i <= d; ++i)
    if (sq[i] != p[i]) return std::nullopt;
  return q;
}

Poly form_to_poly(const TruncatedSeries& f, int d) {
  Poly p(d + 1, Rat(0));
  for (auto& [ij, x] : f.c) p[ij.second] = x;
  return p;
}

}  // namespace

BlowupResult blowup_curve_germ(const TruncatedSeries& s, Chart chart) {
  int m = s.order();
  if (m < 0) zero_err();
  TruncatedSeries out(s.N - m);
  for (auto& [ij, x] : s.c) {
    auto [i, j] = ij;
    int ni = chart == Chart::U ? i + j - m : i;
    int nj = chart == Chart::U ? j : i + j - m;
    if (ni + nj <= out.N)
      out.set(ni, nj, out.coef(ni, nj) + x);
  }
  return {out, Int(m)};
}

std::vector<TangentFactor> factor_tangent_cone(const TruncatedSeries& s) {
  int d = s.order();
  if (d < 0) zero_err();
  Poly p = form_to_poly(s.leading_form(), d);
  std::vector<TangentFactor> out;
  int a = d - pdeg(p);  // multiplicity of the line u=0
  if (a > 0) {
    TangentFactor f;
    f.kind = TangentFactor::AxisU;
    f.exponent = a;
    out.push_back(f);
  }
  auto roots = strip_rational_roots(p);
  std::sort(roots.begin(), roots.end());
  for (size_t i = 0; i < roots.size();) {
    size_t j = i;
    while (j < roots.size() && roots[j] == roots[i]) ++j;
    TangentFactor f;
    f.kind = TangentFactor::Line;
    f.t = roots[i];
    f.exponent = (int)(j - i);
    out.push_back(f);
    i = j;
  }
  // leftover: irreducible over Q up to perfect powers; detect squares
  int rem = pdeg(p);
  if (rem > 0) {
    Poly q = p;
    Rat lc = q[pdeg(q)];
    for (auto& x : q) x /= lc;
    int e = 1;
    while (true) {
      auto r = monic_sqrt(q);
      if (!r) break;
      q = *r;
      e *= 2;
    }
    TangentFactor f;
    f.kind = TangentFactor::Block;
    f.block = q;
    f.degree = pdeg(q);
    f.exponent = e;
    out.push_back(f);
  }
  return out;
}

namespace {

struct LineDir {  // the line A*u + B*v = 0
  Rat A, B;
  bool operator==(const LineDir& o) const { return A * o.B == o.A * B; }
};

struct SubBranch {
  bool smooth = false;
  bool decided = false;
  int depth = 0;
  std::optional<LineDir> tangent;
  std::string note;
};

std::vector<SubBranch> resolve(const TruncatedSeries& s, int budget) {
  std::vector<SubBranch> out;
  int m = s.order();
  if (m < 0 || s.N < 1) {
    out.push_back({false, false, 0, std::nullopt, "truncation exhausted"});
    return out;
  }
  if (m == 1) {
    LineDir t{s.coef(1, 0), s.coef(0, 1)};
    out.push_back({true, true, 0, t, ""});
    return out;
  }
  auto factors = factor_tangent_cone(s);
  for (auto& f : factors) {
    LineDir dir = f.kind == TangentFactor::AxisU ? LineDir{1, 0}
                                                 : LineDir{-f.t, 1};
    if (f.kind == TangentFactor::Block) {
      if (f.exponent == 1) {
        // distinct conjugate tangent lines: one smooth branch each
        for (int i = 0; i < f.degree; ++i)
          out.push_back({true, true, 0, std::nullopt, "conjugate tangent"});
      } else {
        out.push_back(
            {false, false, 0, std::nullopt, "repeated irrational tangent"});
      }
      continue;
    }
    if (f.exponent == 1) {
      out.push_back({true, true, 0, dir, ""});
      continue;
    }
    if (budget == 0) {
      out.push_back({false, false, 0, dir, "depth budget exhausted"});
      continue;
    }
    // separate the branches over this direction by one blowup
    TruncatedSeries h;
    LineDir exc{0, 0};
    if (f.kind == TangentFactor::AxisU) {
      h = blowup_curve_germ(s, Chart::V).strict;
      exc = {0, 1};  // E is v=0 in chart V
    } else {
      h = blowup_curve_germ(s, Chart::U).strict.shift_v(f.t);
      exc = {1, 0};  // E is u=0 in chart U
    }
    for (auto& b : resolve(h, budget - 1)) {
      SubBranch up = b;
      up.depth = b.depth + 1;
      up.tangent = dir;  // tangent downstairs is the blown-up direction
      if (b.decided && b.smooth) {
        // smooth upstairs stays smooth iff transversal to the exceptional
        bool transversal = b.tangent && !(*b.tangent == exc);
        up.smooth = transversal;
        if (!b.tangent) {
          up.decided = false;
          up.note = "tangency with the exceptional line undetermined";
        }
      }
      out.push_back(up);
    }
  }
  return out;
}

}  // namespace

CurveGermReport analyze_curve_germ(const TruncatedSeries& s, int depth_budget) {
  CurveGermReport rep;
  int m = s.order();
  if (m < 0) zero_err();
  rep.multiplicity = m;
  rep.tangent_factors = factor_tangent_cone(s);
  if (m == 1) {
    rep.branches.push_back({0, true, true, 0, ""});
    rep.all_decided = true;
    rep.pairwise_transversal = true;
    return rep;
  }
  // walk the factors the same way resolve() does, tracking factor indices
  std::vector<int> per_factor(rep.tangent_factors.size(), 0);
  for (size_t fi = 0; fi < rep.tangent_factors.size(); ++fi) {
    auto& f = rep.tangent_factors[fi];
    std::vector<SubBranch> subs;
    if (f.kind == TangentFactor::Block) {
      if (f.exponent == 1)
        subs.assign((size_t)f.degree, {true, true, 0, std::nullopt, ""});
      else
        subs.push_back({false, false, 0, std::nullopt, "repeated irrational tangent"});
    } else if (f.exponent == 1) {
      subs.push_back({true, true, 0, std::nullopt, ""});
    } else if (depth_budget == 0) {
      subs.push_back({false, false, 0, std::nullopt, "depth budget exhausted"});
    } else {
      TruncatedSeries h;
      LineDir exc{0, 0};
      if (f.kind == TangentFactor::AxisU) {
        h = blowup_curve_germ(s, Chart::V).strict;
        exc = {0, 1};
      } else {
        h = blowup_curve_germ(s, Chart::U).strict.shift_v(f.t);
        exc = {1, 0};
      }
      for (auto& b : resolve(h, depth_budget - 1)) {
        SubBranch up = b;
        up.depth = b.depth + 1;
        if (b.decided && b.smooth) {
          bool transversal = b.tangent && !(*b.tangent == exc);
          up.smooth = transversal;
          if (!b.tangent) {
            up.decided = false;
            up.note = "tangency with the exceptional line undetermined";
          }
        }
        subs.push_back(up);
      }
    }
    for (auto& b : subs) {
      rep.branches.push_back({(int)fi, b.smooth, b.decided, b.depth, b.note});
      rep.resolution_depth_used = std::max(rep.resolution_depth_used, b.depth);
      ++per_factor[fi];
    }
  }
  rep.all_decided = std::all_of(rep.branches.begin(), rep.branches.end(),
                                [](const BranchReport& b) { return b.decided; });
  rep.pairwise_transversal = rep.all_decided;
  for (size_t fi = 0; fi < rep.tangent_factors.size(); ++fi) {
    auto& f = rep.tangent_factors[fi];
    int expected = f.kind == TangentFactor::Block && f.exponent == 1 ? f.degree : 1;
    if (per_factor[fi] != expected) rep.pairwise_transversal = false;
    if (f.kind == TangentFactor::Block && f.exponent > 1)
      rep.pairwise_transversal = false;
  }
  return rep;
}

bool is_perfect_square_form(const TruncatedSeries& form, int degree) {
  Poly p = form_to_poly(form, degree);
  int d = pdeg(p);
  if (d < 0) return true;
  if ((degree - d) % 2 != 0) return false;  // odd power of u
  int low = 0;
  while (p[low] == 0) ++low;
  if (low % 2 != 0) return false;  // odd power of v
  Poly q(p.begin() + low, p.end());
  int dq = pdeg(q);
  if (dq % 2 != 0) return false;
  Rat lc = q[dq];
  for (auto& x : q) x /= lc;
  return monic_sqrt(q).has_value();
}

}  // namespace qcb
