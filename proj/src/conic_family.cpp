#include "qcb/conic_family.hpp"

#include <random>
#include <sstream>

namespace qcb {

namespace {

[[noreturn]] void bad(const std::string& m) {
  throw SeriesError(SeriesError::BadParameter, m);
}

bool proportional_coeffs(const TruncatedSeries& a, const TruncatedSeries& b) {
  if (a.is_zero() || b.is_zero()) return a.is_zero() && b.is_zero();
  for (auto& [ij, x] : a.c)
    for (auto& [kl, y] : b.c)
      if (x * b.coef(ij.first, ij.second) != y * a.coef(kl.first, kl.second))
        return false;
  // supports must match
  for (auto& [ij, x] : a.c)
    if (b.coef(ij.first, ij.second) == 0) return false;
  for (auto& [ij, x] : b.c)
    if (a.coef(ij.first, ij.second) == 0) return false;
  return true;
}

}  // namespace

void ConicFamily::validate() const {
  auto sym = [](const SeriesMat3& m, const char* what) {
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        if (!m[i][j].same_coeffs(m[j][i]))
          bad(std::string(what) + " matrix is not symmetric");
  };
  if (!index2) {
    sym(a, "family");
    return;
  }
  sym(q1, "q1");
  sym(q2, "q2");
  if (theta1.coef(0, 0) != 0 || theta2.coef(0, 0) != 0)
    bad("index-2 family needs theta_i in the maximal ideal");
  // central quadrics q_i(.;0,0) must not be proportional: all 2x2 minors of
  // the 2x6 coefficient matrix vanish iff they are
  std::vector<Rat> x, y;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      x.push_back(q1[i][j].coef(0, 0));
      y.push_back(q2[i][j].coef(0, 0));
    }
  for (size_t s = 0; s < x.size(); ++s)
    for (size_t t = s + 1; t < x.size(); ++t)
      if (x[s] * y[t] - x[t] * y[s] != 0) return;
  bad("central quadrics of the index-2 family are proportional");
}

VarWeights table_weights(const GermType& g) {
  switch (g.kind) {
    case GermKind::IEv:
      return {4, {3, 1, 2, 1}, 1, 3};
    case GermKind::IAvIAv:
    case GermKind::IIvIIv:
      return {2, {1, 1, 0, 1}, 1, 1};
    case GermKind::IAv:
    case GermKind::IIv:
      return {2, {0, 1, 0, 1}, 1, 1};
    case GermKind::ID:
      return {2, {0, 1, 0}, 1, 1};
    case GermKind::K2A: {
      Int a = (g.r - 1) / 2;
      return {g.r, {a, g.r - 1, 0}, 1, g.r - 1};
    }
    default:
      bad("no tabulated action for " + g.tag());
  }
}

namespace {

// all monomial residues occurring in q[i][j] * x_i * x_j (+ theta * x4)
bool equation_semiinvariant(const SeriesMat3& q, const TruncatedSeries* theta,
                            const VarWeights& w) {
  std::optional<Int> res;
  auto feed = [&](const TruncatedSeries& s, const Int& xw) -> bool {
    for (auto& [ij, x] : s.c) {
      Int r = imod(xw + ij.first * w.u + ij.second * w.v, w.r);
      if (!res)
        res = r;
      else if (*res != r)
        return false;
    }
    return true;
  };
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (!feed(q[i][j], w.x[i] + w.x[j])) return false;
  if (theta) {
    if (w.x.size() < 4) return false;
    if (!feed(*theta, w.x[3])) return false;
  }
  return true;
}

}  // namespace

bool check_equivariance(const ConicFamily& fam, const VarWeights& w) {
  if (!fam.index2) return equation_semiinvariant(fam.a, nullptr, w);
  return equation_semiinvariant(fam.q1, &fam.theta1, w) &&
         equation_semiinvariant(fam.q2, &fam.theta2, w);
}

namespace {

TruncatedSeries det3(const SeriesMat3& m, int N) {
  auto strip = [&](TruncatedSeries s) {
    s.weight.reset();
    return s.truncate(N);
  };
  SeriesMat3 a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = strip(m[i][j]);
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
         a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

TruncatedSeries det3_weighted(const SeriesMat3& m, int N) {
  // keep the tags when every entry carries one; the determinant terms then
  // share a common residue automatically
  bool tagged = true;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (!m[i][j].weight && !m[i][j].is_zero()) tagged = false;
  if (!tagged) return det3(m, N);
  SeriesMat3 a = m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = a[i][j].truncate(N);
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
         a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

}  // namespace

TruncatedSeries discriminant_det(const ConicFamily& fam) {
  if (fam.index2) bad("general discriminant asked of an index-2 family");
  fam.validate();
  return det3(fam.a, fam.N);
}

TruncatedSeries discriminant_index2(const ConicFamily& fam) {
  if (!fam.index2) bad("index-2 discriminant asked of a general family");
  fam.validate();
  SeriesMat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      m[i][j] = fam.theta1 * fam.q2[i][j] - fam.theta2 * fam.q1[i][j];
  return det3_weighted(m, fam.N);
}

TruncatedSeries discriminant(const ConicFamily& fam) {
  return fam.index2 ? discriminant_index2(fam) : discriminant_det(fam);
}

TruncatedSeries sinv(const TruncatedSeries& s) {
  if (s.order() != 0) bad("series inverse needs a unit");
  Rat c0 = s.coef(0, 0);
  TruncatedSeries out = TruncatedSeries::constant(1 / c0, s.N);
  // Newton-free iteration: out_{d} fixes degrees up to d
  TruncatedSeries t = s;
  t.weight.reset();
  for (int d = 0; d < s.N; ++d) {
    TruncatedSeries err = TruncatedSeries::one(s.N) - t * out;
    out = out + (1 / c0) * err;
  }
  return out;
}

namespace {

struct Sampler {
  std::mt19937_64 rng;
  explicit Sampler(std::uint64_t seed) : rng(seed) {}
  Rat small(bool nonzero = false) {
    std::uniform_int_distribution<int> d(-3, 3);
    int x = d(rng);
    while (nonzero && x == 0) x = d(rng);
    return Rat(x);
  }
  // series with all monomials of residue `res` under mu_r(wu,wv), orders in
  // [lo, hi]
  TruncatedSeries weighted(const Int& r, const Int& wu, const Int& wv,
                           const Int& res, int lo, int hi, int N) {
    TruncatedSeries s(N);
    for (int d = lo; d <= std::min(hi, N); ++d)
      for (int i = 0; i <= d; ++i) {
        int j = d - i;
        if (imod(i * wu + j * wv, r) == imod(res, r)) s.set(i, j, small());
      }
    return s.with_weight(WeightTag{r, wu, wv, imod(res, r)});
  }
};

TruncatedSeries zero_w(const Int& r, const Int& wu, const Int& wv,
                       const Int& res, int N) {
  return TruncatedSeries::zero(N).with_weight(
      WeightTag{r, wu, wv, imod(res, r)});
}

TruncatedSeries const_w(const Rat& c, const Int& r, const Int& wu,
                        const Int& wv, int N) {
  return TruncatedSeries::constant(c, N).with_weight(WeightTag{r, wu, wv, 0});
}

}  // namespace

ConicFamily sample_family(const GermType& g, std::uint64_t seed, int N) {
  Sampler rnd(seed ^ 0x9e3779b97f4a7c15ULL);
  ConicFamily fam;
  fam.N = N;
  fam.shape = g;
  auto S = [&](int i, int j, const TruncatedSeries& s, SeriesMat3& m) {
    m[i][j] = s;
    m[j][i] = s;
  };
  auto U = TruncatedSeries::u(N);
  auto V = TruncatedSeries::v(N);
  auto One = TruncatedSeries::one(N);
  auto Zero = TruncatedSeries::zero(N);

  switch (g.kind) {
    case GermKind::Smooth: {
      for (int i = 0; i < 3; ++i) S(i, i, One, fam.a);
      S(0, 1, Zero, fam.a); S(0, 2, Zero, fam.a); S(1, 2, Zero, fam.a);
      return fam;
    }
    case GermKind::Std: {
      S(0, 0, One, fam.a); S(1, 1, One, fam.a); S(2, 2, U, fam.a);
      S(0, 1, Zero, fam.a); S(0, 2, Zero, fam.a); S(1, 2, Zero, fam.a);
      return fam;
    }
    case GermKind::IF: {
      S(0, 0, One, fam.a); S(1, 1, U, fam.a); S(2, 2, V, fam.a);
      S(0, 1, Zero, fam.a); S(0, 2, Zero, fam.a); S(1, 2, Zero, fam.a);
      return fam;
    }
    case GermKind::K2A: {
      // rigid shape x1^2 + u x2^2 + v x3^2
      auto w = table_weights(g);
      auto cw = [&](const TruncatedSeries& s, const Int& res) {
        return s.with_weight(WeightTag{w.r, w.u, w.v, imod(res, w.r)});
      };
      S(0, 0, cw(One, 0), fam.a);
      S(1, 1, cw(U, 1), fam.a);
      S(2, 2, cw(V, w.v), fam.a);
      S(0, 1, cw(Zero, 0), fam.a);
      S(0, 2, cw(Zero, 0), fam.a);
      S(1, 2, cw(Zero, 0), fam.a);
      return fam;
    }
    case GermKind::ID: {
      // x1^2 + x2^2 + theta(u,v) x3^2 with theta invariant (even degrees)
      TruncatedSeries theta(N);
      long k = g.k == 0 ? 0 : g.k.convert_to<long>();
      if (g.m == 2) {
        theta = U * U + V * V + rnd.weighted(2, 1, 1, 0, 4, N, N);
      } else if (g.m == 1) {
        theta = spow(V, (int)(2 * k)) - U * U;
      } else {
        if (k < 2) bad("ID(0) needs k >= 2");
        if (g.square == 1) {
          // theta_(2k) a perfect square
          TruncatedSeries h(N);
          for (int i = 0; i <= (int)k; ++i) h.set(i, (int)k - i, rnd.small());
          h.set((int)k, 0, rnd.small(true));
          theta = h * h + rnd.weighted(2, 1, 1, 0, 2 * (int)k + 2, N, N);
        } else if (g.square == 0) {
          while (true) {
            TruncatedSeries f(N);
            for (int i = 0; i <= 2 * (int)k; ++i)
              f.set(i, 2 * (int)k - i, rnd.small());
            f.set(2 * (int)k, 0, rnd.small(true));
            if (!is_perfect_square_form(f, 2 * (int)k)) {
              theta = f + rnd.weighted(2, 1, 1, 0, 2 * (int)k + 2, N, N);
              break;
            }
          }
        } else {
          bad("ID(0) sampler needs the squareness flag");
        }
      }
      theta = theta.with_weight(WeightTag{2, 1, 1, 0});
      S(0, 0, const_w(1, 2, 1, 1, N), fam.a);
      S(1, 1, const_w(1, 2, 1, 1, N), fam.a);
      S(2, 2, theta, fam.a);
      S(0, 1, zero_w(2, 1, 1, 0, N), fam.a);
      S(0, 2, zero_w(2, 1, 1, 0, N), fam.a);
      S(1, 2, zero_w(2, 1, 1, 0, N), fam.a);
      return fam;
    }
    case GermKind::IEv: {
      fam.index2 = true;
      Int r = 4, wu = 1, wv = 3;
      auto psi = rnd.weighted(r, wu, wv, 2, 2, N, N);
      auto xi11 = rnd.weighted(r, wu, wv, 2, 2, N, N);
      auto xi22 = rnd.weighted(r, wu, wv, 2, 2, N, N);
      auto xi13 = rnd.weighted(r, wu, wv, 3, 1, N, N);
      auto xi23 = rnd.weighted(r, wu, wv, 1, 1, N, N);
      fam.theta1 = U.with_weight({r, wu, wv, 1});
      fam.theta2 = V.with_weight({r, wu, wv, 3});
      // eq1: x1^2 + x2^2 + psi x3^2 + u x4
      S(0, 0, const_w(1, r, wu, wv, N), fam.q1);
      S(1, 1, const_w(1, r, wu, wv, N), fam.q1);
      S(2, 2, psi, fam.q1);
      S(0, 1, zero_w(r, wu, wv, 2, N), fam.q1);
      S(0, 2, zero_w(r, wu, wv, 1, N), fam.q1);
      S(1, 2, zero_w(r, wu, wv, 3, N), fam.q1);
      // eq2: 2 x1 x2 + x3^2 + xi11 x1^2 + xi22 x2^2 + 2 xi13 x1 x3 + 2 xi23 x2 x3 + v x4
      S(0, 1, const_w(1, r, wu, wv, N), fam.q2);
      S(2, 2, const_w(1, r, wu, wv, N), fam.q2);
      S(0, 0, xi11.with_weight({r, wu, wv, 2}), fam.q2);
      S(1, 1, xi22.with_weight({r, wu, wv, 2}), fam.q2);
      S(0, 2, xi13, fam.q2);
      S(1, 2, xi23, fam.q2);
      return fam;
    }
    case GermKind::IAvIAv: {
      fam.index2 = true;
      Int r = 2, wu = 1, wv = 1;
      auto phi = rnd.weighted(r, wu, wv, 0, 2, N, N);
      auto xi11 = rnd.weighted(r, wu, wv, 0, 2, N, N);
      auto xi12 = rnd.weighted(r, wu, wv, 0, 2, N, N);
      auto xi13 = rnd.weighted(r, wu, wv, 1, 1, N, N);
      auto xi23 = rnd.weighted(r, wu, wv, 1, 1, N, N);
      fam.theta1 = U.with_weight({r, wu, wv, 1});
      fam.theta2 = V.with_weight({r, wu, wv, 1});
      // eq1: x1^2 + x3^2 + phi x2^2 + u x4
      S(0, 0, const_w(1, r, wu, wv, N), fam.q1);
      S(2, 2, const_w(1, r, wu, wv, N), fam.q1);
      S(1, 1, phi, fam.q1);
      S(0, 1, zero_w(r, wu, wv, 0, N), fam.q1);
      S(0, 2, zero_w(r, wu, wv, 1, N), fam.q1);
      S(1, 2, zero_w(r, wu, wv, 1, N), fam.q1);
      // eq2: x2^2 + x3^2 + xi11 x1^2 + 2 xi12 x1 x2 + 2 xi13 x1 x3 + 2 xi23 x2 x3 + v x4
      S(1, 1, const_w(1, r, wu, wv, N), fam.q2);
      S(2, 2, const_w(1, r, wu, wv, N), fam.q2);
      S(0, 0, xi11, fam.q2);
      S(0, 1, xi12, fam.q2);
      S(0, 2, xi13, fam.q2);
      S(1, 2, xi23, fam.q2);
      return fam;
    }
    case GermKind::IAv: {
      fam.index2 = true;
      Int r = 2, wu = 1, wv = 1;
      auto phi = rnd.weighted(r, wu, wv, 0, 2, N, N);
      auto xi11 = rnd.weighted(r, wu, wv, 0, 2, N, N);
      auto xi22 = rnd.weighted(r, wu, wv, 0, 2, N, N);
      auto xi13 = rnd.weighted(r, wu, wv, 0, 2, N, N);
      auto xi12 = rnd.weighted(r, wu, wv, 1, 1, N, N);
      auto xi23 = rnd.weighted(r, wu, wv, 1, 1, N, N);
      fam.theta1 = U.with_weight({r, wu, wv, 1});
      fam.theta2 = V.with_weight({r, wu, wv, 1});
      // eq1: x1^2 + x2^2 + phi x3^2 + u x4
      S(0, 0, const_w(1, r, wu, wv, N), fam.q1);
      S(1, 1, const_w(1, r, wu, wv, N), fam.q1);
      S(2, 2, phi, fam.q1);
      S(0, 1, zero_w(r, wu, wv, 1, N), fam.q1);
      S(0, 2, zero_w(r, wu, wv, 0, N), fam.q1);
      S(1, 2, zero_w(r, wu, wv, 1, N), fam.q1);
      // eq2: x3^2 + xi11 x1^2 + xi22 x2^2 + 2 xi12 x1 x2 + 2 xi13 x1 x3 + 2 xi23 x2 x3 + v x4
      S(2, 2, const_w(1, r, wu, wv, N), fam.q2);
      S(0, 0, xi11, fam.q2);
      S(1, 1, xi22, fam.q2);
      S(0, 1, xi12, fam.q2);
      S(0, 2, xi13, fam.q2);
      S(1, 2, xi23, fam.q2);
      return fam;
    }
    default:
      throw GermError(GermError::UnsupportedGerm,
                      "no family shape for " + g.tag());
  }
}

namespace {

TruncatedSeries form3(std::initializer_list<std::tuple<int, int, int>> mono,
                      int N) {
  TruncatedSeries s(N);
  for (auto& [i, j, cc] : mono) s.set(i, j, cc);
  return s;
}

ClaimReport pass(int N, const std::string& d) {
  return {ClaimReport::Pass, d, N};
}
ClaimReport fail(int N, const std::string& d) {
  return {ClaimReport::Fail, d, N};
}
ClaimReport undecided(int N, const std::string& d) {
  return {ClaimReport::Undecided, d, N};
}

// quotient of a mu_2(1,0)-invariant chart series by u -> sqrt(ubar)
std::optional<TruncatedSeries> u_square_quotient(const TruncatedSeries& s) {
  TruncatedSeries out(s.N);
  for (auto& [ij, x] : s.c) {
    if (ij.first % 2 != 0) return std::nullopt;
    out.set(ij.first / 2, ij.second, x);
  }
  return out;
}

}  // namespace

ClaimReport verify_discriminant_claim(const GermType& g, const ConicFamily& fam) {
  const int N = fam.N;
  switch (g.kind) {
    case GermKind::IEv: {
      if (N < 5) return undecided(N, "truncation below the degree-5 bound");
      auto d = discriminant_index2(fam);
      auto lead = d.leading_form();
      if (d.order() != 3) return fail(N, "leading degree is not 3");
      auto expect = form3({{1, 2, 1}, {3, 0, -1}}, N);  // u(v^2 - u^2)
      if (!proportional_coeffs(lead, expect))
        return fail(N, "leading form is not u(v^2-u^2) up to scale");
      auto rep = analyze_curve_germ(d);
      if (!rep.all_decided) return undecided(N, "branch analysis undecided");
      if (rep.branches.size() != 3 || !rep.pairwise_transversal)
        return fail(N, "expected three transversal branches");
      for (auto& b : rep.branches)
        if (!b.smooth) return fail(N, "branch not smooth");
      return pass(N, "leading form u(v^2-u^2); three smooth transversal branches");
    }
    case GermKind::IAvIAv: {
      if (N < 5) return undecided(N, "truncation below the degree-5 bound");
      auto d = discriminant_index2(fam);
      auto lead = d.leading_form();
      if (d.order() != 3) return fail(N, "leading degree is not 3");
      auto expect = form3({{2, 1, 1}, {1, 2, -1}}, N);  // uv(u-v)
      if (!proportional_coeffs(lead, expect))
        return fail(N, "leading form is not uv(u-v) up to scale");
      auto rep = analyze_curve_germ(d);
      if (!rep.all_decided) return undecided(N, "branch analysis undecided");
      if (rep.branches.size() != 3 || !rep.pairwise_transversal)
        return fail(N, "expected three branches with disjoint proper transforms");
      for (auto& b : rep.branches)
        if (!b.smooth) return fail(N, "branch not smooth");
      return pass(N, "leading form uv(u-v); three smooth disjoint-on-blowup branches");
    }
    case GermKind::IAv: {
      if (N < 7) return undecided(N, "truncation below the degree-7 bound");
      auto d = discriminant_index2(fam);
      if (d.order() != 3) return fail(N, "leading degree is not 3");
      auto expect = form3({{1, 2, 1}}, N);  // u v^2
      if (!proportional_coeffs(d.leading_form(), expect))
        return fail(N, "leading form is not u v^2 up to scale");
      // Delta_1 = {u + ...}: the axis direction carries a single smooth branch
      auto rep = analyze_curve_germ(d);
      bool axis_ok = false;
      for (size_t fi = 0; fi < rep.tangent_factors.size(); ++fi)
        if (rep.tangent_factors[fi].kind == TangentFactor::AxisU &&
            rep.tangent_factors[fi].exponent == 1)
          axis_ok = true;
      if (!axis_ok) return fail(N, "Delta_1 is not a smooth transversal branch");
      // Delta_2' in the u-chart of the blowup, in mu_2(1,0)-quotient coordinates
      auto bl = blowup_curve_germ(d, Chart::U);
      if (bl.exc_mult != 3) return fail(N, "discriminant multiplicity is not 3");
      auto quot = u_square_quotient(bl.strict);
      if (!quot) return fail(N, "chart series is not mu_2-invariant");
      // Gamma-degree of Delta_2'
      int gdeg = -1;
      for (auto& [ij, x] : quot->c)
        if (ij.first == 0 && (gdeg < 0 || ij.second < gdeg)) gdeg = ij.second;
      if (gdeg != 2) return fail(N, "Delta_2'.Gamma is not 2");
      bool smooth = quot->order() == 1;
      bool xi12_has_u = fam.q2[0][1].coef(1, 0) != 0;
      if (smooth != xi12_has_u)
        return fail(N, std::string("smoothness of Delta_2' (") +
                           (smooth ? "smooth" : "singular") +
                           ") contradicts the xi_12-contains-u test");
      return pass(N, std::string("Delta_2'.Gamma=2; Delta_2' ") +
                         (smooth ? "smooth" : "singular") +
                         ", matching the xi_12 criterion");
    }
    case GermKind::ID: {
      auto d = discriminant_det(fam);
      auto theta = fam.a[2][2];
      if (!equal_up_to_unit(d, theta))
        return fail(N, "discriminant differs from theta");
      int ord = theta.order();
      auto lead = theta.leading_form();
      int rank = 0;
      if (ord == 2) {
        Rat a2 = lead.coef(2, 0), b2 = lead.coef(1, 1), c2 = lead.coef(0, 2);
        rank = (b2 * b2 - 4 * a2 * c2 == 0) ? 1 : 2;
      }
      if (Int(rank) != g.m) return fail(N, "rank of theta_(2) mismatch");
      if (g.m == 0) {
        long k = g.k.convert_to<long>();
        if (ord != 2 * k) return fail(N, "order of theta is not 2k");
        bool sq = is_perfect_square_form(lead, ord);
        if (sq != (g.square == 1))
          return fail(N, "squareness of theta_(2k) mismatch");
      }
      return pass(N, "discriminant equals theta; quadratic-part data match");
    }
    case GermKind::K2A: {
      auto d = discriminant_det(fam);
      auto uv = TruncatedSeries::monomial(1, 1, 1, N);
      if (!d.same_coeffs(uv)) return fail(N, "discriminant is not exactly uv");
      return pass(N, "rigid shape: discriminant uv");
    }
    case GermKind::IF: {
      auto d = discriminant_det(fam);
      auto rep = analyze_curve_germ(d);
      if (rep.multiplicity != 2 || rep.branches.size() != 2 ||
          !rep.pairwise_transversal)
        return fail(N, "expected a node of the discriminant");
      return pass(N, "nodal discriminant");
    }
    case GermKind::Std: {
      auto d = discriminant_det(fam);
      if (d.order() != 1) return fail(N, "discriminant is not smooth");
      return pass(N, "smooth discriminant");
    }
    case GermKind::Smooth: {
      auto d = discriminant_det(fam);
      if (d.order() != 0) return fail(N, "discriminant meets the origin");
      return pass(N, "discriminant avoids the point");
    }
    default:
      return undecided(N, "no stated discriminant claim for " + g.tag());
  }
}

}  // namespace qcb
