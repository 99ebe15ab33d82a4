#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qcb/conic_family.hpp"

#include <random>

using namespace qcb;

namespace {

TruncatedSeries S(const std::string& text, int N = 10) {
  return TruncatedSeries::parse(text, N);
}

ConicFamily diag_family(const TruncatedSeries& a, const TruncatedSeries& b,
                        const TruncatedSeries& c, int N = 10) {
  ConicFamily fam;
  fam.N = N;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) fam.a[i][j] = TruncatedSeries::zero(N);
  fam.a[0][0] = a;
  fam.a[1][1] = b;
  fam.a[2][2] = c;
  return fam;
}

TruncatedSeries random_series(std::mt19937_64& rng, int N, bool unit) {
  std::uniform_int_distribution<int> coef(-3, 3);
  TruncatedSeries s(N);
  for (int i = 0; i <= N; ++i)
    for (int j = 0; i + j <= N; ++j) s.set(i, j, coef(rng));
  if (unit) s.set(0, 0, 1 + (coef(rng) > 0 ? 1 : 0));
  return s;
}

}  // namespace

TEST_CASE("series arithmetic") {
  auto u = TruncatedSeries::u(10), v = TruncatedSeries::v(10);
  CHECK(((u + v) * (u - v)).same_coeffs(u * u - v * v));
  CHECK(spow(u + v, 2).same_coeffs(u * u + 2 * (u * v) + v * v));
  CHECK((u * v).coef(1, 1) == 1);
  CHECK((u - u).is_zero());
  CHECK(TruncatedSeries::zero(10).order() == -1);
  CHECK((u * v).order() == 2);

  auto s = S("0 0 1\n1 0 2\n0 2 -1/3");
  CHECK(s.coef(0, 2) == Rat(-1, 3));
  CHECK(TruncatedSeries::parse(s.str(), 10).same_coeffs(s));

  // truncation: degree-11 products are dropped
  auto big = spow(u + v, 6) * spow(u, 6);
  CHECK(big.is_zero());
  CHECK(s.truncate(1).coef(0, 2) == 0);
  CHECK(s.truncate(1).coef(1, 0) == 2);

  // shift v -> v + t
  auto sh = (v * v - u * u * u).shift_v(Rat(2));
  CHECK(sh.coef(0, 0) == 4);
  CHECK(sh.coef(0, 1) == 4);
  CHECK(sh.coef(0, 2) == 1);
  CHECK(sh.coef(3, 0) == -1);
}

TEST_CASE("weight tags") {
  // mu_4 acting with wt(u)=1, wt(v)=3
  WeightTag wu{4, 1, 3, 1}, wv{4, 1, 3, 3};
  auto u = TruncatedSeries::u(10).with_weight(wu);
  auto v = TruncatedSeries::v(10).with_weight(wv);
  auto p = u * v;
  REQUIRE(p.weight.has_value());
  CHECK(p.weight->residue == 0);
  CHECK_THROWS_AS((void)(u + v), SeriesError);          // residues 1 vs 3
  CHECK_THROWS_AS((void)TruncatedSeries::u(10).with_weight(wv), SeriesError);
  // (u*u) has residue 2, (p*p) residue 0: must throw
  CHECK_THROWS_AS((void)(u * u + p * p), SeriesError);
  CHECK_NOTHROW((void)(u * u + u * u));

  // product residue is additive over 40 random tagged pairs
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> res(0, 3);
  for (int t = 0; t < 40; ++t) {
    int r1 = res(rng), r2 = res(rng);
    TruncatedSeries a(8), b(8);
    for (int i = 0; i <= 8; ++i)
      for (int j = 0; i + j <= 8; ++j) {
        if (imod(i + 3 * j, 4) == r1) a.set(i, j, res(rng) - 1);
        if (imod(i + 3 * j, 4) == r2) b.set(i, j, res(rng) - 1);
      }
    a = a.with_weight({4, 1, 3, r1});
    b = b.with_weight({4, 1, 3, r2});
    auto ab = a * b;
    REQUIRE(ab.weight.has_value());
    CHECK(ab.weight->residue == imod(Int(r1 + r2), 4));
    CHECK_NOTHROW(ab.check_weight());
  }
}

TEST_CASE("equality up to unit") {
  auto u = TruncatedSeries::u(10), v = TruncatedSeries::v(10);
  auto one = TruncatedSeries::one(10);
  CHECK(equal_up_to_unit(u * v, u * v * (one + u + v * v)));
  CHECK(equal_up_to_unit(u * v, Rat(-7) * (u * v)));
  CHECK(!equal_up_to_unit(u * v, u * u * v));
  CHECK(!equal_up_to_unit(u * v + v * v * v, u * v));
  CHECK(!equal_up_to_unit(u, v));
  CHECK(equal_up_to_unit(TruncatedSeries::zero(10), TruncatedSeries::zero(10)));
  CHECK(!equal_up_to_unit(u, TruncatedSeries::zero(10)));

  // random: s and unit*s agree; s and v*s do not
  std::mt19937_64 rng(5);
  for (int t = 0; t < 25; ++t) {
    auto s = random_series(rng, 8, false);
    if (s.is_zero()) continue;
    auto unit = random_series(rng, 8, true);
    CHECK(equal_up_to_unit(s, s * unit));
    CHECK(!equal_up_to_unit(s, s * TruncatedSeries::v(8)));
  }
}

TEST_CASE("series inverse") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    auto s = random_series(rng, 8, true);
    auto p = s * sinv(s);
    CHECK(p.same_coeffs(TruncatedSeries::one(8)));
  }
  CHECK_THROWS_AS((void)sinv(TruncatedSeries::u(8)), SeriesError);
}

TEST_CASE("curve germ blowups") {
  auto u = TruncatedSeries::u(10), v = TruncatedSeries::v(10);
  // v^2 - u^3: strict transform in the u-chart is vbar^2 - u
  auto cusp = v * v - u * u * u;
  auto bl = blowup_curve_germ(cusp, Chart::U);
  CHECK(bl.exc_mult == 2);
  CHECK(bl.strict.same_coeffs(S("0 2 1\n1 0 -1", 8)));
  // uv: u-chart strict is vbar
  auto node = blowup_curve_germ(u * v, Chart::U);
  CHECK(node.exc_mult == 2);
  CHECK(node.strict.same_coeffs(S("0 1 1", 8)));
  // a unit times u: exceptional multiplicity 1, strict a unit
  auto ax = blowup_curve_germ(u + u * u, Chart::U);
  CHECK(ax.exc_mult == 1);
  CHECK(ax.strict.order() == 0);
  // multiplicity is what the exceptional divisor absorbs
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    auto s = random_series(rng, 8, false);
    if (s.is_zero()) continue;
    CHECK(blowup_curve_germ(s, Chart::U).exc_mult == s.order());
    CHECK(blowup_curve_germ(s, Chart::V).exc_mult == s.order());
  }
}

TEST_CASE("tangent cones and branches") {
  auto u = TruncatedSeries::u(10), v = TruncatedSeries::v(10);

  // u(v^2 - u^2): three rational tangent lines, all smooth, transversal
  auto tri = u * (v * v - u * u);
  auto rep = analyze_curve_germ(tri);
  CHECK(rep.multiplicity == 3);
  CHECK(rep.branches.size() == 3);
  CHECK(rep.all_decided);
  CHECK(rep.pairwise_transversal);
  for (auto& b : rep.branches) CHECK(b.smooth);

  // u v^2: axis + a double line; not transversal
  auto rep2 = analyze_curve_germ(u * v * v);
  CHECK(rep2.multiplicity == 3);
  CHECK(rep2.tangent_factors.size() == 2);
  CHECK(!rep2.pairwise_transversal);

  // v^2 - u^4 = (v - u^2)(v + u^2): two smooth branches sharing a tangent
  auto rep3 = analyze_curve_germ(v * v - spow(u, 4));
  CHECK(rep3.multiplicity == 2);
  CHECK(rep3.branches.size() == 2);
  CHECK(rep3.all_decided);
  CHECK(!rep3.pairwise_transversal);
  for (auto& b : rep3.branches) CHECK(b.smooth);

  // cusp v^2 - u^3: one branch, singular
  auto rep4 = analyze_curve_germ(v * v - u * u * u);
  CHECK(rep4.multiplicity == 2);
  CHECK(rep4.branches.size() == 1);
  CHECK(rep4.all_decided);
  CHECK(!rep4.branches[0].smooth);

  // v^2 - 2u^2: irrational tangents, two conjugate smooth branches
  auto rep5 = analyze_curve_germ(v * v - 2 * (u * u));
  CHECK(rep5.multiplicity == 2);
  CHECK(rep5.branches.size() == 2);
  CHECK(rep5.pairwise_transversal);

  // unit stability: multiplicity and branch count survive a unit factor
  std::mt19937_64 rng(13);
  for (int t = 0; t < 10; ++t) {
    auto s = random_series(rng, 8, false);
    if (s.is_zero() || s.order() == 0) continue;
    auto unit = random_series(rng, 8, true);
    auto r1 = analyze_curve_germ(s), r2 = analyze_curve_germ(s * unit);
    CHECK(r1.multiplicity == r2.multiplicity);
    if (r1.all_decided && r2.all_decided)
      CHECK(r1.branches.size() == r2.branches.size());
  }
}

TEST_CASE("perfect square forms") {
  auto u = TruncatedSeries::u(10), v = TruncatedSeries::v(10);
  CHECK(is_perfect_square_form(spow(u + v, 2).leading_form(), 2));
  CHECK(is_perfect_square_form((u * u * v * v).leading_form(), 4));
  CHECK(!is_perfect_square_form((u * u + v * v).leading_form(), 2));
  CHECK(!is_perfect_square_form((u * u * u * v).leading_form(), 4));
  CHECK(is_perfect_square_form(spow(u * u + 2 * (u * v) - v * v, 2), 4));
}

TEST_CASE("determinant discriminants") {
  int N = 10;
  auto u = TruncatedSeries::u(N), v = TruncatedSeries::v(N);
  auto one = TruncatedSeries::one(N);
  CHECK(discriminant_det(diag_family(one, u, v)).same_coeffs(u * v));
  CHECK(discriminant_det(diag_family(one, one, one)).same_coeffs(one));

  // congruence by a unimodular change of conic coordinates preserves det
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> pick(0, 2);
  std::uniform_int_distribution<int> lam(-2, 2);
  for (int t = 0; t < 40; ++t) {
    ConicFamily fam;
    fam.N = 8;
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        auto s = random_series(rng, 8, i == j);
        fam.a[i][j] = s;
        fam.a[j][i] = s;
      }
    auto d = discriminant_det(fam);
    // P adds lambda * (row/col i) to (row/col j): det(P^T A P) = det(A)
    int i = pick(rng), j = pick(rng);
    if (i == j) continue;
    Rat l(lam(rng));
    ConicFamily g = fam;
    for (int k = 0; k < 3; ++k) {
      g.a[j][k] = fam.a[j][k] + l * fam.a[i][k];
    }
    SeriesMat3 h = g.a;
    for (int k = 0; k < 3; ++k) {
      h[k][j] = g.a[k][j] + l * g.a[k][i];
    }
    g.a = h;
    CHECK(discriminant_det(g).same_coeffs(d));
  }

  // non-symmetric input is rejected
  ConicFamily badfam = diag_family(one, u, v);
  badfam.a[0][1] = u;
  CHECK_THROWS_AS((void)discriminant_det(badfam), SeriesError);
}

TEST_CASE("index-2 discriminant oracle") {
  // theta1 = u, theta2 = v, q1 = x1^2 + x2^2, q2 = 2 x1 x2 + x3^2
  int N = 10;
  ConicFamily fam;
  fam.index2 = true;
  fam.N = N;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      fam.q1[i][j] = TruncatedSeries::zero(N);
      fam.q2[i][j] = TruncatedSeries::zero(N);
    }
  fam.theta1 = TruncatedSeries::u(N);
  fam.theta2 = TruncatedSeries::v(N);
  fam.q1[0][0] = TruncatedSeries::one(N);
  fam.q1[1][1] = TruncatedSeries::one(N);
  fam.q2[0][1] = TruncatedSeries::one(N);
  fam.q2[1][0] = TruncatedSeries::one(N);
  fam.q2[2][2] = TruncatedSeries::one(N);
  auto d = discriminant_index2(fam);
  auto u = TruncatedSeries::u(N), v = TruncatedSeries::v(N);
  CHECK(d.same_coeffs(u * (v * v - u * u)));

  // proportional central quadrics are rejected
  ConicFamily bad2 = fam;
  bad2.q2 = bad2.q1;
  CHECK_THROWS_AS((void)discriminant_index2(bad2), SeriesError);
}

TEST_CASE("sampled families are equivariant") {
  std::vector<GermType> shaped = {germ_IEv(),      germ_IAv(),
                                  germ_IAvIAv(),   germ_K2A(5),
                                  germ_K2A(7),     germ_ID(2),
                                  germ_ID(1, 2),   germ_ID(0, 2, 1),
                                  germ_ID(0, 3, 0)};
  for (auto& g : shaped) {
    for (std::uint64_t seed : {7ULL, 19ULL, 23ULL}) {
      auto fam = sample_family(g, seed, 8);
      CHECK_NOTHROW(fam.validate());
      if (g.kind == GermKind::ID) continue;  // no tabulated x-weights needed
      auto w = table_weights(g);
      CHECK(check_equivariance(fam, w));
    }
  }
  // ID uses the tabulated 3-variable action
  auto idw = table_weights(germ_ID(2));
  CHECK(check_equivariance(sample_family(germ_ID(2), 7, 8), idw));

  // equivariance detects a broken action: permute the u,v residues
  auto fam = sample_family(germ_IEv(), 7, 8);
  auto w = table_weights(germ_IEv());
  std::swap(w.u, w.v);
  CHECK(!check_equivariance(fam, w));

  // discriminant of the IEv sample is semi-invariant of residue 3 mod 4
  auto d = discriminant_index2(fam);
  REQUIRE(d.weight.has_value());
  CHECK(d.weight->r == 4);
  CHECK(d.weight->residue == 3);
  CHECK_NOTHROW(d.check_weight());
}

TEST_CASE("discriminant claims per fiber shape") {
  std::vector<GermType> shaped = {germ_smooth(),   germ_std(),
                                  germ_IF(),       germ_K2A(5),
                                  germ_IEv(),      germ_IAv(),
                                  germ_IAvIAv(),   germ_ID(2),
                                  germ_ID(1, 2),   germ_ID(1, 3),
                                  germ_ID(0, 2, 1), germ_ID(0, 2, 0),
                                  germ_ID(0, 3, 1), germ_ID(0, 3, 0)};
  for (auto& g : shaped) {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
      auto fam = sample_family(g, seed, 10);
      auto rep = verify_discriminant_claim(g, fam);
      INFO(g.tag(), " seed ", seed, ": ", rep.detail);
      CHECK(rep.status == ClaimReport::Pass);
    }
  }
  // undecided below the stated truncation bound
  auto low = sample_family(germ_IEv(), 1, 4);
  CHECK(verify_discriminant_claim(germ_IEv(), low).status ==
        ClaimReport::Undecided);
}

TEST_CASE("the index-2 single-component criterion is two-sided") {
  // the strict transform over the second discriminant component is smooth
  // exactly when xi_12 contains the monomial u
  int smooth_seen = 0, singular_seen = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto fam = sample_family(germ_IAv(), seed, 10);
    bool has_u = fam.q2[0][1].coef(1, 0) != 0;
    (has_u ? smooth_seen : singular_seen)++;
    CHECK(verify_discriminant_claim(germ_IAv(), fam).status ==
          ClaimReport::Pass);
  }
  CHECK(smooth_seen > 0);
  CHECK(singular_seen > 0);

  // force each side explicitly
  auto fam = sample_family(germ_IAv(), 2, 10);
  fam.q2[0][1].set(1, 0, 1);
  fam.q2[1][0].set(1, 0, 1);
  CHECK(verify_discriminant_claim(germ_IAv(), fam).status == ClaimReport::Pass);
  fam.q2[0][1].set(1, 0, 0);
  fam.q2[1][0].set(1, 0, 0);
  CHECK(verify_discriminant_claim(germ_IAv(), fam).status == ClaimReport::Pass);
}
