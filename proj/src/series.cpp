#include "qcb/series.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

namespace qcb {

namespace {

[[noreturn]] void bad(const std::string& m) {
  throw SeriesError(SeriesError::BadParameter, m);
}

}  // namespace

TruncatedSeries TruncatedSeries::constant(const Rat& x, int N) {
  TruncatedSeries s(N);
  s.set(0, 0, x);
  return s;
}

TruncatedSeries TruncatedSeries::monomial(int i, int j, const Rat& coef, int N) {
  TruncatedSeries s(N);
  s.set(i, j, coef);
  return s;
}

Rat TruncatedSeries::coef(int i, int j) const {
  auto it = c.find({i, j});
  return it == c.end() ? Rat(0) : it->second;
}

void TruncatedSeries::set(int i, int j, const Rat& x) {
  if (i < 0 || j < 0) bad("negative exponent");
  if (i + j > N) return;
  if (x == 0)
    c.erase({i, j});
  else
    c[{i, j}] = x;
}

int TruncatedSeries::order() const {
  int best = -1;
  for (auto& [ij, x] : c) {
    int d = ij.first + ij.second;
    if (best < 0 || d < best) best = d;
  }
  return best;
}

TruncatedSeries TruncatedSeries::leading_form() const {
  TruncatedSeries out(N);
  int d = order();
  if (d < 0) return out;
  for (auto& [ij, x] : c)
    if (ij.first + ij.second == d) out.c[ij] = x;
  out.weight = weight;
  return out;
}

TruncatedSeries TruncatedSeries::truncate(int newN) const {
  TruncatedSeries out(std::min(N, newN));
  for (auto& [ij, x] : c)
    if (ij.first + ij.second <= out.N) out.c[ij] = x;
  out.weight = weight;
  return out;
}

TruncatedSeries TruncatedSeries::shift_v(const Rat& t) const {
  TruncatedSeries out(N);
  for (auto& [ij, x] : c) {
    auto [i, j] = ij;
    // v^j -> (v+t)^j
    std::vector<Rat> pow_t(j + 1);
    pow_t[0] = 1;
    for (int l = 1; l <= j; ++l) pow_t[l] = pow_t[l - 1] * t;
    Rat ch = 1;
    for (int l = j; l >= 0; --l) {
      out.set(i, l, out.coef(i, l) + x * ch * pow_t[j - l]);
      // C(j, l-1) = C(j, l) * l / (j - l + 1)
      if (l > 0) ch = ch * l / (j - l + 1);
    }
  }
  return out;
}

void TruncatedSeries::check_weight() const {
  if (!weight) return;
  for (auto& [ij, x] : c) {
    Int w = imod(ij.first * weight->wu + ij.second * weight->wv, weight->r);
    if (w != imod(weight->residue, weight->r))
      throw SeriesError(SeriesError::WeightMismatch,
                        "monomial u^" + std::to_string(ij.first) + " v^" +
                            std::to_string(ij.second) +
                            " violates the declared weight");
  }
}

TruncatedSeries TruncatedSeries::with_weight(const WeightTag& w) const {
  TruncatedSeries out = *this;
  out.weight = w;
  out.check_weight();
  return out;
}

std::string TruncatedSeries::str() const {
  std::ostringstream s;
  for (auto& [ij, x] : c)
    s << ij.first << " " << ij.second << " " << x.str() << "\n";
  return s.str();
}

TruncatedSeries TruncatedSeries::parse(const std::string& text, int N) {
  TruncatedSeries out(N);
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int i, j;
    std::string frac;
    if (!(ls >> i >> j >> frac)) bad("malformed series line: " + line);
    out.set(i, j, out.coef(i, j) + Rat(frac));
  }
  return out;
}

namespace {

std::optional<WeightTag> add_weight(const TruncatedSeries& a,
                                    const TruncatedSeries& b) {
  if (!a.weight || !b.weight) return std::nullopt;
  if (!a.weight->compatible(*b.weight) ||
      imod(a.weight->residue, a.weight->r) != imod(b.weight->residue, b.weight->r))
    throw SeriesError(SeriesError::WeightMismatch,
                      "adding series of different weights");
  return a.weight;
}

std::optional<WeightTag> mul_weight(const TruncatedSeries& a,
                                    const TruncatedSeries& b) {
  if (!a.weight || !b.weight) return std::nullopt;
  if (!a.weight->compatible(*b.weight))
    throw SeriesError(SeriesError::WeightMismatch,
                      "multiplying series under different group actions");
  WeightTag w = *a.weight;
  w.residue = imod(a.weight->residue + b.weight->residue, w.r);
  return w;
}

}  // namespace

TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b) {
  TruncatedSeries out(std::min(a.N, b.N));
  out.weight = add_weight(a, b);
  for (auto& [ij, x] : a.c)
    if (ij.first + ij.second <= out.N) out.c[ij] = x;
  for (auto& [ij, x] : b.c) out.set(ij.first, ij.second, out.coef(ij.first, ij.second) + x);
  return out;
}

TruncatedSeries operator-(const TruncatedSeries& a) {
  TruncatedSeries out = a;
  for (auto& [ij, x] : out.c) x = -x;
  return out;
}

TruncatedSeries operator-(const TruncatedSeries& a, const TruncatedSeries& b) {
  return a + (-b);
}

TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
  TruncatedSeries out(std::min(a.N, b.N));
  out.weight = mul_weight(a, b);
  for (auto& [ij, x] : a.c)
    for (auto& [kl, y] : b.c) {
      int i = ij.first + kl.first, j = ij.second + kl.second;
      if (i + j <= out.N) out.set(i, j, out.coef(i, j) + x * y);
    }
  return out;
}

TruncatedSeries operator*(const Rat& x, const TruncatedSeries& a) {
  TruncatedSeries out = a;
  if (x == 0) return TruncatedSeries::zero(a.N);
  for (auto& [ij, y] : out.c) y = x * y;
  return out;
}

TruncatedSeries spow(const TruncatedSeries& a, int k) {
  if (k < 0) bad("negative series power");
  TruncatedSeries out = TruncatedSeries::one(a.N);
  if (a.weight)
    out.weight = WeightTag{a.weight->r, a.weight->wu, a.weight->wv, 0};
  for (int i = 0; i < k; ++i) out = out * a;
  return out;
}

namespace {

// homogeneous form as u^(d-k) v^k coefficients -> poly in t = v/u
std::vector<Rat> form_poly(const TruncatedSeries& f, int d) {
  std::vector<Rat> p(d + 1, Rat(0));
  for (auto& [ij, x] : f.c) p[ij.second] = x;
  return p;
}

// exact univariate division a / b over Q; nullopt if not divisible
std::optional<std::vector<Rat>> poly_divide(std::vector<Rat> a,
                                            const std::vector<Rat>& b) {
  int db = (int)b.size() - 1;
  while (db >= 0 && b[db] == 0) --db;
  if (db < 0) return std::nullopt;
  int da = (int)a.size() - 1;
  while (da >= 0 && a[da] == 0) --da;
  if (da < 0) return std::vector<Rat>{};
  if (da < db) return std::nullopt;
  std::vector<Rat> q(da - db + 1, Rat(0));
  for (int k = da - db; k >= 0; --k) {
    Rat coef = a[k + db] / b[db];
    q[k] = coef;
    for (int i = 0; i <= db; ++i) a[k + i] -= coef * b[i];
  }
  for (auto& x : a)
    if (x != 0) return std::nullopt;
  return q;
}

// divide homogeneous forms F (degree p) / G (degree m); nullopt if inexact
std::optional<TruncatedSeries> form_divide(const TruncatedSeries& F, int p,
                                           const TruncatedSeries& G, int m,
                                           int N) {
  auto f = form_poly(F, p), g = form_poly(G, m);
  int lf = 0, lg = 0;  // v-adic orders
  while (lf <= p && f[lf] == 0) ++lf;
  while (lg <= m && g[lg] == 0) ++lg;
  if (lf < lg) return std::nullopt;
  // u-adic orders
  int dfu = 0, dgu = 0;
  for (int k = p; k >= 0; --k)
    if (f[k] != 0) { dfu = p - k; break; }
  for (int k = m; k >= 0; --k)
    if (g[k] != 0) { dgu = m - k; break; }
  if (dfu < dgu) return std::nullopt;
  auto q = poly_divide(f, g);
  if (!q) return std::nullopt;
  TruncatedSeries out(N);
  int dq = p - m;
  for (int k = 0; k < (int)q->size(); ++k)
    if ((*q)[k] != 0) {
      if (dq - k < 0) return std::nullopt;
      out.set(dq - k, k, (*q)[k]);
    }
  return out;
}

}  // namespace

bool equal_up_to_unit(const TruncatedSeries& a, const TruncatedSeries& b) {
  if (a.is_zero() || b.is_zero()) return a.is_zero() == b.is_zero();
  int ma = a.order(), mb = b.order();
  if (ma != mb) return false;
  // solve a = b * q degree by degree; a ~ b iff q exists and is a unit
  int qn = std::min(a.N, b.N) - mb;
  TruncatedSeries q(qn), r = a.truncate(std::min(a.N, b.N));
  TruncatedSeries bb = b.truncate(r.N);
  bb.weight.reset();
  r.weight.reset();
  while (!r.is_zero()) {
    int d = r.order();
    if (d - mb > qn) break;  // beyond trusted truncation
    auto h = form_divide(r.leading_form(), d, bb.leading_form(), mb, qn);
    if (!h) return false;
    q = q + *h;
    r = r - bb * *h;
    r = r.truncate(r.N);
  }
  return q.order() == 0;
}

}  // namespace qcb
