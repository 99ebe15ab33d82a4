#include "qcb/lattice.hpp"

#include <algorithm>
#include <sstream>

namespace qcb {

RefinedLattice RefinedLattice::standard(int rank) {
  RefinedLattice L;
  L.rank = rank;
  L.den = 1;
  L.basis.assign(rank, IVec(rank, 0));
  for (int i = 0; i < rank; ++i) L.basis[i][i] = 1;
  return L;
}

RefinedLattice RefinedLattice::refined(int rank, const std::vector<QVec>& extra) {
  Int den = 1;
  for (const auto& v : extra)
    for (const auto& q : v) {
      Int d = denominator(q);
      den = den / igcd(den, d) * d;
    }
  // generators: den * e_i and den * extra, columns of an n x (n+k) matrix
  IMat g(rank, IVec(rank + extra.size(), 0));
  for (int i = 0; i < rank; ++i) g[i][i] = den;
  for (size_t j = 0; j < extra.size(); ++j)
    for (int i = 0; i < rank; ++i) {
      Rat x = extra[j][i] * den;
      g[i][rank + j] = numerator(x);  // integral by construction
    }
  RefinedLattice L;
  L.rank = rank;
  L.den = den;
  L.basis = hnf_basis(std::move(g));
  return L;
}

QVec RefinedLattice::to_std(const IVec& c) const {
  QVec p(rank, 0);
  for (int i = 0; i < rank; ++i) {
    Int s = 0;
    for (int j = 0; j < rank; ++j) s += basis[i][j] * c[j];
    p[i] = Rat(s, den);
  }
  return p;
}

std::optional<IVec> RefinedLattice::from_std(const QVec& p) const {
  QMat a(rank, QVec(rank));
  QVec b(rank);
  for (int i = 0; i < rank; ++i) {
    for (int j = 0; j < rank; ++j) a[i][j] = Rat(basis[i][j]);
    b[i] = p[i] * den;
  }
  QVec x = qsolve(std::move(a), std::move(b));
  IVec c(rank);
  for (int i = 0; i < rank; ++i) {
    if (denominator(x[i]) != 1) return std::nullopt;
    c[i] = numerator(x[i]);
  }
  return c;
}

Rat RefinedLattice::covolume() const {
  IMat m = basis;
  Int d = idet(m);
  if (d < 0) d = -d;
  Rat den_pow = 1;
  for (int i = 0; i < rank; ++i) den_pow *= den;
  return Rat(d) / den_pow;
}

Int cone_index(const Cone& c) {
  const size_t n = c.rays.empty() ? 0 : c.rays[0].size();
  if (c.rays.size() != n)
    throw ToricError(ToricError::NonSimplicial, "cone is not full-dimensional simplicial");
  IMat m(n, IVec(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) m[i][j] = c.rays[j][i];
  Int d = idet(m);
  if (d == 0)
    throw ToricError(ToricError::NonSimplicial, "cone generators are dependent");
  return d < 0 ? Int(-d) : d;
}

ConeQuotient cone_quotient(const RefinedLattice& N, const Cone& c) {
  const int n = N.rank;
  if ((int)c.rays.size() != n)
    throw ToricError(ToricError::NonSimplicial, "cone is not full-dimensional simplicial");
  IMat g(n, IVec(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g[i][j] = c.rays[j][i];
  Int det = idet(g);
  if (det == 0)
    throw ToricError(ToricError::NonSimplicial, "cone generators are dependent");
  Int r = det < 0 ? Int(-det) : det;
  if (r == 1) return {Int(1), IVec(n, 0)};
  Smith s = smith(g);
  Int order = 1;
  for (size_t i = 0; i < s.divisors.size(); ++i) {
    order *= s.divisors[i];
    for (size_t j = i + 1; j < s.divisors.size(); ++j)
      if (igcd(s.divisors[i], s.divisors[j]) > 1)
        throw ToricError(ToricError::NonCyclicQuotient,
                         "cone quotient group is not cyclic");
  }
  // generator: U^-1 * (1,...,1), a lattice point generating N / <rays>
  QMat uq(n, QVec(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) uq[i][j] = Rat(s.u[i][j]);
  QVec ones(n, 1);
  QVec zq = qsolve(std::move(uq), std::move(ones));
  IVec z(n);
  for (int i = 0; i < n; ++i) z[i] = numerator(zq[i]);  // U unimodular
  // barycentric numerators: solve rays * alpha = z, alpha = bary / r
  QMat a(n, QVec(n));
  QVec b(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[i][j] = Rat(c.rays[j][i]);
    b[i] = Rat(z[i]);
  }
  QVec alpha = qsolve(std::move(a), std::move(b));
  IVec bary(n);
  for (int i = 0; i < n; ++i) {
    Rat num = alpha[i] * r;
    if (denominator(num) != 1)
      throw ToricError(ToricError::NonCyclicQuotient,
                       "quotient generator has non-integral barycentric data");
    bary[i] = imod(numerator(num), r);
  }
  return {r, bary};
}

QuotientSingularity make_quotient_singularity(const Int& r, IVec weights) {
  for (auto& w : weights) w = imod(w, r);
  if (r == 1) return {Int(1), IVec(weights.size(), 0)};
  IVec best;
  for (Int t = 1; t < r; ++t) {
    if (igcd(t, r) != 1) continue;
    IVec cand(weights.size());
    for (size_t i = 0; i < weights.size(); ++i) cand[i] = imod(t * weights[i], r);
    std::sort(cand.begin(), cand.end());
    if (best.empty() || cand < best) best = cand;
  }
  return {r, best};
}

QuotientSingularity classify_cone(const RefinedLattice& N, const Cone& c) {
  ConeQuotient q = cone_quotient(N, c);
  return make_quotient_singularity(q.r, q.bary);
}

std::string QuotientSingularity::str() const {
  if (r == 1) return "smooth";
  std::string s = "1/" + r.str() + "(";
  for (size_t i = 0; i < weights.size(); ++i) {
    if (i) s += ",";
    s += weights[i].str();
  }
  return s + ")";
}

IVec kawamata_ray(const RefinedLattice& N, const Cone& c) {
  ConeQuotient q = cone_quotient(N, c);
  const int n = N.rank;
  if (n != 3)
    throw ToricError(ToricError::NotTerminalCyclic, "kawamata ray needs a 3-dimensional cone");
  if (q.r == 1)
    throw ToricError(ToricError::NotTerminalCyclic, "smooth cone has no blowup center");
  IVec hit;
  for (Int t = 1; t < q.r; ++t) {
    IVec cvec(n);
    Int sum = 0;
    bool interior = true;
    for (int i = 0; i < n; ++i) {
      cvec[i] = imod(t * q.bary[i], q.r);
      if (cvec[i] == 0) interior = false;
      sum += cvec[i];
    }
    if (!interior) {
      // a group element on the cone boundary means a non-isolated quotient
      throw ToricError(ToricError::NotTerminalCyclic,
                       "quotient is not isolated: not of type 1/r(1,a,-a)");
    }
    if (sum <= q.r)
      throw ToricError(ToricError::NotTerminalCyclic,
                       "cone quotient is not terminal");
    if (sum == q.r + 1) hit = cvec;
  }
  if (hit.empty())
    throw ToricError(ToricError::NotTerminalCyclic,
                     "no discrepancy-1/r lattice point found");
  // ray = (1/r) * sum hit_i * v_i, integral in canonical coordinates
  IVec ray(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) ray[j] += hit[i] * c.rays[i][j];
  for (int j = 0; j < n; ++j) {
    if (ray[j] % q.r != 0)
      throw ToricError(ToricError::NotTerminalCyclic, "kawamata ray is not a lattice point");
    ray[j] /= q.r;
  }
  return primitive(std::move(ray));
}

Rat discrepancy_of_ray(const RefinedLattice& N, const Cone& c, const IVec& ray) {
  const int n = N.rank;
  QMat a(n, QVec(n));
  QVec b(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[i][j] = Rat(c.rays[j][i]);
    b[i] = Rat(ray[i]);
  }
  QVec alpha = qsolve(std::move(a), std::move(b));
  Rat sum = 0;
  for (int i = 0; i < n; ++i) {
    if (alpha[i] < 0)
      throw ToricError(ToricError::RayOutsideCone, "ray is outside the cone");
    sum += alpha[i];
  }
  return sum - 1;
}

std::vector<IVec> Fan::rays() const {
  std::set<IVec> s;
  for (const auto& c : cones)
    for (const auto& r : c.rays) s.insert(r);
  return {s.begin(), s.end()};
}

std::string Fan::serialize() const {
  std::vector<std::string> lines;
  for (const auto& c : cones) {
    std::vector<IVec> rs = c.rays;
    std::sort(rs.begin(), rs.end());
    std::string line;
    for (size_t i = 0; i < rs.size(); ++i) {
      if (i) line += ";";
      line += vec_str(rs[i]);
    }
    lines.push_back(line);
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

static std::optional<QVec> barycentric(const Cone& c, const IVec& ray) {
  const size_t n = ray.size();
  QMat a(n, QVec(n));
  QVec b(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) a[i][j] = Rat(c.rays[j][i]);
    b[i] = Rat(ray[i]);
  }
  QVec alpha = qsolve(std::move(a), std::move(b));
  for (const auto& x : alpha)
    if (x < 0) return std::nullopt;
  return alpha;
}

void star_subdivide(Fan& fan, const IVec& ray, const std::string& label) {
  std::vector<Cone> out;
  bool touched = false;
  for (const auto& c : fan.cones) {
    auto alpha = barycentric(c, ray);
    if (!alpha) {
      out.push_back(c);
      continue;
    }
    touched = true;
    for (size_t i = 0; i < c.rays.size(); ++i) {
      if ((*alpha)[i] == 0) continue;  // ray lies on the opposite facet
      Cone nc = c;
      nc.rays[i] = ray;
      out.push_back(std::move(nc));
    }
  }
  if (!touched)
    throw ToricError(ToricError::RayOutsideCone, "subdivision ray lies outside the fan");
  fan.cones = std::move(out);
  fan.ray_labels[ray] = label;
}

std::vector<Wall> interior_walls(const Fan& fan) {
  std::map<Wall, int> count;
  for (const auto& c : fan.cones)
    for (size_t i = 0; i < c.rays.size(); ++i)
      for (size_t j = i + 1; j < c.rays.size(); ++j)
        count[Wall(c.rays[i], c.rays[j])]++;
  std::vector<Wall> walls;
  for (const auto& [w, n] : count)
    if (n == 2) walls.push_back(w);
  return walls;
}

WallData wall_relation(const Fan& fan, const Wall& w) {
  std::vector<size_t> adj;
  for (size_t k = 0; k < fan.cones.size(); ++k) {
    const auto& rs = fan.cones[k].rays;
    bool h1 = std::find(rs.begin(), rs.end(), w.u1) != rs.end();
    bool h2 = std::find(rs.begin(), rs.end(), w.u2) != rs.end();
    if (h1 && h2) adj.push_back(k);
  }
  if (adj.size() < 2)
    throw ToricError(ToricError::BoundaryWall, "wall lies on the fan boundary");
  if (adj.size() > 2)
    throw ToricError(ToricError::NonSimplicial, "wall contained in more than two cones");
  auto off_ray = [&](size_t k) {
    for (const auto& r : fan.cones[k].rays)
      if (r != w.u1 && r != w.u2) return r;
    throw ToricError(ToricError::NonSimplicial, "degenerate cone");
  };
  WallData d;
  d.cone1 = adj[0];
  d.cone2 = adj[1];
  d.off1 = off_ray(adj[0]);
  d.off2 = off_ray(adj[1]);
  // solve off2 = x*off1 + y1*u1 + y2*u2
  const size_t n = w.u1.size();
  QMat a(n, QVec(n));
  QVec b(n);
  for (size_t i = 0; i < n; ++i) {
    a[i][0] = Rat(d.off1[i]);
    a[i][1] = Rat(w.u1[i]);
    a[i][2] = Rat(w.u2[i]);
    b[i] = Rat(d.off2[i]);
  }
  QVec x = qsolve(std::move(a), std::move(b));
  // relation: (-x0)*off1 + 1*off2 + (-x1)*u1 + (-x2)*u2 = 0
  Int den = 1;
  for (const auto& q : x) {
    Int dd = denominator(q);
    den = den / igcd(den, dd) * dd;
  }
  IVec rel = {numerator(Rat(-x[0]) * den), den, numerator(Rat(-x[1]) * den),
              numerator(Rat(-x[2]) * den)};
  Int g = vec_gcd(rel);
  for (auto& e : rel) e /= g;
  if (rel[0] <= 0)
    throw ToricError(ToricError::NonCompactCurve,
                     "adjacent cones lie on the same side of the wall");
  d.c_off1 = rel[0];
  d.c_off2 = rel[1];
  d.c_u1 = rel[2];
  d.c_u2 = rel[3];
  return d;
}

static Int wall_mult(const Wall& w) {
  // index of Z u1 + Z u2 inside the saturation of its span
  const size_t n = w.u1.size();
  IMat m(n, IVec(2));
  for (size_t i = 0; i < n; ++i) {
    m[i][0] = w.u1[i];
    m[i][1] = w.u2[i];
  }
  Smith s = smith(std::move(m));
  Int idx = 1;
  for (const auto& dv : s.divisors) idx *= dv;
  return idx;
}

Rat intersect_divisor_curve(const Fan& fan, const Wall& w, const IVec& ray) {
  WallData d = wall_relation(fan, w);
  Int mtau = wall_mult(w);
  Int msigma = cone_index(fan.cones[d.cone1]);
  Rat scale = Rat(mtau, msigma) / Rat(d.c_off1);
  // consistency across the wall: off2 must give the same scale
  Rat check = Rat(mtau, cone_index(fan.cones[d.cone2])) / Rat(d.c_off2);
  if (scale != check)
    throw ToricError(ToricError::NonCompactCurve, "inconsistent wall multiplicities");
  if (ray == d.off1) return scale * d.c_off1;
  if (ray == d.off2) return scale * d.c_off2;
  if (ray == w.u1) return scale * d.c_u1;
  if (ray == w.u2) return scale * d.c_u2;
  return 0;
}

Rat canonical_intersect(const Fan& fan, const Wall& w) {
  WallData d = wall_relation(fan, w);
  Int mtau = wall_mult(w);
  Rat scale = Rat(mtau, cone_index(fan.cones[d.cone1])) / Rat(d.c_off1);
  return -scale * Rat(d.c_off1 + d.c_off2 + d.c_u1 + d.c_u2);
}

void toric_flip(Fan& fan, const Wall& w) {
  WallData d = wall_relation(fan, w);
  if (!d.small_contraction())
    throw ToricError(ToricError::NotFlippable,
                     "wall curve is not a small extremal contraction");
  if (canonical_intersect(fan, w) > 0)
    throw ToricError(ToricError::AntiflipRejected,
                     "refusing to flip a K-positive wall");
  Cone n1{{d.off1, d.off2, w.u1}};
  Cone n2{{d.off1, d.off2, w.u2}};
  std::vector<Cone> out;
  for (size_t k = 0; k < fan.cones.size(); ++k) {
    if (k == d.cone1 || k == d.cone2) continue;
    out.push_back(fan.cones[k]);
  }
  out.push_back(std::move(n1));
  out.push_back(std::move(n2));
  fan.cones = std::move(out);
}

Int fan_difficulty(const Fan& fan) {
  Int d = 0;
  for (const auto& c : fan.cones) d += cone_index(c) - 1;
  return d;
}

}  // namespace qcb
