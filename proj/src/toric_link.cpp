// Execution and verification of the elementary links over a T(r,a) fiber germ
// on the toric model: Kawamata blowup of one or both non-Gorenstein points,
// then the K-MMP over the base by wall flips/flops, then reading off the new
// fiber germs and the crepant base modification.
#include "qcb/lattice.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace qcb {

namespace {

struct BaseCone {
  IVec r1, r2;                 // canonical NZ coords, ordered from the u-axis
  std::vector<size_t> over;    // indices of X-cones lying over it
  Int index;
};

IVec project(const RefinedLattice& N, const RefinedLattice& NZ, const IVec& c) {
  QVec p = N.to_std(c);
  QVec q = {p[1], p[2]};
  auto img = NZ.from_std(q);
  if (!img) throw std::logic_error("projection image not in base lattice");
  return *img;
}

// T-parameter of a terminal cyclic quotient cone: min(a, r-a) for 1/r(1,a,-a)
Int t_param(const RefinedLattice& N, const Cone& c) {
  ConeQuotient q = cone_quotient(N, c);
  if (q.r == 1) return 0;
  for (Int t = 1; t < q.r; ++t) {
    IVec cv(3);
    for (int i = 0; i < 3; ++i) cv[i] = imod(t * q.bary[i], q.r);
    for (int i = 0; i < 3; ++i)
      if (cv[i] == 1 && cv[(i + 1) % 3] + cv[(i + 2) % 3] == q.r) {
        Int x = cv[(i + 1) % 3];
        return std::min(x, Int(q.r - x));
      }
  }
  throw ToricError(ToricError::NotTerminalCyclic, "cone is not of type 1/r(1,a,-a)");
}

}  // namespace

VerifiedLink run_T_link(long rl, long al, TCenter center) {
  Int r = rl, a = al;
  if (r < 2 || a <= 0 || a >= r || igcd(r, a) != 1)
    throw std::invalid_argument("run_T_link: need 0 < a < r with gcd(r,a) = 1");
  if (center == TCenter::Both && !(2 * a < r))
    throw std::invalid_argument("run_T_link: two-center link needs a < r/2");

  VerifiedLink out;
  out.r = r;
  out.a = a;
  std::ostringstream log;
  bool ok = true;
  auto fail = [&](const std::string& m) {
    ok = false;
    log << "FAIL " << m << "; ";
  };

  // X: (P^1 x C^2)-germ divided by mu_r(1,a,-a): lattice Z^3 + Z*(1/r)(1,a,r-a)
  RefinedLattice N =
      RefinedLattice::refined(3, {{Rat(1, r), Rat(a, r), Rat(r - a, r)}});
  RefinedLattice NZ = RefinedLattice::refined(2, {{Rat(a, r), Rat(r - a, r)}});
  auto cvt = [&](long x, long y, long z) {
    auto c = N.from_std({Rat(x), Rat(y), Rat(z)});
    if (!c) throw std::logic_error("standard vector not in lattice");
    return *c;
  };
  IVec e1 = cvt(1, 0, 0), me1 = cvt(-1, 0, 0), e2 = cvt(0, 1, 0), e3 = cvt(0, 0, 1);
  Fan fan;
  fan.N = N;
  fan.cones = {Cone{{e1, e2, e3}}, Cone{{me1, e2, e3}}};
  fan.ray_labels = {{e1, "x+"}, {me1, "x-"}, {e2, "u"}, {e3, "v"}};

  QuotientSingularity expectP =
      make_quotient_singularity(r, {Int(1), a, r - a});
  if (!(classify_cone(N, fan.cones[0]) == expectP) ||
      !(classify_cone(N, fan.cones[1]) == expectP))
    fail("initial cones are not both of type 1/r(1,a,-a)");

  Int d0 = fan_difficulty(fan);
  if (d0 != 2 * (r - 1)) fail("initial difficulty != 2(r-1)");
  out.difficulty_trace.push_back(d0);
  out.rho_trace.push_back((int)fan.rays().size() - 3);

  Wall central(e2, e3);
  out.k_dot_c_before = canonical_intersect(fan, central);
  if (out.k_dot_c_before != Rat(-2, r)) fail("K.C != -2/r on the central fiber");

  // Kawamata blowups
  std::vector<IVec> exc;
  std::vector<size_t> centers;
  if (center == TCenter::P || center == TCenter::Both) centers.push_back(0);
  if (center == TCenter::Q || center == TCenter::Both) centers.push_back(1);
  for (size_t i = 0; i < centers.size(); ++i) {
    // locate the center cone by membership of e1 / -e1
    const IVec& marker = centers[i] == 0 ? e1 : me1;
    Cone target;
    bool found = false;
    for (const auto& cc : fan.cones) {
      const auto& rs = cc.rays;
      if (std::find(rs.begin(), rs.end(), marker) != rs.end() &&
          std::find(rs.begin(), rs.end(), e2) != rs.end() &&
          std::find(rs.begin(), rs.end(), e3) != rs.end()) {
        target = cc;
        found = true;
        break;
      }
    }
    if (!found) throw std::logic_error("blowup center cone disappeared");
    IVec w = kawamata_ray(N, target);
    Rat disc = discrepancy_of_ray(N, target, w);
    if (disc != Rat(1, r)) fail("kawamata ray discrepancy != 1/r");
    out.discrepancy = disc;
    std::string lbl = centers.size() == 1 ? "E" : (i == 0 ? "E1" : "E2");
    Int db = fan_difficulty(fan);
    star_subdivide(fan, w, lbl);
    Int da = fan_difficulty(fan);
    if (da != db - 1) fail("blowup did not drop difficulty by exactly 1");
    exc.push_back(w);
    TLinkStep st;
    st.kind = TLinkStep::Blowup;
    st.k_dot_c = 0;
    st.d_before = db;
    st.d_after = da;
    out.steps.push_back(st);
    out.difficulty_trace.push_back(da);
    out.rho_trace.push_back((int)fan.rays().size() - 3);
  }
  out.exceptional = exc;

  auto e_degree = [&](const Wall& w) {
    Rat s = 0;
    for (const auto& e : exc) s += intersect_divisor_curve(fan, w, e);
    return s;
  };
  for (const auto& e : exc) out.e_dot_c.push_back(intersect_divisor_curve(fan, central, e));
  out.k_dot_c_after_blowup = canonical_intersect(fan, central);
  {
    Rat expect = out.k_dot_c_before;
    for (const auto& ec : out.e_dot_c) expect += ec / Rat(r);
    if (out.k_dot_c_after_blowup != expect)
      fail("K.C update formula violated after blowup");
  }

  // MMP over the base: flip K-negative small walls first, then flop K-zero
  // ones (never undoing a previous flop), until no small wall is left.
  std::set<Wall> flopped;
  for (int guard = 0; guard < 16 * rl; ++guard) {
    std::vector<Wall> kneg, kzero;
    for (const auto& w : interior_walls(fan)) {
      WallData d = wall_relation(fan, w);
      if (!d.small_contraction()) continue;
      Rat k = canonical_intersect(fan, w);
      if (k < 0)
        kneg.push_back(w);
      else if (k == 0 && !flopped.count(w))
        kzero.push_back(w);
      // K-positive small walls are antiflips: never executed
    }
    Wall pick;
    bool have = false;
    if (!kneg.empty()) {
      pick = *std::min_element(kneg.begin(), kneg.end());
      have = true;
    } else if (!kzero.empty()) {
      pick = *std::min_element(kzero.begin(), kzero.end());
      have = true;
    }
    if (!have) break;

    WallData d = wall_relation(fan, pick);
    Rat k = canonical_intersect(fan, pick);
    bool e_flip = e_degree(pick) > 0;  // surgery is a (-E)-flip
    // curves meeting the flipping curve: walls sharing a maximal cone
    std::vector<Wall> nearby;
    for (const auto& w : interior_walls(fan)) {
      if (w == pick) continue;
      WallData wd = wall_relation(fan, w);
      std::set<size_t> touching = {d.cone1, d.cone2};
      if (touching.count(wd.cone1) || touching.count(wd.cone2)) nearby.push_back(w);
    }
    std::map<Wall, Rat> before;
    for (const auto& w : nearby) before[w] = -e_degree(w);

    TLinkStep st;
    st.kind = k == 0 ? TLinkStep::Flop : TLinkStep::Flip;
    st.k_dot_c = k;
    st.d_before = fan_difficulty(fan);
    toric_flip(fan, pick);
    if (k == 0) flopped.insert(Wall(d.off1, d.off2));
    st.d_after = fan_difficulty(fan);
    if (k < 0 && st.d_after >= st.d_before) fail("flip did not decrease difficulty");
    if (k == 0 && st.d_after != st.d_before) fail("flop changed difficulty");
    if (e_flip) {
      auto walls_after = interior_walls(fan);
      for (const auto& [w, val] : before) {
        if (std::find(walls_after.begin(), walls_after.end(), w) == walls_after.end())
          continue;
        Rat after = -e_degree(w);
        st.e_monotone.emplace_back(val, after);
        if (after >= val) fail("(-E) degree did not strictly decrease across flip");
      }
    }
    out.steps.push_back(st);
    out.difficulty_trace.push_back(st.d_after);
    out.rho_trace.push_back((int)fan.rays().size() - 3);
  }

  // read off the base fan and the fiber germs
  std::map<std::pair<IVec, IVec>, BaseCone> bases;
  for (size_t k = 0; k < fan.cones.size(); ++k) {
    std::set<IVec> imgs;
    for (const auto& ray : fan.cones[k].rays) {
      IVec q = project(N, NZ, ray);
      if (!is_zero(q)) imgs.insert(primitive(q));
    }
    if (imgs.size() != 2) {
      fail("maximal cone does not project onto a 2-dimensional base cone");
      continue;
    }
    auto it = imgs.begin();
    IVec p1 = *it++, p2 = *it;
    // order the pair counterclockwise from the u-axis (std coords)
    QVec s1 = NZ.to_std(p1), s2 = NZ.to_std(p2);
    if (s1[0] * s2[1] - s1[1] * s2[0] < 0) std::swap(p1, p2);
    auto& bc = bases[{p1, p2}];
    bc.r1 = p1;
    bc.r2 = p2;
    bc.over.push_back(k);
  }
  std::vector<BaseCone> ordered;
  for (auto& [key, bc] : bases) {
    QVec s1 = NZ.to_std(bc.r1), s2 = NZ.to_std(bc.r2);
    Rat det = (s1[0] * s2[1] - s1[1] * s2[0]) / NZ.covolume();
    bc.index = numerator(det);
    if (denominator(det) != 1) fail("base cone index is not integral");
    ordered.push_back(bc);
  }
  std::sort(ordered.begin(), ordered.end(), [&](const BaseCone& x, const BaseCone& y) {
    QVec sx = NZ.to_std(x.r1), sy = NZ.to_std(y.r1);
    return sx[0] * sy[1] - sx[1] * sy[0] > 0;
  });
  for (const auto& bc : ordered) {
    out.base_split.push_back(bc.index);
    if (bc.over.size() != 2) {
      fail("fiber germ is not covered by exactly two maximal cones");
      continue;
    }
    // A-type check of the base point
    QuotientSingularity bs = classify_cone(NZ, Cone{{bc.r1, bc.r2}});
    if (bc.index > 1) {
      QuotientSingularity duval =
          make_quotient_singularity(bc.index, {Int(1), bc.index - 1});
      if (!(bs == duval)) fail("base point is not Du Val of type A");
    }
    const Cone& c1 = fan.cones[bc.over[0]];
    const Cone& c2 = fan.cones[bc.over[1]];
    Int fr = cone_index(c1);
    if (fr != cone_index(c2)) fail("the two points of a T-fiber have unequal index");
    if (fr != bc.index) fail("fiber point index differs from base index");
    TFiber f;
    f.r = fr;
    f.a = fr == 1 ? Int(0) : t_param(N, c1);
    out.fibers.push_back(f);
    // the fiber wall must be fiber-type with K.C = -2/r_i
    std::vector<IVec> shared;
    for (const auto& ray : c1.rays)
      if (std::find(c2.rays.begin(), c2.rays.end(), ray) != c2.rays.end())
        shared.push_back(ray);
    if (shared.size() != 2) {
      fail("fiber cones do not share a wall");
      continue;
    }
    Wall fw(shared[0], shared[1]);
    WallData wd = wall_relation(fan, fw);
    if (!wd.fiber_type()) fail("fiber wall is not of fiber type");
    if (canonical_intersect(fan, fw) != Rat(-2, fr))
      fail("fiber wall has K.C != -2/r_i");
  }

  // final difficulty must equal the sum over the new fibers
  Int dfinal = fan_difficulty(fan);
  Int expect_final = 0;
  for (const auto& f : out.fibers) expect_final += 2 * (f.r - 1);
  if (dfinal != expect_final) fail("final difficulty != sum over new fibers");
  // relative Picard rank over the new base must be 1
  int rho_final = (int)fan.rays().size() - (int)(ordered.size() + 1) - 1;
  if (rho_final != 1) fail("final model is not relatively minimal over the new base");

  out.final_fan = fan;
  out.ledger_ok = ok;
  out.ledger_detail = ok ? "ok" : log.str();
  return out;
}

}  // namespace qcb
