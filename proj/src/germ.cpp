#include "qcb/germ.hpp"

#include "qcb/lattice.hpp"

#include <map>
#include <regex>
#include <sstream>

namespace qcb {

namespace {

[[noreturn]] void bad(const std::string& m) {
  throw GermError(GermError::BadParameter, m);
}

GermType mk(GermKind k) {
  GermType g;
  g.kind = k;
  return g;
}

}  // namespace

GermType germ_smooth() { return mk(GermKind::Smooth); }
GermType germ_std() { return mk(GermKind::Std); }
GermType germ_std_double_line() { return mk(GermKind::StdDoubleLine); }
GermType germ_IF() { return mk(GermKind::IF); }
GermType germ_IEv() { return mk(GermKind::IEv); }
GermType germ_IAv() { return mk(GermKind::IAv); }
GermType germ_IAvIAv() { return mk(GermKind::IAvIAv); }
GermType germ_IIv() { return mk(GermKind::IIv); }
GermType germ_IIvIIv() { return mk(GermKind::IIvIIv); }
GermType germ_IIB() { return mk(GermKind::IIB); }

GermType germ_T(Int r, Int a) {
  if (r < 1) bad("T(r,a): r must be positive");
  if (r == 1) return germ_smooth();
  a %= r;
  if (a < 0) a += r;
  if (a == 0 || igcd(r, a) != 1) bad("T(r,a): need 0<a<r with gcd(r,a)=1");
  GermType g = mk(GermKind::T);
  g.r = r;
  g.a = a;
  return g;
}

GermType germ_K2A(Int r) {
  if (r < 1 || r % 2 == 0) bad("k2A(r): r must be odd and positive");
  if (r == 1) return germ_std();
  GermType g = mk(GermKind::K2A);
  g.r = r;
  return g;
}

GermType germ_ID(Int m, Int k, int square) {
  if (m < 0 || m > 2) bad("ID(m): m must be 0, 1 or 2");
  GermType g = mk(GermKind::ID);
  g.m = m;
  if (m == 2) return g;
  if (k < 2) bad("ID(m<2): need k >= 2");
  g.k = k;
  if (m == 0) g.square = square < 0 ? -1 : (square ? 1 : 0);
  return g;
}

GermType germ_K2Ag(Int r, Int a, Int m, Int b, Int k) {
  if (r < 2 || a < 1 || a >= r || igcd(r, a) != 1)
    bad("k2A*: need 0<a<r with gcd(r,a)=1");
  if (m < 1 || b < 1 || igcd(m, b) != 1) bad("k2A*: need gcd(m,b)=1, m,b>=1");
  if (r < m) bad("k2A*: need r >= m");
  if (k < 1) bad("k2A*: need k >= 1");
  if (a * m + b * r - m * r <= 0) bad("k2A*: need am+br-mr > 0");
  GermType g = mk(GermKind::K2Ag);
  g.r = r;
  g.a = a;
  g.m = m;
  g.b = b;
  g.k = k;
  return g;
}

GermType germ_IC(Int r) {
  if (r < 5 || r % 2 == 0) bad("IC(r): r must be odd and >= 5");
  GermType g = mk(GermKind::IC);
  g.r = r;
  return g;
}

GermType germ_KAD(Int r) {
  if (r < 3 || r % 2 == 0) bad("kAD(r): r must be odd and >= 3");
  GermType g = mk(GermKind::KAD);
  g.r = r;
  return g;
}

GermType germ_K3A(Int r) {
  if (r < 3 || r % 2 == 0) bad("k3A(r): r must be odd and >= 3");
  GermType g = mk(GermKind::K3A);
  g.r = r;
  return g;
}

bool GermType::is_fiber_germ() const {
  switch (kind) {
    case GermKind::K1A:
    case GermKind::K2Ag:
    case GermKind::IC:
    case GermKind::IIB:
    case GermKind::KAD:
    case GermKind::K3A:
      return false;
    default:
      return true;
  }
}

bool GermType::gorenstein() const {
  switch (kind) {
    case GermKind::Smooth:
    case GermKind::Std:
    case GermKind::StdDoubleLine:
    case GermKind::IF:
      return true;
    default:
      return false;
  }
}

std::string GermType::tag() const {
  std::ostringstream s;
  switch (kind) {
    case GermKind::Smooth: return "smooth";
    case GermKind::Std: return "std";
    case GermKind::StdDoubleLine: return "stdl";
    case GermKind::IF: return "IF";
    case GermKind::T: s << "T(" << r << "," << a << ")"; break;
    case GermKind::K2A: s << "k2A(" << r << ")"; break;
    case GermKind::IEv: return "IEv";
    case GermKind::IAv: return "IAv";
    case GermKind::IAvIAv: return "IAv+IAv";
    case GermKind::IIv: return "IIv";
    case GermKind::IIvIIv: return "IIv+IIv";
    case GermKind::ID:
      s << "ID(" << m;
      if (m < 2) s << ",k=" << k;
      if (m == 0 && square >= 0) s << (square ? ",sq" : ",nsq");
      s << ")";
      break;
    case GermKind::K1A: return "k1A";
    case GermKind::K2Ag:
      s << "k2A*(" << r << "," << a << "," << m << "," << b << "," << k << ")";
      break;
    case GermKind::IC: s << "IC(" << r << ")"; break;
    case GermKind::IIB: return "IIB";
    case GermKind::KAD: s << "kAD(" << r << ")"; break;
    case GermKind::K3A: s << "k3A(" << r << ")"; break;
  }
  return s.str();
}

GermType GermType::parse(const std::string& tag) {
  static const std::map<std::string, GermKind> plain = {
      {"smooth", GermKind::Smooth},   {"std", GermKind::Std},
      {"stdl", GermKind::StdDoubleLine}, {"IF", GermKind::IF},
      {"IEv", GermKind::IEv},         {"IAv", GermKind::IAv},
      {"IAv+IAv", GermKind::IAvIAv},  {"IIv", GermKind::IIv},
      {"IIv+IIv", GermKind::IIvIIv},  {"k1A", GermKind::K1A},
      {"IIB", GermKind::IIB}};
  if (auto it = plain.find(tag); it != plain.end()) return mk(it->second);

  std::smatch mm;
  static const std::regex re_T(R"(T\((\d+),(\d+)\))");
  static const std::regex re_k2a(R"(k2A\((\d+)\))");
  static const std::regex re_id(R"(ID\(([0-2])(?:,k=(\d+))?(?:,(sq|nsq))?\))");
  static const std::regex re_k2ag(R"(k2A\*\((\d+),(\d+),(\d+),(\d+),(\d+)\))");
  static const std::regex re_one(R"((IC|kAD|k3A)\((\d+)\))");
  if (std::regex_match(tag, mm, re_T))
    return germ_T(Int(mm[1].str()), Int(mm[2].str()));
  if (std::regex_match(tag, mm, re_k2a)) return germ_K2A(Int(mm[1].str()));
  if (std::regex_match(tag, mm, re_id)) {
    Int m(mm[1].str());
    Int k = mm[2].matched ? Int(mm[2].str()) : Int(0);
    int sq = mm[3].matched ? (mm[3].str() == "sq" ? 1 : 0) : -1;
    return germ_ID(m, k, sq);
  }
  if (std::regex_match(tag, mm, re_k2ag))
    return germ_K2Ag(Int(mm[1].str()), Int(mm[2].str()), Int(mm[3].str()),
                     Int(mm[4].str()), Int(mm[5].str()));
  if (std::regex_match(tag, mm, re_one)) {
    Int r(mm[2].str());
    if (mm[1].str() == "IC") return germ_IC(r);
    if (mm[1].str() == "kAD") return germ_KAD(r);
    return germ_K3A(r);
  }
  bad("unrecognized germ tag: " + tag);
}

bool germ_equivalent(const GermType& x, const GermType& y) {
  if (x.kind == GermKind::T && y.kind == GermKind::T)
    return x.r == y.r && (x.a == y.a || x.a == x.r - y.a);
  return x == y;
}

namespace {

SingPoint cyclic_point(const Int& r, IVec w) {
  auto q = make_quotient_singularity(r, w);
  SingPoint p;
  p.cyclic = true;
  p.r = q.r;
  p.weights = q.weights;
  return p;
}

SingPoint named_point(const std::string& cls, Int r) {
  SingPoint p;
  p.cyclic = false;
  p.r = r;
  p.cdv = cls;
  return p;
}

}  // namespace

GermInvariants germ_invariants(const GermType& g) {
  GermInvariants inv;
  switch (g.kind) {
    case GermKind::Smooth:
      inv = {1, {Difficulty::Exact, 0}, {Rat(-2)}, {}};
      break;
    case GermKind::Std:
      inv = {1, {Difficulty::Exact, 0}, {Rat(-1), Rat(-1)}, {}};
      break;
    case GermKind::StdDoubleLine:
      inv = {1, {Difficulty::Exact, 0}, {Rat(-1)}, {}};
      break;
    case GermKind::IF:
      inv = {1, {Difficulty::Exact, 0}, {Rat(-1), Rat(-1)}, {}};
      break;
    case GermKind::T:
      inv = {g.r,
             {Difficulty::Exact, 2 * (g.r - 1)},
             {Rat(-2, g.r)},
             {cyclic_point(g.r, {1, g.a, g.r - g.a}),
              cyclic_point(g.r, {g.r - 1, g.a, g.r - g.a})}};
      break;
    case GermKind::K2A: {
      Int a = (g.r - 1) / 2;
      inv = {g.r,
             {Difficulty::Exact, 2 * (g.r - 1)},
             {Rat(-1, g.r)},
             {cyclic_point(g.r, {a, g.r - 1, 1}),
              cyclic_point(g.r, {a + 1, 1, g.r - 1})}};
      break;
    }
    case GermKind::IEv:
      inv = {4, {Difficulty::Exact, 7}, {Rat(-1, 2)}, {cyclic_point(8, {5, 1, 3})}};
      break;
    case GermKind::IAv:
      inv = {2, {Difficulty::Exact, 3}, {Rat(-1, 2)}, {cyclic_point(4, {1, 1, 3})}};
      break;
    case GermKind::IAvIAv:
      inv = {2,
             {Difficulty::Exact, 3},
             {Rat(-1, 2), Rat(-1, 2)},
             {cyclic_point(4, {1, 1, 3})}};
      break;
    case GermKind::IIv:
      inv = {2, {Difficulty::LowerBound, 3}, {Rat(-1, 2)}, {named_point("cAx/4", 4)}};
      break;
    case GermKind::IIvIIv:
      inv = {2,
             {Difficulty::LowerBound, 3},
             {Rat(-1, 2), Rat(-1, 2)},
             {named_point("cAx/4", 4)}};
      break;
    case GermKind::ID: {
      Difficulty d;
      if (g.m == 2)
        d = {Difficulty::Exact, 1};
      else if (g.m == 1)
        d = {Difficulty::Exact, 2};
      else if (g.square == 1)
        d = {Difficulty::Exact, 2};
      else if (g.square == 0)
        d = {Difficulty::Exact, 1};
      else
        d = {Difficulty::OneOrTwo, 0};
      inv = {2, d, {Rat(-1)},
             {named_point(g.m > 0 ? "cA/2" : "cAx/2", 2)}};
      break;
    }
    default:
      throw GermError(GermError::UnsupportedGerm,
                      "invariants are tabulated for fiber germs only: " + g.tag());
  }
  return inv;
}

Rat k_after_blowup(const Rat& k_dot_c, const Int& r, const Rat& e_dot_c) {
  if (r < 1) bad("k_after_blowup: r must be positive");
  if (e_dot_c < 0) bad("k_after_blowup: E.C must be nonnegative");
  return k_dot_c + e_dot_c / Rat(r);
}

BlowupData kawamata_blowup_data(const GermType& g, int choice) {
  BlowupData d;
  auto check_choice = [&](int n) {
    d.num_choices = n;
    d.unique = n == 1;
    if (choice < 0 || choice >= n)
      bad("blowup choice " + std::to_string(choice) + " out of range for " +
          g.tag());
  };
  switch (g.kind) {
    case GermKind::T:
      check_choice(1);
      d.index = g.r;
      d.weights = {1, g.a, g.r - g.a};
      d.e_dot_c = 1;
      d.k_tilde_dot_c = Rat(-1, g.r);
      return d;
    case GermKind::K2A:
      check_choice(1);
      d.index = g.r;
      d.weights = {1, 2, g.r - 2};
      d.e_dot_c = Rat(1, 2);
      d.k_tilde_dot_c = Rat(-1, 2 * g.r);
      return d;
    case GermKind::IEv:
      check_choice(1);
      d.index = 8;
      d.weights = {5, 1, 3};
      d.e_dot_c = Rat(4, 5);
      d.k_tilde_dot_c = Rat(-2, 5);
      return d;
    case GermKind::IAv:
      check_choice(1);
      d.index = 4;
      d.weights = {1, 3, 1};
      d.e_dot_c = Rat(2, 3);
      d.k_tilde_dot_c = Rat(-1, 3);
      return d;
    case GermKind::IAvIAv:
      check_choice(1);
      d.index = 4;
      d.weights = {1, 1, 3};
      d.e_dot_c = Rat(2, 3);  // per fiber component
      d.k_tilde_dot_c = Rat(-1, 3);
      return d;
    case GermKind::ID:
      d.index = 2;
      if (g.m == 2) {
        check_choice(1);
        d.weights = {2, 1, 1, 1};
        d.e_dot_c = 1;
        d.k_tilde_dot_c = Rat(-1, 2);
      } else if (g.m == 1) {
        check_choice(2);  // two symmetric weightings
        d.weights = choice == 0 ? IVec{1, 3, 1, 2} : IVec{3, 1, 1, 2};
        d.e_dot_c = Rat(2, 3);
        d.k_tilde_dot_c = Rat(-2, 3);
      } else if (g.square == 0) {
        check_choice(1);
        d.weights = {g.k, g.k + 1, 1, 1};
        d.e_dot_c = Rat(2, g.k + 1);
        d.k_tilde_dot_c = Rat(-g.k, g.k + 1);
      } else if (g.square == 1) {
        check_choice(1);
        d.weights = {g.k + 2, g.k + 1, 1, 1};
        d.e_dot_c = Rat(2, g.k + 2);
        d.k_tilde_dot_c = Rat(-(g.k + 1), g.k + 2);
      } else {
        bad("ID(0): squareness of theta undetermined; no blowup data");
      }
      return d;
    case GermKind::IF:
      check_choice(1);  // ordinary blowup of the node
      d.index = 1;
      d.weights = {1, 1, 1};
      d.e_dot_c = 1;
      d.k_tilde_dot_c = 0;
      return d;
    case GermKind::IC:
      check_choice(1);
      d.index = g.r;
      d.weights = {2, g.r - 2, 1};
      d.e_dot_c = 1;
      d.k_tilde_dot_c = 0;
      return d;
    case GermKind::IIB:
      check_choice(1);
      d.index = 4;
      d.weights = {3, 2, 1, 5};
      d.e_dot_c = 1;
      d.k_tilde_dot_c = 0;
      return d;
    case GermKind::KAD:
    case GermKind::K3A:
      check_choice(1);
      d.index = g.r;
      d.weights = {2, 1, g.r - 2};
      d.e_dot_c = Rat(1, 2);
      d.k_tilde_dot_c = 0;
      return d;
    case GermKind::K2Ag: {
      check_choice((int)g.k.convert_to<long>());
      Int a0 = 0;  // inverse of a mod r
      for (Int t = 1; t < g.r; ++t)
        if (imod(t * g.a, g.r) == 1) { a0 = t; break; }
      Int ap = a0 + choice * g.r;
      Int delta = g.a * g.m + g.b * g.r - g.m * g.r;
      d.index = g.r;
      d.weights = {ap, g.k * g.r - ap, 1, g.r};
      d.e_dot_c = Rat(1, ap);
      d.k_tilde_dot_c = -Rat(ap * delta - g.m, ap * g.r * g.m);
      return d;
    }
    case GermKind::K1A:
      bad("k1A: blowup data varies with the singularity; not tabulated");
    default:
      throw GermError(GermError::GorensteinNoMd,
                      "no distinguished blowup center for " + g.tag());
  }
}

namespace {

LinkResult make_link(const GermType& g, int choice) {
  LinkResult res;
  res.germ = g;
  res.choice = choice;
  res.blowup = kawamata_blowup_data(g, choice);
  return res;
}

void fill_rho(LinkResult& res, int rho) {
  res.rho_trace.assign(res.steps.size() + 1, rho);
}

}  // namespace

LinkResult md_link(const GermType& g, int choice) {
  switch (g.kind) {
    case GermKind::Smooth:
    case GermKind::Std:
    case GermKind::StdDoubleLine:
      throw GermError(GermError::GorensteinNoMd,
                      "Gorenstein germ needs no modification: " + g.tag());
    case GermKind::IIv:
    case GermKind::IIvIIv:
      throw GermError(GermError::UnsupportedGerm,
                      "no rewrite rule for " + g.tag());
    default:
      if (!g.is_fiber_germ())
        throw GermError(GermError::UnsupportedGerm,
                        "no rewrite rule for birational germ " + g.tag());
      break;
  }

  LinkResult res = make_link(g, choice);
  switch (g.kind) {
    case GermKind::T: {
      res.steps = {{LinkStep::Flip, 1, 1}};
      Int a = g.a, b = g.r - g.a;
      res.new_fibers = {{"o1", germ_T(a, imod(b, a))},
                        {"o2", germ_T(b, imod(a, b))}};
      res.base_mod = {BaseModification::Crepant, {a, b}, 1};
      res.discriminant_rule = LinkResult::ProperTransform;
      break;
    }
    case GermKind::K2A:
      res.steps = {{LinkStep::Flip, 1, 1}};
      res.unspecified_tail = true;
      res.new_fibers = {{"o1", germ_K2A(g.r - 2)}, {"o2", germ_ID(2)}};
      res.base_mod = {BaseModification::Crepant, {g.r - 2, Int(2)}, 1};
      res.discriminant_rule = LinkResult::ProperPlusGamma;
      break;
    case GermKind::IEv:
      res.steps = {{LinkStep::Flip, 1, 1}};
      res.unspecified_tail = true;
      res.new_fibers = {{"o1", germ_K2A(3)}};
      res.base_mod = {BaseModification::Crepant, {Int(3), Int(1)}, 1};
      res.discriminant_rule = LinkResult::ProperTransform;
      break;
    case GermKind::IAvIAv:
      res.steps = {{LinkStep::Flip, 2, 1}};
      res.new_fibers = {{"o1", germ_IF()}};
      res.base_mod = {BaseModification::MinimalResolutionStep, {Int(1), Int(1)}, 1};
      res.discriminant_rule = LinkResult::ProperPlusGamma;
      break;
    case GermKind::IAv:
      // generic family: the total space has no extra Gorenstein singular point
      res.steps = {{LinkStep::Flip, 1, 1}};
      res.new_fibers = {{"o1", germ_IF()}};
      res.base_mod = {BaseModification::MinimalResolutionStep, {Int(1), Int(1)}, 1};
      res.discriminant_rule = LinkResult::TotalPreimage;
      break;
    case GermKind::ID: {
      res.steps = {{LinkStep::Flip, 1, 1}};
      res.new_fibers = {{"o1", germ_std()}};
      res.base_mod = {BaseModification::MinimalResolutionStep, {Int(1), Int(1)}, 1};
      bool total = g.m == 2 || (g.m == 0 && g.square == 0);
      res.discriminant_rule =
          total ? LinkResult::TotalPreimage : LinkResult::ProperTransform;
      break;
    }
    case GermKind::IF:
      res.steps = {{LinkStep::Flop, 1, 1}};
      res.new_fibers = {{"o1", germ_std()}};
      res.base_mod = {BaseModification::WeightedBlowup, {}, 1};
      res.discriminant_rule = LinkResult::ProperTransform;
      break;
    default:
      break;  // unreachable
  }
  fill_rho(res, 2);
  return res;
}

LinkResult md_link_both(const GermType& g) {
  if (g.kind != GermKind::T) bad("simultaneous link needs a T(r,a) germ");
  if (2 * g.a >= g.r) bad("simultaneous link needs a < r/2");
  LinkResult res = make_link(g, 0);
  res.steps = {{LinkStep::Flop, 1, 1}, {LinkStep::Flip, 1, 1}, {LinkStep::Flip, 1, 1}};
  Int a = g.a, mid = g.r - 2 * g.a;
  res.new_fibers = {{"o1", germ_T(a, imod(g.r, a))},
                    {"o2", germ_T(mid, imod(a, mid))},
                    {"o3", germ_T(a, imod(g.r, a))}};
  res.base_mod = {BaseModification::CrepantTwoCurves, {a, mid, a}, 1};
  res.discriminant_rule = LinkResult::ProperTransform;
  fill_rho(res, 3);
  return res;
}

LedgerReport check_ledger(const LinkResult& link) {
  LedgerReport rep;
  std::ostringstream out;
  bool ok = true;
  auto require = [&](bool cond, const std::string& msg) {
    if (!cond) {
      ok = false;
      out << "FAIL " << msg << "; ";
    }
  };

  GermInvariants inv = germ_invariants(link.germ);
  bool start_exact = inv.difficulty.kind == Difficulty::Exact;
  rep.d_start = inv.difficulty.value;

  // blowup phase: each Kawamata blowup of a cyclic center drops d by exactly 1
  int blowups =
      link.base_mod.kind == BaseModification::CrepantTwoCurves ? 2 : 1;
  bool cyclic_center = !inv.non_gorenstein_points.empty() &&
                       inv.non_gorenstein_points.front().cyclic;
  bool gorenstein = link.germ.gorenstein();

  rep.d_final = 0;
  for (auto& [slot, f] : link.new_fibers) {
    GermInvariants fi = germ_invariants(f);
    require(fi.difficulty.kind == Difficulty::Exact,
            "output fiber difficulty must be exact");
    rep.d_final += fi.difficulty.value;
    rep.base_sum_after += fi.base_index - 1;
  }
  rep.base_sum_before = inv.base_index - 1;

  for (auto& s : link.steps)
    if (s.kind == LinkStep::Flip) ++rep.min_flips;

  if (gorenstein) {
    // ordinary blowup: no divisors of discrepancy < 1 appear, flops preserve d
    rep.after_exact = true;
    rep.d_after_blowup = rep.d_start;
    require(rep.min_flips == 0, "Gorenstein link must be flip-free");
    require(rep.d_final == rep.d_start, "flops must preserve the difficulty");
  } else if (cyclic_center && start_exact) {
    rep.after_exact = true;
    rep.d_after_blowup = rep.d_start - blowups;
    require(rep.d_after_blowup >= rep.d_final + rep.min_flips,
            "flip chain needs d_after >= d_final + #flips");
    Int gap = rep.d_after_blowup - rep.d_final - rep.min_flips;
    if (ok && gap > 0)
      out << "slack " << gap
          << (link.unspecified_tail ? " (absorbed by unlisted flips or deeper drops); "
                                    : " (some flip drops d by more than 1); ");
  } else {
    // non-cyclic or lower-bound start: only d >= d_start - 1 after blowup
    rep.after_exact = false;
    Int lb = rep.d_start - blowups;
    if (lb < rep.d_final + rep.min_flips) lb = rep.d_final + rep.min_flips;
    rep.d_after_blowup = lb;
    out << "inequality-only check (non-cyclic center); ";
  }

  if (!gorenstein && start_exact)
    require(rep.d_final < rep.d_start,
            "total output difficulty must drop strictly");

  // base bookkeeping: crepant splits conserve the index
  if (link.base_mod.kind == BaseModification::Crepant ||
      link.base_mod.kind == BaseModification::MinimalResolutionStep ||
      link.base_mod.kind == BaseModification::CrepantTwoCurves) {
    Int sum = 0;
    for (auto& ri : link.base_mod.split) sum += ri;
    require(sum == inv.base_index, "crepant split must conserve the base index");
  }
  if (rep.base_sum_before > 0)
    require(rep.base_sum_after < rep.base_sum_before,
            "base measure sum(r_i - 1) must drop strictly");
  else
    require(rep.base_sum_after == 0, "smooth base must stay smooth");

  // flipping-curve component counts never increase along the chain
  int comp = 1 << 20;
  for (auto& s : link.steps) {
    require(s.flipping_components <= comp,
            "flip component counts must be non-increasing");
    comp = s.flipping_components;
  }

  rep.ok = ok;
  rep.detail = out.str();
  if (rep.detail.empty()) rep.detail = "ok";
  return rep;
}

}  // namespace qcb
