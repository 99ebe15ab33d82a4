// Symbolic calculus of fiber germs of Q-conic bundles: invariants, Kawamata
// blowup data, and the combinatorial rewrite rules of the elementary links.
#pragma once

#include "numeric.hpp"

#include <string>
#include <utility>
#include <vector>

namespace qcb {

struct GermError : std::runtime_error {
  enum Code { UnsupportedGerm, GorensteinNoMd, BadParameter } code;
  GermError(Code c, const std::string& m) : std::runtime_error(m), code(c) {}
};

enum class GermKind {
  Smooth,         // smooth fiber of a standard conic bundle
  Std,            // reduced degenerate fiber, smooth total space
  StdDoubleLine,  // double-line fiber, smooth total space
  IF,             // Gorenstein germ with one ordinary double point
  T,              // T(r,a)
  K2A,            // k2A(r), r odd
  IEv,
  IAv,
  IAvIAv,
  IIv,
  IIvIIv,
  ID,             // ID(m), m = rank of the quadratic part of theta
  // birational (non-fiber) germ tags carrying blowup data only
  K1A,
  K2Ag,           // k2A with general parameters (r,a,m,b,k)
  IC,
  IIB,
  KAD,
  K3A,
};

struct GermType {
  GermKind kind = GermKind::Smooth;
  Int r = 0, a = 0;           // T(r,a); K2A(r); K2Ag/IC/KAD/K3A index
  Int m = 0, b = 0, k = 0;    // ID: m and k; K2Ag: m, b, k
  int square = -1;            // ID(0): 1 square / 0 non-square / -1 undetermined

  bool operator==(const GermType& o) const {
    return kind == o.kind && r == o.r && a == o.a && m == o.m && b == o.b &&
           k == o.k && square == o.square;
  }
  std::string tag() const;
  static GermType parse(const std::string& tag);

  bool is_fiber_germ() const;
  bool gorenstein() const;
};

GermType germ_smooth();
GermType germ_std();
GermType germ_std_double_line();
GermType germ_IF();
GermType germ_T(Int r, Int a);         // r == 1 collapses to Smooth
GermType germ_K2A(Int r);              // r == 1 collapses to Std
GermType germ_IEv();
GermType germ_IAv();
GermType germ_IAvIAv();
GermType germ_IIv();
GermType germ_IIvIIv();
GermType germ_ID(Int m, Int k = 0, int square = -1);
GermType germ_K2Ag(Int r, Int a, Int m, Int b, Int k);
GermType germ_IC(Int r);
GermType germ_IIB();
GermType germ_KAD(Int r);
GermType germ_K3A(Int r);

// the same analytic germ: T(r,a) and T(r,r-a) coincide
bool germ_equivalent(const GermType& x, const GermType& y);

struct Difficulty {
  enum Kind { Exact, LowerBound, OneOrTwo } kind = Exact;
  Int value = 0;  // exact value, the lower bound, or 0 for the {1,2} case
  bool operator==(const Difficulty& o) const {
    return kind == o.kind && value == o.value;
  }
};

struct SingPoint {
  bool cyclic = true;
  Int r;         // index
  IVec weights;  // cyclic case: 1/r(weights)
  std::string cdv;  // non-cyclic case: "cA/2", "cAx/2", "cAx/4"
};

struct GermInvariants {
  Int base_index;
  Difficulty difficulty;
  std::vector<Rat> k_dot_c;  // per component of the central fiber
  std::vector<SingPoint> non_gorenstein_points;
};

GermInvariants germ_invariants(const GermType& g);

struct BlowupData {
  Int index;       // weights are (1/index)(w_1,...)
  IVec weights;
  Rat e_dot_c;     // per component of the proper transform of the fiber
  Rat k_tilde_dot_c;  // always <= 0
  bool unique = true;
  int num_choices = 1;
};

// `choice` selects among the available Kawamata blowups (0-based; only K2Ag
// and ID germs with two symmetric choices have more than one).
BlowupData kawamata_blowup_data(const GermType& g, int choice = 0);

// K-degree update under a weighted blowup of discrepancy 1/r
Rat k_after_blowup(const Rat& k_dot_c, const Int& r, const Rat& e_dot_c);

struct BaseModification {
  enum Kind {
    Crepant,                // A_{r-1} -> Gamma with A_{r1-1}, A_{r2-1}
    CrepantTwoCurves,       // A_{r-1} -> Gamma1+Gamma2 with three A points
    MinimalResolutionStep,  // minimal resolution of A_1
    WeightedBlowup,         // (1,a)-blowup of a smooth point; a == 1 ordinary
  } kind = WeightedBlowup;
  std::vector<Int> split;  // indices r_i of the residual points, in order
  Int weight_a = 1;
};

struct LinkStep {
  enum Kind { Flip, Flop } kind;
  int flipping_components = 1;
  int flipped_components = 1;
};

struct LinkResult {
  GermType germ;
  int choice = 0;
  BlowupData blowup;
  std::vector<LinkStep> steps;
  bool unspecified_tail = false;  // further flips possible but undetermined
  std::vector<std::pair<std::string, GermType>> new_fibers;  // slot -> germ
  BaseModification base_mod;
  enum DiscRule { ProperTransform, TotalPreimage, ProperPlusGamma, UnknownRule };
  DiscRule discriminant_rule = UnknownRule;
  std::vector<int> rho_trace;  // relative Picard ranks between blowup and contraction
};

LinkResult md_link(const GermType& g, int choice = 0);
// simultaneous blowup of both points of T(r,a), a < r/2
LinkResult md_link_both(const GermType& g);

struct LedgerReport {
  bool ok = false;
  Int d_start = 0;
  bool after_exact = false;  // d after blowup known exactly (cyclic center)
  Int d_after_blowup = 0;    // exact value or lower bound
  Int d_final = 0;
  Int min_flips = 0;
  Int base_sum_before = 0, base_sum_after = 0;
  std::string detail;
};

LedgerReport check_ledger(const LinkResult& link);

}  // namespace qcb
