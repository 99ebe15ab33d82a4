// Refined lattices, simplicial cones and germ-local fans with exact integer
// arithmetic.  A refined lattice is Z^n enlarged by finitely many rational
// (torsion) generators; all points are stored in integer coordinates with
// respect to a canonical Hermite basis, so every downstream computation is
// integer- or rational-exact.
#pragma once

#include "numeric.hpp"

#include <map>
#include <set>
#include <string>

namespace qcb {

struct ToricError : std::runtime_error {
  enum Code {
    NonSimplicial,
    NonCyclicQuotient,
    NotTerminalCyclic,
    RayOutsideCone,
    BoundaryWall,
    NonCompactCurve,
    NotFlippable,
    AntiflipRejected,
    LedgerViolation,
  } code;
  ToricError(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

struct RefinedLattice {
  int rank = 0;
  Int den = 1;  // lattice = (1/den) * column lattice of `basis` in std coords
  IMat basis;   // rank x rank, columns form the canonical basis

  static RefinedLattice standard(int rank);
  // Z^rank refined by extra rational generators (standard coordinates).
  static RefinedLattice refined(int rank, const std::vector<QVec>& extra);

  QVec to_std(const IVec& canonical) const;
  // canonical coordinates of a rational point, or nullopt if not in the lattice
  std::optional<IVec> from_std(const QVec& p) const;
  Rat covolume() const;
};

struct Cone {
  std::vector<IVec> rays;  // canonical coordinates, primitive
};

struct QuotientSingularity {
  Int r;         // index; r == 1 means smooth
  IVec weights;  // canonical representative: lex-least over units and permutations
  bool smooth() const { return r == 1; }
  bool operator==(const QuotientSingularity& o) const {
    return r == o.r && weights == o.weights;
  }
  std::string str() const;
};

// canonical form of 1/r(w...) under unit rescaling and coordinate permutation
QuotientSingularity make_quotient_singularity(const Int& r, IVec weights);

// Raw quotient data of a full-dimensional simplicial cone: index r and the
// barycentric numerators (in [0,r)) of a generator of N / (Z * rays).
struct ConeQuotient {
  Int r;
  IVec bary;
};
ConeQuotient cone_quotient(const RefinedLattice& N, const Cone& c);
QuotientSingularity classify_cone(const RefinedLattice& N, const Cone& c);

// lattice index of the sublattice spanned by the cone's rays (= 1 iff smooth)
Int cone_index(const Cone& c);

// The unique minimal-discrepancy ray of a terminal cyclic quotient cone
// 1/r(1,a,-a): barycentric numerators (1,a,r-a) up to order.  Also checks
// terminality (every interior lattice point has barycentric sum > 1).
IVec kawamata_ray(const RefinedLattice& N, const Cone& c);

// barycentric-coordinate sum minus 1 of a primitive lattice ray inside a cone
Rat discrepancy_of_ray(const RefinedLattice& N, const Cone& c, const IVec& ray);

struct Fan {
  RefinedLattice N;
  std::vector<Cone> cones;  // maximal cones, all full-dimensional simplicial
  std::map<IVec, std::string> ray_labels;

  std::vector<IVec> rays() const;
  std::string serialize() const;  // one cone per line, vectors ';'-separated
};

// replace every maximal cone containing `ray` by its star subdivision
void star_subdivide(Fan& fan, const IVec& ray, const std::string& label);

struct Wall {
  IVec u1, u2;  // the two wall rays, sorted
  Wall() = default;
  Wall(IVec a, IVec b) {
    if (b < a) std::swap(a, b);
    u1 = std::move(a);
    u2 = std::move(b);
  }
  bool operator<(const Wall& o) const {
    return u1 != o.u1 ? u1 < o.u1 : u2 < o.u2;
  }
  bool operator==(const Wall& o) const { return u1 == o.u1 && u2 == o.u2; }
};

std::vector<Wall> interior_walls(const Fan& fan);

// Primitive integer relation over the four rays adjacent to an interior wall,
// normalized so the two off-wall coefficients are positive.
struct WallData {
  IVec off1, off2;    // off-wall rays of the two adjacent cones
  Int c_off1, c_off2;  // relation coefficients (> 0)
  Int c_u1, c_u2;      // relation coefficients of the wall rays
  size_t cone1, cone2;
  // contraction type read off the wall-coefficient signs
  bool small_contraction() const { return c_u1 < 0 && c_u2 < 0; }
  bool fiber_type() const { return c_u1 == 0 && c_u2 == 0; }
};
WallData wall_relation(const Fan& fan, const Wall& w);

// D_ray . C_wall for the invariant curve of an interior wall
Rat intersect_divisor_curve(const Fan& fan, const Wall& w, const IVec& ray);
// K . C_wall = -sum over all rays of D_ray . C_wall
Rat canonical_intersect(const Fan& fan, const Wall& w);

// Flip (or flop, when K.C == 0) of a small wall: the two adjacent cones are
// replaced by the pair over the complementary diagonal.  Antiflips (K.C > 0)
// are always rejected.
void toric_flip(Fan& fan, const Wall& w);

// sum over maximal cones of (index - 1); equals the difficulty for fans all of
// whose cone quotients are cyclic
Int fan_difficulty(const Fan& fan);

// ---- T-germ link driver ----------------------------------------------------

enum class TCenter { P, Q, Both };

struct TLinkStep {
  enum Kind { Blowup, Flip, Flop } kind;
  Rat k_dot_c;  // degree of K on the contracted curve (0 for blowups)
  Int d_before, d_after;
  int flipping_components = 1, flipped_components = 1;
  // (-E).L before/after for wall curves meeting the flipping curve
  std::vector<std::pair<Rat, Rat>> e_monotone;
};

struct TFiber {
  Int r, a;  // germ T(r,a); r == 1 means a smooth fiber
  bool equivalent(const Int& rr, const Int& aa) const {
    if (r != rr) return false;
    if (r == 1) return true;
    return imod(a, r) == imod(aa, r) || imod(a, r) == imod(rr - aa, r);
  }
};

struct VerifiedLink {
  Int r, a;
  std::vector<IVec> exceptional;  // canonical coords of the inserted rays
  Rat discrepancy;                // common discrepancy of the inserted rays
  std::vector<Rat> e_dot_c;       // E_i . C-tilde on the central wall
  Rat k_dot_c_before, k_dot_c_after_blowup;
  std::vector<TLinkStep> steps;
  std::vector<TFiber> fibers;     // ordered along the base boundary
  std::vector<Int> base_split;    // indices of the new base points, same order
  std::vector<Int> difficulty_trace;
  std::vector<int> rho_trace;     // relative Picard rank over the original base
  bool ledger_ok = false;
  std::string ledger_detail;
  Fan final_fan;
};

VerifiedLink run_T_link(long r, long a, TCenter center);

}  // namespace qcb
