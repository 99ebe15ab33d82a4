// Conic bundle families over a base surface germ: general 3x3 symmetric
// forms and the index-2 complete-intersection shape, their discriminants,
// deterministic samplers, and verification of the stated branch claims.
#pragma once

#include "curve_germ.hpp"
#include "germ.hpp"

#include <array>
#include <cstdint>

namespace qcb {

using SeriesMat3 = std::array<std::array<TruncatedSeries, 3>, 3>;

struct ConicFamily {
  bool index2 = false;
  int N = 10;
  GermType shape = germ_std();
  SeriesMat3 a;               // general symmetric form
  TruncatedSeries theta1, theta2;
  SeriesMat3 q1, q2;          // index-2 quadric pair

  void validate() const;      // symmetry; index-2 hypotheses
};

// residues of the mu_r-action on x_1..x_n and u, v
struct VarWeights {
  Int r;
  std::vector<Int> x;
  Int u, v;
};

VarWeights table_weights(const GermType& g);

bool check_equivariance(const ConicFamily& fam, const VarWeights& w);

TruncatedSeries discriminant_det(const ConicFamily& fam);     // det of a
TruncatedSeries discriminant_index2(const ConicFamily& fam);  // det(th1 q2 - th2 q1)
TruncatedSeries discriminant(const ConicFamily& fam);

// inverse of a unit series
TruncatedSeries sinv(const TruncatedSeries& s);

ConicFamily sample_family(const GermType& g, std::uint64_t seed, int N = 10);

struct ClaimReport {
  enum Status { Pass, Fail, Undecided } status = Undecided;
  std::string detail;
  int decided_at_N = 0;
};

ClaimReport verify_discriminant_claim(const GermType& g, const ConicFamily& fam);

}  // namespace qcb
