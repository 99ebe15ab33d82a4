// Plane curve germs: tangent-cone factorization over Q, point blowups,
// branch resolution with a depth budget.
#pragma once

#include "series.hpp"

#include <vector>

namespace qcb {

enum class Chart { U, V };  // U: (u, uv), V: (uv, v)

struct BlowupResult {
  TruncatedSeries strict;  // strict transform in the chart
  Int exc_mult;            // multiplicity of the exceptional factor
};

BlowupResult blowup_curve_germ(const TruncatedSeries& s, Chart chart);

// one tangent direction of the germ: the line u=0, a rational line v=t*u, or
// an irreducible (over Q) higher-degree block
struct TangentFactor {
  enum Kind { AxisU, Line, Block } kind;
  Rat t;                  // Line: slope
  std::vector<Rat> block; // Block: poly in t = v/u, low degree first
  int degree = 1;
  int exponent = 1;
};

struct BranchReport {
  int tangent = 0;    // index into tangent_factors
  bool smooth = false;
  bool decided = false;
  int depth = 0;      // blowups used to resolve this branch
  std::string note;
};

struct CurveGermReport {
  int multiplicity = 0;
  std::vector<TangentFactor> tangent_factors;
  std::vector<BranchReport> branches;
  int resolution_depth_used = 0;
  bool all_decided = false;
  // decided branch count with distinct tangents => proper transforms on the
  // first blowup are disjoint
  bool pairwise_transversal = false;
};

std::vector<TangentFactor> factor_tangent_cone(const TruncatedSeries& s);

CurveGermReport analyze_curve_germ(const TruncatedSeries& s, int depth_budget = 6);

// homogeneous-form utilities shared with the discriminant checks
bool is_perfect_square_form(const TruncatedSeries& form, int degree);

}  // namespace qcb
