// Base surface germ: Du Val A-points, crepant/weighted modifications of the
// links, dual graphs of resolutions with attached discriminant branches.
#pragma once

#include "germ.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qcb {

struct BaseError : std::runtime_error {
  enum Code { IllegalModification, UnknownGraph, InvalidConfiguration } code;
  BaseError(Code c, const std::string& m) : std::runtime_error(m), code(c) {}
};

struct DualGraph {
  struct Vertex {
    std::string label;
    Int self_int = -2;
    bool exceptional = true;  // false: discriminant branch
  };
  struct Edge {
    int a, b;
    Int mult = 1;
  };
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;

  void add_vertex(const std::string& label, Int self_int, bool exceptional);
  void add_edge(int a, int b, Int mult = 1);
  // self-intersections along the path if the exceptional part is a chain
  std::optional<std::vector<Int>> chain_signature() const;
  std::string to_dot() const;
};

DualGraph minimal_resolution_chain(long n);

// resolution graphs the rewrite rules pin down
DualGraph dual_graph_of_germ(const GermType& g);

// discriminant branch through a base point, symbolic
struct BranchInfo {
  std::string id;
  bool smooth = true;
  Int mult = 1;
  bool complete = false;     // complete curve (p_a check applies)
  bool rational = false;
  int meets_rest = 0;        // intersection points with the other branches
};

struct BasePoint {
  Int r = 1;                 // A_{r-1}; r=1 smooth
  GermType fiber = germ_smooth();
  std::vector<BranchInfo> branches;
};

struct Verdict {
  enum Kind { Compatible, Incompatible, Undecidable } kind;
  std::string reason;
};

// rejects complete smooth rational branches meeting the rest in <= 1 point
void validate_branches(const BasePoint& p);

Verdict classify_point_by_discriminant(const BasePoint& p);

// Partial resolution of one original base point, kept as an ordered chain of
// points and exceptional curves. Curves carry their final self-intersection
// (-2 for crepant); two curves meet exactly when only a smooth point
// separates them.
struct BaseChain {
  struct Elem {
    enum { Point, Curve } kind;
    Int r = 1;                     // points
    GermType fiber = germ_smooth();
    std::string label;             // curves
    Int self_int = -2;
  };
  std::vector<Elem> elems;
  int next_curve = 1;

  static BaseChain start(Int r, const GermType& fiber);
  Int measure() const;  // sum of (r-1) over points: termination certificate
  std::vector<size_t> point_positions() const;
  DualGraph graph() const;
};

// replaces the point at `pos` per `mod`; `fibers` are the germs over the new
// points, ordered along the chain
void apply_modification(BaseChain& chain, size_t pos, const BaseModification& mod,
                        const std::vector<GermType>& fibers);

}  // namespace qcb
