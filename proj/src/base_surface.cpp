#include "qcb/base_surface.hpp"

#include <algorithm>
#include <sstream>

namespace qcb {

namespace {

[[noreturn]] void illegal(const std::string& m) {
  throw BaseError(BaseError::IllegalModification, m);
}

}  // namespace

void DualGraph::add_vertex(const std::string& label, Int self_int,
                           bool exceptional) {
  vertices.push_back({label, self_int, exceptional});
}

void DualGraph::add_edge(int a, int b, Int mult) {
  edges.push_back({a, b, mult});
}

std::optional<std::vector<Int>> DualGraph::chain_signature() const {
  std::vector<int> exc;
  for (int i = 0; i < (int)vertices.size(); ++i)
    if (vertices[i].exceptional) exc.push_back(i);
  if (exc.empty()) return std::vector<Int>{};
  // adjacency restricted to exceptional vertices
  std::vector<std::vector<int>> adj(vertices.size());
  for (auto& e : edges) {
    if (vertices[e.a].exceptional && vertices[e.b].exceptional) {
      adj[e.a].push_back(e.b);
      adj[e.b].push_back(e.a);
    }
  }
  int ends = 0, start = exc.front();
  for (int v : exc) {
    if (adj[v].size() > 2) return std::nullopt;
    if (adj[v].size() <= 1) {
      ++ends;
      start = v;
    }
  }
  if (exc.size() == 1) {
    if (!adj[start].empty()) return std::nullopt;
  } else if (ends != 2) {
    return std::nullopt;
  }
  std::vector<Int> sig;
  int prev = -1, cur = start;
  while (true) {
    sig.push_back(vertices[cur].self_int);
    int nxt = -1;
    for (int w : adj[cur])
      if (w != prev) nxt = w;
    if (nxt < 0) break;
    prev = cur;
    cur = nxt;
  }
  if (sig.size() != exc.size()) return std::nullopt;  // disconnected
  // orient the path canonically
  std::vector<Int> rev(sig.rbegin(), sig.rend());
  return std::min(sig, rev);
}

std::string DualGraph::to_dot() const {
  std::ostringstream s;
  s << "graph dual {\n";
  for (auto& v : vertices)
    s << "  \"" << v.label << "\" [selfint=" << v.self_int
      << (v.exceptional ? "" : ", branch=true") << "];\n";
  for (auto& e : edges) {
    s << "  \"" << vertices[e.a].label << "\" -- \"" << vertices[e.b].label
      << "\"";
    if (e.mult != 1) s << " [mult=" << e.mult << "]";
    s << ";\n";
  }
  s << "}\n";
  return s.str();
}

DualGraph minimal_resolution_chain(long n) {
  if (n < 0) illegal("chain length must be nonnegative");
  DualGraph g;
  for (long i = 1; i <= n; ++i) {
    g.add_vertex("E" + std::to_string(i), -2, true);
    if (i > 1) g.add_edge((int)i - 2, (int)i - 1);
  }
  return g;
}

DualGraph dual_graph_of_germ(const GermType& g) {
  DualGraph d;
  switch (g.kind) {
    case GermKind::IEv:
      // chain D1 - T1 - T0 - T2 with D2 hanging off T0
      d.add_vertex("D1", 0, false);
      d.add_vertex("T1", -2, true);
      d.add_vertex("T0", -2, true);
      d.add_vertex("T2", -2, true);
      d.add_vertex("D2", 0, false);
      d.add_edge(0, 1);
      d.add_edge(1, 2);
      d.add_edge(2, 3);
      d.add_edge(2, 4);
      return d;
    case GermKind::K2A: {
      long n = (long)(g.r.convert_to<long>() - 1);
      d = minimal_resolution_chain(n);
      d.add_vertex("D1", 0, false);
      d.add_vertex("D2", 0, false);
      d.add_edge(0, (int)n);
      d.add_edge((int)n - 1, (int)n + 1);
      return d;
    }
    case GermKind::ID:
      d.add_vertex("G", -2, true);
      if (g.m == 0) {
        d.add_vertex("D", 0, false);  // irreducible singular branch
        d.add_edge(0, 1, 2);
      } else {
        d.add_vertex("D1", 0, false);
        d.add_vertex("D2", 0, false);
        d.add_edge(0, 1);
        d.add_edge(0, 2);
      }
      return d;
    case GermKind::IAv:
      d.add_vertex("G", -2, true);
      d.add_vertex("D1", 0, false);
      d.add_vertex("D2", 0, false);
      d.add_edge(0, 1);      // transverse
      d.add_edge(0, 2, 2);   // D2'.G = 2
      return d;
    case GermKind::IAvIAv:
      d.add_vertex("G", -2, true);
      for (int i = 1; i <= 3; ++i) {
        d.add_vertex("D" + std::to_string(i), 0, false);
        d.add_edge(0, i);
      }
      return d;
    case GermKind::IF:
      d.add_vertex("G", -1, true);
      d.add_vertex("D1", 0, false);
      d.add_vertex("D2", 0, false);
      d.add_edge(0, 1);
      d.add_edge(0, 2);
      return d;
    default:
      throw BaseError(BaseError::UnknownGraph,
                      "no stated resolution graph for " + g.tag());
  }
}

void validate_branches(const BasePoint& p) {
  for (auto& b : p.branches)
    if (b.complete && b.rational && b.smooth && b.meets_rest <= 1)
      throw BaseError(BaseError::InvalidConfiguration,
                      "branch " + b.id +
                          ": a complete smooth rational discriminant component "
                          "may not meet the rest in at most one point");
}

Verdict classify_point_by_discriminant(const BasePoint& p) {
  validate_branches(p);
  const GermType& g = p.fiber;
  if (g.is_fiber_germ()) {
    Int bi = germ_invariants(g).base_index;
    if (bi != p.r)
      return {Verdict::Incompatible,
              "fiber germ " + g.tag() + " lives over an A-point of index " +
                  bi.str() + ", not " + p.r.str()};
  }
  size_t n = p.branches.size();
  bool all_smooth = std::all_of(p.branches.begin(), p.branches.end(),
                                [](const BranchInfo& b) { return b.smooth; });
  bool all_simple = std::all_of(p.branches.begin(), p.branches.end(),
                                [](const BranchInfo& b) { return b.mult == 1; });

  if (n == 0) {
    // off the discriminant: smooth fiber or a T germ
    bool ok = g.kind == GermKind::Smooth || g.kind == GermKind::T;
    return ok ? Verdict{Verdict::Compatible, "point off the discriminant"}
              : Verdict{Verdict::Incompatible,
                        g.tag() + " requires the point to lie on the discriminant"};
  }
  if (p.r == 1 && n == 1 && all_smooth && all_simple) {
    bool ok = g.kind == GermKind::Std;
    return ok ? Verdict{Verdict::Compatible, "smooth discriminant point"}
              : Verdict{Verdict::Incompatible,
                        "a smooth discriminant point forces a standard reduced "
                        "conic, got " + g.tag()};
  }
  if (p.r == 1 && n == 1 && all_smooth && p.branches[0].mult == 2) {
    bool ok = g.kind == GermKind::StdDoubleLine;
    return ok ? Verdict{Verdict::Compatible, "double-line configuration"}
              : Verdict{Verdict::Incompatible,
                        "a double discriminant branch at a smooth point forces "
                        "a double line, got " + g.tag()};
  }
  if (p.r == 1 && n == 2 && all_smooth && all_simple) {
    bool ok = g.kind == GermKind::IF || g.kind == GermKind::Std;
    return ok ? Verdict{Verdict::Compatible, "nodal discriminant point"}
              : Verdict{Verdict::Incompatible,
                        "two transverse branches at a smooth point are "
                        "incompatible with " + g.tag()};
  }
  if (p.r >= 2 && n == 2 && all_smooth && all_simple) {
    // log canonical but not purely log terminal pair
    bool ok = g.kind == GermKind::K2A ||
              (g.kind == GermKind::ID && g.m == 2 && p.r == 2);
    return ok ? Verdict{Verdict::Compatible, "lc-not-plt configuration"}
              : Verdict{Verdict::Incompatible,
                        "an lc-not-plt pair forces k2A or ID(2), got " + g.tag()};
  }
  return {Verdict::Undecidable,
          "branch data does not pin down the germ at this truncation"};
}

BaseChain BaseChain::start(Int r, const GermType& fiber) {
  if (r < 1) illegal("base point index must be positive");
  BaseChain c;
  c.elems.push_back({Elem::Point, r, fiber, "", 0});
  return c;
}

Int BaseChain::measure() const {
  Int s = 0;
  for (auto& e : elems)
    if (e.kind == Elem::Point) s += e.r - 1;
  return s;
}

std::vector<size_t> BaseChain::point_positions() const {
  std::vector<size_t> out;
  for (size_t i = 0; i < elems.size(); ++i)
    if (elems[i].kind == Elem::Point) out.push_back(i);
  return out;
}

DualGraph BaseChain::graph() const {
  DualGraph g;
  std::vector<int> idx(elems.size(), -1);
  for (size_t i = 0; i < elems.size(); ++i)
    if (elems[i].kind == Elem::Curve) {
      idx[i] = (int)g.vertices.size();
      g.add_vertex(elems[i].label, elems[i].self_int, true);
    }
  // consecutive curves meet when at most a smooth point lies between them;
  // a singular point still hides unresolved exceptional curves
  int prev = -1;
  bool blocked = false;
  for (size_t i = 0; i < elems.size(); ++i) {
    if (elems[i].kind == Elem::Point) {
      if (elems[i].r > 1) blocked = true;
      continue;
    }
    if (prev >= 0 && !blocked) g.add_edge(prev, idx[i]);
    prev = idx[i];
    blocked = false;
  }
  return g;
}

void apply_modification(BaseChain& chain, size_t pos, const BaseModification& mod,
                        const std::vector<GermType>& fibers) {
  if (pos >= chain.elems.size() || chain.elems[pos].kind != BaseChain::Elem::Point)
    illegal("modification target is not a point");
  Int r = chain.elems[pos].r;

  auto curve = [&](Int self_int) {
    BaseChain::Elem e;
    e.kind = BaseChain::Elem::Curve;
    e.label = "G" + std::to_string(chain.next_curve++);
    e.self_int = self_int;
    return e;
  };
  auto point = [&](Int rr, const GermType& f) {
    BaseChain::Elem e;
    e.kind = BaseChain::Elem::Point;
    e.r = rr;
    e.fiber = f;
    return e;
  };

  std::vector<BaseChain::Elem> repl;
  switch (mod.kind) {
    case BaseModification::Crepant:
    case BaseModification::CrepantTwoCurves:
    case BaseModification::MinimalResolutionStep: {
      if (r <= 1) illegal("crepant extraction needs a singular point");
      std::vector<Int> split = mod.split;
      if (mod.kind == BaseModification::MinimalResolutionStep) {
        if (r != 2) illegal("one-step minimal resolution needs an A1 point");
        split = {1, 1};
      }
      Int sum = 0;
      for (auto& s : split) sum += s;
      if (sum != r) illegal("crepant split must conserve the index");
      size_t curves = split.size() - 1;
      if ((mod.kind == BaseModification::CrepantTwoCurves) != (curves == 2))
        illegal("split size does not match the modification kind");
      if (fibers.size() != split.size())
        illegal("need one fiber germ per residual point");
      for (size_t i = 0; i < split.size(); ++i) {
        if (i) repl.push_back(curve(-2));
        repl.push_back(point(split[i], fibers[i]));
      }
      break;
    }
    case BaseModification::WeightedBlowup: {
      if (r != 1) illegal("weighted blowup needs a smooth point");
      if (fibers.size() != 2) illegal("need fiber germs for the two new points");
      repl.push_back(point(1, fibers[0]));
      repl.push_back(curve(-1));
      repl.push_back(point(mod.weight_a, fibers[1]));
      break;
    }
  }
  chain.elems.erase(chain.elems.begin() + pos);
  chain.elems.insert(chain.elems.begin() + pos, repl.begin(), repl.end());
}

}  // namespace qcb
