#include "qcb/engine.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace qcb {

namespace {

[[noreturn]] void usage_err(const std::string& m) {
  throw EngineError(EngineError::Usage, m);
}

Int difficulty_value(const GermType& g) {
  auto d = germ_invariants(g).difficulty;
  return d.kind == Difficulty::OneOrTwo ? Int(1) : d.value;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

}  // namespace

// ---- scenario --------------------------------------------------------------

Scenario Scenario::parse(const std::string& text) {
  Scenario s;
  std::istringstream in(text);
  std::string line;
  int ln = 0;
  std::map<std::string, size_t> index;
  while (std::getline(in, line)) {
    ++ln;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    auto want = [&](auto& v) {
      if (!(ls >> v)) usage_err("line " + std::to_string(ln) + ": malformed '" + key + "' directive");
    };
    if (key == "truncation") {
      want(s.truncation);
      if (s.truncation < 1 || s.truncation > 64)
        usage_err("truncation out of range");
    } else if (key == "seed") {
      want(s.seed);
    } else if (key == "depth") {
      want(s.depth);
      if (s.depth < 0) usage_err("negative depth");
    } else if (key == "allow-unsupported") {
      s.allow_unsupported = true;
    } else if (key == "point") {
      ScenarioPoint p;
      std::string kw, tag;
      want(p.id);
      want(kw);
      want(tag);
      if (kw != "germ") usage_err("line " + std::to_string(ln) + ": expected 'germ'");
      try {
        p.germ = GermType::parse(tag);
      } catch (const GermError& e) {
        usage_err("line " + std::to_string(ln) + ": " + e.what());
      }
      if (index.count(p.id)) usage_err("duplicate point id " + p.id);
      index[p.id] = s.points.size();
      s.points.push_back(std::move(p));
    } else if (key == "delta") {
      std::string id;
      int i, j;
      std::string coef;
      want(id);
      want(i);
      want(j);
      want(coef);
      auto it = index.find(id);
      if (it == index.end()) usage_err("delta for unknown point " + id);
      auto& p = s.points[it->second];
      if (!p.has_delta) {
        p.delta = TruncatedSeries::zero(s.truncation);
        p.has_delta = true;
      }
      if (i < 0 || j < 0) usage_err("negative exponent in delta");
      p.delta.set(i, j, p.delta.coef(i, j) + Rat(coef));
    } else {
      usage_err("line " + std::to_string(ln) + ": unknown directive '" + key + "'");
    }
  }
  // delta series must use the final truncation order
  for (auto& p : s.points)
    if (p.has_delta) p.delta = p.delta.truncate(s.truncation);
  return s;
}

std::string Scenario::str() const {
  std::ostringstream out;
  out << "truncation " << truncation << "\n";
  out << "seed " << seed << "\n";
  out << "depth " << depth << "\n";
  if (allow_unsupported) out << "allow-unsupported\n";
  for (auto& p : points) {
    out << "point " << p.id << " germ " << p.germ.tag() << "\n";
    if (p.has_delta)
      for (auto& [ij, x] : p.delta.c)
        out << "delta " << p.id << " " << ij.first << " " << ij.second << " "
            << x.str() << "\n";
  }
  return out.str();
}

void Scenario::validate() const {
  if (points.empty()) usage_err("scenario has no points");
  for (auto& p : points) {
    if (p.id.empty()) usage_err("empty point id");
    if (!p.germ.is_fiber_germ())
      usage_err("point " + p.id + ": " + p.germ.tag() + " is not a fiber germ");
    if (!allow_unsupported &&
        (p.germ.kind == GermKind::IIv || p.germ.kind == GermKind::IIvIIv))
      throw EngineError(
          EngineError::Unsupported,
          "point " + p.id + ": germ " + p.germ.tag() +
              " is one of the two excluded cases (no extremal blowup is "
              "tabulated for the cAx/4 point); pass allow-unsupported to "
              "ingest it anyway");
    if (p.has_delta && !p.germ.gorenstein())
      usage_err("point " + p.id +
                ": explicit discriminant series are only tracked over "
                "Gorenstein fibers");
    if (p.has_delta && p.delta.is_zero())
      usage_err("point " + p.id + ": zero discriminant series");
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

// ---- driver state ----------------------------------------------------------

namespace {

struct Tree {
  std::string origin;
  BaseChain chain;
  std::vector<std::string> ids;  // aligned with chain.point_positions()
};

struct DeltaNode {
  std::string id;
  GermType fiber = germ_std();
  TruncatedSeries curve;
  int depth_used = 0;
  bool resolved = false;
};

struct State {
  std::vector<Tree> trees;
  std::vector<DeltaNode> nodes;

  std::string snapshot_text() const {
    std::ostringstream out;
    for (auto& t : trees) {
      out << t.origin << "{";
      size_t pi = 0;
      for (auto& e : t.chain.elems) {
        if (e.kind == BaseChain::Elem::Point)
          out << "P(" << t.ids[pi++] << "," << e.r << "," << e.fiber.tag()
              << ")";
        else
          out << "C(" << e.label << "," << e.self_int << ")";
      }
      out << "}";
    }
    for (auto& n : nodes)
      if (!n.resolved)
        out << "N(" << n.id << "," << n.fiber.tag() << ","
            << fnv1a(n.curve.str()) << ")";
    return out.str();
  }
};

State make_state(const Scenario& s) {
  State st;
  for (auto& p : s.points) {
    Tree t;
    t.origin = p.id;
    t.chain = BaseChain::start(germ_invariants(p.germ).base_index, p.germ);
    t.ids = {p.id};
    st.trees.push_back(std::move(t));
  }
  return st;
}

std::vector<GermType> padded_fibers(const LinkResult& link) {
  size_t want = link.base_mod.kind == BaseModification::WeightedBlowup
                    ? 2
                    : link.base_mod.split.size();
  std::vector<GermType> f;
  for (auto& [slot, g] : link.new_fibers) f.push_back(g);
  while (f.size() < want) f.push_back(germ_smooth());
  return f;
}

std::string mod_str(const BaseModification& m) {
  std::ostringstream out;
  switch (m.kind) {
    case BaseModification::Crepant:
    case BaseModification::CrepantTwoCurves:
      out << (m.kind == BaseModification::Crepant ? "crepant(" : "crepant2(");
      for (size_t i = 0; i < m.split.size(); ++i)
        out << (i ? "," : "") << m.split[i];
      out << ")";
      break;
    case BaseModification::MinimalResolutionStep:
      out << "minres";
      break;
    case BaseModification::WeightedBlowup:
      out << "blowup(1," << m.weight_a << ")";
      break;
  }
  return out.str();
}

std::string rule_str(LinkResult::DiscRule r) {
  switch (r) {
    case LinkResult::ProperTransform: return "proper";
    case LinkResult::TotalPreimage: return "total";
    case LinkResult::ProperPlusGamma: return "proper+Gamma";
    default: return "unknown";
  }
}

Int total_difficulty(const State& st) {
  Int sum = 0;
  for (auto& t : st.trees)
    for (auto& e : t.chain.elems)
      if (e.kind == BaseChain::Elem::Point) sum += difficulty_value(e.fiber);
  return sum;
}

void record_step(StandardizationTrace& tr, State& st, TraceStep step) {
  step.n = (int)tr.steps.size() + 1;
  step.snapshot = fnv1a(st.snapshot_text());
  tr.steps.push_back(std::move(step));
  tr.difficulty_trace.push_back(total_difficulty(st));
}

// one md-link at point k of the tree; returns the new point ids
void apply_link(State& st, StandardizationTrace& tr, Tree& tree, size_t k) {
  auto positions = tree.chain.point_positions();
  const std::string id = tree.ids[k];
  GermType g = tree.chain.elems[positions[k]].fiber;
  LinkResult link;
  try {
    link = md_link(g);
  } catch (const GermError& e) {
    if (e.code == GermError::BadParameter)
      usage_err("point " + id + ": " + e.what());
    throw EngineError(EngineError::Unsupported, "point " + id + ": " + e.what());
  }
  LedgerReport led = check_ledger(link);
  if (!led.ok)
    throw EngineError(EngineError::Ledger, "point " + id + ": " + led.detail);
  auto fibers = padded_fibers(link);
  apply_modification(tree.chain, positions[k], link.base_mod, fibers);
  std::vector<std::string> nids;
  for (size_t i = 0; i < fibers.size(); ++i)
    nids.push_back(id + "." +
                   (i < link.new_fibers.size() ? link.new_fibers[i].first
                                               : "s" + std::to_string(i + 1)));
  tree.ids.erase(tree.ids.begin() + (long)k);
  tree.ids.insert(tree.ids.begin() + (long)k, nids.begin(), nids.end());

  TraceStep step;
  step.at = id;
  step.germ = g;
  step.link = link;
  step.ledger = led;
  for (auto& f : fibers) step.fiber_tags.push_back(f.tag());
  record_step(tr, st, std::move(step));
}

// repeatedly md-link the lexicographically first actionable point
void crepant_phase(State& st, StandardizationTrace& tr) {
  while (true) {
    Tree* best_tree = nullptr;
    size_t best_k = 0;
    for (auto& t : st.trees) {
      auto positions = t.chain.point_positions();
      for (size_t k = 0; k < positions.size(); ++k) {
        auto& e = t.chain.elems[positions[k]];
        if (e.r <= 1 && e.fiber.gorenstein()) continue;
        if (!best_tree || t.ids[k] < best_tree->ids[best_k]) {
          best_tree = &t;
          best_k = k;
        }
      }
    }
    if (!best_tree) return;
    apply_link(st, tr, *best_tree, best_k);
  }
}

// normal crossing at the origin: smooth, or two smooth branches crossing
// transversally
enum class NcVerdict { Yes, No, Undecided };

NcVerdict is_nc(const TruncatedSeries& s, int depth) {
  auto rep = analyze_curve_germ(s, depth);
  if (rep.multiplicity == 1) return NcVerdict::Yes;
  if (!rep.all_decided) return NcVerdict::Undecided;
  if (rep.multiplicity == 2 && rep.branches.size() == 2 &&
      rep.pairwise_transversal &&
      std::all_of(rep.branches.begin(), rep.branches.end(),
                  [](const BranchReport& b) { return b.smooth; }))
    return NcVerdict::Yes;
  return NcVerdict::No;
}

// Gorenstein-phase embedded resolution of the tracked discriminant nodes by
// ordinary blowups; every blowup becomes one trace step.
void nc_phase(const Scenario& sc, State& st, StandardizationTrace& tr) {
  while (true) {
    DeltaNode* best = nullptr;
    for (auto& n : st.nodes)
      if (!n.resolved && (!best || n.id < best->id)) best = &n;
    if (!best) return;
    NcVerdict v;
    try {
      v = is_nc(best->curve, sc.depth);
    } catch (const SeriesError& e) {
      throw EngineError(EngineError::Undecidable,
                        "point " + best->id + ": " + e.what());
    }
    if (v == NcVerdict::Undecided)
      throw EngineError(EngineError::Undecidable,
                        "point " + best->id +
                            ": branch structure undecided within the "
                            "truncation/depth budget");
    if (v == NcVerdict::Yes) {
      best->resolved = true;
      continue;
    }
    if (best->depth_used >= sc.depth)
      throw EngineError(EngineError::Undecidable,
                        "point " + best->id + ": depth budget exhausted "
                        "before normal crossing");
    // ordinary blowup; recurse into the non-nc tangent directions
    auto factors = factor_tangent_cone(best->curve);
    std::vector<DeltaNode> children;
    int child_no = 0;
    for (auto& f : factors) {
      if (f.kind == TangentFactor::Block) {
        if (f.exponent > 1)
          throw EngineError(EngineError::Undecidable,
                            "point " + best->id +
                                ": repeated irrational tangent direction");
        continue;  // exponent 1: conjugate smooth branches, nc upstairs
      }
      TruncatedSeries local;
      if (f.kind == TangentFactor::AxisU)
        local = blowup_curve_germ(best->curve, Chart::V).strict *
                TruncatedSeries::v(sc.truncation);
      else
        local = blowup_curve_germ(best->curve, Chart::U)
                    .strict.shift_v(f.t) *
                TruncatedSeries::u(sc.truncation);
      DeltaNode child;
      child.id = best->id + ".g" + std::to_string(++child_no);
      child.fiber = germ_std();
      child.curve = local;
      child.depth_used = best->depth_used + 1;
      children.push_back(std::move(child));
    }
    TraceStep step;
    step.at = best->id;
    step.germ = best->fiber;
    step.ordinary_blowup = true;
    step.link.germ = best->fiber;
    step.link.base_mod = {BaseModification::WeightedBlowup, {}, 1};
    step.link.discriminant_rule = LinkResult::TotalPreimage;
    step.ledger.ok = true;
    step.ledger.detail = "gorenstein: difficulty unchanged";
    for (auto& c : children) step.fiber_tags.push_back(c.fiber.tag());
    if (children.empty()) step.fiber_tags.push_back(germ_smooth().tag());
    best->resolved = true;
    for (auto& c : children) st.nodes.push_back(std::move(c));
    record_step(tr, st, std::move(step));
  }
}

// convert the leftover IF germs by their links
void if_phase(const Scenario& sc, State& st, StandardizationTrace& tr) {
  while (true) {
    Tree* best_tree = nullptr;
    size_t best_k = 0;
    for (auto& t : st.trees) {
      auto positions = t.chain.point_positions();
      for (size_t k = 0; k < positions.size(); ++k) {
        if (t.chain.elems[positions[k]].fiber.kind != GermKind::IF) continue;
        if (!best_tree || t.ids[k] < best_tree->ids[best_k]) {
          best_tree = &t;
          best_k = k;
        }
      }
    }
    if (!best_tree) return;
    // supplied discriminants at IF points must show the advertised node
    for (auto& p : sc.points)
      if (p.has_delta && p.id == best_tree->ids[best_k]) {
        NcVerdict v = is_nc(p.delta, sc.depth);
        if (v == NcVerdict::Yes && analyze_curve_germ(p.delta).multiplicity != 2)
          v = NcVerdict::No;
        if (v == NcVerdict::Undecided)
          throw EngineError(EngineError::Undecidable,
                            "point " + p.id +
                                ": node shape undecided within the budget");
        if (v == NcVerdict::No)
          throw EngineError(EngineError::Ledger,
                            "point " + p.id +
                                ": the discriminant at an "
                                "ordinary-double-point germ must be a node");
      }
    apply_link(st, tr, *best_tree, best_k);
  }
}

void finish(const Scenario& sc, State& st, StandardizationTrace& tr) {
  tr.base_smooth = true;
  tr.all_gorenstein = true;
  tr.all_standard = true;
  for (auto& t : st.trees) {
    for (auto& e : t.chain.elems) {
      if (e.kind != BaseChain::Elem::Point) continue;
      if (e.r > 1) tr.base_smooth = false;
      if (!e.fiber.gorenstein()) tr.all_gorenstein = false;
      if (e.fiber.kind != GermKind::Smooth && e.fiber.kind != GermKind::Std &&
          e.fiber.kind != GermKind::StdDoubleLine)
        tr.all_standard = false;
    }
    tr.final_graphs.push_back({t.origin, t.chain.graph()});
  }
  bool any_delta = false, all_resolved = true;
  for (auto& p : sc.points) any_delta |= p.has_delta;
  for (auto& n : st.nodes) all_resolved &= n.resolved;
  tr.discriminant_nc = any_delta && all_resolved
                           ? StandardizationTrace::NcYes
                           : StandardizationTrace::NcUnknown;
}

}  // namespace

StandardizationTrace resolve_base(const Scenario& s) {
  s.validate();
  StandardizationTrace tr;
  tr.driver = "resolve-base";
  State st = make_state(s);
  crepant_phase(st, tr);
  finish(s, st, tr);
  return tr;
}

StandardizationTrace gorensteinize(const Scenario& s) {
  s.validate();
  StandardizationTrace tr;
  tr.driver = "gorensteinize";
  State st = make_state(s);
  crepant_phase(st, tr);
  finish(s, st, tr);
  if (!tr.all_gorenstein || !tr.base_smooth)
    throw EngineError(EngineError::Ledger,
                      "gorensteinize did not reach its terminal state");
  return tr;
}

StandardizationTrace standardize(const Scenario& s) {
  s.validate();
  StandardizationTrace tr;
  tr.driver = "standardize";
  State st = make_state(s);
  // the tracked discriminant germs over Gorenstein points
  for (auto& p : s.points)
    if (p.has_delta && p.germ.kind != GermKind::IF) {
      DeltaNode n;
      n.id = p.id;
      n.fiber = p.germ;
      n.curve = p.delta;
      st.nodes.push_back(std::move(n));
    }
  crepant_phase(st, tr);
  nc_phase(s, st, tr);
  if_phase(s, st, tr);
  finish(s, st, tr);
  if (!tr.all_standard || !tr.base_smooth)
    throw EngineError(EngineError::Ledger,
                      "standardize did not reach its terminal state");
  return tr;
}

std::string StandardizationTrace::render() const {
  std::ostringstream out;
  out << "TRACE " << driver << "\n";
  out << "ASSUME independent-points\n";
  for (auto& s : steps) {
    out << "STEP " << s.n << " AT " << s.at << " GERM " << s.germ.tag()
        << " -> FIBERS " << join(s.fiber_tags, ",") << " BASE "
        << mod_str(s.link.base_mod) << " DELTA "
        << rule_str(s.link.discriminant_rule) << " LEDGER "
        << (s.ledger.ok ? "ok" : "fail:" + s.ledger.detail) << "\n";
    out << "SNAPSHOT " << s.n << " " << std::hex << std::setw(16)
        << std::setfill('0') << s.snapshot << std::dec << "\n";
  }
  out << "TERMINAL base_smooth=" << (base_smooth ? 1 : 0)
      << " gorenstein=" << (all_gorenstein ? 1 : 0)
      << " standard=" << (all_standard ? 1 : 0) << " discriminant_nc="
      << (discriminant_nc == NcYes ? "yes" : "unknown") << "\n";
  return out.str();
}

}  // namespace qcb
