#include "qcb/engine.hpp"
#include "qcb/lattice.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

namespace qcb {

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw EngineError(EngineError::Usage, "cannot open file " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_or_print(const std::string& path, const std::string& text,
                    std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw EngineError(EngineError::Usage, "cannot write file " + path);
  f << text;
}

std::string difficulty_str(const Difficulty& d) {
  switch (d.kind) {
    case Difficulty::Exact: return d.value.str();
    case Difficulty::LowerBound: return ">=" + d.value.str();
    default: return "1 or 2";
  }
}

std::string point_str(const SingPoint& p) {
  if (!p.cyclic) return p.cdv;
  std::string s = "1/" + p.r.str() + "(";
  for (size_t i = 0; i < p.weights.size(); ++i)
    s += (i ? "," : "") + p.weights[i].str();
  return s + ")";
}

void print_link(const LinkResult& link, const LedgerReport& led,
                std::ostream& out) {
  out << "germ " << link.germ.tag() << "\n";
  out << "blowup 1/" << link.blowup.index << "(";
  for (size_t i = 0; i < link.blowup.weights.size(); ++i)
    out << (i ? "," : "") << link.blowup.weights[i];
  out << ")\n";
  out << "E.C " << link.blowup.e_dot_c << "\n";
  out << "K.C-after " << link.blowup.k_tilde_dot_c << "\n";
  int flips = 0, flops = 0;
  for (auto& s : link.steps)
    (s.kind == LinkStep::Flip ? flips : flops)++;
  out << "surgeries " << flops << " flop(s), " << flips << " flip(s)"
      << (link.unspecified_tail ? " + unspecified tail" : "") << "\n";
  out << "fibers";
  for (auto& [slot, g] : link.new_fibers) out << " " << slot << "=" << g.tag();
  out << "\n";
  std::ostringstream mod;
  switch (link.base_mod.kind) {
    case BaseModification::Crepant: mod << "crepant"; break;
    case BaseModification::CrepantTwoCurves: mod << "crepant2"; break;
    case BaseModification::MinimalResolutionStep: mod << "minres"; break;
    case BaseModification::WeightedBlowup:
      mod << "blowup(1," << link.base_mod.weight_a << ")";
      break;
  }
  if (!link.base_mod.split.empty()) {
    mod << "(";
    for (size_t i = 0; i < link.base_mod.split.size(); ++i)
      mod << (i ? "," : "") << link.base_mod.split[i];
    mod << ")";
  }
  out << "base " << mod.str() << "\n";
  const char* rules[] = {"proper", "total", "proper+Gamma", "unknown"};
  out << "delta " << rules[link.discriminant_rule] << "\n";
  out << "ledger " << (led.ok ? "ok" : "fail") << " " << led.d_start << " -> "
      << (led.after_exact ? "" : ">=") << led.d_after_blowup << " -> "
      << led.d_final << " (" << led.detail << ")\n";
}

int cmd_invariants(const std::string& tag, std::ostream& out) {
  GermType g = GermType::parse(tag);
  auto inv = germ_invariants(g);
  out << "germ " << g.tag() << "\n";
  out << "base "
      << (inv.base_index == 1 ? std::string("smooth")
                              : "A" + Int(inv.base_index - 1).str())
      << "\n";
  out << "difficulty " << difficulty_str(inv.difficulty) << "\n";
  out << "K.C";
  for (auto& k : inv.k_dot_c) out << " " << k;
  out << "\n";
  for (auto& p : inv.non_gorenstein_points)
    out << "point " << point_str(p) << "\n";
  return 0;
}

int cmd_link(const std::string& file, const std::string& at, int choice,
             bool both, std::ostream& out) {
  Scenario sc = Scenario::parse(slurp(file));
  sc.validate();
  const ScenarioPoint* p = nullptr;
  for (auto& q : sc.points)
    if (q.id == at) p = &q;
  if (!p) throw EngineError(EngineError::Usage, "no point with id " + at);
  LinkResult link = both ? md_link_both(p->germ) : md_link(p->germ, choice);
  LedgerReport led = check_ledger(link);
  print_link(link, led, out);
  return led.ok ? 0 : 3;
}

int cmd_standardize(const std::string& file, const std::string& driver,
                    const std::string& trace_file, const std::string& dot_file,
                    std::ostream& out) {
  Scenario sc = Scenario::parse(slurp(file));
  if (const char* env = std::getenv("QCB_SEED")) sc.seed = std::strtoull(env, nullptr, 10);
  StandardizationTrace tr;
  if (driver == "resolve-base")
    tr = resolve_base(sc);
  else if (driver == "gorensteinize")
    tr = gorensteinize(sc);
  else if (driver == "standardize")
    tr = standardize(sc);
  else
    throw EngineError(EngineError::Usage, "unknown driver " + driver);
  write_or_print(trace_file, tr.render(), out);
  if (!dot_file.empty() || trace_file.empty()) {
    std::ostringstream dots;
    for (auto& [origin, g] : tr.final_graphs)
      dots << "// " << origin << "\n" << g.to_dot();
    if (!dot_file.empty()) write_or_print(dot_file, dots.str(), out);
  }
  return 0;
}

int cmd_verify_toric(long rmax, const std::string& csv_file,
                     std::ostream& out) {
  std::ostringstream csv;
  csv << "r,a,fibers,flips,ledger_ok\n";
  bool all_ok = true;
  auto row = [&](const VerifiedLink& v) {
    std::vector<std::string> tags;
    for (auto& f : v.fibers)
      tags.push_back(f.r == 1 ? "smooth"
                              : "T(" + f.r.str() + "," + f.a.str() + ")");
    int flips = 0;
    for (auto& s : v.steps)
      if (s.kind == TLinkStep::Flip) ++flips;
    std::string joined;
    for (size_t i = 0; i < tags.size(); ++i) joined += (i ? "|" : "") + tags[i];
    csv << v.r << "," << v.a << "," << joined << "," << flips << ","
        << (v.ledger_ok ? 1 : 0) << "\n";
    all_ok = all_ok && v.ledger_ok;
  };
  for (long r = 2; r <= rmax; ++r)
    for (long a = 1; a < r; ++a) {
      if (igcd(r, a) != 1) continue;
      row(run_T_link(r, a, TCenter::P));
      if (2 * a < r) row(run_T_link(r, a, TCenter::Both));
    }
  write_or_print(csv_file, csv.str(), out);
  out << (all_ok ? "all cases pass\n" : "FAILURES present\n");
  return all_ok ? 0 : 3;
}

int cmd_discriminant(const std::string& file, std::ostream& out) {
  std::istringstream in(slurp(file));
  std::string line, tag;
  std::uint64_t seed = 1;
  int N = 10;
  struct Override { std::string mat; int i, j, iu, iv; Rat coef; };
  std::vector<Override> overrides;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    auto bad = [&] {
      throw EngineError(EngineError::Usage,
                        "family file line " + std::to_string(ln));
    };
    if (key == "germ") {
      if (!(ls >> tag)) bad();
    } else if (key == "seed") {
      if (!(ls >> seed)) bad();
    } else if (key == "N") {
      if (!(ls >> N)) bad();
    } else if (key == "set") {
      Override o;
      std::string coef;
      if (!(ls >> o.mat >> o.i >> o.j >> o.iu >> o.iv >> coef)) bad();
      o.coef = Rat(coef);
      if (o.i < 0 || o.i > 2 || o.j < 0 || o.j > 2) bad();
      overrides.push_back(o);
    } else {
      bad();
    }
  }
  if (tag.empty())
    throw EngineError(EngineError::Usage, "family file declares no germ");
  if (const char* env = std::getenv("QCB_SEED"))
    seed = std::strtoull(env, nullptr, 10);
  GermType g = GermType::parse(tag);
  ConicFamily fam = sample_family(g, seed, N);
  for (auto& o : overrides) {
    SeriesMat3* m = nullptr;
    if (o.mat == "a") m = &fam.a;
    else if (o.mat == "q1") m = &fam.q1;
    else if (o.mat == "q2") m = &fam.q2;
    else throw EngineError(EngineError::Usage, "unknown matrix " + o.mat);
    (*m)[o.i][o.j].set(o.iu, o.iv, o.coef);
    (*m)[o.j][o.i].set(o.iu, o.iv, o.coef);
  }
  auto d = discriminant(fam);
  out << "germ " << g.tag() << "\n";
  out << "seed " << seed << "\n";
  out << "discriminant\n" << d.str();
  auto rep = verify_discriminant_claim(g, fam);
  const char* st = rep.status == ClaimReport::Pass
                       ? "pass"
                       : rep.status == ClaimReport::Fail ? "fail" : "undecided";
  out << "claim " << st << " (N=" << rep.decided_at_N << "): " << rep.detail
      << "\n";
  if (rep.status == ClaimReport::Pass) return 0;
  return rep.status == ClaimReport::Fail ? 3 : 4;
}

int cmd_graph(const std::string& tag, std::ostream& out) {
  GermType g = GermType::parse(tag);
  out << dual_graph_of_germ(g).to_dot();
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  CLI::App app{"exact rewrite engine for three-dimensional Q-conic bundle germs"};
  app.name("qcb");
  app.require_subcommand(1);

  std::string germ_tag, scenario_file, at_id, driver = "standardize";
  std::string trace_file, dot_file, csv_file, family_file, graph_tag;
  int choice = 0;
  bool both = false;
  long rmax = 30;

  auto* inv = app.add_subcommand("invariants", "print the invariants of a germ");
  inv->add_option("germ", germ_tag, "germ tag, e.g. T(5,2)")->required();

  auto* lnk = app.add_subcommand("link", "apply one md-link in a scenario");
  lnk->add_option("scenario", scenario_file, "scenario file")->required();
  lnk->add_option("--at", at_id, "point id")->required();
  lnk->add_option("--choice", choice, "blowup choice (0-based)");
  lnk->add_flag("--both", both, "blow up both points simultaneously");

  auto* std_ = app.add_subcommand("standardize", "run a driver on a scenario");
  std_->add_option("scenario", scenario_file, "scenario file")->required();
  std_->add_option("--driver", driver,
                   "resolve-base | gorensteinize | standardize");
  std_->add_option("--trace", trace_file, "write the trace to this file");
  std_->add_option("--dot", dot_file, "write final dual graphs to this file");

  auto* vt = app.add_subcommand("verify-toric", "sweep the toric link theorems");
  vt->add_option("--rmax", rmax, "largest index r");
  vt->add_option("--csv", csv_file, "write the sweep table to this file");

  auto* dis = app.add_subcommand("discriminant",
                                 "discriminant and claim report of a family");
  dis->add_option("family", family_file, "family file")->required();

  auto* gr = app.add_subcommand("graph", "dual graph of a germ resolution");
  gr->add_option("germ", graph_tag, "germ tag")->required();

  std::vector<const char*> argv;
  argv.push_back("qcb");
  for (auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse((int)argv.size(), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 64;
  }

  try {
    if (inv->parsed()) return cmd_invariants(germ_tag, out);
    if (lnk->parsed()) return cmd_link(scenario_file, at_id, choice, both, out);
    if (std_->parsed())
      return cmd_standardize(scenario_file, driver, trace_file, dot_file, out);
    if (vt->parsed()) return cmd_verify_toric(rmax, csv_file, out);
    if (dis->parsed()) return cmd_discriminant(family_file, out);
    if (gr->parsed()) return cmd_graph(graph_tag, out);
  } catch (const EngineError& e) {
    err << "error: " << e.what() << "\n";
    return (int)e.code;
  } catch (const GermError& e) {
    err << "error: " << e.what() << "\n";
    return e.code == GermError::BadParameter ? 64 : 2;
  } catch (const BaseError& e) {
    err << "error: " << e.what() << "\n";
    return e.code == BaseError::UnknownGraph ? 2 : 3;
  } catch (const ToricError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const SeriesError& e) {
    err << "error: " << e.what() << "\n";
    return e.code == SeriesError::BadParameter ? 64 : 4;
  }
  return 64;
}

}  // namespace qcb
