#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qcb/engine.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

using namespace qcb;

namespace {

Scenario one_point(const std::string& germ) {
  return Scenario::parse("point p1 germ " + germ + "\n");
}

int engine_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const EngineError& e) {
    return (int)e.code;
  }
  return 0;
}

std::string write_tmp(const std::string& name, const std::string& text) {
  std::string path = "/tmp/" + name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("scenario parsing and validation") {
  auto s = Scenario::parse(
      "# a comment\n"
      "truncation 12\n"
      "seed 99\n"
      "depth 4\n"
      "point p1 germ T(5,2)\n"
      "point p2 germ IF\n"
      "delta p2 1 1 1\n");
  CHECK(s.truncation == 12);
  CHECK(s.seed == 99);
  CHECK(s.depth == 4);
  REQUIRE(s.points.size() == 2);
  CHECK(s.points[0].germ == germ_T(5, 2));
  CHECK(s.points[1].has_delta);
  CHECK(s.points[1].delta.coef(1, 1) == 1);
  CHECK_NOTHROW(s.validate());
  // canonical re-render round-trips
  CHECK(Scenario::parse(s.str()).str() == s.str());

  CHECK(engine_code([] { (void)Scenario::parse("nonsense 1\n"); }) == 64);
  CHECK(engine_code([] {
          (void)Scenario::parse("point p1 germ std\npoint p1 germ IF\n");
        }) == 64);
  CHECK(engine_code([] { (void)Scenario::parse("delta p9 0 1 1\n"); }) == 64);
  CHECK(engine_code([] { Scenario::parse("").validate(); }) == 64);
  // discriminant series only over Gorenstein fibers
  CHECK(engine_code([] {
          Scenario::parse("point p1 germ T(5,2)\ndelta p1 1 0 1\n").validate();
        }) == 64);
  // birational tags are not fibers
  CHECK(engine_code([] {
          Scenario::parse("point p1 germ IC(5)\n").validate();
        }) == 64);
}

TEST_CASE("the excluded germs are rejected with an explanation") {
  for (const char* tag : {"IIv", "IIv+IIv"}) {
    auto s = one_point(tag);
    try {
      s.validate();
      FAIL("expected rejection for ", tag);
    } catch (const EngineError& e) {
      CHECK((int)e.code == 2);
      CHECK(std::string(e.what()).find("excluded") != std::string::npos);
      CHECK(std::string(e.what()).find("p1") != std::string::npos);
    }
  }
  // opt-in ingestion parses, but the driver still cannot act on the germ
  auto s = Scenario::parse("allow-unsupported\npoint p1 germ IIv\n");
  CHECK_NOTHROW(s.validate());
  CHECK(engine_code([&] { (void)resolve_base(s); }) == 2);
}

TEST_CASE("resolve_base on a single T point") {
  auto tr = resolve_base(one_point("T(5,2)"));
  CHECK(tr.driver == "resolve-base");
  CHECK(tr.base_smooth);
  CHECK(tr.all_gorenstein);
  REQUIRE(tr.steps.size() == 4);  // one md-link per exceptional curve
  CHECK(tr.steps[0].at == "p1");
  CHECK(tr.steps[0].germ == germ_T(5, 2));
  CHECK(tr.steps[0].ledger.d_start == 8);
  CHECK(tr.steps[0].ledger.d_after_blowup == 7);
  CHECK(tr.steps[0].ledger.d_final == 6);
  CHECK(tr.steps[0].fiber_tags == std::vector<std::string>{"T(2,1)", "T(3,2)"});
  CHECK(tr.steps[1].at == "p1.o1");  // ascending id order
  REQUIRE(tr.final_graphs.size() == 1);
  auto sig = tr.final_graphs[0].second.chain_signature();
  auto want = minimal_resolution_chain(4).chain_signature();
  REQUIRE(sig.has_value());
  CHECK(*sig == *want);
  // replaying is byte-identical
  CHECK(resolve_base(one_point("T(5,2)")).render() == tr.render());
  // render has the advertised record shape
  auto text = tr.render();
  CHECK(text.find("TRACE resolve-base\n") == 0);
  CHECK(text.find("STEP 1 AT p1 GERM T(5,2) -> FIBERS T(2,1),T(3,2) BASE "
                  "crepant(2,3) DELTA proper LEDGER ok") != std::string::npos);
  CHECK(text.find("SNAPSHOT 1 ") != std::string::npos);
  CHECK(text.find("TERMINAL base_smooth=1 gorenstein=1") != std::string::npos);
}

TEST_CASE("resolve_base on K2A and the stated cascade") {
  auto tr = resolve_base(one_point("k2A(5)"));
  CHECK(tr.base_smooth);
  CHECK(tr.all_gorenstein);
  REQUIRE(!tr.steps.empty());
  CHECK(tr.steps[0].germ == germ_K2A(5));
  CHECK(tr.steps[0].fiber_tags ==
        std::vector<std::string>{"k2A(3)", "ID(2)"});
  // the K2A(3) successor is processed next (ascending ids)
  CHECK(tr.steps[1].at == "p1.o1");
  CHECK(tr.steps[1].germ == germ_K2A(3));
  CHECK(tr.steps[1].fiber_tags == std::vector<std::string>{"std", "ID(2)"});
  auto sig = tr.final_graphs[0].second.chain_signature();
  auto want = minimal_resolution_chain(4).chain_signature();
  REQUIRE(sig.has_value());
  CHECK(*sig == *want);
  // the ID(2) links land directly on standard fibers
  CHECK(tr.all_standard);
}

TEST_CASE("gorensteinize decreases total difficulty monotonically") {
  for (const char* tag : {"IEv", "k2A(7)", "T(9,4)", "IAv+IAv", "ID(1,k=2)"}) {
    auto tr = gorensteinize(one_point(tag));
    CHECK(tr.base_smooth);
    CHECK(tr.all_gorenstein);
    auto inv = germ_invariants(GermType::parse(tag));
    Int prev = inv.difficulty.value;
    REQUIRE(!tr.difficulty_trace.empty());
    for (auto& d : tr.difficulty_trace) {
      CHECK(d < prev);
      prev = d;
    }
    CHECK(prev == 0);
  }
  // already Gorenstein: empty trace
  CHECK(gorensteinize(one_point("std")).steps.empty());
  CHECK(gorensteinize(one_point("smooth")).steps.empty());
}

TEST_CASE("standardize runs the full cascade") {
  auto tr = standardize(one_point("IEv"));
  CHECK(tr.base_smooth);
  CHECK(tr.all_gorenstein);
  CHECK(tr.all_standard);
  CHECK(tr.discriminant_nc == StandardizationTrace::NcUnknown);
  CHECK(tr.steps[0].germ == germ_IEv());
  CHECK(tr.steps[0].fiber_tags == std::vector<std::string>{"k2A(3)", "smooth"});

  // a germ whose link leaves an IF fiber: the conversion comes last
  auto tr2 = standardize(one_point("IAv+IAv"));
  REQUIRE(tr2.steps.size() == 2);
  CHECK(tr2.steps[0].germ == germ_IAvIAv());
  CHECK(tr2.steps[0].fiber_tags == std::vector<std::string>{"IF", "smooth"});
  CHECK(tr2.steps[1].germ == germ_IF());
  CHECK(tr2.steps[1].link.steps[0].kind == LinkStep::Flop);
  CHECK(tr2.all_standard);
  // standard input: empty trace
  CHECK(standardize(one_point("std")).steps.empty());
  CHECK(standardize(one_point("smooth")).all_standard);
}

TEST_CASE("ordinary blowups certify normal crossing") {
  // ordinary triple point u^3 - v^3: one blowup suffices
  auto s = Scenario::parse(
      "point p1 germ std\n"
      "delta p1 3 0 1\n"
      "delta p1 0 3 -1\n");
  auto tr = standardize(s);
  CHECK(tr.steps.size() == 1);
  CHECK(tr.steps[0].ordinary_blowup);
  CHECK(tr.discriminant_nc == StandardizationTrace::NcYes);
  CHECK(tr.all_standard);
  CHECK(tr.render().find("BASE blowup(1,1) DELTA total") != std::string::npos);

  // tacnode v^2 - u^4: two blowups
  auto s2 = Scenario::parse(
      "point p1 germ std\n"
      "delta p1 0 2 1\n"
      "delta p1 4 0 -1\n");
  auto tr2 = standardize(s2);
  CHECK(tr2.steps.size() == 2);
  CHECK(tr2.steps[1].at == "p1.g1");
  CHECK(tr2.discriminant_nc == StandardizationTrace::NcYes);

  // already nc: no step
  auto s3 = Scenario::parse("point p1 germ std\ndelta p1 1 0 1\n");
  CHECK(standardize(s3).steps.empty());

  // depth budget of zero on a non-nc curve: undecidable, exit contract 4
  auto s4 = Scenario::parse(
      "depth 0\npoint p1 germ std\ndelta p1 0 2 1\ndelta p1 4 0 -1\n");
  CHECK(engine_code([&] { (void)standardize(s4); }) == 4);
}

TEST_CASE("IF discriminants must be nodes") {
  auto ok = Scenario::parse("point p1 germ IF\ndelta p1 1 1 1\n");
  auto tr = standardize(ok);
  REQUIRE(tr.steps.size() == 1);
  CHECK(tr.steps[0].germ == germ_IF());
  CHECK(tr.steps[0].link.steps.size() == 1);
  CHECK(tr.steps[0].link.steps[0].kind == LinkStep::Flop);
  CHECK(tr.all_standard);

  auto cusp = Scenario::parse(
      "point p1 germ IF\ndelta p1 0 2 1\ndelta p1 3 0 -1\n");
  CHECK(engine_code([&] { (void)standardize(cusp); }) == 3);
}

TEST_CASE("random scenarios resolve within the difficulty budget") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> kind(0, 5);
  std::uniform_int_distribution<long> rpick(2, 12);
  for (int t = 0; t < 20; ++t) {
    int npts = 1 + (int)(rng() % 3);
    std::ostringstream doc;
    std::vector<GermType> germs;
    for (int i = 0; i < npts; ++i) {
      GermType g;
      long r = rpick(rng);
      switch (kind(rng)) {
        case 0: {
          long a = 1 + (long)(rng() % (r - 1));
          while (igcd(Int(r), Int(a)) != 1) a = 1 + (long)(rng() % (r - 1));
          g = germ_T(r, a);
          break;
        }
        case 1: g = germ_K2A(2 * (r / 2) + 1); break;
        case 2: g = germ_IEv(); break;
        case 3: g = germ_IAvIAv(); break;
        case 4: g = germ_ID(2); break;
        default: g = germ_ID(1, 2); break;
      }
      germs.push_back(g);
      doc << "point p" << i << " germ " << g.tag() << "\n";
    }
    auto sc = Scenario::parse(doc.str());
    auto tr = resolve_base(sc);
    Int budget = 0;
    for (auto& g : germs) budget += germ_invariants(g).base_index - 1;
    CHECK(Int(tr.steps.size()) <= budget);
    CHECK(tr.base_smooth);
    REQUIRE(tr.final_graphs.size() == (size_t)npts);
    for (int i = 0; i < npts; ++i) {
      long r = germ_invariants(germs[i]).base_index.convert_to<long>();
      auto sig = tr.final_graphs[i].second.chain_signature();
      auto want = minimal_resolution_chain(r - 1).chain_signature();
      REQUIRE(sig.has_value());
      CHECK(*sig == *want);
    }
    CHECK(resolve_base(sc).render() == tr.render());
  }
}

TEST_CASE("command line entry points") {
  std::ostringstream out, err;
  auto run = [&](std::vector<std::string> args) {
    out.str("");
    err.str("");
    return run_command(args, out, err);
  };

  CHECK(run({"invariants", "T(5,2)"}) == 0);
  CHECK(out.str().find("base A4") != std::string::npos);
  CHECK(out.str().find("difficulty 8") != std::string::npos);
  CHECK(out.str().find("K.C -2/5") != std::string::npos);

  CHECK(run({"invariants", "IEv"}) == 0);
  CHECK(out.str().find("1/8(") != std::string::npos);

  CHECK(run({"invariants", "T(banana)"}) == 64);
  CHECK(run({"no-such-command"}) == 64);
  CHECK(run({}) == 64);
  CHECK(run({"--help"}) == 0);

  auto scen = write_tmp("qcb_scen1.cfg", "point p1 germ T(7,2)\n");
  CHECK(run({"link", scen, "--at", "p1"}) == 0);
  CHECK(out.str().find("blowup 1/7(") != std::string::npos);
  CHECK(out.str().find("ledger ok") != std::string::npos);
  CHECK(run({"link", scen, "--at", "p1", "--both"}) == 0);
  CHECK(run({"link", scen, "--at", "nope"}) == 64);

  auto scen2 = write_tmp("qcb_scen2.cfg", "point p1 germ IIv\n");
  CHECK(run({"link", scen2, "--at", "p1"}) == 2);
  CHECK(err.str().find("excluded") != std::string::npos);
  CHECK(run({"standardize", scen2}) == 2);

  CHECK(run({"standardize", scen, "--driver", "resolve-base"}) == 0);
  CHECK(out.str().find("TRACE resolve-base") != std::string::npos);
  CHECK(out.str().find("TERMINAL base_smooth=1") != std::string::npos);
  auto trace_path = "/tmp/qcb_trace.txt";
  CHECK(run({"standardize", scen, "--trace", trace_path, "--dot",
             "/tmp/qcb_graphs.dot"}) == 0);
  std::ifstream tf(trace_path);
  std::stringstream tbuf;
  tbuf << tf.rdbuf();
  CHECK(tbuf.str() == standardize(Scenario::parse("point p1 germ T(7,2)\n"))
                          .render());
  std::ifstream df("/tmp/qcb_graphs.dot");
  std::stringstream dbuf;
  dbuf << df.rdbuf();
  CHECK(dbuf.str().find("graph dual") != std::string::npos);

  CHECK(run({"verify-toric", "--rmax", "8"}) == 0);
  CHECK(out.str().find("r,a,fibers,flips,ledger_ok") != std::string::npos);
  CHECK(out.str().find("5,2,T(3,1)|T(2,1),1,1") != std::string::npos);
  CHECK(out.str().find("5,2,T(2,1)|smooth|T(2,1),2,1") != std::string::npos);
  CHECK(out.str().find("all cases pass") != std::string::npos);

  auto fam = write_tmp("qcb_fam1.cfg", "germ IAv\nseed 7\nN 10\n");
  CHECK(run({"discriminant", fam}) == 0);
  CHECK(out.str().find("claim pass") != std::string::npos);
  // force the singular side of the smoothness criterion through the file
  auto fam2 = write_tmp("qcb_fam2.cfg",
                        "germ IAv\nseed 7\nN 10\nset q2 0 1 1 0 0\n");
  CHECK(run({"discriminant", fam2}) == 0);
  CHECK(out.str().find("singular") != std::string::npos);

  // QCB_SEED overrides the file seed
  setenv("QCB_SEED", "9", 1);
  CHECK(run({"discriminant", fam}) == 0);
  CHECK(out.str().find("seed 9") != std::string::npos);
  unsetenv("QCB_SEED");

  CHECK(run({"graph", "IEv"}) == 0);
  CHECK(out.str().find("graph dual {") != std::string::npos);
  CHECK(run({"graph", "T(5,2)"}) == 2);
}
