// Scenario ingestion, the resolve-base / Gorensteinize / standardize drivers,
// deterministic trace emission, and the command-line entry point.
#pragma once

#include "base_surface.hpp"
#include "conic_family.hpp"

#include <cstdint>
#include <iosfwd>

namespace qcb {

struct EngineError : std::runtime_error {
  enum Code {
    Unsupported = 2,   // excluded germ kinds
    Ledger = 3,        // ledger or invariant violation
    Undecidable = 4,   // truncation/depth budget insufficient
    Usage = 64,        // malformed input
  } code;
  EngineError(Code c, const std::string& m) : std::runtime_error(m), code(c) {}
};

struct ScenarioPoint {
  std::string id;
  GermType germ = germ_smooth();
  bool has_delta = false;
  TruncatedSeries delta;  // local discriminant, when supplied
};

// Structured key-value scenario document.  Grammar (one directive per line,
// '#' comments):
//   truncation <N>
//   seed <n>
//   depth <n>
//   allow-unsupported
//   point <id> germ <tag>
//   delta <id> <i> <j> <coef>     -- adds coef * u^i v^j to the point's curve
struct Scenario {
  int truncation = 10;
  std::uint64_t seed = 1;
  int depth = 6;
  bool allow_unsupported = false;
  std::vector<ScenarioPoint> points;

  static Scenario parse(const std::string& text);
  std::string str() const;  // canonical re-rendering
  void validate() const;
};

std::uint64_t fnv1a(const std::string& s);

struct TraceStep {
  int n = 0;
  std::string at;
  GermType germ = germ_smooth();      // germ the step acts on
  LinkResult link;
  LedgerReport ledger;
  std::vector<std::string> fiber_tags;
  bool ordinary_blowup = false;       // Gorenstein-phase step, no md-link
  std::uint64_t snapshot = 0;
};

struct StandardizationTrace {
  std::string driver;
  std::vector<TraceStep> steps;
  std::vector<Int> difficulty_trace;  // total fiber difficulty after each step
  bool base_smooth = false;
  bool all_gorenstein = false;
  bool all_standard = false;
  enum Nc { NcYes, NcUnknown } discriminant_nc = NcUnknown;
  std::vector<std::pair<std::string, DualGraph>> final_graphs;  // per origin

  std::string render() const;  // byte-deterministic trace document
};

StandardizationTrace resolve_base(const Scenario& s);
StandardizationTrace gorensteinize(const Scenario& s);
StandardizationTrace standardize(const Scenario& s);

// CLI front end; returns the process exit code (0, 2, 3, 4, or 64)
int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

}  // namespace qcb
