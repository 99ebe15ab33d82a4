// Acceptance gate: one pass/fail line per criterion, exit 0 iff all pass.
#include "qcb/engine.hpp"
#include "qcb/lattice.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace qcb;

namespace {

int failures = 0;

void criterion(int n, const std::string& name,
               const std::function<std::string()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  std::string problem;
  try {
    problem = body();
  } catch (const std::exception& e) {
    problem = std::string("exception: ") + e.what();
  }
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();
  if (problem.empty()) {
    std::cout << "PASS criterion " << n << " (" << name << ") [" << ms
              << " ms]\n";
  } else {
    ++failures;
    std::cout << "FAIL criterion " << n << " (" << name << "): " << problem
              << " [" << ms << " ms]\n";
  }
}

#define REQ(cond, msg)                                            \
  do {                                                            \
    if (!(cond)) return std::string(msg);                         \
  } while (0)

std::string sweep_single_center() {
  int cases = 0;
  for (long r = 2; r <= 30; ++r)
    for (long a = 1; a < r; ++a) {
      if (igcd(r, a) != 1) continue;
      ++cases;
      auto L = run_T_link(r, a, TCenter::P);
      std::string at = "(" + std::to_string(r) + "," + std::to_string(a) + ")";
      REQ(L.ledger_ok, "ledger failed at " + at + ": " + L.ledger_detail);
      REQ(L.discrepancy == Rat(1, r), "discrepancy != 1/r at " + at);
      REQ(L.k_dot_c_after_blowup == Rat(-1, r), "K.C after blowup at " + at);
      int flips = 0;
      for (auto& s : L.steps)
        if (s.kind == TLinkStep::Flip) ++flips;
      REQ(flips == 1, "flip count != 1 at " + at);
      std::vector<Int> chain = {Int(2 * (r - 1)), Int(2 * r - 3),
                                Int(2 * r - 4)};
      REQ(L.difficulty_trace == chain, "difficulty chain at " + at);
      long b = r - a;
      bool f1 = false, f2 = false;
      for (auto& f : L.fibers) {
        if (f.equivalent(a, b % a)) f1 = true;
        if (f.equivalent(b, a % b)) f2 = true;
      }
      REQ(L.fibers.size() == 2 && f1 && f2, "fibers at " + at);
    }
  REQ(cases >= 206, "sweep too small: " + std::to_string(cases) + " cases");
  return "";
}

std::string sweep_both_centers() {
  for (long r = 2; r <= 30; ++r)
    for (long a = 1; 2 * a < r; ++a) {
      if (igcd(r, a) != 1) continue;
      std::string at = "(" + std::to_string(r) + "," + std::to_string(a) + ")";
      auto L = run_T_link(r, a, TCenter::Both);
      REQ(L.ledger_ok, "ledger failed at " + at + ": " + L.ledger_detail);
      auto rule = md_link_both(germ_T(r, a));
      // both routes agree on the multiset of fibers
      auto key = [](const Int& rr, const Int& aa) {
        if (rr <= 1) return std::string("smooth");
        Int c = std::min(imod(aa, rr), imod(rr - aa, rr));
        return "T(" + rr.str() + "," + c.str() + ")";
      };
      std::multiset<std::string> toric, rules;
      for (auto& f : L.fibers) toric.insert(key(f.r, f.a));
      for (auto& [slot, g] : rule.new_fibers) rules.insert(key(g.r, g.a));
      REQ(toric == rules, "fiber mismatch at " + at);
      long m = r - 2 * a;
      std::multiset<std::string> want = {key(Int(a), Int(r % a)),
                                        key(Int(a), Int(r % a)),
                                        key(Int(m), Int(a % m))};
      REQ(toric == want, "fibers differ from the theorem at " + at);
      // surgery pattern: flop first (K.C = 0, the two-ray exchange), then
      // exactly two flips with strict (-E).L decrease
      int flips = 0, flops = 0;
      bool flop_first = false;
      for (size_t i = 0; i < L.steps.size(); ++i) {
        auto& s = L.steps[i];
        if (s.kind == TLinkStep::Blowup) continue;
        if (s.kind == TLinkStep::Flop) {
          ++flops;
          flop_first = flips == 0;
          REQ(s.k_dot_c == 0, "flop with K.C != 0 at " + at);
        } else {
          ++flips;
          REQ(s.k_dot_c < 0, "flip with K.C >= 0 at " + at);
          for (auto& [before, after] : s.e_monotone)
            REQ(after < before, "(-E).L not strictly decreasing at " + at);
        }
      }
      REQ(flops == 1 && flips == 2 && flop_first,
          "surgery pattern at " + at);
    }
  return "";
}

std::string blowup_table() {
  for (long r = 3; r <= 31; r += 2) {
    std::vector<GermType> germs = {germ_KAD(r), germ_K3A(r)};
    if (r >= 5) germs.push_back(germ_IC(r));
    for (auto& g : germs) {
      auto d = kawamata_blowup_data(g);
      REQ(d.k_tilde_dot_c == 0, "expected equality for " + g.tag());
    }
  }
  REQ(kawamata_blowup_data(germ_IIB()).k_tilde_dot_c == 0, "IIB equality");
  long checked = 0;
  for (long r = 3; r <= 15; r += 2)
    for (long a = 1; a < r; ++a) {
      if (igcd(r, a) != 1) continue;
      for (long m = 1; m <= r; ++m)
        for (long b = 1; b <= 5; ++b)
          for (long k = 1; k <= 3; ++k) {
            if (igcd(m, b) != 1) continue;
            Int delta = Int(a) * m + Int(b) * r - Int(m) * r;
            if (delta <= 0) continue;
            auto g = germ_K2Ag(r, a, m, b, k);
            for (int choice = 0; choice < k; ++choice) {
              auto d = kawamata_blowup_data(g, choice);
              ++checked;
              std::string at = g.tag() + " choice " + std::to_string(choice);
              REQ(d.k_tilde_dot_c <= 0, "K.C > 0 for " + at);
              Int ap = d.weights[0];
              bool eq = Int(ap) * delta == m;
              REQ((d.k_tilde_dot_c == 0) == eq,
                  "equality criterion failed for " + at);
            }
          }
    }
  REQ(checked > 500, "K2A-general sweep unexpectedly small");
  return "";
}

std::string intersection_oracle() {
  for (long r = 2; r <= 30; ++r)
    for (long a = 1; a < r; ++a) {
      if (igcd(r, a) != 1) continue;
      auto L = run_T_link(r, a, TCenter::P);
      REQ(L.e_dot_c.size() >= 1, "missing E.C");
      Rat predicted = k_after_blowup(L.k_dot_c_before, r, L.e_dot_c[0]);
      REQ(L.k_dot_c_after_blowup == predicted,
          "intersection update failed at (" + std::to_string(r) + "," +
              std::to_string(a) + ")");
    }
  return "";
}

std::string discriminant_claims() {
  std::vector<GermType> shapes = {germ_IEv(),       germ_IAvIAv(),
                                  germ_IAv(),       germ_K2A(5),
                                  germ_ID(2),       germ_ID(1, 2),
                                  germ_ID(0, 2, 1), germ_ID(0, 2, 0)};
  for (auto& g : shapes)
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      auto fam = sample_family(g, seed, 10);
      auto w_ok = true;
      if (g.kind != GermKind::ID) w_ok = check_equivariance(fam, table_weights(g));
      REQ(w_ok, "equivariance failed for " + g.tag() + " seed " +
                    std::to_string(seed));
      auto rep = verify_discriminant_claim(g, fam);
      REQ(rep.status == ClaimReport::Pass,
          g.tag() + " seed " + std::to_string(seed) + ": " + rep.detail);
    }
  // the smoothness criterion in both directions, forced
  auto fam = sample_family(germ_IAv(), 4, 10);
  for (int side = 0; side < 2; ++side) {
    fam.q2[0][1].set(1, 0, side);
    fam.q2[1][0].set(1, 0, side);
    auto rep = verify_discriminant_claim(germ_IAv(), fam);
    REQ(rep.status == ClaimReport::Pass, "forced criterion side failed");
    REQ(rep.detail.find(side ? "smooth" : "singular") != std::string::npos,
        "wrong side reported");
  }
  return "";
}

std::string difficulty_monotone() {
  auto diff = [](const GermType& g) {
    auto d = germ_invariants(g).difficulty;
    return d.kind == Difficulty::OneOrTwo ? Int(1) : d.value;
  };
  auto check_rule = [&](const GermType& g, const LinkResult& link) -> std::string {
    auto led = check_ledger(link);
    REQ(led.ok, "ledger failed for " + g.tag() + ": " + led.detail);
    Int before = diff(g), after = 0;
    for (auto& [slot, f] : link.new_fibers) after += diff(f);
    REQ(after < before, "difficulty not strictly decreasing for " + g.tag());
    REQ(led.base_sum_after < led.base_sum_before,
        "base measure not strictly decreasing for " + g.tag());
    return "";
  };
  std::vector<GermType> grid = {germ_IEv(),       germ_IAv(),
                                germ_IAvIAv(),    germ_ID(2),
                                germ_ID(1, 2),    germ_ID(1, 5),
                                germ_ID(0, 2, 1), germ_ID(0, 3, 0)};
  for (long r = 2; r <= 30; ++r) {
    for (long a = 1; a < r; ++a)
      if (igcd(r, a) == 1) grid.push_back(germ_T(r, a));
    if (r % 2 == 1) grid.push_back(germ_K2A(r));
  }
  for (auto& g : grid) {
    auto res = check_rule(g, md_link(g));
    if (!res.empty()) return res;
    if (g.kind == GermKind::T && 2 * g.a < g.r) {
      res = check_rule(g, md_link_both(g));
      if (!res.empty()) return res;
    }
  }
  return "";
}

std::string driver_contract() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> kind(0, 6);
  std::uniform_int_distribution<long> rpick(2, 20);
  for (int t = 0; t < 50; ++t) {
    int npts = 1 + (int)(rng() % 3);
    std::ostringstream doc;
    std::vector<GermType> germs;
    for (int i = 0; i < npts; ++i) {
      GermType g;
      long r = rpick(rng);
      switch (kind(rng)) {
        case 0:
        case 1: {
          long a = 1 + (long)(rng() % (r - 1));
          while (igcd(Int(r), Int(a)) != 1) a = 1 + (long)(rng() % (r - 1));
          g = germ_T(r, a);
          break;
        }
        case 2: g = germ_K2A(2 * (r / 2) + 1); break;
        case 3: g = germ_IEv(); break;
        case 4: g = germ_IAvIAv(); break;
        case 5: g = germ_ID(2); break;
        default: g = germ_ID(0, 2, (int)(rng() % 2)); break;
      }
      germs.push_back(g);
      doc << "point p" << i << " germ " << g.tag() << "\n";
    }
    auto sc = Scenario::parse(doc.str());
    auto tr = resolve_base(sc);
    Int budget = 0;
    for (auto& g : germs) budget += germ_invariants(g).base_index - 1;
    REQ(Int(tr.steps.size()) <= budget, "link budget exceeded");
    REQ(tr.base_smooth, "base not smooth after resolve_base");
    for (int i = 0; i < npts; ++i) {
      long r = germ_invariants(germs[i]).base_index.convert_to<long>();
      auto sig = tr.final_graphs[i].second.chain_signature();
      auto want = minimal_resolution_chain(r - 1).chain_signature();
      REQ(sig && want && *sig == *want, "composed modification is not the "
                                        "minimal resolution");
    }
    REQ(resolve_base(sc).render() == tr.render(), "trace not deterministic");
    auto gor = gorensteinize(sc);
    REQ(gor.all_gorenstein && gor.base_smooth, "gorensteinize terminal state");
    auto std_tr = standardize(sc);
    REQ(std_tr.all_standard && std_tr.base_smooth,
        "standardize terminal state");
    REQ(standardize(sc).render() == std_tr.render(),
        "standardize trace not deterministic");
  }
  return "";
}

std::string negative_paths() {
  // the excluded germ exits with code 2 and names the exclusion
  std::ostringstream out, err;
  std::string f = "/tmp/qcb_acc_iiv.cfg";
  { std::ofstream(f) << "point p1 germ IIv\n"; }
  int code = run_command({"standardize", f}, out, err);
  REQ(code == 2, "expected exit code 2, got " + std::to_string(code));
  REQ(err.str().find("excluded") != std::string::npos,
      "message does not cite the exclusion");

  // antiflip walls are rejected and never executed
  auto L = run_T_link(7, 2, TCenter::P);
  Fan fan = L.final_fan;
  std::string before = fan.serialize();
  bool found = false;
  for (auto& w : interior_walls(fan)) {
    auto wd = wall_relation(fan, w);
    if (!wd.small_contraction()) continue;
    if (canonical_intersect(fan, w) <= 0) continue;
    found = true;
    try {
      toric_flip(fan, w);
      return "antiflip was executed";
    } catch (const ToricError& e) {
      REQ(e.code == ToricError::AntiflipRejected, "wrong rejection code");
    }
  }
  REQ(found, "no K-positive wall available to test");
  REQ(fan.serialize() == before, "fan mutated by a rejected antiflip");
  return "";
}

}  // namespace

int main() {
  criterion(1, "single-center toric sweep", sweep_single_center);
  criterion(2, "simultaneous-center toric sweep", sweep_both_centers);
  criterion(3, "extremal blowup table", blowup_table);
  criterion(4, "intersection-number update oracle", intersection_oracle);
  criterion(5, "discriminant claims", discriminant_claims);
  criterion(6, "difficulty monotonicity", difficulty_monotone);
  criterion(7, "driver termination and determinism", driver_contract);
  criterion(8, "negative-path contract", negative_paths);
  if (failures) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria pass\n";
  return 0;
}
