// Acceptance suite: one pass/fail line per criterion.
//
//   acceptance --criterion N     run criterion N (1..9)
//   acceptance                   run all
//
// Problem files come from GHLAB_DATA; criterion 9 drives the CLI found in
// GHLAB_CLI.

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ghcheck.hpp"
#include "problem.hpp"

using namespace ghlab;
using nlohmann::json;

namespace {

std::string g_data_dir;

struct Outcome {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

ProblemFile load(const std::string& name) { return parse_spec(g_data_dir + "/" + name); }

json run_cmd(const std::string& cmd, const std::string& file) {
  ProblemFile pf = load(file);
  return run(cmd, pf).body;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  json body = run_cmd("inequalities", "inequalities_t.json");
  const json& e = body["results"]["energy"];
  o.require(e["pairs"].get<int>() == 100, "expected 100 seeded pairs");
  o.require(e["exact_all_zero"].get<bool>(), "exact residual must vanish identically");
  o.require(e["max_float_residual"].get<double>() <= 1e-10,
            "floating residual exceeds 1e-10: " + std::to_string(e["max_float_residual"].get<double>()));
  return o;
}

Outcome criterion2() {
  Outcome o;
  json body = run_cmd("inequalities", "inequalities_su2.json");
  const json& c = body["results"]["casimir"];
  o.require(c["max_casimir_residual"].get<double>() <= 1e-10,
            "Casimir residual exceeds 1e-10");
  o.require(c["max_antihermitian_defect"].get<double>() <= 1e-12,
            "anti-Hermitian defect exceeds 1e-12");
  o.require(c["min_norm_bound_margin"].get<double>() >= 0,
            "eigenvalue norm bound violated");
  o.require(c["shells"].get<int>() == 41, "expected shells for spins 0..20");
  return o;
}

Outcome criterion3() {
  Outcome o;
  json body = run_cmd("check-system", "main_theorem.json");
  o.require(body["results"]["gh"]["verdict"] == "ConsistentGH",
            "main-theorem pair must be ConsistentGH");
  // exact per-shell bound sigma_min^2 >= lambda_min(M^T M) * lambda in Q(sqrt(D))
  {
    ProblemFile pf = load("main_theorem.json");
    Rational alpha(2, 3), beta(1, 5);
    Rational tr = 1 + beta * beta + alpha * alpha + 1;
    Rational det = (1 - alpha * beta) * (1 - alpha * beta);
    Rational disc = tr * tr - 4 * det;
    // sqrt(p/q) = sqrt(p q)/q
    BigInt pq = disc.get_num() * disc.get_den();
    ExactScalar sqrt_disc =
        ExactScalar::surd(Rational(0), Rational(1, disc.get_den()), pq);
    ExactScalar s2 = (ExactScalar(tr) - sqrt_disc).scaled(Rational(1, 2));
    o.require(s2.sign() > 0, "smallest singular value must be positive");
    auto shells = spectral::enumerate_shells(pf.group, Rational(10000));
    bool all_ok = true;
    for (const auto& shell : shells) {
      if (sgn(shell.lambda) == 0) continue;
      Rational best;
      bool first = true;
      for (const auto& mode : shell.modes) {
        Rational x1(mode.freq[0]), x2(mode.freq[1]);
        Rational z1 = x1 + alpha * x2, z2 = beta * x1 + x2;
        Rational v = z1 * z1 + z2 * z2;
        if (first || v < best) {
          best = v;
          first = false;
        }
      }
      ExactScalar margin = ExactScalar(best) - s2.scaled(shell.lambda);
      if (margin.sign() < 0) {
        all_ok = false;
        break;
      }
    }
    o.require(all_ok, "per-shell bound sigma_min >= s_min(M) sqrt(lambda) failed");
  }
  // each single field alone must fail with an exact resonance witness
  for (const char* f : {"single_field.json", "resonant_field.json"}) {
    json b = run_cmd("check-system", f);
    o.require(b["results"]["gh"]["verdict"] == "FailZeroSymbol",
              std::string(f) + ": expected FailZeroSymbol");
    const json& wits = b["results"]["gh"]["witnesses"];
    o.require(!wits.empty() && wits[0]["zero"].get<bool>(),
              std::string(f) + ": witness must be an exact zero");
  }
  return o;
}

Outcome criterion4() {
  Outcome o;
  // golden ratio: ConsistentGH with rho in [0.4, 0.6] over lambda <= 1e6
  {
    json b = run_cmd("check-system", "golden.json");
    o.require(b["results"]["gh"]["verdict"] == "ConsistentGH", "golden field not ConsistentGH");
    double rho = b["results"]["gh"]["fit"]["rho"].get<double>();
    o.require(rho >= 0.4 && rho <= 0.6, "fitted rho outside [0.4, 0.6]: " + std::to_string(rho));
  }
  // liouville: FailSuperpolynomial with >= 3 convergent witnesses, verified exactly
  {
    json b = run_cmd("check-system", "liouville.json");
    o.require(b["results"]["gh"]["verdict"] == "FailSuperpolynomial",
              "liouville field not FailSuperpolynomial");
    int convergent = 0;
    for (const auto& w : b["results"]["gh"]["witnesses"])
      if (w["source"] == "convergent") ++convergent;
    o.require(convergent >= 3, "need >= 3 convergent witnesses, got " + std::to_string(convergent));
    // big-integer verification of the convergent gaps
    auto lws = dio::liouville_witnesses(10, 7, 5);
    for (const auto& lw : lws)
      if (lw.k >= 2) o.require(lw.verified, "witness k=" + std::to_string(lw.k) + " unverified");
  }
  // equivalence agreement at radius 500 on all three families
  {
    auto fam_of = [](const char* file) {
      ProblemFile pf = parse_spec(g_data_dir + "/" + std::string(file));
      json b = run("diophantine", pf).body;
      return b;
    };
    for (const char* f : {"golden.json", "liouville.json", "main_theorem.json"}) {
      json b = fam_of(f);
      const json& eq = b["results"]["equivalence"];
      o.require(eq["radius"].get<long>() == 500, std::string(f) + ": radius must be 500");
      o.require(eq["agree"].get<bool>(), std::string(f) + ": conditions (1) and (2) disagree");
    }
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  for (const char* f : {"single_field.json", "resonant_field.json", "liouville.json"}) {
    json b = run_cmd("counterexample", f);
    const json& chk = b["results"]["check"];
    o.require(chk["closed"].get<bool>(), std::string(f) + ": counterexample not closed");
    o.require(chk["u"]["verdict"] != "ConsistentSmooth",
              std::string(f) + ": singular solution classified smooth");
    for (const auto& img : chk["images"])
      o.require(img["verdict"] == "ConsistentSmooth",
                std::string(f) + ": generator image not consistent-with-smooth");
    o.require(b["results"]["witness_count"].get<int>() <= 20,
              std::string(f) + ": truncation K = 20 exceeded");
  }
  return o;
}

Outcome criterion6() {
  Outcome o;
  json b = run_cmd("analyze-operator", "su2_sufficiency.json");
  const json& r = b["results"];
  o.require(r["hull"]["verdict"] == "HormanderHullFull", "hull must be all of su(2)");
  for (const auto& c : r["commutative_per_term"])
    o.require(c.get<bool>(), "line ranges must be commutative");
  o.require(r["gh"]["verdict"] == "ConsistentGH", "system {X1, X2} must be ConsistentGH");
  for (const auto& row : r["gh"]["shells"])
    o.require(!row["zero"].get<bool>() && row["sigma_min"].get<double>() > 0,
              "sigma_min must be positive on every shell");
  o.require(r["probe"]["all_positive"].get<bool>(), "probe found a nonpositive ratio");
  o.require(r["probe"]["hypotheses_ok"].get<bool>(), "sufficiency hypotheses flagged");
  o.require(r["tildeP"]["elliptic"].get<bool>(), "tilde-P must be elliptic");
  return o;
}

Outcome criterion7() {
  Outcome o;
  json b = run_cmd("check-system", "su2_obstruction.json");
  o.require(b["results"]["hull"]["verdict"] == "CommutativeHullObstruction",
            "expected the commutative-hull obstruction");
  o.require(b["results"]["gh"]["verdict"] != "ConsistentGH",
            "obstructed system must not be ConsistentGH");
  return o;
}

Outcome criterion8() {
  Outcome o;
  json b = run_cmd("inequalities", "inequalities_t.json");
  const json& r = b["results"];
  o.require(r["poincare"]["C"].get<double>() >= 2.0, "Poincare constant below 2");
  o.require(r["poincare"]["stable"].get<bool>(), "Poincare estimate unstable across seeds");
  for (const auto& row : r["graph_norm"]) {
    o.require(row["within_bound"].get<bool>(), "graph-norm ratio above the coefficient bound");
    o.require(row["max_ratio"].get<double>() <= row["sup_bound"].get<double>() + 1e-10,
              "cos(t) d_t bound violated");
  }
  for (const auto& row : r["weyl"]) {
    o.require(row["monotone"].get<bool>(), "Weyl partial sums not monotone");
    o.require(row["bounded"].get<bool>(), "Weyl partial sums unbounded");
  }
  return o;
}

Outcome criterion9() {
  Outcome o;
  const char* cli = std::getenv("GHLAB_CLI");
  if (!cli) {
    o.require(false, "GHLAB_CLI not set");
    return o;
  }
  struct Job {
    const char* cmd;
    const char* file;
  };
  std::vector<Job> jobs = {{"check-system", "main_theorem.json"},
                           {"check-system", "single_field.json"},
                           {"check-system", "resonant_field.json"},
                           {"check-system", "golden.json"},
                           {"check-system", "liouville.json"},
                           {"counterexample", "single_field.json"},
                           {"counterexample", "liouville.json"},
                           {"analyze-operator", "su2_sufficiency.json"}};
  int idx = 0;
  for (const auto& job : jobs) {
    std::string base = "/tmp/ghlab_det_" + std::to_string(idx++);
    auto invoke = [&](const char* threads, const std::string& out) {
      std::string c = std::string("GHLAB_THREADS=") + threads + " " + cli + " " + job.cmd +
                      " --spec " + g_data_dir + "/" + job.file + " --out " + out +
                      " 2>/dev/null";
      return std::system(c.c_str());
    };
    std::string o1 = base + "_a.json", o2 = base + "_b.json", o3 = base + "_c.json";
    bool ran = invoke("1", o1) == 0 && invoke("1", o2) == 0 && invoke("8", o3) == 0;
    o.require(ran, std::string(job.cmd) + " " + job.file + ": CLI run failed");
    if (!ran) continue;
    std::string a = slurp(o1), b = slurp(o2), c = slurp(o3);
    o.require(!a.empty() && a == b,
              std::string(job.cmd) + " " + job.file + ": reruns differ");
    o.require(a == c, std::string(job.cmd) + " " + job.file + ": GHLAB_THREADS changes bytes");
    std::remove(o1.c_str());
    std::remove(o2.c_str());
    std::remove(o3.c_str());
  }
  return o;
}

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
  const char* data = std::getenv("GHLAB_DATA");
  g_data_dir = data ? data : "tests/data";

  std::vector<Criterion> criteria = {
      {1, "exact energy identities on seeded (P, psi) pairs", 10, criterion1},
      {2, "SU(2) Casimir, skew-symmetry and eigenvalue norm bound (spins <= 20)", 30, criterion2},
      {3, "main-theorem torus pipeline with exact per-shell bounds", 60, criterion3},
      {4, "diophantine triptych: golden, liouville, equivalence at radius 500", 300, criterion4},
      {5, "counterexample closure for every failing system", 30, criterion5},
      {6, "SU(2) sufficiency instance: hull, commutativity, verdict, probe", 120, criterion6},
      {7, "commutative-hull obstruction for {X3}", 60, criterion7},
      {8, "auxiliary inequalities: Poincare, graph norm, Weyl sums", 60, criterion8},
      {9, "byte-identical reports across reruns and thread counts", 600, criterion9},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.fn();
    } catch (const std::exception& e) {
      out.ok = false;
      out.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      out.ok = false;
      out.detail += (out.detail.empty() ? "" : "; ");
      out.detail += "runtime " + std::to_string(secs) + "s exceeds budget";
    }
    std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", out.ok ? "PASS" : "FAIL", c.id, c.title,
                secs, out.detail.empty() ? "" : " -- ", out.detail.c_str());
    if (!out.ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
