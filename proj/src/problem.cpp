#include "problem.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "fitting.hpp"
#include "prng.hpp"

namespace ghlab {

using nlohmann::json;

const char* const kVersion = "ghlab 1.0.0";

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void fail(const std::string& msg) { throw spec_error(msg); }

Rational parse_rational(const json& v, const std::string& ctx) {
  try {
    if (v.is_number_integer()) return Rational(v.get<long>());
    if (v.is_string()) return rational_from_string(v.get<std::string>());
  } catch (const std::exception& e) {
    fail(ctx + ": " + e.what());
  }
  fail(ctx + ": expected a rational (integer or \"p/q\" string)");
}

ExactScalar parse_scalar(const json& v, const std::string& ctx) {
  if (v.is_number_integer() || v.is_string()) return ExactScalar(parse_rational(v, ctx));
  if (v.is_object()) {
    try {
      if (v.contains("surd")) {
        const json& s = v["surd"];
        return ExactScalar::surd(parse_rational(s.at("a"), ctx + ".surd.a"),
                                 parse_rational(s.at("b"), ctx + ".surd.b"),
                                 BigInt(s.at("d").get<long>()));
      }
      if (v.contains("liouville")) {
        const json& s = v["liouville"];
        return ExactScalar::atom_value(
            Atom::liouville(s.at("base").get<long>(), s.at("order").get<int>()));
      }
      if (v.contains("decimal")) {
        const json& s = v["decimal"];
        return ExactScalar::atom_value(
            Atom::decimal(parse_rational(s.at("value"), ctx + ".decimal.value"),
                          s.at("precision").get<long>()));
      }
    } catch (const spec_error&) {
      throw;
    } catch (const std::exception& e) {
      fail(ctx + ": " + e.what());
    }
  }
  fail(ctx + ": unrecognized scalar form");
}

dio::RealSpec parse_realspec(const json& v, const std::string& ctx) {
  auto rs = dio::realspec_from_exact(parse_scalar(v, ctx));
  if (!rs) fail(ctx + ": value not representable as a RealSpec");
  return *rs;
}

fields::TrigPoly parse_trig(const json& v, int n, const std::string& ctx) {
  fields::TrigPoly p(n);
  if (v.is_null()) return p;
  if (!v.is_object() || !v.contains("terms"))
    fail(ctx + ": expected {\"terms\": [{\"freq\": [...], \"re\": ..., \"im\": ...}]}");
  for (const auto& term : v["terms"]) {
    if (!term.contains("freq")) fail(ctx + ": term missing \"freq\"");
    fields::FreqVec tau;
    for (const auto& f : term["freq"]) tau.push_back(f.get<long>());
    if (static_cast<int>(tau.size()) != n)
      fail(ctx + ": frequency length " + std::to_string(tau.size()) +
           " does not match the T dimension " + std::to_string(n));
    ExactScalar re = term.contains("re") ? parse_scalar(term["re"], ctx + ".re") : ExactScalar(0);
    ExactScalar im = term.contains("im") ? parse_scalar(term["im"], ctx + ".im") : ExactScalar(0);
    p.add_term(tau, CES(std::move(re), std::move(im)));
  }
  return p;
}

fields::CoefficientMap parse_coeff_map(const json& v, spectral::GroupSpec g, int n,
                                       const std::string& ctx) {
  fields::CoefficientMap a(g, n);
  if (!v.is_object() || !v.contains("components"))
    fail(ctx + ": expected {\"components\": [<trig poly per basis direction>]}");
  const json& comps = v["components"];
  if (static_cast<int>(comps.size()) != g.dim)
    fail(ctx + ": component count " + std::to_string(comps.size()) +
         " does not match the group dimension " + std::to_string(g.dim));
  for (int j = 0; j < g.dim; ++j)
    a.comp[static_cast<size_t>(j)] =
        parse_trig(comps[static_cast<size_t>(j)], n, ctx + ".components[" + std::to_string(j) + "]");
  try {
    a.validate();
  } catch (const std::exception& e) {
    fail(ctx + ": " + e.what());
  }
  return a;
}

op::TorusField parse_torus_field(const json& v, int n, const std::string& ctx) {
  op::TorusField w(n);
  if (v.is_null()) return w;
  if (!v.is_object() || !v.contains("components"))
    fail(ctx + ": expected {\"components\": [<trig poly per t direction>]}");
  const json& comps = v["components"];
  if (static_cast<int>(comps.size()) != n)
    fail(ctx + ": component count does not match the T dimension");
  for (int k = 0; k < n; ++k)
    w.b[static_cast<size_t>(k)] =
        parse_trig(comps[static_cast<size_t>(k)], n, ctx + ".components[" + std::to_string(k) + "]");
  for (int k = 0; k < n; ++k)
    if (!w.b[static_cast<size_t>(k)].is_real())
      fail(ctx + ": component " + std::to_string(k + 1) +
           " violates conjugate symmetry (field coefficients must be real)");
  if (!w.divergence_free())
    fail(ctx + ": field violates the skew-symmetry invariant (divergence not identically zero)");
  return w;
}

AnalysisParams parse_analysis(const json& v) {
  AnalysisParams a;
  if (v.is_null()) return a;
  auto get_d = [&](const char* key, double dflt) {
    return v.contains(key) ? v[key].get<double>() : dflt;
  };
  auto get_i = [&](const char* key, long dflt) {
    return v.contains(key) ? v[key].get<long>() : dflt;
  };
  if (v.contains("lambda_max")) a.lambda_max = parse_rational(v["lambda_max"], "analysis.lambda_max");
  if (v.contains("lambda0")) a.lambda0 = parse_rational(v["lambda0"], "analysis.lambda0");
  if (v.contains("probe_lambda_max"))
    a.probe_lambda_max = parse_rational(v["probe_lambda_max"], "analysis.probe_lambda_max");
  a.radius = get_i("radius", a.radius);
  if (v.contains("seed")) {
    a.seed = v["seed"].get<std::uint64_t>();
    a.seed_provided = true;
  }
  a.trials = static_cast<int>(get_i("trials", a.trials));
  a.theta = get_d("theta", a.theta);
  a.cone_s = get_d("cone_s", a.cone_s);
  a.smooth_s = get_d("smooth_s", a.smooth_s);
  a.super_s = get_d("super_s", a.super_s);
  a.super_min_witnesses = static_cast<int>(get_i("super_min_witnesses", a.super_min_witnesses));
  a.fit_quality_min = get_d("fit_quality_min", a.fit_quality_min);
  a.zero_top_fraction = get_d("zero_top_fraction", a.zero_top_fraction);
  a.witness_count = static_cast<int>(get_i("witness_count", a.witness_count));
  a.truncation = static_cast<int>(get_i("truncation", a.truncation));
  a.delta = get_d("delta", a.delta);
  a.poincare_trials = static_cast<int>(get_i("poincare_trials", a.poincare_trials));
  a.graph_trials = static_cast<int>(get_i("graph_trials", a.graph_trials));
  a.energy_trials = static_cast<int>(get_i("energy_trials", a.energy_trials));
  a.cf_depth = static_cast<int>(get_i("cf_depth", a.cf_depth));
  a.report_shells_cap = static_cast<int>(get_i("report_shells_cap", a.report_shells_cap));
  if (v.contains("product_mode")) a.product_mode = v["product_mode"].get<std::string>();
  if (a.radius < 1) fail("analysis.radius must be >= 1");
  if (sgn(a.lambda_max) < 0) fail("analysis.lambda_max must be >= 0");
  return a;
}

}  // namespace

ProblemFile parse_spec_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    fail(std::string("problem file is not valid JSON: ") + e.what());
  }
  ProblemFile pf;
  if (!j.contains("torus") || !j["torus"].contains("dim"))
    fail("missing torus section: expected {\"torus\": {\"dim\": n}}");
  pf.torus_dim = j["torus"]["dim"].get<int>();
  if (pf.torus_dim < 1 || pf.torus_dim > 3) fail("torus.dim must be 1..3");
  if (!j.contains("group") || !j["group"].contains("kind")) fail("missing group section");
  std::string kind = j["group"]["kind"].get<std::string>();
  if (kind == "torus") {
    if (!j["group"].contains("dim")) fail("group.dim required for torus groups");
    int m = j["group"]["dim"].get<int>();
    if (m < 1 || m > 4) fail("group.dim must be 1..4");
    pf.group = spectral::GroupSpec::torus(m);
  } else if (kind == "su2") {
    pf.group = spectral::GroupSpec::su2();
  } else {
    fail("unknown group kind '" + kind + "' (expected \"torus\" or \"su2\")");
  }
  if (j.contains("system")) {
    fields::SystemSpec sys;
    if (!j["system"].contains("fields") || j["system"]["fields"].empty())
      fail("system.fields must be a non-empty list");
    int idx = 0;
    for (const auto& f : j["system"]["fields"])
      sys.fields.push_back(
          parse_coeff_map(f, pf.group, pf.torus_dim, "system.fields[" + std::to_string(idx++) + "]"));
    pf.system = std::move(sys);
  }
  if (j.contains("operator")) {
    const json& o = j["operator"];
    op::OperatorSpec p;
    p.torus_dim = pf.torus_dim;
    p.group = pf.group;
    std::string qk = o.contains("q") ? o["q"].value("kind", "laplacian") : "laplacian";
    if (qk == "laplacian") {
      p.q = op::QKind::LaplacianT;
    } else if (qk == "zero") {
      p.q = op::QKind::Zero;
    } else if (qk == "form") {
      p.q = op::QKind::ConstantForm;
      for (const auto& w : o["q"].at("vectors")) {
        std::vector<Rational> vec;
        for (const auto& x : w) vec.push_back(parse_rational(x, "operator.q.vectors"));
        p.q_vectors.push_back(std::move(vec));
      }
    } else {
      fail("unknown Q kind '" + qk + "'");
    }
    auto parse_terms = [&](const char* key, std::vector<op::OperatorSpec::Term>& out) {
      if (!o.contains(key)) return;
      int idx = 0;
      for (const auto& t : o[key]) {
        std::string ctx = std::string("operator.") + key + "[" + std::to_string(idx++) + "]";
        fields::CoefficientMap a =
            t.contains("a") ? parse_coeff_map(t["a"], pf.group, pf.torus_dim, ctx + ".a")
                            : fields::CoefficientMap(pf.group, pf.torus_dim);
        op::TorusField w = t.contains("w") ? parse_torus_field(t["w"], pf.torus_dim, ctx + ".w")
                                           : op::TorusField(pf.torus_dim);
        out.emplace_back(std::move(a), std::move(w));
      }
    };
    parse_terms("terms", p.terms);
    parse_terms("remainder", p.remainder);
    try {
      p.validate();
    } catch (const std::exception& e) {
      fail(std::string("operator: ") + e.what());
    }
    pf.oper = std::move(p);
  }
  if (j.contains("family")) {
    const json& fj = j["family"];
    dio::NsaFamily fam;
    fam.m = fj.at("m").get<int>();
    for (const auto& gj : fj.at("groups")) {
      dio::NsaGroup g;
      for (const auto& x : gj.at("j")) g.j_idx.push_back(x.get<int>());
      for (const auto& x : gj.at("i")) g.i_idx.push_back(x.get<int>());
      for (const auto& row : gj.at("v")) {
        std::vector<dio::RealSpec> r;
        for (const auto& e : row) r.push_back(parse_realspec(e, "family.v"));
        g.v.push_back(std::move(r));
      }
      fam.groups.push_back(std::move(g));
    }
    try {
      fam.validate();
    } catch (const std::exception& e) {
      fail(std::string("family: ") + e.what());
    }
    pf.family = std::move(fam);
  }
  pf.analysis = parse_analysis(j.contains("analysis") ? j["analysis"] : json());
  json echo;
  echo["torus"] = j["torus"];
  echo["group"] = j["group"];
  if (j.contains("analysis")) echo["analysis"] = j["analysis"];
  pf.parameter_echo = std::move(echo);
  return pf;
}

ProblemFile parse_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open problem file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec_text(ss.str());
}

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double finite_or(double v, double dflt) { return std::isfinite(v) ? v : dflt; }

json fit_json(const ghcheck::FitResult& f) {
  json j;
  j["ok"] = f.ok;
  j["C"] = finite_or(f.C, 0.0);
  j["rho"] = finite_or(f.rho, 0.0);
  j["r2"] = finite_or(f.r2, 0.0);
  j["slope"] = finite_or(f.slope, 0.0);
  j["points"] = f.points;
  j["used_records"] = f.used_records;
  return j;
}

json shell_row(const ghcheck::ShellMinimum& sm, double cert_C, double cert_rho) {
  json r;
  r["lambda"] = sm.lambda.get_str();
  r["sigma_min"] = finite_or(sm.sigma, 0.0);
  r["log2_sigma"] = finite_or(sm.log2_sigma, -1e300);
  r["witness"] = sm.argmin.str();
  r["zero"] = sm.is_zero;
  r["source"] = sm.source;
  double ratio = 0;
  if (!sm.is_zero && cert_C > 0)
    ratio = std::exp2(sm.log2_sigma + cert_rho * log2_rational(1 + sm.lambda) - std::log2(cert_C));
  r["ratio"] = finite_or(ratio, 0.0);
  return r;
}

json shells_table(const ghcheck::GhReport& rep, int cap) {
  json rows = json::array();
  const auto& ms = rep.minima;
  if (static_cast<int>(ms.size()) <= cap) {
    for (const auto& sm : ms) rows.push_back(shell_row(sm, rep.certified_C, rep.certified_rho));
    return rows;
  }
  // deterministic selection: all records and zeros, plus an even stride
  std::vector<char> keep(ms.size(), 0);
  double run = std::numeric_limits<double>::infinity();
  int kept = 0;
  for (size_t i = 0; i < ms.size(); ++i) {
    bool rec = !ms[i].is_zero && ms[i].log2_sigma < run;
    if (rec) run = ms[i].log2_sigma;
    if ((rec || ms[i].is_zero) && kept < cap) {
      keep[i] = 1;
      ++kept;
    }
  }
  size_t stride = std::max<size_t>(1, ms.size() / std::max(1, cap - kept));
  for (size_t i = 0; i < ms.size() && kept < cap; i += stride)
    if (!keep[i]) {
      keep[i] = 1;
      ++kept;
    }
  for (size_t i = 0; i < ms.size(); ++i)
    if (keep[i]) rows.push_back(shell_row(ms[i], rep.certified_C, rep.certified_rho));
  return rows;
}

json gh_json(const ghcheck::GhReport& rep, int cap) {
  json j;
  j["verdict"] = ghcheck::verdict_name(rep.verdict);
  j["fit"] = fit_json(rep.fit);
  j["certified_C"] = finite_or(rep.certified_C, 0.0);
  j["certified_rho"] = finite_or(rep.certified_rho, 0.0);
  j["lambda0"] = rep.lambda0.get_str();
  j["lambda_max"] = rep.lambda_max.get_str();
  j["note"] = rep.note;
  j["shells"] = shells_table(rep, cap);
  json wit = json::array();
  for (const auto& w : rep.witnesses) {
    json r;
    r["lambda"] = w.lambda.get_str();
    r["mode"] = w.argmin.str();
    r["log2_sigma"] = finite_or(w.log2_sigma, -1e300);
    r["zero"] = w.is_zero;
    r["source"] = w.source;
    if (w.sigma_sq_hi) r["sigma_sq_upper"] = w.sigma_sq_hi->get_str();
    wit.push_back(std::move(r));
  }
  j["witnesses"] = std::move(wit);
  if (rep.verdict == ghcheck::Verdict::FailSuperpolynomial) j["witness_slope"] = rep.witness_slope;
  return j;
}

ghcheck::GhThresholds thresholds_of(const AnalysisParams& a) {
  ghcheck::GhThresholds th;
  th.super_s = a.super_s;
  th.super_min_witnesses = a.super_min_witnesses;
  th.fit_quality_min = a.fit_quality_min;
  th.zero_top_fraction = a.zero_top_fraction;
  th.lambda0 = a.lambda0;
  return th;
}

ghcheck::GhReport run_gh(const fields::SystemSpec& sys, const spectral::GroupSpec& g,
                         const AnalysisParams& a) {
  auto minima = ghcheck::shell_minima(sys, g, a.lambda_max);
  auto extra = ghcheck::convergent_witnesses_for(sys, a.witness_count);
  return ghcheck::gh_verdict(minima, a.lambda_max, thresholds_of(a), extra);
}

json hull_json(const ghcheck::HullCheck& h) {
  json j;
  j["verdict"] = ghcheck::hull_verdict_name(h.verdict);
  j["hull_dim"] = h.hull_dim;
  j["commutative"] = h.hull_commutative;
  return j;
}

json smoothness_json(const op::SmoothnessReport& r) {
  json j;
  j["verdict"] = r.str();
  j["slope"] = finite_or(r.slope, -1e300);
  j["order"] = finite_or(r.order, 0.0);
  j["r2"] = finite_or(r.r2, 0.0);
  j["s_tested"] = r.s_tested;
  j["blocks"] = r.blocks;
  return j;
}

// ---------------------------------------------------------------------------
// Product-level check for operators with constant G-fields
// ---------------------------------------------------------------------------

json product_check(const op::OperatorSpec& p, const AnalysisParams& a) {
  json out;
  const bool bare_mode = a.product_mode == "bare";
  // the check covers the constant-coefficient terms; variable terms ride along
  // under the main sufficiency route instead
  std::vector<std::vector<ExactScalar>> vs;  // G coordinates per constant term
  std::vector<std::vector<ExactScalar>> ws;  // constant W coordinates per term
  int skipped_variable = 0, skipped_w = 0;
  for (const auto& t : p.terms) {
    if (!t.a.is_constant() || !t.w.is_constant()) {
      ++skipped_variable;
      continue;
    }
    if (bare_mode && !t.w.is_zero()) {
      ++skipped_w;  // the G-side route requires bare left-invariant fields
      continue;
    }
    vs.push_back(t.a.constant_value().c);
    ws.push_back(t.w.constant_coords_exact());
  }
  if (vs.empty()) {
    out["applicable"] = false;
    out["note"] = "no constant-coefficient terms to check";
    return out;
  }
  out["applicable"] = true;
  out["constant_terms"] = static_cast<int>(vs.size());
  out["skipped_variable_terms"] = skipped_variable;
  if (bare_mode) out["skipped_terms_with_w"] = skipped_w;
  out["note"] = bare_mode
                    ? "verdict concerns the G-side system of the constant bare fields"
                    : "verdict concerns the product system of the constant terms (the "
                      "route's hypothesis), not P itself";
  if (bare_mode) {
    // G-side only: sigma_min of the stacked constant fields per shell
    std::vector<fields::LieElement> gens;
    for (const auto& v : vs) gens.emplace_back(p.group, v);
    auto minima = ghcheck::shell_minima_generators(gens, p.group, a.lambda_max);
    ghcheck::GhThresholds th;
    th.super_s = a.super_s;
    th.super_min_witnesses = a.super_min_witnesses;
    th.fit_quality_min = a.fit_quality_min;
    th.zero_top_fraction = a.zero_top_fraction;
    auto rep = ghcheck::gh_verdict(minima, a.lambda_max, th);
    out["mode"] = "bare";
    out["verdict"] = ghcheck::verdict_name(rep.verdict);
    out["fitted_rho"] = finite_or(rep.fit.rho, 0.0);
    out["fitted_C"] = finite_or(rep.fit.C, 0.0);
    out["levels"] = static_cast<int>(rep.minima.size());
    int zeros = 0;
    for (const auto& sm : rep.minima) zeros += sm.is_zero ? 1 : 0;
    out["zero_levels"] = zeros;
    return out;
  }
  // product modes (tau, xi) with mu + lambda <= lambda_max (coarse tau box)
  const Rational plmax = a.probe_lambda_max ? *a.probe_lambda_max : a.lambda_max;
  long tau_bound = static_cast<long>(std::sqrt(plmax.get_d())) ;
  tau_bound = std::min(tau_bound, 12L);
  struct Bucket {
    double best = std::numeric_limits<double>::infinity();
    bool zero = false;
    std::string witness;
  };
  std::map<Rational, Bucket> buckets;  // keyed by mu + lambda
  std::vector<long> tau(p.torus_dim, 0);
  auto g_shells = spectral::enumerate_shells(p.group, plmax);
  std::function<void(int)> rec = [&](int pos) {
    if (pos == p.torus_dim) {
      BigInt mu_i(0);
      for (long x : tau) mu_i += BigInt(x) * BigInt(x);
      Rational mu{mu_i};
      if (mu > plmax) return;
      for (const auto& shell : g_shells) {
        Rational tot = mu + shell.lambda;
        if (tot > plmax || sgn(tot) == 0) continue;
        Bucket& b = buckets[tot];
        if (p.group.is_torus()) {
          for (const auto& mode : shell.modes) {
            double s2 = 0;
            bool zero = true;
            for (size_t l = 0; l < vs.size(); ++l) {
              ExactScalar total = spectral::torus_symbol(vs[l], mode);
              for (int k = 0; k < p.torus_dim; ++k)
                total += ws[l][static_cast<size_t>(k)].scaled(Rational(tau[k]));
              double zd = total.to_double();
              s2 += zd * zd;
              if (zero && !total.is_zero()) zero = false;
            }
            if (zero) {
              b.zero = true;
              b.best = 0;
              if (b.witness.empty()) b.witness = mode.str();
            } else if (s2 < b.best) {
              b.best = s2;
            }
          }
        } else {
          const int twoj = shell.modes[0].twoj;
          const int d = twoj + 1;
          Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
          for (size_t l = 0; l < vs.size(); ++l) {
            std::vector<double> cd;
            for (const auto& c : vs[l]) cd.push_back(c.to_double());
            Eigen::MatrixXcd blk =
                spectral::su2_generator_block(twoj, Eigen::Vector3d(cd[0], cd[1], cd[2]));
            double wdot = 0;
            for (int k = 0; k < p.torus_dim; ++k)
              wdot += ws[l][static_cast<size_t>(k)].to_double() * tau[k];
            Eigen::MatrixXcd y =
                blk + std::complex<double>(0, wdot) * Eigen::MatrixXcd::Identity(d, d);
            h += y.adjoint() * y;
          }
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
          double lam_min = std::max(0.0, es.eigenvalues()(0));
          if (lam_min <= 1e-20) {
            b.zero = true;
            b.best = 0;
          } else {
            b.best = std::min(b.best, lam_min);
          }
        }
      }
      return;
    }
    for (long x = -tau_bound; x <= tau_bound; ++x) {
      tau[pos] = x;
      rec(pos + 1);
    }
  };
  rec(0);
  int zero_count = 0;
  std::vector<std::pair<double, double>> pts;
  double run = std::numeric_limits<double>::infinity();
  for (const auto& [tot, b] : buckets) {
    if (b.zero) {
      ++zero_count;
      continue;
    }
    double y = 0.5 * std::log2(b.best);
    if (y < run) {
      run = y;
      pts.emplace_back(log2_rational(1 + tot), y);
    }
  }
  out["mode"] = bare_mode ? "bare" : "drifted";
  out["levels"] = static_cast<int>(buckets.size());
  out["zero_levels"] = zero_count;
  if (zero_count >= 2) {
    out["verdict"] = "FailZeroSymbol";
  } else {
    if (pts.size() < 3) {
      for (const auto& [tot, b] : buckets)
        if (!b.zero) pts.emplace_back(log2_rational(1 + tot), 0.5 * std::log2(b.best));
    }
    LogFit fit = log_fit(pts);
    out["fitted_rho"] = fit.ok ? -fit.slope : 0.0;
    out["fitted_C"] = fit.ok ? std::exp2(fit.intercept) : 0.0;
    out["verdict"] = "ConsistentGH";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

json cmd_check_system(const ProblemFile& pf) {
  if (!pf.system) fail("check-system requires a system section");
  json results;
  ghcheck::GhReport rep = run_gh(*pf.system, pf.group, pf.analysis);
  results["gh"] = gh_json(rep, pf.analysis.report_shells_cap);
  results["hull"] = hull_json(ghcheck::hull_checks(*pf.system, pf.group));
  json comm = json::array();
  for (const auto& a : pf.system->fields) comm.push_back(fields::commutativity_check(a));
  results["commutative_per_field"] = std::move(comm);
  return results;
}

json cmd_analyze_operator(const ProblemFile& pf) {
  if (!pf.oper) fail("analyze-operator requires an operator section");
  if (!pf.analysis.seed_provided)
    fail("analysis.seed is required: randomized probes never use wall-clock entropy");
  const op::OperatorSpec& p = *pf.oper;
  json results;
  // ellipticity of tilde-P
  op::Ellipticity ell = op::tildeP_ellipticity(p);
  json ej;
  ej["elliptic"] = ell.elliptic;
  ej["sampled"] = ell.sampled;
  ej["note"] = ell.note;
  if (!ell.elliptic) ej["witness_tau"] = ell.witness_tau;
  results["tildeP"] = std::move(ej);
  // hypotheses
  json comm = json::array();
  bool all_comm = true;
  for (const auto& t : p.terms) {
    bool c = t.a.is_zero() ? true : fields::commutativity_check(t.a);
    comm.push_back(c);
    all_comm &= c;
  }
  results["commutative_per_term"] = std::move(comm);
  // system-level verdict
  fields::SystemSpec sys;
  for (const auto& t : p.terms)
    if (!t.a.is_zero()) sys.fields.push_back(t.a);
  if (!sys.fields.empty()) {
    ghcheck::GhReport rep = run_gh(sys, pf.group, pf.analysis);
    results["gh"] = gh_json(rep, pf.analysis.report_shells_cap);
    results["hull"] = hull_json(ghcheck::hull_checks(sys, pf.group));
  } else {
    results["gh"] = nullptr;
    results["note"] = "no nonzero G-direction fields; system-level check skipped";
  }
  // probe
  Rational plmax = pf.analysis.probe_lambda_max ? *pf.analysis.probe_lambda_max
                                                : pf.analysis.lambda_max;
  op::ProbeResult probe =
      op::final_inequality_probe(p, plmax, pf.analysis.trials, pf.analysis.seed);
  json pj;
  pj["all_positive"] = probe.all_positive;
  pj["empirical"] = true;  // sampled lower-bound estimate, not a certified minimum
  pj["fitted_C"] = finite_or(probe.fitted_C, 0.0);
  pj["fitted_rho"] = finite_or(probe.fitted_rho, 0.0);
  pj["fit_r2"] = finite_or(probe.fit_r2, 0.0);
  pj["hypotheses_ok"] = probe.hypotheses_ok && all_comm;
  pj["hypothesis_note"] = probe.hypothesis_note;
  pj["seed"] = probe.seed;
  pj["trials"] = probe.trials;
  json rows = json::array();
  for (const auto& ps : probe.per_shell) {
    json r;
    r["lambda"] = ps.lambda.get_str();
    r["min_ratio"] = finite_or(ps.min_ratio, 0.0);
    r["exact_path"] = ps.exact_path;
    rows.push_back(std::move(r));
  }
  pj["per_shell"] = std::move(rows);
  results["probe"] = std::move(pj);
  // product-level modes for constant-coefficient terms
  bool any_const = false;
  for (const auto& t : p.terms) any_const |= t.a.is_constant() && t.w.is_constant();
  if (!pf.analysis.product_mode.empty() || any_const)
    results["product_check"] = product_check(p, pf.analysis);
  return results;
}

json cf_json(const dio::ContinuedFraction& cf, int cap = 12) {
  json j;
  json q = json::array(), conv = json::array();
  for (size_t i = 0; i < cf.quotients.size() && i < static_cast<size_t>(cap); ++i)
    q.push_back(cf.quotients[i].get_str());
  for (size_t i = 0; i < cf.convergents.size() && i < static_cast<size_t>(cap); ++i) {
    json c;
    c["p"] = cf.convergents[i].first.get_str();
    c["q"] = cf.convergents[i].second.get_str();
    conv.push_back(std::move(c));
  }
  j["quotients"] = std::move(q);
  j["convergents"] = std::move(conv);
  j["terminated"] = cf.terminated;
  return j;
}

dio::NsaFamily family_of(const ProblemFile& pf) {
  if (pf.family) return *pf.family;
  if (!pf.system) fail("diophantine requires a family section or a system section");
  if (!pf.group.is_torus()) fail("diophantine conditions live on torus groups");
  dio::NsaFamily fam;
  fam.m = pf.group.dim;
  for (const auto& a : pf.system->fields) {
    fields::RangeBasis rb = fields::range_basis(a);
    dio::NsaGroup g;
    g.j_idx = rb.basis_idx;
    g.i_idx = rb.rest_idx;
    for (int pidx = 0; pidx < rb.rank(); ++pidx) {
      std::vector<dio::RealSpec> row;
      for (size_t q = 0; q < rb.rest_idx.size(); ++q) {
        auto rs = dio::realspec_from_exact(rb.lambda[q][static_cast<size_t>(pidx)]);
        if (!rs) fail("system expansion coefficient not representable as a RealSpec");
        row.push_back(*rs);
      }
      g.v.push_back(std::move(row));
    }
    fam.groups.push_back(std::move(g));
  }
  fam.validate();
  return fam;
}

json cmd_diophantine(const ProblemFile& pf) {
  dio::NsaFamily fam = family_of(pf);
  json results;
  dio::NsaVerdict v = dio::verify_equivalence(fam, pf.analysis.radius);
  json vj;
  vj["g_holds"] = v.g_holds;
  vj["i_holds"] = v.i_holds;
  vj["agree"] = v.g_holds == v.i_holds && !v.anomaly;
  vj["anomaly"] = v.anomaly;
  vj["radius"] = v.radius;
  vj["fitted_B"] = finite_or(v.fitted_B, 0.0);
  vj["fitted_M"] = finite_or(v.fitted_M, 0.0);
  vj["fitted_C"] = finite_or(v.fitted_C, 0.0);
  vj["fitted_rho"] = finite_or(v.fitted_rho, 0.0);
  vj["derived_C"] = v.derived_C.get_str();
  vj["derived_rho"] = v.derived_rho.get_str();
  vj["note"] = v.note;
  json wit = json::array();
  for (long x : v.witness_xi) wit.push_back(x);
  vj["witness_xi"] = std::move(wit);
  vj["witness_exact_zero"] = v.witness_exact_zero;
  results["equivalence"] = std::move(vj);
  // continued fractions of the irrational expansion entries
  json cfs = json::array();
  json liou = json::array();
  for (const auto& g : fam.groups)
    for (const auto& row : g.v)
      for (const auto& e : row) {
        if (e.kind == dio::RealSpec::Kind::Rational) continue;
        json entry;
        entry["value"] = e.str();
        entry["cf"] = cf_json(dio::continued_fraction(e, pf.analysis.cf_depth));
        cfs.push_back(std::move(entry));
        if (e.kind == dio::RealSpec::Kind::Liouville) {
          for (const auto& lw :
               dio::liouville_witnesses(e.liou_base, e.liou_trunc, std::min(5, e.liou_trunc))) {
            json w;
            w["k"] = lw.k;
            w["p"] = lw.p.get_str();
            w["q"] = lw.q.get_str();
            w["gap_upper"] = lw.gap_hi.get_str();
            w["bound"] = lw.bound.get_str();
            w["verified"] = lw.verified;
            liou.push_back(std::move(w));
          }
        }
      }
  results["continued_fractions"] = std::move(cfs);
  if (!liou.empty()) results["liouville_witnesses"] = std::move(liou);
  return results;
}

json cmd_counterexample(const ProblemFile& pf) {
  if (!pf.system) fail("counterexample requires a system section");
  json results;
  ghcheck::GhReport rep = run_gh(*pf.system, pf.group, pf.analysis);
  results["gh_verdict"] = ghcheck::verdict_name(rep.verdict);
  if (rep.verdict == ghcheck::Verdict::ConsistentGH ||
      rep.verdict == ghcheck::Verdict::Inconclusive) {
    results["note"] = "no failing witnesses: system consistent with (GH) on the tested range";
    return results;
  }
  std::vector<ghcheck::ShellMinimum> wits = rep.witnesses;
  if (static_cast<int>(wits.size()) > pf.analysis.truncation)
    wits.resize(static_cast<size_t>(pf.analysis.truncation));
  ghcheck::SingularSolution sol =
      ghcheck::build_singular_solution(pf.group, pf.torus_dim, wits);
  auto gens = ghcheck::system_generators(*pf.system);
  ghcheck::CounterexampleCheck chk =
      ghcheck::check_singular_solution(sol, gens, wits, pf.analysis.smooth_s);
  json cj;
  cj["unit_norms"] = chk.unit_norms;
  cj["image_bounded"] = chk.image_bounded;
  cj["u"] = smoothness_json(chk.u_report);
  json imgs = json::array();
  for (const auto& r : chk.image_reports) imgs.push_back(smoothness_json(r));
  cj["images"] = std::move(imgs);
  cj["closed"] = chk.closed;
  results["check"] = std::move(cj);
  json uj = json::array();
  for (const auto& w : wits) {
    json r;
    r["lambda"] = w.lambda.get_str();
    r["mode"] = w.argmin.str();
    r["coefficient"] = 1.0;
    uj.push_back(std::move(r));
  }
  results["singular_solution"] = std::move(uj);
  results["witness_count"] = static_cast<int>(wits.size());
  return results;
}

json cmd_inequalities(const ProblemFile& pf) {
  if (!pf.analysis.seed_provided)
    fail("analysis.seed is required: randomized probes never use wall-clock entropy");
  json results;
  const AnalysisParams& a = pf.analysis;
  // energy identity sweep on random (P, psi) pairs
  {
    int n = pf.torus_dim;
    spectral::GroupSpec g = pf.group;
    bool exact_mode = g.is_torus();
    Prng rng(a.seed);
    bool all_zero = true;
    double max_float = 0;
    int pairs = 0;
    auto shells = spectral::enumerate_shells(g, Rational(exact_mode ? 9 : 4));
    for (int trial = 0; trial < a.energy_trials; ++trial) {
      // random operator: Q = Laplacian, two terms with rational trig coefficients
      op::OperatorSpec p;
      p.torus_dim = n;
      p.group = g;
      p.q = op::QKind::LaplacianT;
      for (int l = 0; l < 2; ++l) {
        fields::CoefficientMap am(g, n);
        for (int j = 0; j < g.dim; ++j) {
          fields::TrigPoly poly(n);
          fields::FreqVec z(n, 0);
          poly.add_term(z, CES(ExactScalar(Rational(static_cast<long>(rng.next_below(7)) - 3))));
          for (int axis = 0; axis < n; ++axis) {
            long freq = 1 + static_cast<long>(rng.next_below(2));
            Rational amp(static_cast<long>(rng.next_below(9)) - 4, 2);
            poly = poly + fields::TrigPoly::cosine(n, axis, amp, freq);
            Rational amp2(static_cast<long>(rng.next_below(9)) - 4, 2);
            poly = poly + fields::TrigPoly::sine(n, axis, amp2, freq);
          }
          am.comp[static_cast<size_t>(j)] = poly;
        }
        op::TorusField w(n);
        for (int k = 0; k < n; ++k) {
          fields::FreqVec z(n, 0);
          fields::TrigPoly c(n);
          c.add_term(z, CES(ExactScalar(Rational(static_cast<long>(rng.next_below(5)) - 2))));
          w.b[static_cast<size_t>(k)] = c;  // constant fields are divergence-free
        }
        p.terms.emplace_back(std::move(am), std::move(w));
      }
      // random psi on one shell
      const auto& shell = shells[1 + rng.next_below(shells.size() - 1)];
      if (exact_mode) {
        op::FourierExact psi(n, g);
        for (const auto& mode : shell.modes) {
          fields::FreqVec tau(n, 0);
          for (int k = 0; k < n; ++k) tau[k] = static_cast<long>(rng.next_below(5)) - 2;
          Rational re(static_cast<long>(rng.next_below(9)) - 4, 1 + static_cast<long>(rng.next_below(3)));
          Rational im(static_cast<long>(rng.next_below(9)) - 4, 1 + static_cast<long>(rng.next_below(3)));
          psi.add(tau, mode, CES(ExactScalar(re), ExactScalar(im)));
        }
        if (psi.empty()) continue;
        CES res = op::energy_identity_residual(p, psi);
        if (!res.is_zero()) all_zero = false;
        // floating rerun of the same pair
        op::FourierFloat psif(n, g);
        for (const auto& [key, v] : psi.coef)
          psif.add(key.first, key.second,
                   std::complex<double>(v.re.to_double(), v.im.to_double()));
        std::complex<double> resf = op::energy_identity_residual(p, psif);
        max_float = std::max(max_float, std::abs(resf));
      } else {
        op::FourierFloat psi(n, g);
        for (const auto& mode : shell.modes) {
          fields::FreqVec tau(n, 0);
          for (int k = 0; k < n; ++k) tau[k] = static_cast<long>(rng.next_below(5)) - 2;
          psi.add(tau, mode, std::complex<double>(rng.next_sym(), rng.next_sym()));
        }
        if (psi.empty()) continue;
        std::complex<double> resf = op::energy_identity_residual(p, psi);
        max_float = std::max(max_float, std::abs(resf));
      }
      ++pairs;
    }
    json ej;
    ej["pairs"] = pairs;
    ej["exact_mode"] = exact_mode;
    ej["exact_all_zero"] = exact_mode ? all_zero : false;
    ej["max_float_residual"] = max_float;
    ej["seed"] = a.seed;
    results["energy"] = std::move(ej);
  }
  // Poincare-type constant
  {
    op::PoincareResult pr = op::poincare_estimate(a.delta, a.poincare_trials, a.seed);
    json pj;
    pj["delta"] = pr.delta;
    pj["C"] = pr.c_hat;
    pj["C_revalidated"] = pr.c_hat_revalidated;
    pj["stable"] = pr.stable;
    pj["trials"] = pr.trials;
    pj["seed"] = pr.seed;
    results["poincare"] = std::move(pj);
  }
  // graph-norm bounds
  {
    json rows = json::array();
    std::vector<op::TorusField> fieldsv;
    if (pf.oper)
      for (const auto& t : pf.oper->terms) fieldsv.push_back(t.w);
    if (fieldsv.empty()) {
      op::TorusField w(1);
      w.b[0] = fields::TrigPoly::cosine(1, 0, Rational(1));
      fieldsv.push_back(std::move(w));
    }
    for (const auto& w : fieldsv) {
      if (w.is_zero()) continue;
      op::GraphNormResult gr = op::graph_norm_bound(w, a.graph_trials, a.seed);
      json r;
      r["max_ratio"] = gr.max_ratio;
      r["sup_bound"] = gr.sup_coeff_bound;
      r["within_bound"] = gr.max_ratio <= gr.sup_coeff_bound + 1e-10;
      r["samples"] = gr.samples_used;
      rows.push_back(std::move(r));
    }
    results["graph_norm"] = std::move(rows);
  }
  // Casimir, anti-Hermitian defect and the eigenvalue norm bound
  {
    auto shells = spectral::enumerate_shells(pf.group, a.lambda_max);
    double max_cas = 0, max_defect = 0, min_margin = std::numeric_limits<double>::infinity();
    for (const auto& shell : shells) {
      max_cas = std::max(max_cas, spectral::casimir_residual(pf.group, shell));
      if (sgn(shell.lambda) == 0) continue;
      double sq = std::sqrt(shell.lambda.get_d());
      for (int axis = 0; axis < pf.group.dim; ++axis) {
        std::vector<double> c(static_cast<size_t>(pf.group.dim), 0.0);
        c[static_cast<size_t>(axis)] = 1.0;
        double nrm = spectral::field_action_norm(pf.group, c, shell);
        min_margin = std::min(min_margin, sq - nrm);
        if (!pf.group.is_torus()) {
          const int twoj = shell.modes[0].twoj;
          Eigen::Vector3d e = Eigen::Vector3d::Zero();
          e[axis] = 1.0;
          Eigen::MatrixXcd b = spectral::su2_generator_block(twoj, e);
          max_defect = std::max(max_defect, (b + b.adjoint()).norm());
        }
      }
    }
    json cj;
    cj["shells"] = static_cast<int>(shells.size());
    cj["max_casimir_residual"] = max_cas;
    cj["max_antihermitian_defect"] = max_defect;
    cj["min_norm_bound_margin"] = std::isfinite(min_margin) ? min_margin : 0.0;
    results["casimir"] = std::move(cj);
  }
  // Weyl summability on both backends
  {
    json rows = json::array();
    std::vector<spectral::GroupSpec> backends;
    backends.push_back(pf.group.is_torus() ? pf.group : spectral::GroupSpec::torus(2));
    backends.push_back(spectral::GroupSpec::su2());
    for (const auto& g : backends) {
      auto sums = spectral::weyl_partial_sums(g, a.lambda_max);
      bool monotone = true;
      for (size_t i = 1; i < sums.size(); ++i) monotone &= sums[i] >= sums[i - 1] - 1e-15;
      json r;
      r["backend"] = g.str();
      r["terms"] = static_cast<int>(sums.size());
      r["last_sum"] = sums.empty() ? 0.0 : sums.back();
      r["monotone"] = monotone;
      r["bounded"] = sums.empty() ? true : sums.back() <= 1e3;
      rows.push_back(std::move(r));
    }
    results["weyl"] = std::move(rows);
  }
  return results;
}

}  // namespace

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

Report run(const std::string& command, const ProblemFile& pf) {
  json results;
  if (command == "check-system") {
    results = cmd_check_system(pf);
  } else if (command == "analyze-operator") {
    results = cmd_analyze_operator(pf);
  } else if (command == "diophantine") {
    results = cmd_diophantine(pf);
  } else if (command == "counterexample") {
    results = cmd_counterexample(pf);
  } else if (command == "inequalities") {
    results = cmd_inequalities(pf);
  } else {
    fail("unknown command '" + command + "'");
  }
  Report rep;
  rep.body["command"] = command;
  rep.body["version"] = kVersion;
  rep.body["parameters"] = pf.parameter_echo;
  rep.body["results"] = std::move(results);
  return rep;
}

std::string Report::json_text() const { return body.dump(2) + "\n"; }

std::string Report::csv_text() const {
  const json* shells = nullptr;
  if (body.contains("results")) {
    const json& r = body["results"];
    if (r.contains("gh") && r["gh"].is_object() && r["gh"].contains("shells"))
      shells = &r["gh"]["shells"];
  }
  if (!shells) throw spec_error("this report has no shell table; use --format json");
  std::ostringstream os;
  os << "lambda,sigma_min,witness,ratio\n";
  for (const auto& row : *shells) {
    os << row["lambda"].get<std::string>() << "," << fmt_double(row["sigma_min"].get<double>())
       << ",\"" << row["witness"].get<std::string>() << "\","
       << fmt_double(row["ratio"].get<double>()) << "\n";
  }
  return os.str();
}

void write_report(const Report& rep, const std::string& path, const std::string& format) {
  std::string text;
  if (format == "json") {
    text = rep.json_text();
  } else if (format == "csv") {
    text = rep.csv_text();
  } else {
    fail("unknown report format '" + format + "' (expected csv or json)");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write report to '" + path + "'");
  out << text;
  if (!out) fail("short write to '" + path + "'");
}

}  // namespace ghlab
