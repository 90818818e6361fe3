#include "ghlab/ghlab.h"

#include <string>

#include "problem.hpp"

struct ghlab_problem {
  ghlab::ProblemFile pf;
};

struct ghlab_report {
  ghlab::Report rep;
  std::string json_cache;
};

namespace {

thread_local std::string g_last_error = "";

ghlab_status fail(ghlab_status st, const std::string& msg) {
  g_last_error = msg;
  return st;
}

template <class Fn>
ghlab_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ghlab::spec_error& e) {
    return fail(GHLAB_ERR_SPEC, e.what());
  } catch (const ghlab::precision_exhausted& e) {
    return fail(GHLAB_ERR_NUMERIC, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(GHLAB_ERR_SPEC, e.what());
  } catch (const std::exception& e) {
    return fail(GHLAB_ERR_NUMERIC, e.what());
  }
}

}  // namespace

extern "C" {

const char* ghlab_version(void) { return ghlab::kVersion; }

const char* ghlab_last_error(void) { return g_last_error.c_str(); }

ghlab_status ghlab_problem_parse_file(const char* path, ghlab_problem** out) {
  if (!path || !out) return fail(GHLAB_ERR_USAGE, "null argument");
  *out = nullptr;
  return guarded([&]() -> ghlab_status {
    auto* p = new ghlab_problem{};
    try {
      p->pf = ghlab::parse_spec(path);
    } catch (const ghlab::spec_error& e) {
      delete p;
      // distinguish unreadable files from schema violations
      if (std::string(e.what()).rfind("cannot open", 0) == 0)
        return fail(GHLAB_ERR_IO, e.what());
      throw;
    } catch (...) {
      delete p;
      throw;
    }
    *out = p;
    return GHLAB_OK;
  });
}

ghlab_status ghlab_problem_parse_string(const char* text, ghlab_problem** out) {
  if (!text || !out) return fail(GHLAB_ERR_USAGE, "null argument");
  *out = nullptr;
  return guarded([&]() -> ghlab_status {
    auto* p = new ghlab_problem{};
    try {
      p->pf = ghlab::parse_spec_text(text);
    } catch (...) {
      delete p;
      throw;
    }
    *out = p;
    return GHLAB_OK;
  });
}

ghlab_status ghlab_problem_override(ghlab_problem* p, const char* key, const char* value) {
  if (!p || !key || !value) return fail(GHLAB_ERR_USAGE, "null argument");
  return guarded([&]() -> ghlab_status {
    std::string k = key;
    if (k == "lambda_max") {
      p->pf.analysis.lambda_max = ghlab::rational_from_string(value);
      if (sgn(p->pf.analysis.lambda_max) < 0)
        throw ghlab::spec_error("lambda_max must be >= 0");
    } else if (k == "radius") {
      long r = std::stol(value);
      if (r < 1) throw ghlab::spec_error("radius must be >= 1");
      p->pf.analysis.radius = r;
    } else {
      throw ghlab::spec_error("unknown override key '" + k + "'");
    }
    if (p->pf.parameter_echo.contains("analysis"))
      p->pf.parameter_echo["analysis"][k] = value;
    else
      p->pf.parameter_echo["analysis"] = {{k, value}};
    return GHLAB_OK;
  });
}

void ghlab_problem_free(ghlab_problem* p) { delete p; }

ghlab_status ghlab_run(const ghlab_problem* p, const char* command, ghlab_report** out) {
  if (!p || !command || !out) return fail(GHLAB_ERR_USAGE, "null argument");
  *out = nullptr;
  return guarded([&]() -> ghlab_status {
    auto* r = new ghlab_report{};
    try {
      r->rep = ghlab::run(command, p->pf);
      r->json_cache = r->rep.json_text();
    } catch (...) {
      delete r;
      throw;
    }
    *out = r;
    return GHLAB_OK;
  });
}

const char* ghlab_report_json(const ghlab_report* r) {
  return r ? r->json_cache.c_str() : "";
}

ghlab_status ghlab_report_write(const ghlab_report* r, const char* path, const char* format) {
  if (!r || !path || !format) return fail(GHLAB_ERR_USAGE, "null argument");
  return guarded([&]() -> ghlab_status {
    try {
      ghlab::write_report(r->rep, path, format);
    } catch (const ghlab::spec_error& e) {
      if (std::string(e.what()).rfind("cannot write", 0) == 0 ||
          std::string(e.what()).rfind("short write", 0) == 0)
        return fail(GHLAB_ERR_IO, e.what());
      throw;
    }
    return GHLAB_OK;
  });
}

void ghlab_report_free(ghlab_report* r) { delete r; }

}  // extern "C"
