#include "nodeembed/nodeembed.h"

#include <cstring>
#include <new>
#include <string>

#include "nodeembed/architectures.hpp"
#include "nodeembed/constructions.hpp"
#include "nodeembed/julia.hpp"
#include "nodeembed/morse.hpp"
#include "nodeembed/suspension.hpp"

using namespace nodeembed;
using nlohmann::json;

struct ne_funcspec {
  FuncSpec f;
};
struct ne_arch {
  NodeArchitecture a;
};
struct ne_torus {
  MappingTorus m;
};

namespace {

thread_local std::string g_last_error;

ne_status fail(ne_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class Fn>
ne_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const NumericalError& e) {
    return fail(NE_ENUMERIC, e.what());
  } catch (const InputError& e) {
    return fail(NE_EINPUT, e.what());
  } catch (const json::exception& e) {
    return fail(NE_EINPUT, std::string("malformed JSON: ") + e.what());
  } catch (const Error& e) {
    return fail(NE_EINTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(NE_EINTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(NE_EINTERNAL, e.what());
  } catch (...) {
    return fail(NE_EINTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void put(char** dst, const std::string& s) {
  if (dst) *dst = dup(s);
}

void need(const void* p, const char* what) {
  if (!p) throw InputError(std::string(what) + " must not be NULL");
}

json parse_json(const char* text, const char* what) {
  need(text, what);
  return json::parse(text);
}

Grid grid_from_json(const char* text, const Domain& fallback, int dim) {
  const json j = text ? json::parse(text) : json::object();
  if (!j.is_object()) throw InputError("grid spec must be a JSON object");
  const Domain d = j.contains("domain") ? domain_from_json(j.at("domain"), dim) : fallback;
  if (d.dim() != dim) throw InputError("grid domain dimension does not match");
  const double inset = j.value("inset", 1e-3);
  std::vector<int> counts;
  if (j.contains("counts")) {
    counts = j.at("counts").get<std::vector<int>>();
  } else {
    counts.assign(dim, j.value("count", 64));
  }
  return Grid(d, std::move(counts), inset);
}

}  // namespace

extern "C" {

const char* ne_last_error(void) { return g_last_error.c_str(); }
const char* ne_version(void) { return "0.1.0"; }
void ne_string_free(char* s) { std::free(s); }

// ---------------------------------------------------------------- maps

ne_status ne_funcspec_parse(const char* name, int n_in, const char* const* components, int n_out,
                            ne_funcspec** out) {
  return guarded([&] {
    need(out, "out");
    need(components, "components");
    if (n_out < 1) throw InputError("a map needs at least one component");
    std::vector<std::string> comps;
    for (int i = 0; i < n_out; ++i) {
      need(components[i], "component");
      comps.emplace_back(components[i]);
    }
    *out = new ne_funcspec{FuncSpec::parse(name ? name : "f", n_in, comps)};
    return NE_OK;
  });
}

ne_status ne_funcspec_from_json(const char* text, ne_funcspec** out) {
  return guarded([&] {
    need(out, "out");
    *out = new ne_funcspec{FuncSpec::from_json(parse_json(text, "json"))};
    return NE_OK;
  });
}

ne_status ne_funcspec_to_json(const ne_funcspec* f, char** out) {
  return guarded([&] {
    need(f, "map");
    need(out, "out");
    *out = dup(f->f.to_json().dump(2));
    return NE_OK;
  });
}

int ne_funcspec_n_in(const ne_funcspec* f) { return f ? f->f.n_in() : -1; }
int ne_funcspec_n_out(const ne_funcspec* f) { return f ? f->f.n_out() : -1; }

ne_status ne_funcspec_eval(const ne_funcspec* f, const double* x, double* out) {
  return guarded([&] {
    need(f, "map");
    need(x, "x");
    need(out, "out");
    const Vec y = f->f.eval(std::span<const double>(x, f->f.n_in()));
    std::copy(y.begin(), y.end(), out);
    return NE_OK;
  });
}

void ne_funcspec_free(ne_funcspec* f) { delete f; }

// ---------------------------------------------------------------- architectures

ne_status ne_arch_construct(const char* id, const char* params_json, ne_arch** out, char** citation) {
  return guarded([&] {
    need(id, "id");
    need(out, "out");
    const json params = params_json ? json::parse(params_json) : json::object();
    Construction c = construct(id, params);
    *out = new ne_arch{std::move(c.arch)};
    put(citation, c.citation);
    return NE_OK;
  });
}

ne_status ne_arch_from_json(const char* text, ne_arch** out) {
  return guarded([&] {
    need(out, "out");
    *out = new ne_arch{NodeArchitecture::from_json(parse_json(text, "json"))};
    return NE_OK;
  });
}

ne_status ne_arch_to_json(const ne_arch* a, char** out) {
  return guarded([&] {
    need(a, "architecture");
    need(out, "out");
    *out = dup(a->a.to_json().dump(2));
    return NE_OK;
  });
}

int ne_arch_n_in(const ne_arch* a) { return a ? a->a.n_in() : -1; }
int ne_arch_n_out(const ne_arch* a) { return a ? a->a.n_out() : -1; }

ne_status ne_arch_set_tolerances(ne_arch* a, double rtol, double atol) {
  return guarded([&] {
    need(a, "architecture");
    IntegratorConfig cfg = a->a.config();
    cfg.rtol = rtol;
    cfg.atol = atol;
    cfg.validate();
    a->a = a->a.with_config(cfg);
    return NE_OK;
  });
}

ne_status ne_arch_evaluate(const ne_arch* a, const double* x, double* out) {
  return guarded([&] {
    need(a, "architecture");
    need(x, "x");
    need(out, "out");
    const Evaluation e = a->a.evaluate(std::span<const double>(x, a->a.n_in()));
    std::copy(e.output.begin(), e.output.end(), out);
    return NE_OK;
  });
}

ne_status ne_arch_trajectory_csv(const ne_arch* a, const double* x, char** csv) {
  return guarded([&] {
    need(a, "architecture");
    need(x, "x");
    need(csv, "csv");
    const Trajectory tr = a->a.trajectory(std::span<const double>(x, a->a.n_in()));
    *csv = dup(trajectory_csv(tr));
    if (!tr.ok()) return fail(NE_ENUMERIC, "integration stopped: " + to_string(tr.status) + " " + tr.message);
    return NE_OK;
  });
}

void ne_arch_free(ne_arch* a) { delete a; }

ne_status ne_verify(const ne_arch* a, const ne_funcspec* target, const char* grid_json, double tol,
                    char** report_json, char** table_csv) {
  return guarded([&] {
    need(a, "architecture");
    need(target, "target");
    if (!(tol > 0)) throw InputError("tolerance must be positive");
    const Grid grid = grid_from_json(grid_json, target->f.domain(), target->f.n_in());
    const VerificationReport rep = verify_embedding(a->a, target->f, grid, tol);
    put(report_json, rep.to_json().dump(2));
    put(table_csv, rep.table_csv());
    if (rep.pass) return NE_OK;
    return fail(NE_FAIL, "max error " + format_number(rep.max_err) + " exceeds tolerance " + format_number(tol) +
                             (rep.failures ? " (" + std::to_string(rep.failures) + " points failed)" : ""));
  });
}

// ---------------------------------------------------------------- flows

ne_status ne_flow(const ne_funcspec* field, const double* x, double t, double rtol, double atol,
                  double* final_state, char** csv) {
  return guarded([&] {
    need(field, "field");
    need(x, "x");
    need(final_state, "final_state");
    const VectorField vf(field->f);
    IntegratorConfig cfg;
    cfg.rtol = rtol;
    cfg.atol = atol;
    cfg.validate();
    const Trajectory tr = integrate(vf, std::span<const double>(x, vf.dim()), t, cfg);
    put(csv, trajectory_csv(tr));
    const Vec& h = tr.final_state();
    std::copy(h.begin(), h.end(), final_state);
    if (!tr.ok()) {
      return fail(NE_ENUMERIC, to_string(tr.status) + " at t = " + format_number(tr.t_stop) +
                                   (tr.message.empty() ? "" : ": " + tr.message));
    }
    return NE_OK;
  });
}

ne_status ne_julia_residual(const ne_funcspec* f, const ne_funcspec* phi, const char* grid_json,
                            char** report_json, char** csv) {
  return guarded([&] {
    need(f, "field");
    need(phi, "map");
    const Grid grid = grid_from_json(grid_json, phi->f.domain(), phi->f.n_in());
    const ResidualReport rep = julia_residual(f->f, phi->f, grid);
    put(report_json, rep.to_json().dump(2));
    put(csv, rep.per_point_csv());
    return NE_OK;
  });
}

ne_status ne_jabotinsky_flow(const ne_funcspec* field, double x, double t, double* out) {
  return guarded([&] {
    need(field, "field");
    need(out, "out");
    *out = jabotinsky_flow(RFunction(field->f), x, t);
    return NE_OK;
  });
}

ne_status ne_series_iterative_logarithm(const double* phi, int len, int N, char** out) {
  return guarded([&] {
    need(phi, "coefficients");
    need(out, "out");
    if (len < 1) throw InputError("series needs at least one coefficient");
    *out = dup(iterative_logarithm(PowerSeries(Vec(phi, phi + len)), N).to_json().dump(2));
    return NE_OK;
  });
}

ne_status ne_series_monomial(double c, int alpha, int N, char** out) {
  return guarded([&] {
    need(out, "out");
    *out = dup(monomial_series_solution(c, alpha, N).to_json().dump(2));
    return NE_OK;
  });
}

// ---------------------------------------------------------------- obstructions

ne_status ne_diagnose(const ne_funcspec* phi, const char* grid_json, char** out) {
  return guarded([&] {
    need(phi, "map");
    need(out, "out");
    const Grid grid = grid_from_json(grid_json, phi->f.domain(), phi->f.n_in());
    *out = dup(diagnose(phi->f, grid).to_json().dump(2));
    return NE_OK;
  });
}

ne_status ne_morseify(const ne_funcspec* psi, double bound, unsigned long long seed, const char* grid_json,
                      char** out) {
  return guarded([&] {
    need(psi, "map");
    need(out, "out");
    const Grid grid = grid_from_json(grid_json, psi->f.domain(), psi->f.n_in());
    *out = dup(morseify(psi->f, bound, seed, grid).to_json().dump(2));
    return NE_OK;
  });
}

ne_status ne_antipodal_point(const ne_funcspec* g, double tol, double* theta, double* residual) {
  return guarded([&] {
    need(g, "map");
    const AntipodalResult r = antipodal_point(g->f, tol);
    if (theta) *theta = r.theta;
    if (residual) *residual = r.residual;
    return NE_OK;
  });
}

// ---------------------------------------------------------------- mapping torus

ne_status ne_torus_from_json(const char* text, ne_torus** out) {
  return guarded([&] {
    need(out, "out");
    *out = new ne_torus{MappingTorus::from_json(parse_json(text, "json"))};
    return NE_OK;
  });
}

int ne_torus_dim(const ne_torus* m) { return m ? m->m.dim() : -1; }

ne_status ne_torus_flow(const ne_torus* m, const double* x, double r, long long k, double s, double* x_out,
                        double* r_out, long long* k_out) {
  return guarded([&] {
    need(m, "torus");
    need(x, "x");
    const TorusPoint start{Vec(x, x + m->m.dim()), r, k};
    const TorusPoint p = suspension_flow(m->m, start, s);
    if (x_out) std::copy(p.x.begin(), p.x.end(), x_out);
    if (r_out) *r_out = p.r;
    if (k_out) *k_out = p.k;
    return NE_OK;
  });
}

ne_status ne_torus_csv(const ne_torus* m, const double* x, double r, double s_total, int samples, char** csv) {
  return guarded([&] {
    need(m, "torus");
    need(x, "x");
    need(csv, "csv");
    *csv = dup(torus_trajectory_csv(m->m, TorusPoint{Vec(x, x + m->m.dim()), r, 0}, s_total, samples));
    return NE_OK;
  });
}

void ne_torus_free(ne_torus* m) { delete m; }

}  // extern "C"
