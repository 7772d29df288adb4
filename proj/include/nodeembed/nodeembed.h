#ifndef NODEEMBED_H
#define NODEEMBED_H

/* C interface of the nodeembed library.
 *
 * Every call returns an ne_status. On failure the message is available from
 * ne_last_error() (per thread) until the next failing call. Strings returned
 * through char** belong to the caller and are released with ne_string_free.
 * Objects are opaque handles released with their *_free function; passing
 * NULL to a free function is a no-op.
 */

#include <stddef.h>

#if defined(_WIN32)
#define NE_API __declspec(dllexport)
#else
#define NE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ne_status {
  NE_OK = 0,
  NE_FAIL = 2,      /* verification ran and did not pass */
  NE_EINPUT = 3,    /* malformed input, violated precondition, domain error */
  NE_ENUMERIC = 4,  /* blow-up, step limit, non-convergence */
  NE_EINTERNAL = 5
} ne_status;

typedef struct ne_funcspec ne_funcspec;
typedef struct ne_arch ne_arch;
typedef struct ne_torus ne_torus;

NE_API const char* ne_last_error(void);
NE_API const char* ne_version(void);
NE_API void ne_string_free(char* s);

/* ---- maps ------------------------------------------------------------- */

/* components: n_out expression strings over x0..x(n_in-1). */
NE_API ne_status ne_funcspec_parse(const char* name, int n_in, const char* const* components, int n_out,
                                   ne_funcspec** out);
NE_API ne_status ne_funcspec_from_json(const char* json, ne_funcspec** out);
NE_API ne_status ne_funcspec_to_json(const ne_funcspec* f, char** json);
NE_API int ne_funcspec_n_in(const ne_funcspec* f);
NE_API int ne_funcspec_n_out(const ne_funcspec* f);
/* x has n_in entries, out has n_out. */
NE_API ne_status ne_funcspec_eval(const ne_funcspec* f, const double* x, double* out);
NE_API void ne_funcspec_free(ne_funcspec* f);

/* ---- architectures ---------------------------------------------------- */

/* id: linear, monomial, moebius, negation, polynomial, universal.
 * params_json holds the construction parameters ({"c": 2, "alpha": 3, "T": 1}).
 * citation (nullable) receives a description of the result it relies on. */
NE_API ne_status ne_arch_construct(const char* id, const char* params_json, ne_arch** out, char** citation);
NE_API ne_status ne_arch_from_json(const char* json, ne_arch** out);
NE_API ne_status ne_arch_to_json(const ne_arch* a, char** json);
NE_API int ne_arch_n_in(const ne_arch* a);
NE_API int ne_arch_n_out(const ne_arch* a);
/* Integrator tolerances used by later evaluations of this handle. */
NE_API ne_status ne_arch_set_tolerances(ne_arch* a, double rtol, double atol);
NE_API ne_status ne_arch_evaluate(const ne_arch* a, const double* x, double* out);
/* "t,h1..hm" for the flow started from input x. */
NE_API ne_status ne_arch_trajectory_csv(const ne_arch* a, const double* x, char** csv);
NE_API void ne_arch_free(ne_arch* a);

/* grid_json: {"count": 64} or {"counts": [..]}, optional "domain" in the map
 * JSON domain format (defaults to the target's declared domain), optional
 * "inset". Returns NE_OK when the embedding passes and NE_FAIL otherwise;
 * report_json and table_csv (both nullable) are filled in either case. */
NE_API ne_status ne_verify(const ne_arch* a, const ne_funcspec* target, const char* grid_json, double tol,
                           char** report_json, char** table_csv);

/* ---- flows and functional equations ----------------------------------- */

/* Adaptive integration of dh/dt = f(h) from x over [0, t]. final_state has
 * dim entries; csv (nullable) receives the trajectory. Blow-up and step limit
 * return NE_ENUMERIC. */
NE_API ne_status ne_flow(const ne_funcspec* field, const double* x, double t, double rtol, double atol,
                         double* final_state, char** csv);
/* Julia residual max |J_Phi f - f o Phi| as JSON {"max", "argmax", "per_point_csv", "failures"};
 * csv (nullable) receives the per-point table. */
NE_API ne_status ne_julia_residual(const ne_funcspec* f, const ne_funcspec* phi, const char* grid_json,
                                   char** report_json, char** csv);
/* h(x, t) = r^-1(r(x) + t) for a 1-D field of constant sign. */
NE_API ne_status ne_jabotinsky_flow(const ne_funcspec* field, double x, double t, double* out);
/* Formal Julia solution for Phi = x + b_m x^m + ... given by coefficients
 * phi[0..len-1]; JSON {"N", "coeffs", "trace": [...]}. */
NE_API ne_status ne_series_iterative_logarithm(const double* phi, int len, int N, char** json);
/* Elimination trace for Phi = c x^alpha. */
NE_API ne_status ne_series_monomial(double c, int alpha, int N, char** json);

/* ---- obstructions ----------------------------------------------------- */

NE_API ne_status ne_diagnose(const ne_funcspec* phi, const char* grid_json, char** report_json);
NE_API ne_status ne_morseify(const ne_funcspec* psi, double bound, unsigned long long seed,
                             const char* grid_json, char** json);
NE_API ne_status ne_antipodal_point(const ne_funcspec* g, double tol, double* theta, double* residual);

/* ---- mapping torus ---------------------------------------------------- */

/* JSON {"phi": map, "inverse": map or null, "T": number}. */
NE_API ne_status ne_torus_from_json(const char* json, ne_torus** out);
NE_API int ne_torus_dim(const ne_torus* m);
/* Flows (x, r) with winding k for duration s; x_out has dim entries. */
NE_API ne_status ne_torus_flow(const ne_torus* m, const double* x, double r, long long k, double s,
                               double* x_out, double* r_out, long long* k_out);
/* "s,k,r,x1..xn" at `samples` durations in [0, s_total] from (x, r). */
NE_API ne_status ne_torus_csv(const ne_torus* m, const double* x, double r, double s_total, int samples,
                              char** csv);
NE_API void ne_torus_free(ne_torus* m);

#ifdef __cplusplus
}
#endif

#endif /* NODEEMBED_H */
