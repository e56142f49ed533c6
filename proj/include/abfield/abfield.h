#ifndef ABFIELD_ABFIELD_H
#define ABFIELD_ABFIELD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ABF_API __declspec(dllexport)
#else
#define ABF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Nonzero values match the library's error categories. */
typedef enum abf_status {
  ABF_OK = 0,
  ABF_ERR_INVALID_ARGUMENT = 1,
  ABF_ERR_ZERO_FIELD_REGION = 2,
  ABF_ERR_NOT_SUPPORTED = 3,
  ABF_ERR_NOT_CONTRACTIBLE = 4,
  ABF_ERR_CONVERGENCE_FAILURE = 5,
  ABF_ERR_NO_WITNESS = 6,
  ABF_ERR_GLUING_MISMATCH = 7,
  ABF_ERR_EXPERIMENT_FAILURE = 8,
  ABF_ERR_LOAD = 9,
  ABF_ERR_CONFIG = 10,
  ABF_ERR_IO = 11,
  ABF_ERR_INTERNAL = 99
} abf_status;

typedef struct abf_lattice abf_lattice;
typedef struct abf_field abf_field;
typedef struct abf_invariants abf_invariants;
typedef struct abf_report abf_report;

/* Message and status of the last failed call on this thread. */
ABF_API const char* abf_last_error_message(void);
ABF_API abf_status abf_last_error_code(void);
ABF_API const char* abf_status_name(abf_status status);
ABF_API const char* abf_version(void);

/* Lattices */
ABF_API abf_status abf_lattice_create(int nx, int ny, double spacing, int periodic,
                                      abf_lattice** out);
ABF_API abf_status abf_lattice_excise(abf_lattice* lattice, const int* sites, size_t count);
ABF_API void abf_lattice_destroy(abf_lattice* lattice);
ABF_API int abf_lattice_site_count(const abf_lattice* lattice);
ABF_API int abf_lattice_link_count(const abf_lattice* lattice);

/* Field configurations. psi is exchanged as interleaved (re, im) pairs. */
ABF_API abf_status abf_field_random(const abf_lattice* lattice, uint64_t seed, double rho_min,
                                    abf_field** out);
ABF_API abf_status abf_field_solenoid(const abf_lattice* lattice, double center_x,
                                      double center_y, double radius, double e_flux,
                                      abf_field** out);
ABF_API abf_status abf_field_load(const char* path, abf_field** out);
/* binary != 0 writes the binary format, otherwise JSON. */
ABF_API abf_status abf_field_save(const abf_field* field, const char* path, int binary);
ABF_API abf_status abf_field_clone(const abf_field* field, abf_field** out);
ABF_API void abf_field_destroy(abf_field* field);
ABF_API int abf_field_site_count(const abf_field* field);
ABF_API int abf_field_link_count(const abf_field* field);
ABF_API abf_status abf_field_get_psi(const abf_field* field, double* re_im, size_t count);
ABF_API abf_status abf_field_set_psi(abf_field* field, const double* re_im, size_t count);
ABF_API abf_status abf_field_get_links(const abf_field* field, double* links, size_t count);
ABF_API abf_status abf_field_set_links(abf_field* field, const double* links, size_t count);

ABF_API abf_status abf_field_apply_gauge(const abf_field* field, const double* lambda,
                                         size_t count, abf_field** out);
ABF_API abf_status abf_field_random_gauge(const abf_field* field, uint64_t seed,
                                          double amplitude, abf_field** out);
ABF_API abf_status abf_field_gauge_equivalent(const abf_field* a, const abf_field* b, double eps,
                                              double tol, int* equivalent, double* residual);
ABF_API abf_status abf_field_holonomy_rectangle(const abf_field* field, int x0, int y0, int x1,
                                                int y1, double* raw);
ABF_API abf_status abf_field_plaquette_flux(const abf_field* field, int px, int py, double* flux);
ABF_API abf_status abf_field_coulomb_fix(const abf_field* field, double tol, abf_field** out);
ABF_API abf_status abf_field_unitary_fix(const abf_field* field, double eps, abf_field** out);

/* Gauge-invariant content */
ABF_API abf_status abf_field_invariants(const abf_field* field, double eps, abf_invariants** out);
ABF_API abf_status abf_invariants_distance(const abf_invariants* a, const abf_invariants* b,
                                           double* distance);
ABF_API abf_status abf_invariants_reconstruct(const abf_invariants* inv, abf_field** out);
ABF_API void abf_invariants_destroy(abf_invariants* inv);

/* Commands. Any string option may be NULL. */
typedef struct abf_run_options {
  const char* config_path;
  const char* out_dir;
  const char* format; /* "json", "csv" or "binary" */
  const char* input;  /* file argument for "load" */
  int has_seed;
  uint64_t seed;
} abf_run_options;

ABF_API abf_status abf_run(const char* command, const abf_run_options* options,
                           abf_report** out);
ABF_API int abf_report_passed(const abf_report* report);
ABF_API const char* abf_report_json(const abf_report* report);
ABF_API void abf_report_free(abf_report* report);

#ifdef __cplusplus
}
#endif

#endif
