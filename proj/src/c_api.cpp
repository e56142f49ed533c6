#include "abfield/abfield.h"

#include <exception>
#include <new>
#include <string>

#include "abfield/commands.hpp"
#include "abfield/error.hpp"
#include "abfield/fields.hpp"
#include "abfield/holonomy.hpp"
#include "abfield/io.hpp"

struct abf_lattice {
  abfield::Lattice value;
};
struct abf_field {
  abfield::FieldConfig value;
};
struct abf_invariants {
  abfield::InvariantState value;
};
struct abf_report {
  abfield::CommandReport value;
};

namespace {

thread_local std::string g_message;
thread_local abf_status g_status = ABF_OK;

abf_status fail(abf_status status, const std::string& message) {
  g_status = status;
  g_message = message;
  return status;
}

template <typename F>
abf_status guarded(F&& body) {
  try {
    body();
    return ABF_OK;
  } catch (const abfield::Error& e) {
    return fail(static_cast<abf_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ABF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ABF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ABF_ERR_INTERNAL, "unknown error");
  }
}

template <typename T>
void require(const T* p, const char* what) {
  if (!p) abfield::throw_invalid(std::string(what) + " is null");
}

void require_count(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    abfield::throw_invalid(std::string(what) + ": expected " + std::to_string(want) +
                           " values, got " + std::to_string(got));
  }
}

}  // namespace

extern "C" {

const char* abf_last_error_message(void) { return g_message.c_str(); }
abf_status abf_last_error_code(void) { return g_status; }

const char* abf_status_name(abf_status status) {
  if (status == ABF_OK) return "ok";
  if (status == ABF_ERR_INTERNAL) return "internal-error";
  return abfield::error_code_name(static_cast<abfield::ErrorCode>(status));
}

const char* abf_version(void) { return "0.1.0"; }

abf_status abf_lattice_create(int nx, int ny, double spacing, int periodic, abf_lattice** out) {
  return guarded([&] {
    require(out, "out");
    *out = new abf_lattice{abfield::Lattice::build(
        nx, ny, spacing, periodic ? abfield::Boundary::Periodic : abfield::Boundary::Open)};
  });
}

abf_status abf_lattice_excise(abf_lattice* lattice, const int* sites, size_t count) {
  return guarded([&] {
    require(lattice, "lattice");
    if (count) require(sites, "sites");
    for (size_t i = 0; i < count; ++i) {
      if (sites[i] < 0 || sites[i] >= lattice->value.site_count()) {
        abfield::throw_invalid("site index " + std::to_string(sites[i]) + " out of range");
      }
    }
    lattice->value = lattice->value.with_excised(std::span<const int>(sites, count));
  });
}

void abf_lattice_destroy(abf_lattice* lattice) { delete lattice; }
int abf_lattice_site_count(const abf_lattice* l) { return l ? l->value.site_count() : 0; }
int abf_lattice_link_count(const abf_lattice* l) { return l ? l->value.link_count() : 0; }

abf_status abf_field_random(const abf_lattice* lattice, uint64_t seed, double rho_min,
                            abf_field** out) {
  return guarded([&] {
    require(lattice, "lattice");
    require(out, "out");
    *out = new abf_field{abfield::random_config(lattice->value, seed, rho_min)};
  });
}

abf_status abf_field_solenoid(const abf_lattice* lattice, double center_x, double center_y,
                              double radius, double e_flux, abf_field** out) {
  return guarded([&] {
    require(lattice, "lattice");
    require(out, "out");
    *out = new abf_field{abfield::solenoid_config(
        lattice->value, {center_x, center_y, radius, e_flux}, abfield::Complex{1.0, 0.0})};
  });
}

abf_status abf_field_load(const char* path, abf_field** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new abf_field{abfield::load_field(path)};
  });
}

abf_status abf_field_save(const abf_field* field, const char* path, int binary) {
  return guarded([&] {
    require(field, "field");
    require(path, "path");
    abfield::save_state(path, field->value,
                        binary ? abfield::FileFormat::Binary : abfield::FileFormat::Json);
  });
}

abf_status abf_field_clone(const abf_field* field, abf_field** out) {
  return guarded([&] {
    require(field, "field");
    require(out, "out");
    *out = new abf_field{field->value};
  });
}

void abf_field_destroy(abf_field* field) { delete field; }
int abf_field_site_count(const abf_field* f) { return f ? f->value.lattice.site_count() : 0; }
int abf_field_link_count(const abf_field* f) { return f ? f->value.lattice.link_count() : 0; }

abf_status abf_field_get_psi(const abf_field* field, double* re_im, size_t count) {
  return guarded([&] {
    require(field, "field");
    require(re_im, "re_im");
    require_count(count, 2 * field->value.psi.size(), "psi");
    for (std::size_t s = 0; s < field->value.psi.size(); ++s) {
      re_im[2 * s] = field->value.psi[s].real();
      re_im[2 * s + 1] = field->value.psi[s].imag();
    }
  });
}

abf_status abf_field_set_psi(abf_field* field, const double* re_im, size_t count) {
  return guarded([&] {
    require(field, "field");
    require(re_im, "re_im");
    require_count(count, 2 * field->value.psi.size(), "psi");
    const auto& lat = field->value.lattice;
    for (int s = 0; s < lat.site_count(); ++s) {
      field->value.psi[s] = lat.active(s) ? abfield::Complex{re_im[2 * s], re_im[2 * s + 1]}
                                          : abfield::Complex{0.0, 0.0};
    }
  });
}

abf_status abf_field_get_links(const abf_field* field, double* links, size_t count) {
  return guarded([&] {
    require(field, "field");
    require(links, "links");
    require_count(count, field->value.links.size(), "links");
    std::copy(field->value.links.begin(), field->value.links.end(), links);
  });
}

abf_status abf_field_set_links(abf_field* field, const double* links, size_t count) {
  return guarded([&] {
    require(field, "field");
    require(links, "links");
    require_count(count, field->value.links.size(), "links");
    std::copy(links, links + count, field->value.links.begin());
  });
}

abf_status abf_field_apply_gauge(const abf_field* field, const double* lambda, size_t count,
                                 abf_field** out) {
  return guarded([&] {
    require(field, "field");
    require(lambda, "lambda");
    require(out, "out");
    require_count(count, field->value.psi.size(), "lambda");
    abfield::GaugeTransform g{std::vector<double>(lambda, lambda + count)};
    *out = new abf_field{abfield::apply_gauge(field->value, g)};
  });
}

abf_status abf_field_random_gauge(const abf_field* field, uint64_t seed, double amplitude,
                                  abf_field** out) {
  return guarded([&] {
    require(field, "field");
    require(out, "out");
    const auto g = abfield::random_gauge(field->value.lattice, seed, amplitude);
    *out = new abf_field{abfield::apply_gauge(field->value, g)};
  });
}

abf_status abf_field_gauge_equivalent(const abf_field* a, const abf_field* b, double eps,
                                      double tol, int* equivalent, double* residual) {
  return guarded([&] {
    require(a, "a");
    require(b, "b");
    require(equivalent, "equivalent");
    const auto w = abfield::gauge_equivalent(a->value, b->value, eps, tol);
    *equivalent = w ? 1 : 0;
    if (residual) *residual = w ? abfield::gauge_residual(a->value, b->value, *w) : -1.0;
  });
}

abf_status abf_field_holonomy_rectangle(const abf_field* field, int x0, int y0, int x1, int y1,
                                        double* raw) {
  return guarded([&] {
    require(field, "field");
    require(raw, "raw");
    *raw = abfield::holonomy(field->value,
                             abfield::rectangle_loop(field->value.lattice, x0, y0, x1, y1))
               .raw;
  });
}

abf_status abf_field_plaquette_flux(const abf_field* field, int px, int py, double* flux) {
  return guarded([&] {
    require(field, "field");
    require(flux, "flux");
    *flux = abfield::plaquette_flux(field->value, field->value.lattice.plaquette(px, py));
  });
}

abf_status abf_field_coulomb_fix(const abf_field* field, double tol, abf_field** out) {
  return guarded([&] {
    require(field, "field");
    require(out, "out");
    *out = new abf_field{abfield::coulomb_gauge_fix(field->value, tol)};
  });
}

abf_status abf_field_unitary_fix(const abf_field* field, double eps, abf_field** out) {
  return guarded([&] {
    require(field, "field");
    require(out, "out");
    *out = new abf_field{abfield::unitary_gauge_fix(field->value, eps)};
  });
}

abf_status abf_field_invariants(const abf_field* field, double eps, abf_invariants** out) {
  return guarded([&] {
    require(field, "field");
    require(out, "out");
    *out = new abf_invariants{abfield::extract_invariants(field->value, eps)};
  });
}

abf_status abf_invariants_distance(const abf_invariants* a, const abf_invariants* b,
                                   double* distance) {
  return guarded([&] {
    require(a, "a");
    require(b, "b");
    require(distance, "distance");
    *distance = abfield::invariant_distance(a->value, b->value);
  });
}

abf_status abf_invariants_reconstruct(const abf_invariants* inv, abf_field** out) {
  return guarded([&] {
    require(inv, "inv");
    require(out, "out");
    *out = new abf_field{abfield::reconstruct(inv->value)};
  });
}

void abf_invariants_destroy(abf_invariants* inv) { delete inv; }

abf_status abf_run(const char* command, const abf_run_options* options, abf_report** out) {
  return guarded([&] {
    require(command, "command");
    require(out, "out");
    abfield::CommandOptions opts;
    if (options) {
      if (options->config_path) opts.config_path = options->config_path;
      if (options->out_dir) opts.out_dir = options->out_dir;
      if (options->format) opts.format = options->format;
      if (options->input) opts.input = options->input;
      if (options->has_seed) opts.seed = options->seed;
    }
    *out = new abf_report{abfield::run_command(command, opts)};
  });
}

int abf_report_passed(const abf_report* report) { return report && report->value.passed ? 1 : 0; }
const char* abf_report_json(const abf_report* report) {
  return report ? report->value.json.c_str() : "";
}
void abf_report_free(abf_report* report) { delete report; }

}  // extern "C"
