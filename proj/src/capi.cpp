#include "cyvortex/cyvortex.h"

#include <cstring>
#include <optional>
#include <string>

#include "cyvortex/config.hpp"
#include "cyvortex/error.hpp"
#include "cyvortex/fields.hpp"
#include "cyvortex/parallel.hpp"
#include "cyvortex/pipeline.hpp"

struct cyv_config {
  cyv::RunConfig config;
};

struct cyv_solution {
  cyv::Problem problem;
  cyv::FieldSolution solution;
  std::optional<cyv::PhysicalFields> fields;
  cyv_solve_stats stats{};
};

struct cyv_report {
  cyv::RunReport report;
};

namespace {

thread_local std::string last_error;

cyv_status status_for(cyv::ErrorCode code) {
  using cyv::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return CYV_ERR_INVALID_ARGUMENT;
    case ErrorCode::config: return CYV_ERR_CONFIG;
    case ErrorCode::resolution: return CYV_ERR_RESOLUTION;
    case ErrorCode::out_of_range: return CYV_ERR_OUT_OF_RANGE;
    case ErrorCode::diverged: return CYV_ERR_DIVERGED;
    case ErrorCode::not_converged: return CYV_ERR_NOT_CONVERGED;
    case ErrorCode::krylov_breakdown: return CYV_ERR_KRYLOV_BREAKDOWN;
    case ErrorCode::io: return CYV_ERR_IO;
    case ErrorCode::shape_mismatch: return CYV_ERR_SHAPE_MISMATCH;
  }
  return CYV_ERR_INTERNAL;
}

template <class Body>
cyv_status guard(Body body) {
  try {
    last_error.clear();
    return body();
  } catch (const cyv::Error& e) {
    last_error = e.what();
    return status_for(e.code());
  } catch (const std::exception& e) {
    last_error = e.what();
    return CYV_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return CYV_ERR_INTERNAL;
  }
}

cyv_status null_argument(const char* what) {
  last_error = std::string("null argument: ") + what;
  return CYV_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* cyv_version(void) { return "1.0.0"; }

const char* cyv_status_string(cyv_status status) {
  switch (status) {
    case CYV_OK: return "ok";
    case CYV_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CYV_ERR_CONFIG: return "invalid configuration";
    case CYV_ERR_RESOLUTION: return "insufficient resolution";
    case CYV_ERR_OUT_OF_RANGE: return "out of range";
    case CYV_ERR_DIVERGED: return "diverged";
    case CYV_ERR_NOT_CONVERGED: return "not converged";
    case CYV_ERR_KRYLOV_BREAKDOWN: return "krylov breakdown";
    case CYV_ERR_IO: return "i/o error";
    case CYV_ERR_SHAPE_MISMATCH: return "shape mismatch";
    case CYV_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* cyv_last_error(void) { return last_error.c_str(); }

cyv_status cyv_config_from_file(const char* path, cyv_config** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guard([&] {
    *out = new cyv_config{cyv::load_config(path)};
    return CYV_OK;
  });
}

cyv_status cyv_config_from_json(const char* json, cyv_config** out) {
  if (!json) return null_argument("json");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guard([&] {
    *out = new cyv_config{cyv::parse_config(json)};
    return CYV_OK;
  });
}

void cyv_config_free(cyv_config* config) { delete config; }

cyv_status cyv_config_resolved_json(const cyv_config* config, char** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guard([&] {
    const std::string s = cyv::resolved_config_json(config->config);
    *out = new char[s.size() + 1];
    std::memcpy(*out, s.c_str(), s.size() + 1);
    return CYV_OK;
  });
}

void cyv_string_free(char* s) { delete[] s; }

cyv_status cyv_set_workers(int n) {
  return guard([&] {
    cyv::set_worker_count(n);
    return CYV_OK;
  });
}

cyv_status cyv_solve(const cyv_config* config, cyv_solution** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guard([&] {
    const cyv::RunConfig& c = config->config;
    const cyv::CylinderMetric metric = cyv::build_metric(c);
    cyv::Problem pb = cyv::Problem::build(cyv::StripGrid(c.T, c.n_t, c.n_theta), metric, c.vortices,
                                          c.epsilon_scale, c.source);
    cyv::FieldSolution sol = cyv::newton_solve(pb, c.solver);
    auto* s = new cyv_solution{std::move(pb), std::move(sol), std::nullopt, {}};
    s->stats.converged = s->solution.converged() ? 1 : 0;
    s->stats.iterations = s->solution.iterations;
    s->stats.residual_inf = s->solution.residual_inf;
    s->stats.threshold = s->solution.threshold;
    s->stats.vortex_number = s->problem.vortex_number();
    s->stats.epsilon1 = s->problem.epsilon1();
    if (s->solution.converged()) {
      cyv::UnitsLedger units;
      units.sign = c.sign;
      s->fields = cyv::reconstruct(s->problem, s->solution, units);
      s->stats.flux = cyv::total_flux(*s->fields, s->problem);
      s->stats.energy = cyv::total_energy(*s->fields, s->problem);
    }
    *out = s;
    return CYV_OK;
  });
}

void cyv_solution_free(cyv_solution* solution) { delete solution; }

cyv_status cyv_solution_shape(const cyv_solution* solution, size_t* n_t, size_t* n_theta) {
  if (!solution) return null_argument("solution");
  if (n_t) *n_t = solution->problem.grid().n_t();
  if (n_theta) *n_theta = solution->problem.grid().n_theta();
  return CYV_OK;
}

cyv_status cyv_solution_copy_field(const cyv_solution* solution, cyv_field field, double* buffer, size_t length) {
  if (!solution) return null_argument("solution");
  if (!buffer) return null_argument("buffer");
  return guard([&]() -> cyv_status {
    const cyv::GridField* f = nullptr;
    const auto& pf = solution->fields;
    switch (field) {
      case CYV_FIELD_W: f = &solution->solution.w; break;
      case CYV_FIELD_U: f = &solution->solution.u; break;
      case CYV_FIELD_UBAR: f = &solution->problem.ubar(); break;
      case CYV_FIELD_S: f = &solution->problem.S(); break;
      case CYV_FIELD_SOURCE: f = &solution->problem.source(); break;
      case CYV_FIELD_LAMBDA: f = &solution->problem.lambda(); break;
      default: break;
    }
    if (!f) {
      if (!pf) {
        last_error = "physical fields need a converged solve";
        return CYV_ERR_NOT_CONVERGED;
      }
      switch (field) {
        case CYV_FIELD_PHI_SQ: f = &pf->phi_sq; break;
        case CYV_FIELD_FTILDE12: f = &pf->Ftilde12; break;
        case CYV_FIELD_A0: f = &pf->A0; break;
        case CYV_FIELD_KINETIC: f = &pf->kinetic; break;
        case CYV_FIELD_ELECTRIC: f = &pf->electric; break;
        case CYV_FIELD_POTENTIAL: f = &pf->potential_density; break;
        case CYV_FIELD_T00: f = &pf->T00; break;
        default:
          last_error = "unknown field";
          return CYV_ERR_INVALID_ARGUMENT;
      }
    }
    if (length != f->size()) {
      last_error = "buffer length does not match n_t * n_theta";
      return CYV_ERR_SHAPE_MISMATCH;
    }
    std::memcpy(buffer, f->values().data(), f->size() * sizeof(double));
    return CYV_OK;
  });
}

cyv_status cyv_solution_stats(const cyv_solution* solution, cyv_solve_stats* out) {
  if (!solution) return null_argument("solution");
  if (!out) return null_argument("out");
  *out = solution->stats;
  return CYV_OK;
}

cyv_status cyv_solution_energy_trace(const cyv_solution* solution, double* buffer, size_t length, size_t* count) {
  if (!solution) return null_argument("solution");
  const auto& trace = solution->solution.energy_trace;
  if (count) *count = trace.size();
  if (buffer) {
    for (size_t k = 0; k < length && k < trace.size(); ++k) buffer[k] = trace[k];
  }
  return CYV_OK;
}

cyv_status cyv_run(const char* command, const cyv_config* config, cyv_report** out) {
  if (!command) return null_argument("command");
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guard([&] {
    *out = new cyv_report{cyv::run_command(command, config->config)};
    return CYV_OK;
  });
}

int cyv_report_exit_code(const cyv_report* report) { return report ? report->report.exit_code : 2; }

const char* cyv_report_summary_json(const cyv_report* report) {
  return report ? report->report.summary_json.c_str() : "";
}

const char* cyv_report_message(const cyv_report* report) { return report ? report->report.message.c_str() : ""; }

void cyv_report_free(cyv_report* report) { delete report; }

}  // extern "C"
