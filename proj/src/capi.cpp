#include "pulsefront.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <new>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pulsefront/config.hpp"
#include "pulsefront/error.hpp"
#include "pulsefront/experiments.hpp"
#include "pulsefront/fieldio.hpp"
#include "pulsefront/parallel.hpp"

struct pf_config {
  pulsefront::RunConfig cfg;
};

struct pf_report {
  pulsefront::ExperimentReport rep;
  mutable std::string csv, summary;
};

struct pf_field {
  pulsefront::Field field;
  mutable std::string description;
};

struct pf_table {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

namespace {

using pulsefront::Error;
using pulsefront::ErrorCode;

thread_local std::string last_error;

template <class Fn>
int guard(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return PF_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return PF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return PF_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return PF_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) pulsefront::fail(ErrorCode::invalid_argument, std::string(what) + " is null");
}

pf_report* wrap(pulsefront::ExperimentReport r) { return new pf_report{std::move(r), {}, {}}; }

pf_field* wrap(pulsefront::Field f) { return new pf_field{std::move(f), {}}; }

}  // namespace

extern "C" {

const char* pf_version(void) { return "1.0.0"; }

const char* pf_last_error(void) { return last_error.c_str(); }

const char* pf_error_name(int code) { return pulsefront::to_string(static_cast<ErrorCode>(code)); }

int pf_set_threads(int n) {
  return guard([&] {
    if (n < 1) pulsefront::fail(ErrorCode::invalid_argument, "thread count must be at least 1");
    pulsefront::set_thread_count(n);
  });
}

int pf_config_default(pf_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new pf_config{pulsefront::default_config()};
  });
}

int pf_config_parse(const char* json_text, pf_config** out) {
  return guard([&] {
    need(json_text, "json_text");
    need(out, "out");
    *out = new pf_config{pulsefront::parse_config_text(json_text)};
  });
}

int pf_config_load(const char* path, pf_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new pf_config{pulsefront::parse_config(path)};
  });
}

int pf_config_smoke(const pf_config* cfg, pf_config** out) {
  return guard([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = new pf_config{pulsefront::smoke_config(cfg->cfg)};
  });
}

const char* pf_config_canonical(const pf_config* cfg) { return cfg ? cfg->cfg.canonical.c_str() : ""; }
const char* pf_config_digest(const pf_config* cfg) { return cfg ? cfg->cfg.digest.c_str() : ""; }
const char* pf_config_output_dir(const pf_config* cfg) { return cfg ? cfg->cfg.output_dir.c_str() : ""; }

const char* pf_config_default_text(void) {
  static const std::string text = pulsefront::default_config_json();
  return text.c_str();
}

void pf_config_free(pf_config* cfg) { delete cfg; }

int pf_report_passed(const pf_report* r) { return r && r->rep.passed() ? 1 : 0; }
size_t pf_report_checks(const pf_report* r) { return r ? r->rep.checks.size() : 0; }
size_t pf_report_failures(const pf_report* r) { return r ? r->rep.failures() : 0; }

int pf_report_check(const pf_report* r, size_t i, const char** name, double* measured, int* status) {
  return guard([&] {
    need(r, "report");
    if (i >= r->rep.checks.size()) pulsefront::fail(ErrorCode::out_of_range, "check index out of range");
    const auto& c = r->rep.checks[i];
    if (name) *name = c.name.c_str();
    if (measured) *measured = c.measured;
    if (status) *status = static_cast<int>(c.status);
  });
}

const char* pf_report_id(const pf_report* r) { return r ? r->rep.id.c_str() : ""; }

const char* pf_report_csv(const pf_report* r) {
  if (!r) return "";
  r->csv = r->rep.to_csv();
  return r->csv.c_str();
}

const char* pf_report_summary(const pf_report* r) {
  if (!r) return "";
  r->summary = r->rep.summary();
  return r->summary.c_str();
}

double pf_report_seconds(const pf_report* r) { return r ? r->rep.wall_seconds : 0.0; }

void pf_report_free(pf_report* r) { delete r; }

int pf_field_read(const char* path, pf_field** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = wrap(pulsefront::read_field(path));
  });
}

int pf_field_write(const pf_field* f, const char* path, const char* sidecar_json) {
  return guard([&] {
    need(f, "field");
    need(path, "path");
    pulsefront::write_field_with_sidecar(path, f->field, sidecar_json ? sidecar_json : "");
  });
}

int pf_field_write_csv_slice(const pf_field* f, const char* path, int axis, const int* fixed, size_t n_fixed) {
  return guard([&] {
    need(f, "field");
    need(path, "path");
    if (n_fixed > 0) need(fixed, "fixed");
    std::vector<int> idx(fixed, fixed + n_fixed);
    // Indices of the other axes only: the slice axis gets a placeholder.
    if (f->field.grid && static_cast<int>(n_fixed) + 1 == f->field.grid->dim() && axis >= 0 && axis <= static_cast<int>(n_fixed))
      idx.insert(idx.begin() + axis, 0);
    pulsefront::write_csv_slice(path, f->field, axis, idx);
  });
}

int pf_field_write_csv_all(const pf_field* f, const char* path) {
  return guard([&] {
    need(f, "field");
    need(path, "path");
    pulsefront::write_csv_all(path, f->field);
  });
}

int pf_field_dim(const pf_field* f) { return f && f->field.grid ? f->field.grid->dim() : 0; }

int pf_field_points(const pf_field* f, int axis) {
  if (!f || !f->field.grid || axis < 0 || axis >= f->field.grid->dim()) return 0;
  return f->field.grid->axis(axis).count;
}

size_t pf_field_size(const pf_field* f) { return f ? f->field.values.size() : 0; }
double pf_field_time(const pf_field* f) { return f ? f->field.time : 0.0; }
const double* pf_field_values(const pf_field* f) { return f ? f->field.values.data() : nullptr; }

const char* pf_field_describe(const pf_field* f) {
  if (!f || !f->field.grid) return "";
  f->description = f->field.grid->describe();
  return f->description.c_str();
}

void pf_field_free(pf_field* f) { delete f; }

size_t pf_table_columns(const pf_table* t) { return t ? t->columns.size() : 0; }
size_t pf_table_rows(const pf_table* t) { return t && !t->columns.empty() ? t->columns.front().size() : 0; }
const char* pf_table_name(const pf_table* t, size_t column) {
  return t && column < t->names.size() ? t->names[column].c_str() : "";
}
const double* pf_table_column(const pf_table* t, size_t column) {
  return t && column < t->columns.size() ? t->columns[column].data() : nullptr;
}

int pf_table_write_csv(const pf_table* t, const char* path) {
  return guard([&] {
    need(t, "table");
    need(path, "path");
    std::ofstream out(path);
    if (!out) pulsefront::fail(ErrorCode::io, std::string("cannot write ") + path);
    out << std::setprecision(17);
    for (std::size_t c = 0; c < t->names.size(); ++c) out << (c ? "," : "") << t->names[c];
    out << "\n";
    for (std::size_t r = 0; r < pf_table_rows(t); ++r) {
      for (std::size_t c = 0; c < t->columns.size(); ++c) out << (c ? "," : "") << t->columns[c][r];
      out << "\n";
    }
  });
}

void pf_table_free(pf_table* t) { delete t; }

int pf_run_front(const pf_config* cfg, double angle_deg, pf_report** report, pf_field** profile, double* speed) {
  return guard([&] {
    need(cfg, "cfg");
    if (!std::isfinite(angle_deg)) pulsefront::fail(ErrorCode::invalid_argument, "angle must be finite");
    auto run = pulsefront::run_front(cfg->cfg, angle_deg * std::numbers::pi / 180.0);
    if (speed) *speed = run.front.c;
    if (profile) *profile = wrap(run.front.profile);
    if (report) *report = wrap(std::move(run.report));
  });
}

int pf_run_surface(const pf_config* cfg, pf_report** report, pf_table** line) {
  return guard([&] {
    need(cfg, "cfg");
    auto run = pulsefront::run_surface(cfg->cfg);
    if (line) *line = new pf_table{{"x", "phi", "psi", "h"}, {run.x, run.phi, run.psi, run.h}};
    if (report) *report = wrap(std::move(run.report));
  });
}

int pf_run_verify_super(const pf_config* cfg, pf_report** report, pf_field** residual) {
  return guard([&] {
    need(cfg, "cfg");
    auto run = pulsefront::run_verify_super(cfg->cfg);
    if (residual) *residual = run.residual ? wrap(*run.residual) : nullptr;
    if (report) *report = wrap(std::move(run.report));
  });
}

int pf_run_evolve(const pf_config* cfg, const char* init, const pf_field* init_field, pf_report** report,
                  pf_field** state, pf_table** deltas) {
  return guard([&] {
    need(cfg, "cfg");
    need(init, "init");
    auto run = pulsefront::run_evolve(cfg->cfg, init, init_field ? &init_field->field : nullptr);
    const auto& cf = *run.front;
    if (state) {
      const long m = cf.vhat.window->steps_per_period();
      *state = wrap(cf.vhat.at_step(cf.steps - m));
    }
    if (deltas) {
      auto* t = new pf_table{{"period", "delta"}, {{}, {}}};
      for (std::size_t k = 0; k < cf.period_deltas.size(); ++k) {
        t->columns[0].push_back(static_cast<double>(k + 1));
        t->columns[1].push_back(cf.period_deltas[k]);
      }
      *deltas = t;
    }
    if (report) *report = wrap(std::move(run.report));
  });
}

int pf_run_campaign(const pf_config* cfg, const char* which, pf_report*** reports, size_t* count) {
  return guard([&] {
    need(cfg, "cfg");
    need(which, "which");
    need(reports, "reports");
    need(count, "count");
    const std::string w = which;
    const bool all = w == "all";
    if (!all && w != "pulsating" && w != "2.18" && w != "2.19" && w != "2.20")
      pulsefront::fail(ErrorCode::invalid_argument, "unknown campaign " + w);
    std::vector<pulsefront::ExperimentReport> out;
    if (all || w == "pulsating") out.push_back(pulsefront::campaign_pulsating_properties(cfg->cfg).report);
    if (all || w == "2.18") {
      auto existence = pulsefront::campaign_existence(cfg->cfg);
      out.push_back(existence.report);
      if (all && !existence.gated && existence.scan.found) {
        out.push_back(pulsefront::campaign_uniqueness(cfg->cfg, &existence).report);
        out.push_back(pulsefront::campaign_stability(cfg->cfg, &existence).report);
      } else if (all) {
        for (const char* id : {"uniqueness", "stability"}) {
          pulsefront::ExperimentReport skipped;
          skipped.id = id;
          skipped.config_digest = cfg->cfg.digest;
          skipped.add_flag("existence_prerequisites", false, pulsefront::Provenance::trivial,
                           "experiments.campaign_existence (gated or no supersolution)");
          out.push_back(std::move(skipped));
        }
      }
    }
    if (w == "2.19") out.push_back(pulsefront::campaign_uniqueness(cfg->cfg).report);
    if (w == "2.20") out.push_back(pulsefront::campaign_stability(cfg->cfg).report);
    auto** arr = new pf_report*[out.size()];
    for (std::size_t i = 0; i < out.size(); ++i) arr[i] = wrap(std::move(out[i]));
    *reports = arr;
    *count = out.size();
  });
}

void pf_reports_free(pf_report** reports, size_t count) {
  if (!reports) return;
  for (size_t i = 0; i < count; ++i) delete reports[i];
  delete[] reports;
}

int pf_run_comparison(const pf_config* cfg, int pairs, int steps, unsigned long long seed, pf_report** report) {
  return guard([&] {
    need(cfg, "cfg");
    need(report, "report");
    const pulsefront::Nonlinearity nl(cfg->cfg.reaction);
    auto rep = pulsefront::check_comparison_principle(nl, pairs, steps, seed);
    rep.config_digest = cfg->cfg.digest;
    *report = wrap(std::move(rep));
  });
}

int pf_run_hypotheses(const pf_config* cfg, pf_report** report) {
  return guard([&] {
    need(cfg, "cfg");
    need(report, "report");
    const pulsefront::Nonlinearity nl(cfg->cfg.reaction);
    auto rep = pulsefront::verify_hypotheses(nl, cfg->cfg.hypotheses);
    rep.config_digest = cfg->cfg.digest;
    *report = wrap(std::move(rep));
  });
}

}  // extern "C"
