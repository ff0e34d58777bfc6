#include <pulsefront.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct Failure {
  int exit_code;
  std::string message;
};

[[noreturn]] void die(int code, const std::string& what) { throw Failure{code, what}; }

void check(int rc, const std::string& what) {
  if (rc == PF_OK) return;
  const int exit_code = rc == PF_ERR_CONFIG || rc == PF_ERR_INVALID_ARGUMENT ? kUsage : kCheckFailed;
  die(exit_code, what + ": " + pf_error_name(rc) + ": " + pf_last_error());
}

// Unreadable user-supplied inputs count as usage errors.
void check_input(int rc, const std::string& what) {
  if (rc == PF_ERR_IO) die(kUsage, what + ": " + pf_error_name(rc) + ": " + pf_last_error());
  check(rc, what);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) die(kUsage, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) die(kCheckFailed, "cannot write " + path.string());
  out << text;
}

struct Config {
  pf_config* handle = nullptr;
  std::string source_text;
  Config() = default;
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;
  ~Config() { pf_config_free(handle); }
};

void load_config(Config& c, const std::string& path, bool smoke) {
  if (path.empty()) {
    check(pf_config_default(&c.handle), "default config");
    c.source_text = pf_config_default_text();
  } else {
    c.source_text = read_text(path);
    check(pf_config_parse(c.source_text.c_str(), &c.handle), "config " + path);
  }
  if (smoke) {
    pf_config* s = nullptr;
    check(pf_config_smoke(c.handle, &s), "smoke config");
    pf_config_free(c.handle);
    c.handle = s;
  }
  std::cout << "config digest " << pf_config_digest(c.handle) << "\n";
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::ostringstream os;
  os << std::put_time(&tm, "%Y%m%dT%H%M%S") << '-' << std::setw(3) << std::setfill('0') << ms;
  return os.str();
}

// Output root: --out, then PULSEFRONT_OUT, then output.dir of the config.
fs::path make_run_dir(const std::string& out_flag, const Config& c, const std::string& command) {
  fs::path root = out_flag;
  if (root.empty()) {
    const char* env = std::getenv("PULSEFRONT_OUT");
    root = env && *env ? fs::path(env) : fs::path(pf_config_output_dir(c.handle));
  }
  const std::string stem = command + "-" + timestamp();
  fs::path dir = root / stem;
  for (int k = 1; fs::exists(dir); ++k) dir = root / (stem + "-" + std::to_string(k));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) die(kCheckFailed, "cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "config.json", c.source_text);
  write_text(dir / "config.effective.json", std::string(pf_config_canonical(c.handle)) + "\n");
  write_text(dir / "config.sha256", std::string(pf_config_digest(c.handle)) + "\n");
  std::cout << "run directory " << dir.string() << "\n";
  return dir;
}

int save_reports(const fs::path& dir, const std::vector<pf_report*>& reports) {
  std::string csv, summary;
  bool passed = true;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    std::string part = pf_report_csv(reports[i]);
    if (i > 0) part = part.substr(part.find('\n') + 1);
    csv += part;
    summary += pf_report_summary(reports[i]);
    summary += "\n";
    passed = passed && pf_report_passed(reports[i]);
  }
  write_text(dir / "report.csv", csv);
  write_text(dir / "summary.txt", summary);
  std::cout << summary;
  return passed ? kOk : kCheckFailed;
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

int cmd_front(double angle, const std::string& config, const std::string& out) {
  Config c;
  load_config(c, config, false);
  const fs::path dir = make_run_dir(out, c, "front");
  pf_report* rep = nullptr;
  pf_field* prof = nullptr;
  double speed = 0.0;
  check(pf_run_front(c.handle, angle, &rep, &prof, &speed), "front");
  const std::string meta = "{\"kind\": \"pulsating_profile\", \"angle_deg\": " + num(angle) +
                           ", \"speed\": " + num(speed) + ", \"config_digest\": \"" +
                           json_escape(pf_config_digest(c.handle)) + "\"}";
  check(pf_field_write(prof, (dir / "profile.pfld").c_str(), meta.c_str()), "write profile");
  std::vector<int> fixed(static_cast<std::size_t>(pf_field_dim(prof) - 1), 0);
  check(pf_field_write_csv_slice(prof, (dir / "profile_s.csv").c_str(), 0, fixed.data(), fixed.size()),
        "write slice");
  std::cout << "speed " << num(speed) << "\n";
  const int rc = save_reports(dir, {rep});
  pf_report_free(rep);
  pf_field_free(prof);
  return rc;
}

int cmd_surface(const std::string& config, const std::string& out) {
  Config c;
  load_config(c, config, false);
  const fs::path dir = make_run_dir(out, c, "surface");
  pf_report* rep = nullptr;
  pf_table* line = nullptr;
  check(pf_run_surface(c.handle, &rep, &line), "surface");
  if (pf_table_rows(line) > 0) check(pf_table_write_csv(line, (dir / "surface_line.csv").c_str()), "write line");
  const int rc = save_reports(dir, {rep});
  pf_report_free(rep);
  pf_table_free(line);
  return rc;
}

int cmd_verify_super(const std::string& config, const std::string& out) {
  Config c;
  load_config(c, config, false);
  const fs::path dir = make_run_dir(out, c, "verify-super");
  pf_report* rep = nullptr;
  pf_field* res = nullptr;
  check(pf_run_verify_super(c.handle, &rep, &res), "verify-super");
  if (res) {
    const std::string meta = "{\"kind\": \"supersolution_residual\", \"config_digest\": \"" +
                             json_escape(pf_config_digest(c.handle)) + "\"}";
    check(pf_field_write(res, (dir / "residual.pfld").c_str(), meta.c_str()), "write residual");
  }
  const int rc = save_reports(dir, {rep});
  pf_report_free(rep);
  pf_field_free(res);
  return rc;
}

int cmd_evolve(const std::string& init, const std::string& config, const std::string& out) {
  Config c;
  load_config(c, config, false);
  std::string kind = init;
  pf_field* start = nullptr;
  if (init.rfind("file:", 0) == 0) {
    kind = "file";
    check_input(pf_field_read(init.substr(5).c_str(), &start), "read initial field");
  } else if (init != "sub" && init != "super") {
    die(kUsage, "--init must be sub, super or file:<path>");
  }
  const fs::path dir = make_run_dir(out, c, "evolve");
  pf_report* rep = nullptr;
  pf_field* state = nullptr;
  pf_table* deltas = nullptr;
  const int rc_run = pf_run_evolve(c.handle, kind.c_str(), start, &rep, &state, &deltas);
  pf_field_free(start);
  check(rc_run, "evolve");
  const std::string meta = "{\"kind\": \"curved_front_phase0\", \"init\": \"" + json_escape(init) +
                           "\", \"config_digest\": \"" + json_escape(pf_config_digest(c.handle)) + "\"}";
  check(pf_field_write(state, (dir / "state.pfld").c_str(), meta.c_str()), "write state");
  const int mid = pf_field_points(state, 0) / 2;
  check(pf_field_write_csv_slice(state, (dir / "state_x0.csv").c_str(), 1, &mid, 1), "write slice");
  check(pf_table_write_csv(deltas, (dir / "period_deltas.csv").c_str()), "write deltas");
  const int rc = save_reports(dir, {rep});
  pf_report_free(rep);
  pf_field_free(state);
  pf_table_free(deltas);
  return rc;
}

int cmd_campaign(const std::string& which, const std::string& config, const std::string& out, bool smoke) {
  Config c;
  load_config(c, config, smoke);
  const fs::path dir = make_run_dir(out, c, "campaign-" + which);
  pf_report** reps = nullptr;
  std::size_t n = 0;
  check(pf_run_campaign(c.handle, which.c_str(), &reps, &n), "campaign " + which);
  std::vector<pf_report*> list(reps, reps + n);
  for (pf_report* r : list) write_text(dir / (std::string(pf_report_id(r)) + ".csv"), pf_report_csv(r));
  const int rc = save_reports(dir, list);
  pf_reports_free(reps, n);
  return rc;
}

int cmd_export_plot(const std::string& dump, const std::string& out, int axis, const std::vector<int>& at) {
  pf_field* f = nullptr;
  check_input(pf_field_read(dump.c_str(), &f), "read " + dump);
  fs::path target = out.empty() ? fs::path(dump).replace_extension(".csv") : fs::path(out);
  if (fs::is_directory(target)) target /= fs::path(dump).stem().string() + ".csv";
  int rc = PF_OK;
  if (axis < 0) {
    rc = pf_field_write_csv_all(f, target.c_str());
  } else {
    if (axis >= pf_field_dim(f)) {
      pf_field_free(f);
      die(kUsage, "--axis out of range for a " + std::to_string(pf_field_dim(f)) + "-dimensional field");
    }
    std::vector<int> fixed = at;
    if (fixed.empty())
      for (int k = 0; k < pf_field_dim(f); ++k)
        if (k != axis) fixed.push_back(pf_field_points(f, k) / 2);
    rc = pf_field_write_csv_slice(f, target.c_str(), axis, fixed.data(), fixed.size());
  }
  pf_field_free(f);
  check(rc, "export");
  std::cout << "wrote " << target.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pulsefront: curved fronts in periodic combustion media"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (default: hardware)")->check(CLI::PositiveNumber);

  std::string config, out, init = "sub", which, dump;
  double angle = 90.0;
  bool smoke = false;
  int axis = -1;
  std::vector<int> at;

  auto* front = app.add_subcommand("front", "Solve one pulsating front");
  front->add_option("--dir", angle, "Polar angle of the direction in degrees")->required();
  front->add_option("--config", config, "Config file (JSON)");
  front->add_option("--out", out, "Output root");

  auto* surface = app.add_subcommand("surface", "Check the implicit surface and tabulate it");
  surface->add_option("--config", config, "Config file (JSON)");
  surface->add_option("--out", out, "Output root");

  auto* vsuper = app.add_subcommand("verify-super", "Scan and certify the supersolution");
  vsuper->add_option("--config", config, "Config file (JSON)");
  vsuper->add_option("--out", out, "Output root");

  auto* evolve = app.add_subcommand("evolve", "Evolve to the curved front on the tracked window");
  evolve->add_option("--config", config, "Config file (JSON)");
  evolve->add_option("--init", init, "sub, super or file:<path>");
  evolve->add_option("--out", out, "Output root");

  auto* campaign = app.add_subcommand("campaign", "Run an experiment campaign");
  campaign->add_option("--which", which, "Campaign")
      ->required()
      ->check(CLI::IsMember({"2.18", "2.19", "2.20", "pulsating", "all"}));
  campaign->add_option("--config", config, "Config file (JSON)");
  campaign->add_option("--out", out, "Output root");
  campaign->add_flag("--smoke", smoke, "Coarse grids for a quick run");

  auto* exporter = app.add_subcommand("export-plot", "Convert a field dump to CSV");
  exporter->add_option("dump", dump, "Field dump")->required();
  exporter->add_option("--out", out, "Output CSV file or directory");
  exporter->add_option("--axis", axis, "Slice axis (default: the whole field)");
  exporter->add_option("--at", at, "Node indices of the other axes")->delimiter(',');

  auto* cfgcmd = app.add_subcommand("config", "Print the default or the effective configuration");
  cfgcmd->add_option("--config", config, "Config file (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (threads > 0) check(pf_set_threads(threads), "threads");
    if (*front) return cmd_front(angle, config, out);
    if (*surface) return cmd_surface(config, out);
    if (*vsuper) return cmd_verify_super(config, out);
    if (*evolve) return cmd_evolve(init, config, out);
    if (*campaign) return cmd_campaign(which, config, out, smoke);
    if (*exporter) return cmd_export_plot(dump, out, axis, at);
    if (*cfgcmd) {
      if (config.empty()) {
        std::cout << pf_config_default_text();
      } else {
        Config c;
        load_config(c, config, false);
        std::cout << pf_config_canonical(c.handle) << "\n";
      }
      return kOk;
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.exit_code;
  }
  return kUsage;
}
