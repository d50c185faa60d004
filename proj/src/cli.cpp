#include "qobs/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qobs/errors.hpp"
#include "qobs/json_io.hpp"
#include "qobs/netdsl.hpp"
#include "qobs/scenario.hpp"
#include "qobs/sweep.hpp"

namespace qobs::cli {

namespace {

struct Options {
  ScenarioConfig config;
  double gain = 0.0;
  std::string drive;
  std::string out_path;
  std::string plot_path;
  std::string sweep;
  std::string file;
  bool covariance = false;
};

void add_config_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--scenario", o.config.scenario,
                  "classical, oneway, twoway, observer, observer-verified or file:<path>")
      ->capture_default_str();
  cmd->add_option("--omega", o.config.omega, "cavity detuning")->capture_default_str();
  cmd->add_option("--gamma", o.config.gamma, "plant coupling rate")->capture_default_str();
  cmd->add_option("--gamma-l", o.config.gamma_l, "observer gain channel rate")->capture_default_str();
  cmd->add_option("--gain", o.gain, "classical observer gain L");
  cmd->add_option("--horizon", o.config.horizon, "simulated time")->capture_default_str();
  cmd->add_option("--step", o.config.step, "integrator step")->capture_default_str();
  cmd->add_option("--drive", o.drive, "classical drive, e.g. sin:amp=1,freq=2");
  cmd->add_option("--out", o.out_path, "write output here instead of stdout");
}

// Writes to --out when given, otherwise to `out`.
void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(o.out_path, std::ios::binary);
  if (!file) throw InvalidArgument("cannot write '" + o.out_path + "'");
  file << text;
}

ScenarioConfig finish(const Options& o, const CLI::App* cmd) {
  ScenarioConfig config = o.config;
  if (cmd->count("--gain")) config.gain = o.gain;
  if (cmd->count("--drive")) config.drive = o.drive;
  return config;
}

int do_compile(const Options& o, std::ostream& out, std::ostream& err) {
  std::ifstream in(o.file, std::ios::binary);
  if (!in) {
    err << "error: cannot read '" << o.file << "'\n";
    return kExitBadConfig;
  }
  std::ostringstream text;
  text << in.rdbuf();
  auto parsed = dsl::parse(text.str());
  if (auto* e = std::get_if<dsl::ParseError>(&parsed)) {
    err << o.file << ":" << e->format() << "\n";
    return kExitCompileError;
  }
  const StateSpace model = dsl::compile(std::get<dsl::NetworkDescription>(parsed));
  emit(o, out, to_json(model).dump(2) + "\n");
  return kExitOk;
}

nlohmann::json eigen_json(const std::vector<Complex>& values) {
  nlohmann::json a = nlohmann::json::array();
  for (const Complex& l : values) a.push_back({l.real(), l.imag()});
  return a;
}

int do_analyze(const ScenarioConfig& config, const Options& o, std::ostream& out) {
  const Scenario s = build_scenario(config);
  const Trajectory traj = simulate(s, config);
  const AnalysisReport report = analyze(s.model, s.error_selector, &traj);
  nlohmann::json j{{"scenario", s.name}, {"parameters", s.parameters}, {"report", to_json(report)}};
  j["mode_eigenvalues"] = eigen_json(linalg::eigenvalues(s.model.a_minus));
  if (s.observer) {
    j["error_a"] = matrix_to_json(s.observer->error_a);
    j["error_autonomous"] = s.observer->error_autonomous;
  }
  emit(o, out, j.dump(2) + "\n");
  return kExitOk;
}

std::string plot_script(const std::string& csv, const Scenario& s) {
  const Eigen::Index m = s.model.num_modes();
  std::ostringstream p;
  p << "set datafile separator ','\n"
    << "set key autotitle columnhead\n"
    << "set xlabel 't'\n"
    << "plot ";
  for (Eigen::Index i = 0; i < m; ++i)
    p << (i ? ", " : "") << "'" << csv << "' using 1:" << 2 + 2 * i << " with lines";
  for (std::size_t k = 0; k < s.probes.size(); ++k)
    p << ", '" << csv << "' using 1:" << 2 + 2 * m + 3 * static_cast<Eigen::Index>(k) + 2 << " with lines";
  p << "\n";
  return p.str();
}

int do_simulate(const ScenarioConfig& config, const Options& o, std::ostream& out) {
  if (!o.plot_path.empty() && o.out_path.empty()) throw InvalidArgument("--plot needs --out");
  const Scenario s = build_scenario(config);
  Trajectory traj = simulate(s, config);
  if (o.covariance) {
    const Eigen::Index dim = 2 * s.model.num_modes();
    const CMatrix start = 0.5 * CMatrix::Identity(dim, dim);
    traj.covariances = integrate_covariance(s.model, start, config.horizon, config.step).covariances;
  }
  std::ostringstream csv;
  write_csv(csv, traj, s.probes, o.covariance);
  emit(o, out, csv.str());
  if (!o.plot_path.empty()) {
    std::ofstream plot(o.plot_path, std::ios::binary);
    if (!plot) throw InvalidArgument("cannot write '" + o.plot_path + "'");
    plot << plot_script(o.out_path, s);
  }
  return kExitOk;
}

int do_sweep(const ScenarioConfig& config, const Options& o, std::ostream& out) {
  const SweepRange range = parse_sweep(o.sweep);
  const auto rows = run_sweep_parallel(config, range);
  std::ostringstream csv;
  write_sweep_csv(csv, range, rows);
  emit(o, out, csv.str());
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linear quantum network and coherent observer toolkit", "qobs"};
  app.require_subcommand(1);
  Options o;

  auto* compile = app.add_subcommand("compile", "compile a .qnet file to state-space JSON");
  compile->add_option("path", o.file, "network description")->required();
  compile->add_option("--out", o.out_path, "write JSON here instead of stdout");

  auto* analyze_cmd = app.add_subcommand("analyze", "eigenvalues, decay rate and decoherence-free modes");
  add_config_flags(analyze_cmd, o);

  auto* simulate_cmd = app.add_subcommand("simulate", "mean trajectory as CSV");
  add_config_flags(simulate_cmd, o);
  simulate_cmd->add_option("--plot", o.plot_path, "gnuplot script referencing the CSV");
  simulate_cmd->add_flag("--covariance", o.covariance, "also integrate the covariance from vacuum");

  auto* sweep_cmd = app.add_subcommand("sweep", "decay rate and margin over a parameter range");
  add_config_flags(sweep_cmd, o);
  sweep_cmd->add_option("--sweep", o.sweep, "name=start:stop:count or name=v1,v2,...")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadConfig;
  }

  try {
    if (*compile) return do_compile(o, out, err);
    if (*analyze_cmd) return do_analyze(finish(o, analyze_cmd), o, out);
    if (*simulate_cmd) return do_simulate(finish(o, simulate_cmd), o, out);
    if (*sweep_cmd) return do_sweep(finish(o, sweep_cmd), o, out);
  } catch (const dsl::DslError& e) {
    err << "error: " << e.what() << "\n";
    return kExitCompileError;
  } catch (const NetworkError& e) {
    err << "error: " << e.what() << "\n";
    return kExitCompileError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadConfig;
  }
  return kExitBadConfig;
}

}  // namespace qobs::cli
