#include "qobs/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "qobs/errors.hpp"
#include "qobs/netdsl.hpp"

namespace qobs {

void ScenarioConfig::validate() const {
  for (double v : {omega, gamma, gamma_l, horizon, step})
    if (!std::isfinite(v)) throw InvalidArgument("configuration values must be finite");
  if (gain && !std::isfinite(*gain)) throw InvalidArgument("--gain must be finite");
  if (!(step > 0.0)) throw InvalidArgument("--step must be positive");
  if (!(horizon >= step)) throw InvalidArgument("--horizon must be at least one step");
}

std::string scenario_directory() { return QOBS_SCENARIO_DIR; }

namespace {

void from_observer(Scenario& s, ObserverSystem sys) {
  s.model = sys.joint;
  s.initial = CVector::Zero(s.model.num_modes());
  s.initial(0) = 1.0;
  s.error_selector = CRowVector(sys.error_map.row(0));
  s.probes.push_back({"e", *s.error_selector});
  if (sys.decoherence_free) s.probes.push_back({"df", sys.decoherence_free->direction});
  s.observer = std::move(sys);
}

Scenario from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read scenario file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  auto parsed = dsl::parse(text.str());
  if (auto* err = std::get_if<dsl::ParseError>(&parsed)) throw dsl::DslError(*err);
  const auto& desc = std::get<dsl::NetworkDescription>(parsed);

  Scenario s;
  s.name = "file:" + path;
  s.model = dsl::compile(desc);
  s.drives = dsl::compile_drives(desc, dsl::build_network(desc));
  s.initial = CVector::Zero(s.model.num_modes());
  if (s.initial.size() > 0) s.initial(0) = 1.0;
  return s;
}

}  // namespace

Scenario build_scenario(const ScenarioConfig& config) {
  config.validate();
  Scenario s;
  const std::string& name = config.scenario;
  if (name.starts_with("file:")) {
    s = from_file(name.substr(5));
  } else if (name == "oneway") {
    from_observer(s, one_way_cascade(config.omega, config.gamma));
  } else if (name == "twoway") {
    from_observer(s, two_way_cascade(config.omega, config.gamma));
  } else if (name == "observer" || name == "observer-verified") {
    from_observer(s, build_quantum_observer(config.omega, config.gamma, config.gamma_l,
                                            name == "observer-verified"));
    s.parameters["gamma_l"] = config.gamma_l;
  } else if (name == "classical") {
    if (!(config.gamma > 0.0)) throw InvalidArgument("classical: gamma must be positive");
    ClassicalPlant plant{CMatrix::Constant(1, 1, Complex(-0.5 * config.gamma, -config.omega)),
                         CMatrix::Constant(1, 1, -std::sqrt(config.gamma)),
                         CMatrix::Constant(1, 1, std::sqrt(config.gamma))};
    CMatrix gain;
    if (config.gain) {
      gain = CMatrix::Constant(1, 1, *config.gain);
    } else {
      const Detectability d = detectable(plant.a, plant.c);
      if (!d.detectable || !d.gain) throw InvalidArgument("classical: plant is not detectable");
      gain = *d.gain;
    }
    from_observer(s, classical_luenberger(plant, gain));
    s.parameters["gain"] = gain(0, 0).real();
  } else {
    throw InvalidArgument("unknown scenario '" + name + "'");
  }
  if (!name.starts_with("file:")) {
    s.name = name;
    s.parameters["omega"] = config.omega;
    s.parameters["gamma"] = config.gamma;
  }

  if (config.drive) {
    Drive d = parse_drive(*config.drive);
    if (config.drive->find("channel=") == std::string::npos && s.observer)
      d.channel = s.observer->drive_input;
    if (d.channel < 0 || d.channel >= s.model.num_inputs())
      throw InvalidArgument("drive channel is out of range");
    s.drives.push_back(std::move(d));
  }
  return s;
}

Trajectory simulate(const Scenario& scenario, const ScenarioConfig& config) {
  Trajectory traj = integrate_means(scenario.model, scenario.initial, scenario.drives,
                                    config.horizon, config.step);
  traj.scenario = scenario.name;
  traj.parameters = scenario.parameters;
  return traj;
}

}  // namespace qobs
