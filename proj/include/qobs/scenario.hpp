#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qobs/dynamics.hpp"
#include "qobs/observer.hpp"

namespace qobs {

/// Run configuration shared by the CLI commands.
struct ScenarioConfig {
  std::string scenario = "observer";  // classical, oneway, twoway, observer, observer-verified, file:<path>
  double omega = 1.0;
  double gamma = 0.5;
  double gamma_l = 2.0;
  std::optional<double> gain;  // classical observer gain; detectable() picks one otherwise
  double horizon = 10.0;
  double step = 1e-3;
  std::optional<std::string> drive;

  /// Throws InvalidArgument for non-finite values or a bad step/horizon.
  void validate() const;
};

/// Everything a command needs to simulate or analyse one configuration.
struct Scenario {
  std::string name;
  StateSpace model;
  CVector initial;  // mode means
  std::vector<Probe> probes;
  std::optional<CRowVector> error_selector;
  std::vector<Drive> drives;
  std::map<std::string, double> parameters;
  std::optional<ObserverSystem> observer;
};

/// Directory holding the shipped .qnet files.
std::string scenario_directory();

/// Throws InvalidArgument (bad configuration), dsl::DslError or NetworkError
/// (file scenarios that fail to parse or compile).
Scenario build_scenario(const ScenarioConfig& config);

/// Mean trajectory of a scenario over the configured horizon.
Trajectory simulate(const Scenario& scenario, const ScenarioConfig& config);

}  // namespace qobs
