#pragma once

#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qobs/core_model.hpp"

namespace qobs {

enum class DriveShape { Constant, Sinusoid, Pulse, Samples };

/// Classical field u(t) added to one external input (b -> b + u).
/// Zero outside [start, stop].
struct Drive {
  Eigen::Index channel = 0;
  DriveShape shape = DriveShape::Constant;
  Complex amplitude{1.0, 0.0};
  double frequency = 0.0;  // angular; Sinusoid gives amplitude * sin(frequency t)
  double start = 0.0;
  double stop = std::numeric_limits<double>::infinity();
  std::vector<Complex> samples;  // Samples: values on a uniform grid from `start`
  double sample_dt = 0.0;

  Complex value(double t) const;
};

/// Parses "sin:amp=1,freq=2", "const:amp=0.5,phase=1.57", "pulse:amp=1,start=0,stop=2".
/// Keys: amp, phase, freq, start, stop, channel. Throws InvalidArgument.
Drive parse_drive(std::string_view text);

/// Fixed-step solution record. Means are doubled coordinates [a; a^#].
struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<CVector> means;
  std::vector<CMatrix> covariances;  // empty when not integrated
  std::string scenario;
  std::map<std::string, double> parameters;
};

/// Classical RK4 on d<x>/dt = Abar <x> + Bbar [u; u^#]. `initial` is either the
/// m mode means or a conjugation-consistent doubled vector of length 2m.
/// Throws InvalidArgument for dt <= 0, horizon < dt, a horizon that is not an
/// integer number of steps, or inconsistent initial means.
Trajectory integrate_means(const StateSpace& ss, const CVector& initial,
                           const std::vector<Drive>& drives, double horizon, double dt);

/// Vacuum noise loading Q = (1/2) Bbar Bbar^dagger for the symmetrised doubled
/// covariance (single damped mode in vacuum has Sigma = (1/2) I).
CMatrix vacuum_noise_loading(const StateSpace& ss);

/// RK4 on dSigma/dt = Abar Sigma + Sigma Abar^dagger + Q. Throws InvalidArgument
/// on bad steps or a non-Hermitian initial covariance.
Trajectory integrate_covariance(const StateSpace& ss, const CMatrix& initial, double horizon,
                                double dt);

/// Solves Abar Sigma + Sigma Abar^dagger + Q = 0. Throws NotHurwitz.
CMatrix steady_state_covariance(const StateSpace& ss);

/// exp(Abar t). Throws InvalidArgument for t < 0.
CMatrix propagate_exact(const StateSpace& ss, double t);

struct DecayFit {
  double rate = 0.0;      // fitted |x(t)| ~ exp(-rate t)
  double residual = 0.0;  // RMS of log residuals
  std::size_t samples = 0;
};

/// Log-linear least squares over the final half of the samples, skipping
/// values below 1e-12. Empty when fewer than two usable samples remain.
std::optional<DecayFit> fit_exponential_decay(const std::vector<double>& times,
                                              const std::vector<double>& magnitudes);

/// Evaluates selector . a (mode coordinates) along a trajectory.
std::vector<Complex> project(const Trajectory& traj, const CRowVector& selector);

inline constexpr double kMarginalTolerance = 1e-9;

struct AnalysisReport {
  std::vector<Complex> eigenvalues;  // of Abar, sorted by (re, im)
  double margin = 0.0;               // max real part
  bool is_hurwitz = false;
  /// Columns v (doubled coordinates) with v^dagger Abar = lambda v^dagger,
  /// |Re lambda| < 1e-9 and |v^dagger Bbar| < 1e-9, orthonormal.
  CMatrix decoherence_free_basis;
  std::optional<DecayFit> decay;
};

/// When both `selector` and `trajectory` are given, the decay of
/// |selector . a(t)| is fitted over the tail half of the horizon.
AnalysisReport analyze(const StateSpace& ss, const std::optional<CRowVector>& selector = {},
                       const Trajectory* trajectory = nullptr);

nlohmann::json to_json(const AnalysisReport& report);

/// Named linear functional of the mode means, exported as extra CSV columns.
struct Probe {
  std::string name;
  CRowVector weights;
};

/// CSV: "t,re(x1),im(x1),...", then re/im/abs per probe, then (optionally)
/// re/im of every covariance entry in row-major order.
void write_csv(std::ostream& out, const Trajectory& traj, const std::vector<Probe>& probes = {},
               bool include_covariance = false);

}  // namespace qobs
