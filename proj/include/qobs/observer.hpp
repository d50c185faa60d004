#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qobs/core_model.hpp"
#include "qobs/network.hpp"

namespace qobs {

/// x' = A x + B u, y = C x.
struct ClassicalPlant {
  CMatrix a;
  CMatrix b;
  CMatrix c;
};

/// Coefficient of one external input (or its adjoint when `conjugate`) in the
/// error equation.
struct NoiseCoefficient {
  std::string input;
  bool conjugate = false;
  Complex value;
};

struct DecoherenceFreeMode {
  CRowVector direction;  // over the joint modes
  Complex eigenvalue;
  std::vector<NoiseCoefficient> noise;
};

/// An observer wired to its plant, plus the dynamics of the estimation error.
///
/// Sign conventions for the error coordinate:
///   classical, one-way and coherent (gain-channel) observers: e = x - x~ (a - a~)
///   two-way cascade: e = a + a~, since -a~ tracks a there.
struct ObserverSystem {
  std::string name;
  std::optional<ComposedNetwork> network;  // quantum constructions
  std::optional<ClassicalPlant> plant;     // classical construction
  CMatrix gain;

  /// Reduced joint model; modes ordered plant first, observer second.
  StateSpace joint;
  std::vector<std::string> input_aliases;   // one per joint input
  std::vector<std::string> output_aliases;  // one per joint output
  Eigen::Index drive_input = 0;             // input carrying the classical drive u

  CMatrix error_map;       // rows select e from the joint mode vector
  CMatrix error_a;         // de/dt = error_a e + error_a_plus e^# + coupling * rest + noise
  CMatrix error_a_plus;
  CMatrix error_coupling;  // coupling into the complementary coordinates
  bool error_autonomous = false;

  /// Coefficients for the first error row.
  std::vector<NoiseCoefficient> noise_coeffs;
  std::optional<DecoherenceFreeMode> decoherence_free;
  bool verifiable = false;
};

/// Error dynamics of e = map x obtained by a similarity transform of the
/// doubled drift into coordinates (e, e^#, complement).
struct ErrorDynamics {
  CMatrix error_a;
  CMatrix error_a_plus;
  CMatrix coupling;
  bool autonomous = false;
};

ErrorDynamics extract_error_dynamics(const StateSpace& joint, const CMatrix& error_map,
                                     double tolerance = kDefaultTolerance);

/// Noise coefficients of row `row` of the error map, labelled by alias.
std::vector<NoiseCoefficient> noise_coefficients(const StateSpace& joint, const CRowVector& row,
                                                 const std::vector<std::string>& aliases);

/// Builds the observer x~' = A x~ + B u + L (y - y~); error_a = A - L C.
/// Throws InvalidArgument on non-conformable dimensions.
ObserverSystem classical_luenberger(const ClassicalPlant& plant, const CMatrix& gain);

inline constexpr double kDefaultObserverMargin = -0.5;

struct Detectability {
  bool detectable = false;
  std::optional<CMatrix> gain;
};

/// PBH test over eigenvalues with non-negative real part. The suggested gain
/// is zero when A already has margin <= -0.5, places the pole exactly at -0.5
/// (keeping Im A) in the scalar case, and otherwise moves every observable
/// pole left of -0.5; unobservable stable poles stay where they are.
Detectability detectable(const CMatrix& a, const CMatrix& c,
                         double target_margin = kDefaultObserverMargin);

/// Plant cavity cascaded into an identical observer cavity (rate gamma each).
ObserverSystem one_way_cascade(double omega, double gamma);

/// Cavities exchanging two counter-propagating channels at rate gamma/2 each.
ObserverSystem two_way_cascade(double omega, double gamma);

/// Plant cavity and an observer with couplings (sqrt gamma a~, sqrt gamma_L a~,
/// sqrt gamma_L a~^*) joined through 50-50 splitters. With `verifiable`, two
/// more splitters tap y and y~ (vacuum inputs b2, b3) and the creation channel
/// input is exposed as z.
ObserverSystem build_quantum_observer(double omega, double gamma, double gamma_l, bool verifiable);

/// Linear combination of joint outputs.
struct OutputChannel {
  std::string description;
  CRowVector weights;
};

/// y - y~ from the two taps; its mean is (1/sqrt2) C <e>.
/// Throws NotVerifiable for observers built without taps.
OutputChannel verification_output(const ObserverSystem& sys);

/// Mean of an output combination for doubled state x and input means u.
Complex output_mean(const StateSpace& ss, const CRowVector& weights, const CVector& doubled_state,
                    const CVector& input_means);

nlohmann::json to_json(const ObserverSystem& sys);

}  // namespace qobs
