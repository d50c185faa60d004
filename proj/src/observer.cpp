#include "qobs/observer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "qobs/errors.hpp"
#include "qobs/json_io.hpp"

namespace qobs {

using linalg::max_abs;

ErrorDynamics extract_error_dynamics(const StateSpace& joint, const CMatrix& error_map,
                                     double tolerance) {
  const Eigen::Index m = joint.num_modes();
  const Eigen::Index k = error_map.rows();
  if (error_map.cols() != m || k == 0 || k > m)
    throw InvalidArgument("extract_error_dynamics: error map does not fit the joint state");
  const DoubledForm form = to_doubled(joint);

  CMatrix basis = CMatrix::Zero(2 * k, 2 * m);
  basis.topLeftCorner(k, m) = error_map;
  basis.bottomRightCorner(k, m) = error_map.conjugate();
  auto rank = [](const CMatrix& x) {
    Eigen::FullPivLU<CMatrix> lu(x);
    lu.setThreshold(1e-10);
    return lu.rank();
  };
  if (rank(basis) != 2 * k)
    throw InvalidArgument("extract_error_dynamics: error map rows are linearly dependent");
  // Complete with unit rows, in order, until the transform is invertible.
  for (Eigen::Index j = 0; j < 2 * m && basis.rows() < 2 * m; ++j) {
    CMatrix trial(basis.rows() + 1, 2 * m);
    trial << basis, CMatrix::Identity(2 * m, 2 * m).row(j);
    if (rank(trial) == trial.rows()) basis = trial;
  }

  const CMatrix transformed = basis * form.a * basis.inverse();
  ErrorDynamics out;
  out.error_a = transformed.block(0, 0, k, k);
  out.error_a_plus = transformed.block(0, k, k, k);
  out.coupling = transformed.block(0, 2 * k, k, 2 * m - 2 * k);
  out.autonomous = max_abs(out.coupling) <= tolerance * std::max(1.0, max_abs(form.a));
  return out;
}

std::vector<NoiseCoefficient> noise_coefficients(const StateSpace& joint, const CRowVector& row,
                                                 const std::vector<std::string>& aliases) {
  const CRowVector minus = row * joint.b_minus;
  const CRowVector plus = row * joint.b_plus;
  std::vector<NoiseCoefficient> out;
  for (Eigen::Index j = 0; j < joint.num_inputs(); ++j) {
    const std::string name =
        j < static_cast<Eigen::Index>(aliases.size()) ? aliases[static_cast<std::size_t>(j)]
                                                      : "u" + std::to_string(j);
    out.push_back({name, false, minus(j)});
    out.push_back({name, true, plus(j)});
  }
  return out;
}

namespace {

void require_positive(double gamma, const char* who) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw InvalidArgument(std::string(who) + ": gamma must be positive");
}

void attach_error(ObserverSystem& sys, CMatrix map, bool must_be_autonomous) {
  const ErrorDynamics err = extract_error_dynamics(sys.joint, map);
  if (must_be_autonomous && !err.autonomous)
    throw std::logic_error(sys.name + ": error coordinate is not autonomous");
  sys.error_map = std::move(map);
  sys.error_a = err.error_a;
  sys.error_a_plus = err.error_a_plus;
  sys.error_coupling = err.coupling;
  sys.error_autonomous = err.autonomous;
  if (sys.network)
    sys.noise_coeffs = noise_coefficients(sys.joint, sys.error_map.row(0), sys.input_aliases);
}

OscillatorSpec cavity(double omega, std::vector<Coupling> couplings) {
  return make_mode(omega, couplings);
}

}  // namespace

ObserverSystem classical_luenberger(const ClassicalPlant& plant, const CMatrix& gain) {
  const Eigen::Index n = plant.a.rows();
  if (plant.a.cols() != n || plant.b.rows() != n || plant.c.cols() != n)
    throw InvalidArgument("classical_luenberger: plant matrices are not conformable");
  if (gain.rows() != n || gain.cols() != plant.c.rows())
    throw InvalidArgument("classical_luenberger: gain must be n x (rows of C)");
  const Eigen::Index p = plant.c.rows();
  const Eigen::Index u = plant.b.cols();

  ObserverSystem sys;
  sys.name = "classical";
  sys.plant = plant;
  sys.gain = gain;
  StateSpace& j = sys.joint;
  j = StateSpace::zero(2 * n, u, 2 * p);
  j.a_minus.topLeftCorner(n, n) = plant.a;
  j.a_minus.bottomLeftCorner(n, n) = gain * plant.c;
  j.a_minus.bottomRightCorner(n, n) = plant.a - gain * plant.c;
  j.b_minus.topRows(n) = plant.b;
  j.b_minus.bottomRows(n) = plant.b;
  j.c_minus.topLeftCorner(p, n) = plant.c;
  j.c_minus.bottomRightCorner(p, n) = plant.c;
  for (Eigen::Index i = 0; i < u; ++i) sys.input_aliases.push_back("u" + std::to_string(i));
  for (Eigen::Index i = 0; i < p; ++i) sys.output_aliases.push_back("y" + std::to_string(i));
  for (Eigen::Index i = 0; i < p; ++i) sys.output_aliases.push_back("y~" + std::to_string(i));

  CMatrix map(n, 2 * n);
  map << CMatrix::Identity(n, n), -CMatrix::Identity(n, n);
  attach_error(sys, std::move(map), true);
  if (max_abs(sys.error_a - (plant.a - gain * plant.c)) > 1e-9 * std::max(1.0, max_abs(plant.a)))
    throw std::logic_error("classical_luenberger: conjugated error drift disagrees with A - LC");
  return sys;
}

Detectability detectable(const CMatrix& a, const CMatrix& c, double target_margin) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || c.cols() != n) throw InvalidArgument("detectable: A and C not conformable");
  const Eigen::Index p = c.rows();
  const auto eig = linalg::eigenvalues(a);

  for (const Complex& l : eig) {
    if (l.real() < 0.0) continue;
    CMatrix pbh(n + p, n);
    pbh << l * CMatrix::Identity(n, n) - a, c;
    Eigen::JacobiSVD<CMatrix> svd(pbh);
    const auto& s = svd.singularValues();
    if (s.size() < n || s(n - 1) <= 1e-9 * std::max(1.0, s(0))) return {false, std::nullopt};
  }

  double margin = -std::numeric_limits<double>::infinity();
  for (const Complex& l : eig) margin = std::max(margin, l.real());
  if (margin <= target_margin) return {true, CMatrix::Zero(n, p)};

  if (c.squaredNorm() == 0.0) return {true, CMatrix::Zero(n, p)};
  if (n == 1) {
    const double norm2 = c.squaredNorm();
    const Complex target{target_margin, a(0, 0).imag()};
    return {true, CMatrix((a(0, 0) - target) * c.adjoint() / norm2)};
  }

  // Split off the unobservable subspace, then place the observable part with
  // a Lyapunov-based gain on the dual pair.
  CMatrix obs(n * p, n);
  CMatrix power = CMatrix::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    obs.middleRows(i * p, p) = c * power;
    power = power * a;
  }
  Eigen::JacobiSVD<CMatrix> svd(obs, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-9 * std::max(1.0, s(0))) ++rank;
  const CMatrix q_obs = svd.matrixV().leftCols(rank);
  const CMatrix a_oo = q_obs.adjoint() * a * q_obs;
  const CMatrix c_o = c * q_obs;

  const CMatrix f = a_oo.adjoint();
  const CMatrix g = c_o.adjoint();
  double lowest = std::numeric_limits<double>::infinity();
  for (const Complex& l : linalg::eigenvalues(f)) lowest = std::min(lowest, l.real());
  const double shift = std::max(-target_margin, -lowest - target_margin);
  const CMatrix anti = f + shift * CMatrix::Identity(rank, rank);
  // anti W + W anti^dagger = G G^dagger with anti anti-stable gives W > 0.
  const CMatrix w = linalg::solve_lyapunov(-anti, g * g.adjoint());
  const CMatrix k = g.adjoint() * w.inverse();
  return {true, CMatrix(q_obs * k.adjoint())};
}

ObserverSystem one_way_cascade(double omega, double gamma) {
  require_positive(gamma, "one_way_cascade");
  ObserverSystem sys;
  sys.name = "oneway";
  auto net = concatenate({make_block("plant", cavity(omega, {{CouplingKind::Annihilation, gamma}})),
                          make_block("observer", cavity(omega, {{CouplingKind::Annihilation, gamma}}))});
  net = connect(std::move(net), out_port("plant", 0), in_port("observer", 0));
  sys.joint = reduce(net);
  sys.network = std::move(net);
  sys.input_aliases = {"b_in"};
  sys.output_aliases = {"b_out"};
  CMatrix map(1, 2);
  map << 1.0, -1.0;
  attach_error(sys, std::move(map), false);
  return sys;
}

ObserverSystem two_way_cascade(double omega, double gamma) {
  require_positive(gamma, "two_way_cascade");
  ObserverSystem sys;
  sys.name = "twoway";
  const std::vector<Coupling> pair{{CouplingKind::Annihilation, 0.5 * gamma},
                                   {CouplingKind::Annihilation, 0.5 * gamma}};
  auto net = concatenate({make_block("plant", cavity(omega, pair)),
                          make_block("observer", cavity(omega, pair))});
  net = connect(std::move(net), out_port("plant", 0), in_port("observer", 0));
  net = connect(std::move(net), out_port("observer", 1), in_port("plant", 1));
  sys.joint = reduce(net);
  sys.network = std::move(net);
  // External inputs: plant.in[0], observer.in[1]; outputs: plant.out[1], observer.out[0].
  sys.input_aliases = {"b_in1", "b_in2"};
  sys.output_aliases = {"b_out2", "b_out1"};
  CMatrix map(1, 2);
  map << 1.0, 1.0;
  attach_error(sys, std::move(map), true);

  CRowVector df(2);
  df << 1.0, -1.0;
  const CRowVector drift = df * sys.joint.a_minus;
  DecoherenceFreeMode mode;
  mode.direction = df;
  mode.eigenvalue = drift(0) / df(0);
  mode.noise = noise_coefficients(sys.joint, df, sys.input_aliases);
  sys.decoherence_free = std::move(mode);
  return sys;
}

ObserverSystem build_quantum_observer(double omega, double gamma, double gamma_l, bool verifiable) {
  require_positive(gamma, "build_quantum_observer");
  if (!(gamma_l >= 0.0) || !std::isfinite(gamma_l))
    throw InvalidArgument("build_quantum_observer: gamma_L must be non-negative");

  ObserverSystem sys;
  sys.name = verifiable ? "observer-verified" : "observer";
  sys.verifiable = verifiable;
  sys.gain = CMatrix::Constant(1, 1, std::sqrt(gamma_l));

  std::vector<Block> blocks;
  blocks.push_back(make_block("J1", beamsplitter_5050()));
  blocks.push_back(make_block("plant", cavity(omega, {{CouplingKind::Annihilation, gamma}})));
  blocks.push_back(make_block("observer", cavity(omega, {{CouplingKind::Annihilation, gamma},
                                                         {CouplingKind::Annihilation, gamma_l},
                                                         {CouplingKind::Creation, gamma_l}})));
  if (verifiable) {
    blocks.push_back(make_block("J2", beamsplitter_5050()));
    blocks.push_back(make_block("J3", beamsplitter_5050()));
  }
  blocks.push_back(make_block("J4", beamsplitter_5050()));
  auto net = concatenate(std::move(blocks));

  // J1 splits b_in + u against b1 into d1 (plant) and d4 (observer).
  net = connect(std::move(net), out_port("J1", 0), in_port("plant", 0));
  net = connect(std::move(net), out_port("J1", 1), in_port("observer", 0));
  if (verifiable) {
    // J2/J3 tap d2 and d5 against vacuum b2/b3; the taps feed J4, the other
    // arms leave as y and y~.
    net = connect(std::move(net), out_port("plant", 0), in_port("J2", 0));
    net = connect(std::move(net), out_port("observer", 0), in_port("J3", 0));
    net = connect(std::move(net), out_port("J3", 0), in_port("J4", 0));
    net = connect(std::move(net), out_port("J2", 0), in_port("J4", 1));
  } else {
    net = connect(std::move(net), out_port("observer", 0), in_port("J4", 0));
    net = connect(std::move(net), out_port("plant", 0), in_port("J4", 1));
  }
  // w = (in0 - in1)/sqrt2 drives the gain channel.
  net = connect(std::move(net), out_port("J4", 1), in_port("observer", 1));

  sys.joint = reduce(net);
  for (const PortRef& p : net.external_inputs()) {
    const std::string label = p.to_string();
    if (label == "J1.in[0]") sys.input_aliases.push_back("b_in");
    else if (label == "J1.in[1]") sys.input_aliases.push_back("b1");
    else if (label == "observer.in[2]") sys.input_aliases.push_back(verifiable ? "z" : "b3");
    else if (label == "J2.in[1]") sys.input_aliases.push_back("b2");
    else if (label == "J3.in[1]") sys.input_aliases.push_back("b3");
    else sys.input_aliases.push_back(label);
  }
  for (const PortRef& p : net.external_outputs()) {
    const std::string label = p.to_string();
    if (label == "J2.out[1]") sys.output_aliases.push_back("y");
    else if (label == "J3.out[1]") sys.output_aliases.push_back("y~");
    else sys.output_aliases.push_back(label);
  }
  sys.drive_input = net.external_index(in_port("J1", 0));
  sys.network = std::move(net);

  CMatrix map(1, 2);
  map << 1.0, -1.0;
  attach_error(sys, std::move(map), true);
  return sys;
}

OutputChannel verification_output(const ObserverSystem& sys) {
  if (!sys.verifiable || !sys.network)
    throw NotVerifiable("verification_output: observer was built without output taps");
  const ComposedNetwork& net = *sys.network;
  CRowVector weights = CRowVector::Zero(sys.joint.num_outputs());
  weights(net.external_index(out_port("J2", 1))) = 1.0;
  weights(net.external_index(out_port("J3", 1))) = -1.0;
  return {"y - y~", weights};
}

Complex output_mean(const StateSpace& ss, const CRowVector& weights, const CVector& doubled_state,
                    const CVector& input_means) {
  const Eigen::Index m = ss.num_modes();
  const CVector y = ss.c_minus * doubled_state.head(m) + ss.c_plus * doubled_state.tail(m) +
                    ss.d * input_means;
  return (weights * y)(0);
}

nlohmann::json to_json(const ObserverSystem& sys) {
  using nlohmann::json;
  json noise = json::array();
  for (const NoiseCoefficient& c : sys.noise_coeffs)
    noise.push_back({{"input", c.input}, {"conjugate", c.conjugate}, {"value", {c.value.real(), c.value.imag()}}});
  json out{{"name", sys.name},
           {"joint", to_json(sys.joint)},
           {"inputs", sys.input_aliases},
           {"outputs", sys.output_aliases},
           {"error_map", matrix_to_json(sys.error_map)},
           {"error_a", matrix_to_json(sys.error_a)},
           {"error_a_plus", matrix_to_json(sys.error_a_plus)},
           {"error_coupling", matrix_to_json(sys.error_coupling)},
           {"error_autonomous", sys.error_autonomous},
           {"noise_coeffs", noise},
           {"verifiable", sys.verifiable}};
  if (sys.gain.size() > 0) out["gain"] = matrix_to_json(sys.gain);
  if (sys.decoherence_free) {
    json df_noise = json::array();
    for (const NoiseCoefficient& c : sys.decoherence_free->noise)
      df_noise.push_back({{"input", c.input}, {"conjugate", c.conjugate}, {"value", {c.value.real(), c.value.imag()}}});
    out["decoherence_free"] = {
        {"direction", matrix_to_json(sys.decoherence_free->direction)},
        {"eigenvalue", {sys.decoherence_free->eigenvalue.real(), sys.decoherence_free->eigenvalue.imag()}},
        {"noise", df_noise}};
  }
  return out;
}

}  // namespace qobs
