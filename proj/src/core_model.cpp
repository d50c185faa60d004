#include "qobs/core_model.hpp"

#include <cmath>
#include <string>

#include "qobs/errors.hpp"

namespace qobs {

using linalg::max_abs;

OscillatorSpec::OscillatorSpec(CMatrix omega, CMatrix c_minus, CMatrix c_plus, double tolerance)
    : omega_(std::move(omega)), c_minus_(std::move(c_minus)), c_plus_(std::move(c_plus)) {
  if (omega_.rows() != omega_.cols())
    throw InvalidSpec("OscillatorSpec: Omega must be square");
  if (c_minus_.cols() != omega_.rows() || c_plus_.cols() != omega_.rows())
    throw InvalidSpec("OscillatorSpec: coupling matrices need one column per mode");
  if (c_minus_.rows() != c_plus_.rows())
    throw InvalidSpec("OscillatorSpec: C- and C+ must have the same number of channels");
  if (!omega_.allFinite() || !c_minus_.allFinite() || !c_plus_.allFinite())
    throw InvalidSpec("OscillatorSpec: non-finite entry");
  const double skew = max_abs(omega_ - omega_.adjoint());
  if (skew > tolerance)
    throw InvalidSpec("OscillatorSpec: Omega is not Hermitian (deviation " +
                      std::to_string(skew) + ")");
}

OscillatorSpec make_mode(double omega, std::span<const Coupling> couplings) {
  const auto n = static_cast<Eigen::Index>(couplings.size());
  CMatrix c_minus = CMatrix::Zero(n, 1);
  CMatrix c_plus = CMatrix::Zero(n, 1);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Coupling& c = couplings[static_cast<std::size_t>(k)];
    if (!(c.rate >= 0.0) || !std::isfinite(c.rate))
      throw InvalidSpec("make_mode: coupling rate must be a finite non-negative number");
    const double amplitude = std::sqrt(c.rate);
    if (c.kind == CouplingKind::Annihilation)
      c_minus(k, 0) = amplitude;
    else
      c_plus(k, 0) = amplitude;
  }
  CMatrix om(1, 1);
  om(0, 0) = omega;
  return OscillatorSpec(std::move(om), std::move(c_minus), std::move(c_plus));
}

OscillatorSpec make_mode_general(double omega, std::span<const GeneralCoupling> couplings) {
  const auto n = static_cast<Eigen::Index>(couplings.size());
  CMatrix c_minus(n, 1);
  CMatrix c_plus(n, 1);
  for (Eigen::Index k = 0; k < n; ++k) {
    c_minus(k, 0) = couplings[static_cast<std::size_t>(k)].alpha;
    c_plus(k, 0) = couplings[static_cast<std::size_t>(k)].beta;
  }
  CMatrix om(1, 1);
  om(0, 0) = omega;
  return OscillatorSpec(std::move(om), std::move(c_minus), std::move(c_plus));
}

StateSpace StateSpace::zero(Eigen::Index modes, Eigen::Index inputs, Eigen::Index outputs) {
  return StateSpace{CMatrix::Zero(modes, modes),  CMatrix::Zero(modes, modes),
                    CMatrix::Zero(modes, inputs), CMatrix::Zero(modes, inputs),
                    CMatrix::Zero(outputs, modes), CMatrix::Zero(outputs, modes),
                    CMatrix::Zero(outputs, inputs)};
}

void StateSpace::check_dimensions() const {
  const Eigen::Index m = num_modes();
  const Eigen::Index n_in = num_inputs();
  const Eigen::Index n_out = num_outputs();
  auto expect = [](const CMatrix& x, Eigen::Index r, Eigen::Index c, const char* name) {
    if (x.rows() != r || x.cols() != c)
      throw InvalidSpec(std::string("StateSpace: block ") + name + " has wrong shape");
  };
  expect(a_minus, m, m, "a_minus");
  expect(a_plus, m, m, "a_plus");
  expect(b_minus, m, n_in, "b_minus");
  expect(b_plus, m, n_in, "b_plus");
  expect(c_minus, n_out, m, "c_minus");
  expect(c_plus, n_out, m, "c_plus");
  expect(d, n_out, n_in, "d");
}

StateSpace derive_state_space(const OscillatorSpec& spec) {
  const CMatrix& cm = spec.c_minus();
  const CMatrix& cp = spec.c_plus();
  const Eigen::Index n = spec.num_channels();
  StateSpace ss;
  ss.a_minus = -0.5 * cm.adjoint() * cm + 0.5 * cp.transpose() * cp.conjugate() - kI * spec.omega();
  ss.a_plus = -0.5 * cm.adjoint() * cp + 0.5 * cp.transpose() * cm.conjugate();
  ss.b_minus = -cm.adjoint();
  ss.b_plus = -cp.transpose();
  ss.c_minus = cm;
  ss.c_plus = cp;
  ss.d = CMatrix::Identity(n, n);
  return ss;
}

double realizability_residual(const StateSpace& ss) {
  ss.check_dimensions();
  const CMatrix& cm = ss.c_minus;
  const CMatrix& cp = ss.c_plus;
  const double drift = max_abs(ss.a_minus + ss.a_minus.adjoint() + cm.adjoint() * cm -
                               cp.transpose() * cp.conjugate());
  double input = 0.0;
  if (ss.num_inputs() > 0 && ss.num_modes() > 0) {
    input = std::max(max_abs(ss.b_minus + cm.adjoint() * ss.d),
                     max_abs(ss.b_plus + cp.transpose() * ss.d.conjugate()));
  }
  return std::max(drift, input);
}

namespace {

CMatrix stack(const CMatrix& top_left, const CMatrix& top_right) {
  const Eigen::Index r = top_left.rows();
  const Eigen::Index c = top_left.cols();
  CMatrix out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = top_left;
  out.topRightCorner(r, c) = top_right;
  out.bottomLeftCorner(r, c) = top_right.conjugate();
  out.bottomRightCorner(r, c) = top_left.conjugate();
  return out;
}

double swap_residual(const CMatrix& m, Eigen::Index r, Eigen::Index c) {
  if (m.rows() != 2 * r || m.cols() != 2 * c)
    throw InvalidSpec("DoubledForm: block has wrong shape");
  if (r == 0 || c == 0) return 0.0;
  return std::max(max_abs(m.bottomLeftCorner(r, c) - m.topRightCorner(r, c).conjugate()),
                  max_abs(m.bottomRightCorner(r, c) - m.topLeftCorner(r, c).conjugate()));
}

}  // namespace

DoubledForm to_doubled(const StateSpace& ss) {
  ss.check_dimensions();
  return DoubledForm{stack(ss.a_minus, ss.a_plus), stack(ss.b_minus, ss.b_plus),
                     stack(ss.c_minus, ss.c_plus),
                     stack(ss.d, CMatrix::Zero(ss.d.rows(), ss.d.cols()))};
}

StateSpace from_doubled(const DoubledForm& form, Eigen::Index modes, Eigen::Index inputs,
                        Eigen::Index outputs) {
  StateSpace ss;
  ss.a_minus = form.a.topLeftCorner(modes, modes);
  ss.a_plus = form.a.topRightCorner(modes, modes);
  ss.b_minus = form.b.topLeftCorner(modes, inputs);
  ss.b_plus = form.b.topRightCorner(modes, inputs);
  ss.c_minus = form.c.topLeftCorner(outputs, modes);
  ss.c_plus = form.c.topRightCorner(outputs, modes);
  ss.d = form.d.topLeftCorner(outputs, inputs);
  return ss;
}

double conjugation_symmetry_residual(const DoubledForm& form, Eigen::Index modes,
                                     Eigen::Index inputs, Eigen::Index outputs) {
  return std::max({swap_residual(form.a, modes, modes), swap_residual(form.b, modes, inputs),
                   swap_residual(form.c, outputs, modes), swap_residual(form.d, outputs, inputs)});
}

CVector double_vector(const CVector& x) {
  CVector out(2 * x.size());
  out << x, x.conjugate();
  return out;
}

}  // namespace qobs
