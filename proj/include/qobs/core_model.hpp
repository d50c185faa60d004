#pragma once

#include <span>
#include <utility>
#include <vector>

#include "qobs/linalg.hpp"

namespace qobs {

inline constexpr double kDefaultTolerance = 1e-9;

/// Physical description of an open oscillator system with m modes and n
/// field channels. Channel k couples through
///   L_k = sum_a C-(k, a) a_a + C+(k, a) a_a^*
/// and the Hamiltonian is a^dagger Omega a. Rows follow coupling declaration
/// order.
class OscillatorSpec {
 public:
  /// Throws InvalidSpec on dimension mismatch or a non-Hermitian Omega.
  OscillatorSpec(CMatrix omega, CMatrix c_minus, CMatrix c_plus,
                 double tolerance = kDefaultTolerance);

  Eigen::Index num_modes() const { return omega_.rows(); }
  Eigen::Index num_channels() const { return c_minus_.rows(); }
  const CMatrix& omega() const { return omega_; }
  const CMatrix& c_minus() const { return c_minus_; }
  const CMatrix& c_plus() const { return c_plus_; }

 private:
  CMatrix omega_;
  CMatrix c_minus_;
  CMatrix c_plus_;
};

enum class CouplingKind { Annihilation, Creation };

struct Coupling {
  CouplingKind kind;
  double rate;  // gamma >= 0; the channel amplitude is sqrt(rate)
};

/// Single-mode spec with H = omega a^* a. Throws InvalidSpec on negative rates.
OscillatorSpec make_mode(double omega, std::span<const Coupling> couplings);

/// One channel L = alpha a + beta a^*.
struct GeneralCoupling {
  Complex alpha;
  Complex beta;
};

/// Single-mode spec whose channels may mix a and a^*.
OscillatorSpec make_mode_general(double omega, std::span<const GeneralCoupling> couplings);

/// Linear input-output model
///   da/dt = A- a + A+ a^# + B- b + B+ b^#
///   b_out = C- a + C+ a^# + D b
/// with a^# the entrywise adjoint. Static scattering components are the
/// zero-mode case.
struct StateSpace {
  CMatrix a_minus;
  CMatrix a_plus;
  CMatrix b_minus;
  CMatrix b_plus;
  CMatrix c_minus;
  CMatrix c_plus;
  CMatrix d;

  Eigen::Index num_modes() const { return a_minus.rows(); }
  Eigen::Index num_inputs() const { return b_minus.cols(); }
  Eigen::Index num_outputs() const { return c_minus.rows(); }

  /// All-zero model.
  static StateSpace zero(Eigen::Index modes, Eigen::Index inputs, Eigen::Index outputs);

  /// Throws InvalidSpec if the blocks are not conformable.
  void check_dimensions() const;
};

/// Doubled-up form acting on [a; a^#] and [b; b^#].
struct DoubledForm {
  CMatrix a;
  CMatrix b;
  CMatrix c;
  CMatrix d;
};

StateSpace derive_state_space(const OscillatorSpec& spec);

/// Largest deviation from the structure derive_state_space produces:
///   A- + A-^dagger + C-^dagger C- - C+^T C+^#,  B- + C-^dagger D,  B+ + C+^T D^#.
/// With D = I the last two reduce to B- + C-^dagger and B+ + C+^T.
double realizability_residual(const StateSpace& ss);

DoubledForm to_doubled(const StateSpace& ss);

/// Reads the top block row back out of a doubled form.
StateSpace from_doubled(const DoubledForm& form, Eigen::Index modes, Eigen::Index inputs,
                        Eigen::Index outputs);

/// Largest violation of the conjugation-swap symmetry over all four blocks.
double conjugation_symmetry_residual(const DoubledForm& form, Eigen::Index modes,
                                     Eigen::Index inputs, Eigen::Index outputs);

/// Doubles a mode-level vector into [x; conj(x)].
CVector double_vector(const CVector& x);

}  // namespace qobs
