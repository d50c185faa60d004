#include <cmath>
#include <vector>

#include "doctest.h"
#include "qobs/core_model.hpp"
#include "qobs/errors.hpp"
#include "qobs/json_io.hpp"
#include "support.hpp"

using namespace qobs;
using testing::mat;
using testing::max_diff;

namespace {

OscillatorSpec cavity(double omega, double gamma) {
  const std::vector<Coupling> c{{CouplingKind::Annihilation, gamma}};
  return make_mode(omega, c);
}

OscillatorSpec observer_spec(double omega, double gamma, double gamma_l) {
  const std::vector<Coupling> c{{CouplingKind::Annihilation, gamma},
                                {CouplingKind::Annihilation, gamma_l},
                                {CouplingKind::Creation, gamma_l}};
  return make_mode(omega, c);
}

OscillatorSpec random_spec(std::mt19937& rng) {
  std::uniform_int_distribution<int> dim(1, 4);
  const int m = dim(rng);
  const int n = dim(rng);
  CMatrix h = testing::random_matrix(rng, m, m);
  h = (0.5 * (h + h.adjoint())).eval();
  return OscillatorSpec(h, testing::random_matrix(rng, n, m), testing::random_matrix(rng, n, m));
}

}  // namespace

TEST_CASE("single cavity coefficients") {
  const StateSpace ss = derive_state_space(cavity(1.0, 0.5));
  const double r = std::sqrt(0.5);
  CHECK(std::abs(ss.a_minus(0, 0) - Complex(-0.25, -1.0)) < 1e-15);
  CHECK(std::abs(ss.b_minus(0, 0) + r) < 1e-15);
  CHECK(std::abs(ss.c_minus(0, 0) - r) < 1e-15);
  CHECK(ss.a_plus(0, 0) == Complex(0));
  CHECK(ss.b_plus(0, 0) == Complex(0));
  CHECK(ss.c_plus(0, 0) == Complex(0));
  CHECK(ss.d(0, 0) == Complex(1));
}

TEST_CASE("closed system is a pure rotation") {
  const CMatrix omega = mat({{1.5, 0}, {0, -0.5}});
  const StateSpace ss = derive_state_space(OscillatorSpec(omega, CMatrix(0, 2), CMatrix(0, 2)));
  CHECK(max_diff(ss.a_minus, -kI * omega) == 0.0);
  CHECK(linalg::max_abs(ss.a_plus) == 0.0);
  CHECK(ss.num_inputs() == 0);
  CHECK(ss.num_outputs() == 0);
}

TEST_CASE("observer spec: gain channel damping cancels") {
  const OscillatorSpec spec = observer_spec(1.0, 0.5, 2.0);
  CHECK(spec.num_channels() == 3);
  const double r = std::sqrt(2.0);
  CHECK(max_diff(spec.c_minus(), mat({{std::sqrt(0.5)}, {r}, {0}})) < 1e-15);
  CHECK(max_diff(spec.c_plus(), mat({{0}, {0}, {r}})) < 1e-15);
  const StateSpace ss = derive_state_space(spec);
  CHECK(std::abs(ss.a_minus(0, 0) - Complex(-0.25, -1.0)) < 1e-14);
  CHECK(linalg::max_abs(ss.a_plus) < 1e-15);
  CHECK(max_diff(ss.b_plus, mat({{0, 0, -r}})) < 1e-15);
}

TEST_CASE("make_mode edge cases") {
  const std::vector<Coupling> none;
  const StateSpace free = derive_state_space(make_mode(0.0, none));
  CHECK(free.num_modes() == 1);
  CHECK(free.num_inputs() == 0);
  CHECK(free.a_minus(0, 0) == Complex(0));
  const std::vector<Coupling> bad{{CouplingKind::Annihilation, -1.0}};
  CHECK_THROWS_AS(make_mode(1.0, bad), InvalidSpec);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(OscillatorSpec(mat({{0, 1}, {0, 0}}), CMatrix(0, 2), CMatrix(0, 2)), InvalidSpec);
  CHECK_THROWS_AS(OscillatorSpec(mat({{1}}), CMatrix::Ones(2, 1), CMatrix::Ones(1, 1)), InvalidSpec);
  CHECK_THROWS_AS(OscillatorSpec(mat({{1}}), CMatrix::Ones(1, 2), CMatrix::Ones(1, 2)), InvalidSpec);
}

TEST_CASE("realizability residual") {
  std::mt19937 rng(5);
  for (int k = 0; k < 50; ++k) CHECK(realizability_residual(derive_state_space(random_spec(rng))) < 1e-12);

  StateSpace wrong = derive_state_space(cavity(1.0, 0.5));
  wrong.b_minus = -wrong.b_minus;
  CHECK(realizability_residual(wrong) == doctest::Approx(2.0 * std::sqrt(0.5)).epsilon(1e-12));
  CHECK(realizability_residual(StateSpace::zero(2, 3, 3)) == 0.0);
}

TEST_CASE("derived coefficients follow the formulas entrywise") {
  std::mt19937 rng(9);
  for (int k = 0; k < 20; ++k) {
    const OscillatorSpec spec = random_spec(rng);
    const StateSpace ss = derive_state_space(spec);
    const CMatrix& cm = spec.c_minus();
    const CMatrix& cp = spec.c_plus();
    CHECK(max_diff(ss.a_minus, -0.5 * cm.adjoint() * cm + 0.5 * cp.transpose() * cp.conjugate() -
                                   kI * spec.omega()) < 1e-12);
    CHECK(max_diff(ss.a_plus, -0.5 * cm.adjoint() * cp + 0.5 * cp.transpose() * cm.conjugate()) < 1e-12);
    CHECK(max_diff(ss.b_minus, -cm.adjoint()) == 0.0);
    CHECK(max_diff(ss.b_plus, -cp.transpose()) == 0.0);
  }
}

TEST_CASE("homogeneity under coupling scaling") {
  std::mt19937 rng(13);
  const OscillatorSpec spec = random_spec(rng);
  const OscillatorSpec scaled(spec.omega(), 2.0 * spec.c_minus(), 2.0 * spec.c_plus());
  const StateSpace a = derive_state_space(spec);
  const StateSpace b = derive_state_space(scaled);
  CHECK(max_diff(b.a_minus + kI * spec.omega(), 4.0 * (a.a_minus + kI * spec.omega())) < 1e-12);
  CHECK(max_diff(b.a_plus, 4.0 * a.a_plus) < 1e-12);
  CHECK(max_diff(b.b_minus, 2.0 * a.b_minus) < 1e-12);
  CHECK(max_diff(b.c_plus, 2.0 * a.c_plus) < 1e-12);
}

TEST_CASE("passive specs have no plus blocks") {
  std::mt19937 rng(17);
  const OscillatorSpec spec(mat({{0.3}}), testing::random_matrix(rng, 3, 1), CMatrix::Zero(3, 1));
  const StateSpace ss = derive_state_space(spec);
  CHECK(linalg::max_abs(ss.a_plus) == 0.0);
  CHECK(linalg::max_abs(ss.b_plus) == 0.0);
}

TEST_CASE("doubled form") {
  const StateSpace cav = derive_state_space(cavity(1.0, 0.5));
  const DoubledForm f = to_doubled(cav);
  CHECK(max_diff(f.a, mat({{Complex(-0.25, -1), 0}, {0, Complex(-0.25, 1)}})) < 1e-15);

  const StateSpace obs = derive_state_space(observer_spec(1.0, 0.5, 2.0));
  const DoubledForm g = to_doubled(obs);
  CHECK(g.b.rows() == 2);
  CHECK(g.b.cols() == 6);
  CHECK(std::abs(g.b(0, 5) + std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(g.b(1, 2) + std::sqrt(2.0)) < 1e-15);
  CHECK(g.b(0, 2) == Complex(0));
  CHECK(conjugation_symmetry_residual(g, 1, 3, 3) == 0.0);

  const DoubledForm z = to_doubled(StateSpace::zero(2, 1, 1));
  CHECK(linalg::max_abs(z.a) == 0.0);
  CHECK(z.a.rows() == 4);
}

TEST_CASE("doubled round trip") {
  std::mt19937 rng(19);
  for (int k = 0; k < 10; ++k) {
    const StateSpace ss = derive_state_space(random_spec(rng));
    const StateSpace back =
        from_doubled(to_doubled(ss), ss.num_modes(), ss.num_inputs(), ss.num_outputs());
    CHECK(max_diff(back.a_minus, ss.a_minus) == 0.0);
    CHECK(max_diff(back.a_plus, ss.a_plus) == 0.0);
    CHECK(max_diff(back.b_plus, ss.b_plus) == 0.0);
    CHECK(max_diff(back.c_plus, ss.c_plus) == 0.0);
    CHECK(max_diff(back.d, ss.d) == 0.0);
  }
}

TEST_CASE("json round trip") {
  const OscillatorSpec spec = observer_spec(1.0, 0.5, 2.0);
  const auto j = to_json(spec);
  CHECK(j.at("m") == 1);
  CHECK(j.at("n") == 3);
  CHECK(j.at("omega")[0][0][0] == 1.0);
  const OscillatorSpec back = spec_from_json(j);
  CHECK(max_diff(back.c_plus(), spec.c_plus()) == 0.0);

  const StateSpace ss = derive_state_space(spec);
  const StateSpace ss2 = state_space_from_json(to_json(ss));
  CHECK(max_diff(ss2.a_minus, ss.a_minus) == 0.0);
  CHECK(max_diff(ss2.b_plus, ss.b_plus) == 0.0);
  CHECK(max_diff(ss2.d, ss.d) == 0.0);

  auto broken = to_json(ss);
  broken["a_minus"] = nlohmann::json::array({nlohmann::json::array({1, 2}), nlohmann::json::array({1})});
  CHECK_THROWS_AS(state_space_from_json(broken), InvalidSpec);
}
