#pragma once

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <random>

#include <Eigen/Eigenvalues>

#include "qobs/core_model.hpp"
#include "qobs/linalg.hpp"

namespace testing {

using qobs::CMatrix;
using qobs::Complex;
using qobs::CVector;

inline CMatrix mat(std::initializer_list<std::initializer_list<Complex>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r ? static_cast<Eigen::Index>(rows.begin()->size()) : 0;
  CMatrix m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (const Complex& v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline CMatrix random_matrix(std::mt19937& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  CMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

inline double max_diff(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return 1e300;
  return qobs::linalg::max_abs(a - b);
}

inline double model_diff(const qobs::StateSpace& a, const qobs::StateSpace& b) {
  return std::max({max_diff(a.a_minus, b.a_minus), max_diff(a.a_plus, b.a_plus),
                   max_diff(a.b_minus, b.b_minus), max_diff(a.b_plus, b.b_plus),
                   max_diff(a.c_minus, b.c_minus), max_diff(a.c_plus, b.c_plus), max_diff(a.d, b.d)});
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Solves A X + X A^dagger + Q = 0 through (I (x) A + conj(A) (x) I) vec X = -vec Q.
inline CMatrix kron_lyapunov(const CMatrix& a, const CMatrix& q) {
  const Eigen::Index n = a.rows();
  CMatrix big = CMatrix::Zero(n * n, n * n);
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix ac = a.conjugate();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      big.block(i * n, j * n, n, n) += id(i, j) * a;
      big.block(i * n, j * n, n, n) += ac(i, j) * id;
    }
  const CVector rhs = -Eigen::Map<const CVector>(q.data(), n * n);
  const CVector x = big.fullPivLu().solve(rhs);
  return Eigen::Map<const CMatrix>(x.data(), n, n);
}

// exp(A t) for diagonalisable A.
inline CMatrix expm_by_eigen(const CMatrix& a, double t) {
  Eigen::ComplexEigenSolver<CMatrix> es(a);
  const CMatrix v = es.eigenvectors();
  CVector d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::exp(d(i) * t);
  return v * d.asDiagonal() * v.inverse();
}

inline CMatrix stable_random(std::mt19937& rng, Eigen::Index n) {
  CMatrix a = random_matrix(rng, n, n);
  Eigen::ComplexEigenSolver<CMatrix> es(a, false);
  double top = -1e300;
  for (Eigen::Index i = 0; i < n; ++i) top = std::max(top, es.eigenvalues()(i).real());
  return a - (top + 0.3) * CMatrix::Identity(n, n);
}

}  // namespace testing
