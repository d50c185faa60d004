#include "qobs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qobs/errors.hpp"

namespace qobs::linalg {

double max_abs(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

CMatrix direct_sum(const CMatrix& a, const CMatrix& b) {
  CMatrix out = CMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

double reciprocal_condition(const CMatrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  if (smax == 0.0) return 0.0;
  return s(s.size() - 1) / smax;
}

namespace {

void swap_symmetric(CMatrix& a, Eigen::Index i, Eigen::Index j) {
  if (i == j) return;
  a.row(i).swap(a.row(j));
  a.col(i).swap(a.col(j));
}

}  // namespace

std::vector<Complex> eigenvalues(const CMatrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("eigenvalues: matrix not square");
  CMatrix work = a;
  Eigen::Index lo = 0;
  Eigen::Index hi = work.rows() - 1;
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(work.rows()));

  // Push rows with no off-diagonal entries in the active window to the bottom.
  bool found = true;
  while (found && hi >= lo) {
    found = false;
    for (Eigen::Index j = hi; j >= lo; --j) {
      bool isolated = true;
      for (Eigen::Index k = lo; k <= hi && isolated; ++k)
        if (k != j && work(j, k) != Complex{0.0}) isolated = false;
      if (isolated) {
        swap_symmetric(work, j, hi);
        out.push_back(work(hi, hi));
        --hi;
        found = true;
        break;
      }
    }
  }
  // Then columns to the top.
  found = true;
  while (found && hi >= lo) {
    found = false;
    for (Eigen::Index j = lo; j <= hi; ++j) {
      bool isolated = true;
      for (Eigen::Index k = lo; k <= hi && isolated; ++k)
        if (k != j && work(k, j) != Complex{0.0}) isolated = false;
      if (isolated) {
        swap_symmetric(work, j, lo);
        out.push_back(work(lo, lo));
        ++lo;
        found = true;
        break;
      }
    }
  }
  if (hi >= lo) {
    const Eigen::Index n = hi - lo + 1;
    Eigen::ComplexEigenSolver<CMatrix> solver(work.block(lo, lo, n, n), false);
    if (solver.info() != Eigen::Success)
      throw InvalidArgument("eigenvalues: QR iteration did not converge");
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(solver.eigenvalues()(i));
  }
  std::sort(out.begin(), out.end(), [](Complex x, Complex y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  return out;
}

CMatrix solve_lyapunov(const CMatrix& a, const CMatrix& q) {
  if (a.rows() != a.cols() || q.rows() != a.rows() || q.cols() != a.cols())
    throw InvalidArgument("solve_lyapunov: A and Q must be square and of equal size");
  const Eigen::Index n = a.rows();
  if (n == 0) return CMatrix(0, 0);

  Eigen::ComplexSchur<CMatrix> schur(a);
  const CMatrix& t = schur.matrixT();
  const CMatrix& u = schur.matrixU();
  const CMatrix f = -(u.adjoint() * q * u);

  // T Y + Y T^dagger = F, solved one column at a time from the right.
  const double scale = std::max(1.0, max_abs(t));
  CMatrix y = CMatrix::Zero(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    CVector rhs = f.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) rhs -= std::conj(t(j, k)) * y.col(k);
    CMatrix shifted = t;
    shifted.diagonal().array() += std::conj(t(j, j));
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(shifted(i, i)) < 1e-14 * scale)
        throw InvalidArgument("solve_lyapunov: A has eigenvalues with lambda_i + conj(lambda_j) = 0");
    }
    y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  return u * y * u.adjoint();
}

CMatrix expm(const CMatrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("expm: matrix not square");
  const Eigen::Index n = a.rows();
  if (n == 0) return CMatrix(0, 0);
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const CMatrix scaled = a / std::ldexp(1.0, squarings);

  CMatrix result = CMatrix::Identity(n, n);
  CMatrix term = CMatrix::Identity(n, n);
  for (int k = 1; k <= 40; ++k) {
    term = (term * scaled) / static_cast<double>(k);
    result += term;
    if (max_abs(term) <= 1e-18 * max_abs(result)) break;
  }
  for (int i = 0; i < squarings; ++i) result = (result * result).eval();
  return result;
}

CMatrix null_space(const CMatrix& m, double tol) {
  if (m.cols() == 0) return CMatrix(0, 0);
  if (m.rows() == 0) return CMatrix::Identity(m.cols(), m.cols());
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = tol * std::max(1.0, s(0));
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) ++rank;
  return svd.matrixV().rightCols(m.cols() - rank);
}

}  // namespace qobs::linalg
