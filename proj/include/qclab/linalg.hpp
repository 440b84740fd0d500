#pragma once

// Small dense linear-algebra helpers shared by the simulation modules.

#include <cmath>
#include <vector>

#include "qclab/common.hpp"
#include "qclab/rng.hpp"

namespace qclab {

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vec kron(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline Mat dagger(const Mat& m) { return m.adjoint(); }

inline bool is_hermitian(const Mat& m, double tol) {
  return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_unitary_matrix(const Mat& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  Mat g = m.adjoint() * m;
  g -= Mat::Identity(m.rows(), m.cols());
  return g.cwiseAbs().maxCoeff() <= tol;
}

/// Eigenvalues of a Hermitian operator, ascending. The input is symmetrized
/// as (A + A^dag)/2 first so floating-point asymmetry cannot leak in.
inline Eigen::VectorXd hermitian_eigenvalues(const Mat& a) {
  Mat sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

/// Complex matrix with independent standard-normal real and imaginary parts.
inline Mat ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Mat g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      g(i, j) = cplx(rng.normal(), rng.normal());
  return g;
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phase of R's
/// diagonal folded into Q.
inline Mat random_unitary(Eigen::Index dim, Rng& rng) {
  Mat g = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < dim; ++i) {
    cplx d = r(i, i);
    double mag = std::abs(d);
    q.col(i) *= (mag > 0.0) ? d / mag : cplx(1.0, 0.0);
  }
  return q;
}

inline Vec random_statevector(Eigen::Index dim, Rng& rng) {
  Vec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = cplx(rng.normal(), rng.normal());
  v.normalize();
  return v;
}

/// Ginibre-induced random density matrix: G G^dag normalized to unit trace.
inline Mat random_density_matrix(Eigen::Index dim, Rng& rng) {
  Mat g = ginibre(dim, dim, rng);
  Mat rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

}  // namespace qclab
