#pragma once

#include <Eigen/Dense>

namespace morsepack {

// Largest entry magnitude; zero for empty matrices.
inline double max_abs(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Entrywise deviation of a from b, scaled against the larger magnitude.
inline double relative_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.size() == 0 && b.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff() / (1.0 + std::max(max_abs(a), max_abs(b)));
}

// Deviation of m from the identity of its own size.
inline double identity_residual(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return (m - Eigen::MatrixXd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

struct SpdFactors {
  Eigen::MatrixXd half;      // W^{1/2}
  Eigen::MatrixXd inv_half;  // W^{-1/2}
};

// Symmetric square root and its inverse via eigendecomposition.
// Throws std::runtime_error if W is not numerically positive definite.
SpdFactors spd_sqrt(const Eigen::MatrixXd& w);

// Rank by full-pivot LU, an algorithmic route independent of singular value
// thresholding. Empty matrices have rank zero.
int lu_rank(const Eigen::MatrixXd& m);

// In-place modified Gram-Schmidt on the columns of basis using the standard
// inner product; returns the number of kept (non-degenerate) columns.
int modified_gram_schmidt(Eigen::MatrixXd& basis, double drop_tol = 1e-12);

}  // namespace morsepack
