#include "morsepack/numeric.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <stdexcept>

namespace morsepack {

SpdFactors spd_sqrt(const Eigen::MatrixXd& w) {
  if (w.size() == 0) return {w, w};
  if (w == Eigen::MatrixXd::Identity(w.rows(), w.cols())) return {w, w};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((w + w.transpose()) / 2.0);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("spd_sqrt: eigensolver did not converge");
  }
  const Eigen::VectorXd& lambda = es.eigenvalues();
  if (lambda.minCoeff() <= 0.0) {
    throw std::runtime_error("spd_sqrt: matrix is not positive definite");
  }
  const Eigen::VectorXd root = lambda.cwiseSqrt();
  SpdFactors f;
  f.half = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
  f.inv_half =
      es.eigenvectors() * root.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  return f;
}

int lu_rank(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  return static_cast<int>(lu.rank());
}

int modified_gram_schmidt(Eigen::MatrixXd& basis, double drop_tol) {
  int kept = 0;
  for (int j = 0; j < basis.cols(); ++j) {
    Eigen::VectorXd v = basis.col(j);
    const double initial = v.norm();
    for (int i = 0; i < kept; ++i) {
      v -= basis.col(i).dot(v) * basis.col(i);
    }
    const double remaining = v.norm();
    if (remaining <= drop_tol * std::max(1.0, initial)) continue;
    basis.col(kept) = v / remaining;
    ++kept;
  }
  basis.conservativeResize(Eigen::NoChange, kept);
  return kept;
}

}  // namespace morsepack
