#include "morsepack/hodge.hpp"

#include "morsepack/numeric.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace morsepack {

using ordered_json = nlohmann::ordered_json;

namespace {

void check_degree(const BasedChainComplex& complex, int n, const char* who) {
  if (n < 0 || n > complex.max_degree()) {
    throw std::out_of_range(std::string(who) + ": degree " + std::to_string(n) +
                            " outside [0, " + std::to_string(complex.max_degree()) + "]");
  }
}

struct ThinSvd {
  Eigen::MatrixXd u, v;     // rank columns each
  Eigen::VectorXd sigma;    // descending
  int rank = 0;
};

// Whitened boundary W_{n-1}^{1/2} d_n W_n^{-1/2}; its singular triples carry
// the W-geometry of d_n in plain euclidean form.
Eigen::MatrixXd whitened_boundary(const BasedChainComplex& complex, int n,
                                  const std::vector<SpdFactors>& f) {
  if (n < 1 || n > complex.max_degree()) {
    return Eigen::MatrixXd::Zero(complex.dim(n - 1), complex.dim(n));
  }
  Eigen::MatrixXd b = complex.boundary_dense(n);
  if (complex.has_custom_weight(n - 1)) b = f[n - 1].half * b;
  if (complex.has_custom_weight(n)) b = b * f[n].inv_half;
  return b;
}

ThinSvd thin_svd(const Eigen::MatrixXd& m) {
  ThinSvd out;
  if (m.rows() == 0 || m.cols() == 0) {
    out.u.resize(m.rows(), 0);
    out.v.resize(m.cols(), 0);
    out.sigma.resize(0);
    return out;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double cutoff =
      s.size() == 0 ? 0.0 : 1e-10 * s(0) * static_cast<double>(std::max(m.rows(), m.cols()));
  int rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  out.rank = rank;
  out.u = svd.matrixU().leftCols(rank);
  out.v = svd.matrixV().leftCols(rank);
  out.sigma = s.head(rank);
  return out;
}

std::vector<SpdFactors> weight_factors(const BasedChainComplex& complex) {
  std::vector<SpdFactors> f(complex.max_degree() + 1);
  for (int n = 0; n <= complex.max_degree(); ++n) {
    if (complex.has_custom_weight(n)) f[n] = spd_sqrt(complex.weight(n));
  }
  return f;
}

// Flips v (and its partner, if any) so the first coordinate of v that is
// significant against its largest entry comes out positive.
void fix_sign(Eigen::VectorXd& v, Eigen::VectorXd* partner) {
  const double scale = v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12 * scale) {
      if (v(i) < 0.0) {
        v = -v;
        if (partner != nullptr) *partner = -*partner;
      }
      return;
    }
  }
}

Eigen::VectorXd unwhiten(const BasedChainComplex& complex, int n,
                         const std::vector<SpdFactors>& f, const Eigen::VectorXd& v) {
  return complex.has_custom_weight(n) ? Eigen::VectorXd(f[n].inv_half * v) : v;
}

}  // namespace

Eigen::MatrixXd up_laplacian(const BasedChainComplex& complex, int n) {
  check_degree(complex, n, "up_laplacian");
  if (n == complex.max_degree()) return Eigen::MatrixXd::Zero(complex.dim(n), complex.dim(n));
  return complex.boundary_dense(n + 1) * adjoint_boundary(complex, n + 1);
}

Eigen::MatrixXd down_laplacian(const BasedChainComplex& complex, int n) {
  check_degree(complex, n, "down_laplacian");
  if (n == 0) return Eigen::MatrixXd::Zero(complex.dim(n), complex.dim(n));
  return adjoint_boundary(complex, n) * complex.boundary_dense(n);
}

Eigen::MatrixXd laplacian(const BasedChainComplex& complex, int n) {
  check_degree(complex, n, "laplacian");
  return up_laplacian(complex, n) + down_laplacian(complex, n);
}

HodgeDecomposition hodge_decompose(const BasedChainComplex& complex, const Signal& s) {
  check_degree(complex, s.degree, "hodge_decompose");
  const int n = s.degree;
  if (s.values.size() != complex.dim(n)) {
    throw std::invalid_argument("hodge_decompose: signal length does not match degree " +
                                std::to_string(n));
  }
  const auto f = weight_factors(complex);
  const ThinSvd up = thin_svd(whitened_boundary(complex, n + 1, f));
  const ThinSvd down = thin_svd(whitened_boundary(complex, n, f));
  const Eigen::VectorXd sw =
      complex.has_custom_weight(n) ? Eigen::VectorXd(f[n].half * s.values) : s.values;
  HodgeDecomposition out;
  out.degree = n;
  out.im_d = unwhiten(complex, n, f, up.u * (up.u.transpose() * sw));
  out.im_dt = unwhiten(complex, n, f, down.v * (down.v.transpose() * sw));
  out.ker = s.values - out.im_d - out.im_dt;
  return out;
}

HodgeBasis hodge_basis(const BasedChainComplex& complex) {
  const int top = complex.max_degree();
  const auto f = weight_factors(complex);
  std::vector<Eigen::MatrixXd> whitened(top + 2);
  std::vector<ThinSvd> svds(top + 2);
  for (int n = 0; n <= top + 1; ++n) {
    whitened[n] = whitened_boundary(complex, n, f);
    svds[n] = thin_svd(whitened[n]);
  }
  // Sign convention is applied in cell coordinates: the left vector of each
  // singular pair leads with a positive significant coordinate and drags its
  // right partner along, so d(v) = sigma w holds with the signs as stored.
  std::vector<std::vector<Eigen::VectorXd>> pair_left(top + 2), pair_right(top + 2);
  for (int n = 1; n <= top; ++n) {
    for (int i = 0; i < svds[n].rank; ++i) {
      Eigen::VectorXd w = unwhiten(complex, n - 1, f, svds[n].u.col(i));
      Eigen::VectorXd v = unwhiten(complex, n, f, svds[n].v.col(i));
      fix_sign(w, &v);
      pair_left[n].push_back(std::move(w));
      pair_right[n].push_back(std::move(v));
    }
  }

  HodgeBasis basis;
  basis.im_up.resize(top + 1);
  basis.im_down.resize(top + 1);
  basis.kernel.resize(top + 1);
  for (int n = 0; n <= top; ++n) {
    const ThinSvd& up = svds[n + 1];
    const ThinSvd& down = svds[n];
    for (int i = 0; i < up.rank; ++i) {
      basis.im_up[n].push_back({pair_left[n + 1][i], up.sigma(i)});
    }
    for (int i = 0; i < down.rank; ++i) {
      basis.im_down[n].push_back({pair_right[n][i], down.sigma(i)});
    }
    const int kdim = complex.dim(n) - up.rank - down.rank;
    if (kdim < 0) {
      throw std::runtime_error("hodge_basis: rank overflow at degree " + std::to_string(n));
    }
    if (kdim > 0) {
      Eigen::MatrixXd lap = whitened[n].transpose() * whitened[n] +
                            whitened[n + 1] * whitened[n + 1].transpose();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (lap + lap.transpose()));
      if (es.info() != Eigen::Success) {
        throw std::runtime_error("hodge_basis: eigensolver failed at degree " +
                                 std::to_string(n));
      }
      Eigen::MatrixXd k = es.eigenvectors().leftCols(kdim);
      // Scrub residual image components, then re-orthonormalize.
      k -= up.u * (up.u.transpose() * k);
      k -= down.v * (down.v.transpose() * k);
      if (modified_gram_schmidt(k) != kdim) {
        throw std::runtime_error("hodge_basis: degenerate kernel basis at degree " +
                                 std::to_string(n));
      }
      for (int i = 0; i < kdim; ++i) {
        Eigen::VectorXd v = unwhiten(complex, n, f, k.col(i));
        fix_sign(v, nullptr);
        basis.kernel[n].push_back(std::move(v));
      }
    }
  }
  return basis;
}

std::vector<int> homology_dimensions(const BasedChainComplex& complex) {
  std::vector<int> b(complex.max_degree() + 1);
  for (int n = 0; n <= complex.max_degree(); ++n) {
    b[n] = complex.dim(n) - lu_rank(complex.boundary_dense(n)) -
           lu_rank(complex.boundary_dense(n + 1));
  }
  return b;
}

HodgeMatching hodge_matching(const BasedChainComplex& complex, const HodgeBasis& basis) {
  const int top = complex.max_degree();
  if (basis.max_degree() != top) {
    throw std::invalid_argument("hodge_matching: basis degree range does not match complex");
  }
  HodgeMatching out;
  out.to_cell_basis.resize(top + 1);

  std::vector<std::vector<std::string>> names(top + 1), critical_names(top + 1);
  std::vector<Eigen::SparseMatrix<double>> boundaries(top + 1), no_boundaries(top + 1);
  std::vector<std::optional<Eigen::MatrixXd>> no_weights(top + 1), no_weights2(top + 1);

  for (int n = 0; n <= top; ++n) {
    const int nl = static_cast<int>(basis.im_up[n].size());
    const int nk = static_cast<int>(basis.kernel[n].size());
    const int nr = static_cast<int>(basis.im_down[n].size());
    if (nl + nk + nr != complex.dim(n)) {
      throw std::invalid_argument("hodge_matching: basis does not span degree " +
                                  std::to_string(n));
    }
    Eigen::MatrixXd t(complex.dim(n), complex.dim(n));
    int col = 0;
    for (int i = 0; i < nl; ++i) {
      names[n].push_back("L" + std::to_string(n) + ":" + std::to_string(i));
      t.col(col++) = basis.im_up[n][i].vec;
    }
    for (int i = 0; i < nk; ++i) {
      const std::string name = "K" + std::to_string(n) + ":" + std::to_string(i);
      names[n].push_back(name);
      critical_names[n].push_back(name);
      t.col(col++) = basis.kernel[n][i];
    }
    for (int i = 0; i < nr; ++i) {
      names[n].push_back("R" + std::to_string(n) + ":" + std::to_string(i));
      t.col(col++) = basis.im_down[n][i].vec;
    }
    out.to_cell_basis[n] = std::move(t);
  }
  for (int n = 1; n <= top; ++n) {
    const int nl = static_cast<int>(basis.im_up[n].size());
    const int nk = static_cast<int>(basis.kernel[n].size());
    const int nr = static_cast<int>(basis.im_down[n].size());
    std::vector<Eigen::Triplet<double>> triplets;
    for (int i = 0; i < nr; ++i) {
      // The i-th right vector of d_n maps to sigma_i times its left partner.
      triplets.emplace_back(i, nl + nk + i, basis.im_down[n][i].sigma);
      out.matching.pairs.push_back({CellId{n, nl + nk + i}, CellId{n - 1, i}});
    }
    boundaries[n].resize(complex.dim(n - 1), complex.dim(n));
    boundaries[n].setFromTriplets(triplets.begin(), triplets.end());
  }
  out.hodge_complex = BasedChainComplex::from_parts(std::move(names), std::move(boundaries),
                                                    std::move(no_weights));
  out.reduced = BasedChainComplex::from_parts(std::move(critical_names),
                                              std::move(no_boundaries), std::move(no_weights2));
  return out;
}

namespace {

ordered_json vector_to_json(const Eigen::VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

void save_hodge_basis(const BasedChainComplex& complex, const HodgeBasis& basis,
                      std::ostream& out) {
  ordered_json doc;
  doc["max_degree"] = complex.max_degree();
  ordered_json cells = ordered_json::object();
  for (int n = 0; n <= complex.max_degree(); ++n) cells[std::to_string(n)] = complex.cell_names(n);
  doc["cells"] = std::move(cells);
  ordered_json degrees = ordered_json::object();
  for (int n = 0; n <= complex.max_degree(); ++n) {
    ordered_json entry;
    ordered_json im_up = ordered_json::array(), im_down = ordered_json::array(),
                 kernel = ordered_json::array();
    for (const auto& p : basis.im_up[n]) {
      im_up.push_back({{"sigma", p.sigma}, {"vector", vector_to_json(p.vec)}});
    }
    for (const auto& v : basis.kernel[n]) kernel.push_back(vector_to_json(v));
    for (const auto& p : basis.im_down[n]) {
      im_down.push_back({{"sigma", p.sigma}, {"vector", vector_to_json(p.vec)}});
    }
    entry["im_up"] = std::move(im_up);
    entry["kernel"] = std::move(kernel);
    entry["im_down"] = std::move(im_down);
    degrees[std::to_string(n)] = std::move(entry);
  }
  doc["degrees"] = std::move(degrees);
  out << doc.dump(2) << "\n";
}

void save_hodge_basis(const BasedChainComplex& complex, const HodgeBasis& basis,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open file for writing");
  save_hodge_basis(complex, basis, out);
}

}  // namespace morsepack
