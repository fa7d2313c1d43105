#pragma once

#include "morsepack/cell_complex.hpp"
#include "morsepack/morse.hpp"

#include <iosfwd>
#include <vector>

namespace morsepack {

// Up, down, and full combinatorial Laplacians at degree n, dense and
// self-adjoint with respect to <.,.>_n.
Eigen::MatrixXd up_laplacian(const BasedChainComplex& complex, int n);    // d_{n+1} d_{n+1}^dagger
Eigen::MatrixXd down_laplacian(const BasedChainComplex& complex, int n);  // d_n^dagger d_n
Eigen::MatrixXd laplacian(const BasedChainComplex& complex, int n);

// Orthogonal splitting of a degree-n signal into the image of d_{n+1}, the
// harmonic part, and the image of d_n^dagger.
struct HodgeDecomposition {
  int degree = 0;
  Eigen::VectorXd im_d, ker, im_dt;
  Eigen::VectorXd ker_coboundary() const { return ker + im_dt; }  // Ker d_{n+1}^dagger
  Eigen::VectorXd ker_boundary() const { return ker + im_d; }     // Ker d_n
};
HodgeDecomposition hodge_decompose(const BasedChainComplex& complex, const Signal& s);

struct HodgePair {
  Eigen::VectorXd vec;  // cell coordinates, W-orthonormal within its block
  double sigma = 0.0;
};

// W-orthonormal singular bases per degree: im_up[n] spans Im d_{n+1}
// (left vectors of d_{n+1}), im_down[n] spans Im d_n^dagger (right vectors of
// d_n), kernel[n] spans Ker Delta_n. Singular values descend, and
// im_down[n][i] pairs with im_up[n-1][i] through d_n v = sigma w. Signs are
// fixed by making the first nonzero coordinate of each im_up and kernel
// vector positive; the paired im_down vector inherits its sign.
struct HodgeBasis {
  std::vector<std::vector<HodgePair>> im_up, im_down;
  std::vector<std::vector<Eigen::VectorXd>> kernel;
  int max_degree() const { return static_cast<int>(im_up.size()) - 1; }
};
HodgeBasis hodge_basis(const BasedChainComplex& complex);

// Homology dimensions b_n = dim C_n - rank d_n - rank d_{n+1} via LU ranks.
std::vector<int> homology_dimensions(const BasedChainComplex& complex);

// The complex rebased to the Hodge basis (boundary is sigma-diagonal across
// singular pairs, inner products identity), the matching that pairs each
// im_down vector with its im_up partner, and the change of base. Reducing
// hodge_complex along matching yields zero boundary with the kernel cells
// critical; reduced is that endpoint, built directly.
struct HodgeMatching {
  BasedChainComplex hodge_complex;
  Matching matching;
  std::vector<Eigen::MatrixXd> to_cell_basis;  // per degree, columns L | K | R
  BasedChainComplex reduced;
};
HodgeMatching hodge_matching(const BasedChainComplex& complex, const HodgeBasis& basis);

void save_hodge_basis(const BasedChainComplex& complex, const HodgeBasis& basis,
                      std::ostream& out);
void save_hodge_basis(const BasedChainComplex& complex, const HodgeBasis& basis,
                      const std::string& path);

}  // namespace morsepack
