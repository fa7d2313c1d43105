#include "morsepack/morsify.hpp"

#include "morsepack/numeric.hpp"

#include <json.hpp>

#include <Eigen/QR>
#include <Eigen/SVD>

#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace morsepack {

using ordered_json = nlohmann::ordered_json;

DeformationRetract DeformationRetract::from(const Retraction& r) {
  DeformationRetract out;
  out.source = r.source;
  out.reduced = r.reduced;
  out.psi = r.psi;
  out.phi = r.phi;
  out.h = r.h;
  return out;
}

namespace {

constexpr double kRetractTol = 1e-8;

void check_map_shapes(const DeformationRetract& r, ValidationReport& report) {
  const int top = r.source.max_degree();
  if (r.reduced.max_degree() > top ||
      static_cast<int>(r.psi.size()) != top + 1 ||
      static_cast<int>(r.phi.size()) != top + 1) {
    report.violations.push_back({"shape", "map count vs degree range", 0.0});
    return;
  }
  for (int n = 0; n <= top; ++n) {
    if (r.psi[n].rows() != r.reduced.dim(n) || r.psi[n].cols() != r.source.dim(n) ||
        r.phi[n].rows() != r.source.dim(n) || r.phi[n].cols() != r.reduced.dim(n)) {
      report.violations.push_back({"shape", "degree " + std::to_string(n), 0.0});
    }
  }
  if (r.h && static_cast<int>(r.h->size()) != top + 1) {
    report.violations.push_back({"shape", "homotopy count vs degree range", 0.0});
  }
}

}  // namespace

ValidationReport check_retract(const DeformationRetract& r) {
  ValidationReport report;
  check_map_shapes(r, report);
  if (!report.ok()) return report;
  const int top = r.source.max_degree();
  for (int n = 0; n <= top; ++n) {
    const std::string where = "degree " + std::to_string(n);
    const double id_res = identity_residual(r.psi[n] * r.phi[n]);
    if (id_res > kRetractTol) report.violations.push_back({"psi-phi-identity", where, id_res});
    const Eigen::MatrixXd p = r.phi[n] * r.psi[n];
    const double proj_res = relative_residual(p * p, p);
    if (proj_res > kRetractTol) report.violations.push_back({"projector", where, proj_res});
    if (n >= 1) {
      const Eigen::MatrixXd b = r.source.boundary_dense(n);
      const Eigen::MatrixXd bm = r.reduced.boundary_dense(n);
      const double psi_res = relative_residual(r.psi[n - 1] * b, bm * r.psi[n]);
      if (psi_res > kRetractTol) report.violations.push_back({"chain-psi", where, psi_res});
      const double phi_res = relative_residual(b * r.phi[n], r.phi[n - 1] * bm);
      if (phi_res > kRetractTol) report.violations.push_back({"chain-phi", where, phi_res});
    }
    if (r.h) {
      Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(r.source.dim(n), r.source.dim(n));
      if (n < top) lhs += r.source.boundary_dense(n + 1) * (*r.h)[n];
      if (n >= 1) lhs += (*r.h)[n - 1] * r.source.boundary_dense(n);
      const Eigen::MatrixXd rhs =
          Eigen::MatrixXd::Identity(r.source.dim(n), r.source.dim(n)) - p;
      const double h_res = relative_residual(lhs, rhs);
      if (h_res > kRetractTol) report.violations.push_back({"homotopy", where, h_res});
    }
  }
  return report;
}

RetractSplitting split_retract(const DeformationRetract& r) {
  const int top = r.source.max_degree();
  RetractSplitting out;
  out.ker_psi.resize(top + 1);
  out.im_phi.resize(top + 1);
  for (int n = 0; n <= top; ++n) {
    const int dim = r.source.dim(n);
    const int rank = r.reduced.dim(n);
    if (dim == 0) {
      out.im_phi[n].resize(0, 0);
      out.ker_psi[n].resize(0, 0);
      continue;
    }
    if (rank > 0) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(r.phi[n]);
      out.im_phi[n] =
          qr.householderQ() * Eigen::MatrixXd::Identity(dim, std::min(dim, rank));
    } else {
      out.im_phi[n].resize(dim, 0);
    }
    if (rank == 0) {
      out.ker_psi[n] = Eigen::MatrixXd::Identity(dim, dim);
    } else {
      Eigen::BDCSVD<Eigen::MatrixXd> svd(r.psi[n], Eigen::ComputeFullV);
      out.ker_psi[n] = svd.matrixV().rightCols(std::max(dim - rank, 0));
    }
  }
  for (int n = 1; n <= top; ++n) {
    const Eigen::MatrixXd b = r.source.boundary_dense(n);
    for (const auto* side : {&out.ker_psi, &out.im_phi}) {
      const Eigen::MatrixXd& here = (*side)[n];
      const Eigen::MatrixXd& below = (*side)[n - 1];
      if (here.cols() == 0) continue;
      const Eigen::MatrixXd image = b * here;
      const double res = relative_residual(image, below * (below.transpose() * image));
      out.boundary_residual = std::max(out.boundary_residual, res);
    }
  }
  return out;
}

namespace {

// B columns W-orthonormalized through the Cholesky factor of the Gram matrix.
Eigen::MatrixXd w_orthonormalize(const Eigen::MatrixXd& b, const Eigen::MatrixXd& w,
                                 bool custom_w) {
  if (b.cols() == 0) return b;
  const Eigen::MatrixXd gram = custom_w ? Eigen::MatrixXd(b.transpose() * w * b)
                                        : Eigen::MatrixXd(b.transpose() * b);
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("morsify: rank-deficient subspace basis");
  }
  const Eigen::MatrixXd u = llt.matrixU();
  // Right-solve against the upper factor: Q = B U^{-1}.
  return u.transpose()
      .triangularView<Eigen::Lower>()
      .solve(b.transpose())
      .transpose();
}

void append_block_triplets(std::vector<Eigen::Triplet<double>>& triplets,
                           const Eigen::MatrixXd& block, int row0, int col0) {
  for (int c = 0; c < block.cols(); ++c) {
    for (int r = 0; r < block.rows(); ++r) {
      if (block(r, c) != 0.0) triplets.emplace_back(row0 + r, col0 + c, block(r, c));
    }
  }
}

}  // namespace

Morsification morsify(const DeformationRetract& r) {
  const ValidationReport gate = check_retract(r);
  if (!gate.ok()) {
    throw std::invalid_argument("morsify: retract conditions violated: " + gate.summary());
  }
  const int top = r.source.max_degree();

  Morsification m;
  m.source = r.source;
  m.splitting = split_retract(r);

  // Subcomplex carried by Ker psi, with the inherited inner product.
  std::vector<std::vector<std::string>> sub_names(top + 1);
  std::vector<Eigen::SparseMatrix<double>> sub_boundaries(top + 1);
  std::vector<std::optional<Eigen::MatrixXd>> sub_weights(top + 1);
  for (int n = 0; n <= top; ++n) {
    const Eigen::MatrixXd& bk = m.splitting.ker_psi[n];
    for (int i = 0; i < bk.cols(); ++i) {
      sub_names[n].push_back("k" + std::to_string(n) + ":" + std::to_string(i));
    }
    sub_weights[n] = r.source.has_custom_weight(n)
                         ? Eigen::MatrixXd(bk.transpose() * r.source.weight(n) * bk)
                         : Eigen::MatrixXd(bk.transpose() * bk);
  }
  for (int n = 1; n <= top; ++n) {
    const Eigen::MatrixXd x = m.splitting.ker_psi[n - 1].transpose() *
                              r.source.boundary_dense(n) * m.splitting.ker_psi[n];
    std::vector<Eigen::Triplet<double>> triplets;
    append_block_triplets(triplets, x, 0, 0);
    sub_boundaries[n].resize(x.rows(), x.cols());
    sub_boundaries[n].setFromTriplets(triplets.begin(), triplets.end());
  }
  const BasedChainComplex sub = BasedChainComplex::from_parts(
      std::move(sub_names), std::move(sub_boundaries), std::move(sub_weights));

  const HodgeBasis sub_basis = hodge_basis(sub);
  for (int n = 0; n <= top; ++n) {
    if (!sub_basis.kernel[n].empty()) {
      throw std::invalid_argument("morsify: Ker psi is not acyclic at degree " +
                                  std::to_string(n));
    }
  }
  const HodgeMatching hm = hodge_matching(sub, sub_basis);

  // Combined base per degree: Ker psi rebased to its Hodge pairs, then the
  // Im phi columns as critical cells. The rebased boundary is assembled
  // blockwise so the cross blocks are exact zeros.
  std::vector<std::vector<std::string>> names(top + 1);
  std::vector<Eigen::SparseMatrix<double>> boundaries(top + 1);
  std::vector<std::optional<Eigen::MatrixXd>> weights(top + 1);
  m.base.resize(top + 1);
  m.paired_dim.resize(top + 1);
  for (int n = 0; n <= top; ++n) {
    const Eigen::MatrixXd paired = m.splitting.ker_psi[n] * hm.to_cell_basis[n];
    const Eigen::MatrixXd& critical = m.splitting.im_phi[n];
    const int dim = r.source.dim(n);
    m.paired_dim[n] = static_cast<int>(paired.cols());
    m.base[n].resize(dim, dim);
    m.base[n].leftCols(paired.cols()) = paired;
    m.base[n].rightCols(critical.cols()) = critical;
    names[n] = hm.hodge_complex.cell_names(n);
    for (int i = 0; i < critical.cols(); ++i) {
      names[n].push_back("C" + std::to_string(n) + ":" + std::to_string(i));
    }
    const Eigen::MatrixXd w = r.source.has_custom_weight(n)
                                  ? Eigen::MatrixXd(m.base[n].transpose() *
                                                    r.source.weight(n) * m.base[n])
                                  : Eigen::MatrixXd(m.base[n].transpose() * m.base[n]);
    weights[n] = w;
  }
  for (int n = 1; n <= top; ++n) {
    std::vector<Eigen::Triplet<double>> triplets;
    append_block_triplets(triplets, hm.hodge_complex.boundary_dense(n), 0, 0);
    const Eigen::MatrixXd y = m.splitting.im_phi[n - 1].transpose() *
                              r.source.boundary_dense(n) * m.splitting.im_phi[n];
    append_block_triplets(triplets, y, m.paired_dim[n - 1], m.paired_dim[n]);
    boundaries[n].resize(r.source.dim(n - 1), r.source.dim(n));
    boundaries[n].setFromTriplets(triplets.begin(), triplets.end());
  }
  m.morse_complex = BasedChainComplex::from_parts(std::move(names), std::move(boundaries),
                                                  std::move(weights));
  m.matching = hm.matching;
  m.counts = pair_counts(m.morse_complex, m.matching);

  const Retraction red = reduce(m.morse_complex, m.matching);
  m.phi_psi.resize(top + 1);
  double worst = 0.0;
  for (int n = 0; n <= top; ++n) {
    const Eigen::MatrixXd proj = red.phi[n] * red.psi[n];
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m.base[n]);
    m.phi_psi[n] = m.base[n] * proj * lu.inverse();
    const Eigen::MatrixXd target = r.phi[n] * r.psi[n];
    const double res =
        (m.phi_psi[n] - target).norm() / (1.0 + target.norm());
    worst = std::max(worst, res);
  }
  m.operator_residual = worst;

  double defect = 0.0;
  for (int n = 0; n <= top; ++n) {
    const Eigen::MatrixXd& w = r.source.weight(n);
    const bool custom = r.source.has_custom_weight(n);
    const Eigen::MatrixXd qk = w_orthonormalize(m.splitting.ker_psi[n], w, custom);
    const Eigen::MatrixXd qi = w_orthonormalize(m.splitting.im_phi[n], w, custom);
    if (qk.cols() == 0 || qi.cols() == 0) continue;
    const Eigen::MatrixXd cross =
        custom ? Eigen::MatrixXd(qi.transpose() * w * qk) : Eigen::MatrixXd(qi.transpose() * qk);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(cross);
    if (svd.singularValues().size() > 0) {
      defect = std::max(defect, svd.singularValues()(0));
    }
  }
  m.orthogonality_defect = defect;
  return m;
}

std::vector<Eigen::MatrixXd> reconstruction_operator(const Morsification& m) {
  const int top = m.source.max_degree();
  std::vector<Eigen::MatrixXd> out(top + 1);
  for (int n = 0; n <= top; ++n) {
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m.base[n]);
    const Eigen::MatrixXd inv = lu.inverse();
    out[n] = m.base[n].leftCols(m.paired_dim[n]) * inv.topRows(m.paired_dim[n]);
  }
  return out;
}

PairCountTable pair_counts(const BasedChainComplex& complex, const Matching& m) {
  const int top = complex.max_degree();
  PairCountTable t;
  t.up.assign(top + 1, 0);
  t.down.assign(top + 1, 0);
  t.critical.assign(top + 1, 0);
  for (const auto& [alpha, beta] : m.pairs) {
    t.down[alpha.degree] += 1;
    t.up[beta.degree] += 1;
  }
  for (int n = 0; n <= top; ++n) t.critical[n] = complex.dim(n) - t.up[n] - t.down[n];
  return t;
}

PairCountTable pair_counts(const BasedChainComplex& complex, const SequentialMatching& m) {
  const int top = complex.max_degree();
  PairCountTable t;
  t.up.assign(top + 1, 0);
  t.down.assign(top + 1, 0);
  t.critical.assign(top + 1, 0);
  for (const auto& stage : m.stages) {
    for (const auto& [alpha, beta] : stage.pairs) {
      t.down[alpha.degree] += 1;
      t.up[beta.degree] += 1;
    }
  }
  for (int n = 0; n <= top; ++n) t.critical[n] = complex.dim(n) - t.up[n] - t.down[n];
  return t;
}

PairCountTable pair_counts(const Morsification& m) { return m.counts; }

bool is_free(const BasedChainComplex& complex, const Matching& m, int n) {
  (void)complex;
  for (const auto& [alpha, beta] : m.pairs) {
    if (alpha.degree == n) return false;
  }
  return true;
}

bool is_free(const BasedChainComplex& complex, const SequentialMatching& m, int n) {
  for (const auto& stage : m.stages) {
    if (!is_free(complex, stage, n)) return false;
  }
  return true;
}

bool is_free(const Morsification& m, int n) {
  return n >= 0 && n < static_cast<int>(m.counts.down.size()) && m.counts.down[n] == 0;
}

namespace {

void write_report(const Morsification& m, std::ostream& out) {
  ordered_json doc;
  ordered_json degrees = ordered_json::object();
  for (int n = 0; n <= m.source.max_degree(); ++n) {
    ordered_json entry;
    entry["dim"] = m.source.dim(n);
    entry["dim_ker_psi"] = static_cast<int>(m.splitting.ker_psi[n].cols());
    entry["dim_im_phi"] = static_cast<int>(m.splitting.im_phi[n].cols());
    entry["paired"] = m.paired_dim[n];
    entry["up"] = m.counts.up[n];
    entry["down"] = m.counts.down[n];
    entry["critical"] = m.counts.critical[n];
    degrees[std::to_string(n)] = std::move(entry);
  }
  doc["degrees"] = std::move(degrees);
  doc["boundary_residual"] = m.splitting.boundary_residual;
  doc["operator_residual"] = m.operator_residual;
  doc["orthogonality_defect"] = m.orthogonality_defect;
  out << doc.dump(2) << "\n";
}

}  // namespace

void save_morsification_report(const Morsification& m, std::ostream& out) {
  write_report(m, out);
}

void save_morsification_report(const Morsification& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open file for writing");
  write_report(m, out);
}

}  // namespace morsepack
