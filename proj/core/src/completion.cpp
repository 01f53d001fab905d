#include "apent/completion.hpp"

#include <stdexcept>
#include <string>

namespace apent {

namespace {

void require_shape(const CMat& m, long rows, long cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols)
    throw std::invalid_argument(std::string("three_block: ") + name + " is " +
                                std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ", expected " +
                                std::to_string(rows) + "x" +
                                std::to_string(cols));
}

void require_psd(const CMat& Q, const char* name) {
  if (Q.rows() == 0) return;
  Eigen::SelfAdjointEigenSolver<CMat> es(Q, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (lo < -kPsdTol * scale)
    throw std::domain_error(std::string("three_block: ") + name +
                            " is not PSD (eigenvalue " + std::to_string(lo) +
                            ")");
}

CMat stack2(const CMat& a11, const CMat& a12, const CMat& a22) {
  CMat out(a11.rows() + a22.rows(), a11.cols() + a22.cols());
  out.topLeftCorner(a11.rows(), a11.cols()) = a11;
  out.topRightCorner(a12.rows(), a12.cols()) = a12;
  out.bottomLeftCorner(a12.cols(), a12.rows()) = a12.adjoint();
  out.bottomRightCorner(a22.rows(), a22.cols()) = a22;
  return out;
}

}  // namespace

ThreeBlockData three_block_data(const PartialPsd3& p) {
  const int k = p.d1(), l = p.d2(), m = p.d3();
  require_shape(p.q11, k, k, "q11");
  require_shape(p.q12, k, l, "q12");
  require_shape(p.q22, l, l, "q22");
  require_shape(p.q23, l, m, "q23");
  require_shape(p.q33, m, m, "q33");
  require_psd(stack2(p.q11, p.q12, p.q22), "corner (1,2)");
  require_psd(stack2(p.q22, p.q23, p.q33), "corner (2,3)");

  ThreeBlockData d;
  if (l == 0) {
    d.schur1 = p.q11;
    d.schur3 = p.q33;
    d.central = CMat::Zero(k, m);
    return d;
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(p.q22);
  Eigen::VectorXd lam = es.eigenvalues();
  double thr = kSingTol * std::max(0.0, lam.maxCoeff());
  Eigen::VectorXd inv(lam.size());
  for (int i = 0; i < lam.size(); ++i)
    inv(i) = lam(i) > thr ? 1.0 / lam(i) : 0.0;
  CMat q22pinv =
      es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
  d.schur1 = p.q11 - p.q12 * q22pinv * p.q12.adjoint();
  d.schur3 = p.q33 - p.q23.adjoint() * q22pinv * p.q23;
  d.central = p.q12 * q22pinv * p.q23;
  return d;
}

CMat three_block_corner(const PartialPsd3& p, const CMat& C) {
  ThreeBlockData d = three_block_data(p);
  require_shape(C, p.d1(), p.d3(), "contraction");
  double nrm = op_norm(C);
  if (nrm > 1.0 + kPsdTol)
    throw std::domain_error("three_block: parameter has operator norm " +
                            std::to_string(nrm) + " > 1");
  return d.central + herm_sqrt(d.schur1) * C * herm_sqrt(d.schur3);
}

CMat three_block_complete(const PartialPsd3& p, const CMat& C) {
  CMat r = three_block_corner(p, C);
  const int k = p.d1(), l = p.d2(), m = p.d3();
  CMat out(k + l + m, k + l + m);
  out.block(0, 0, k, k) = p.q11;
  out.block(0, k, k, l) = p.q12;
  out.block(0, k + l, k, m) = r;
  out.block(k, 0, l, k) = p.q12.adjoint();
  out.block(k, k, l, l) = p.q22;
  out.block(k, k + l, l, m) = p.q23;
  out.block(k + l, 0, m, k) = r.adjoint();
  out.block(k + l, k, m, l) = p.q23.adjoint();
  out.block(k + l, k + l, m, m) = p.q33;
  return out;
}

CMat three_block_extract(const PartialPsd3& p, const CMat& corner) {
  ThreeBlockData d = three_block_data(p);
  require_shape(corner, p.d1(), p.d3(), "corner");
  if (corner.size() == 0) return CMat(p.d1(), p.d3());
  CMat C = herm_pinv_sqrt(d.schur1) * (corner - d.central) *
           herm_pinv_sqrt(d.schur3);
  // Consistency: the corner must be reachable; otherwise the residual shows
  // a component outside the Schur ranges.
  CMat back = d.central + herm_sqrt(d.schur1) * C * herm_sqrt(d.schur3);
  double scale = std::max(1.0, corner.cwiseAbs().maxCoeff());
  double resid = (back - corner).cwiseAbs().maxCoeff();
  if (resid > 1e-8 * scale)
    throw std::domain_error(
        "three_block: corner is not a PSD completion (residual " +
        std::to_string(resid) + ")");
  double nrm = op_norm(C);
  if (nrm > 1.0 + 1e-8)
    throw std::domain_error("three_block: extracted parameter has norm " +
                            std::to_string(nrm) + " > 1");
  return C;
}

}  // namespace apent
