#include "wellgap/geigen.hpp"

#include <cmath>
#include <stdexcept>

namespace wellgap {

namespace {

void require_symmetric(const Eigen::MatrixXd& A, const char* who) {
  double scale = A.cwiseAbs().maxCoeff();
  double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (scale > 0 && asym > 1e-10 * scale)
    throw std::invalid_argument(std::string(who) + ": input not symmetric");
}

}  // namespace

EigResult sym_eig(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("sym_eig: not square");
  require_symmetric(A, "sym_eig");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw std::runtime_error("sym_eig failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

PencilResult fix_heiberger(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           double eps, bool want_vectors) {
  const int dim = static_cast<int>(A.rows());
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
    throw std::invalid_argument("fix_heiberger: dimension mismatch");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("fix_heiberger: eps must lie in (0,1)");
  require_symmetric(A, "fix_heiberger(A)");
  require_symmetric(B, "fix_heiberger(B)");

  PencilResult res;

  // Stage 1: spectral split of B, descending.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esB(B);
  if (esB.info() != Eigen::Success) throw std::runtime_error("fix_heiberger: B eig failed");
  Eigen::VectorXd w = esB.eigenvalues().reverse();
  Eigen::MatrixXd Q = esB.eigenvectors().rowwise().reverse();
  if (w[0] <= 0.0)
    throw std::invalid_argument("fix_heiberger: B numerically zero or negative");
  const double thr1 = eps * w[0];
  if (w[dim - 1] < -thr1)
    throw std::invalid_argument("fix_heiberger: B not positive semidefinite within tolerance");
  int k = 0;
  while (k < dim && w[k] > thr1) ++k;
  const int m = dim - k;
  if (m > 0)
    res.deflation_log.push_back("stage1: deflated " + std::to_string(m) + " of " +
                                std::to_string(dim));

  Eigen::MatrixXd T1 = Q;
  for (int c = 0; c < k; ++c) T1.col(c) /= std::sqrt(w[c]);
  Eigen::MatrixXd At = T1.transpose() * A * T1;
  At = 0.5 * (At + At.transpose());

  if (m == 0) {
    EigResult e = sym_eig(At);
    res.values = e.values;
    res.stable_dim = dim;
    if (want_vectors) res.vectors = T1 * e.vectors;
    return res;
  }

  // Stage 2: split the B-null block of At by the same relative rule.
  Eigen::MatrixXd A11 = At.topLeftCorner(k, k);
  Eigen::MatrixXd A12 = At.topRightCorner(k, m);
  Eigen::MatrixXd A22 = At.bottomRightCorner(m, m);
  const double scale = At.cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es22(A22);
  if (es22.info() != Eigen::Success) throw std::runtime_error("fix_heiberger: A22 eig failed");
  // order by |lambda| descending: "big" block first
  std::vector<int> order(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(es22.eigenvalues()[a]) > std::abs(es22.eigenvalues()[b]);
  });
  const double thr2 = eps * scale;
  int p = 0;
  while (p < m && std::abs(es22.eigenvalues()[order[static_cast<size_t>(p)]]) > thr2) ++p;
  const int q = m - p;
  Eigen::MatrixXd U(m, m);
  Eigen::VectorXd lam(m);
  for (int i = 0; i < m; ++i) {
    U.col(i) = es22.eigenvectors().col(order[static_cast<size_t>(i)]);
    lam[i] = es22.eigenvalues()[order[static_cast<size_t>(i)]];
  }
  Eigen::MatrixXd A12r = A12 * U;
  Eigen::MatrixXd F = A12r.leftCols(p);   // couples to invertible null-block part
  Eigen::MatrixXd G = A12r.rightCols(q);  // constraint block

  if (q == 0) {
    // x2 = -Lambda^{-1} F^T x1; Schur complement on the retained block.
    Eigen::MatrixXd Sc = A11 - F * lam.head(p).cwiseInverse().asDiagonal() * F.transpose();
    EigResult e = sym_eig(0.5 * (Sc + Sc.transpose()));
    res.values = e.values;
    res.stable_dim = k;
    if (want_vectors) {
      Eigen::MatrixXd Y(dim, k);
      Y.topRows(k) = e.vectors;
      Y.bottomRows(m) = U * (-(lam.head(p).cwiseInverse().asDiagonal() *
                               (F.transpose() * e.vectors)));
      res.vectors = T1 * Y;
    }
    return res;
  }

  res.deflation_log.push_back("stage2: " + std::to_string(q) + " constraint dirs, " +
                              std::to_string(p) + " invertible");
  if (q > k)
    throw std::runtime_error("singular pencil: more constraints than retained dimensions");

  // Constraints G^T x1 = 0. Column-pivoted QR exposes the rank.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(G);
  if (qr.rank() < q)
    throw std::runtime_error("singular pencil: constraint block rank-deficient");
  Eigen::MatrixXd Z = qr.householderQ();
  Eigen::MatrixXd Z2 = Z.rightCols(k - q);  // null space of G^T

  Eigen::MatrixXd Ared = Z2.transpose() * A11 * Z2;
  Eigen::MatrixXd F2;
  if (p > 0) {
    F2 = Z2.transpose() * F;
    Ared -= F2 * lam.head(p).cwiseInverse().asDiagonal() * F2.transpose();
  }
  EigResult e = sym_eig(0.5 * (Ared + Ared.transpose()));
  res.values = e.values;
  res.stable_dim = k - q;
  if (want_vectors) {
    const int r = k - q;
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(dim, r);
    Eigen::MatrixXd y1 = Z2 * e.vectors;  // k x r
    Y.topRows(k) = y1;
    Eigen::MatrixXd y2;
    if (p > 0) {
      y2 = -(lam.head(p).cwiseInverse().asDiagonal() * (F.transpose() * y1));
      Y.middleRows(k, p) = y2;
    }
    // y3 from the first q rotated rows of the retained-block equations
    Eigen::MatrixXd R = qr.matrixR().topLeftCorner(q, q).triangularView<Eigen::Upper>();
    Eigen::MatrixXd rhs = Z.leftCols(q).transpose() *
                          (y1 * e.values.asDiagonal() - A11 * y1 -
                           (p > 0 ? (F * y2).eval() : Eigen::MatrixXd::Zero(k, r).eval()));
    Eigen::MatrixXd y3 = qr.colsPermutation() *
                         R.triangularView<Eigen::Upper>().solve(rhs);
    Y.bottomRows(q) = y3;
    Eigen::MatrixXd T2 = Eigen::MatrixXd::Identity(dim, dim);
    T2.bottomRightCorner(m, m) = U;
    res.vectors = T1 * (T2 * Y);
  }
  return res;
}

}  // namespace wellgap
