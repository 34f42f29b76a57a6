#include "steer3d/linalg.hpp"

#include <stdexcept>
#include <vector>

namespace steer3d {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd kron(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

MatrixXd null_space(const MatrixXd& a, double rel_tol) {
  if (rel_tol <= 0.0 || rel_tol >= 1.0) {
    throw std::invalid_argument("null_space: rel_tol must lie in (0, 1)");
  }
  const int n = static_cast<int>(a.cols());
  MatrixXd reduced;
  if (a.rows() > a.cols()) {
    // A = QR: null(A) = null(R) with identical singular values.
    Eigen::HouseholderQR<MatrixXd> qr(a);
    reduced = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  } else {
    reduced = a;
  }

  Eigen::BDCSVD<MatrixXd> svd(reduced, Eigen::ComputeFullV);
  const VectorXd& s = svd.singularValues();
  const double s_max = s.size() > 0 ? s(0) : 0.0;

  int null_dim = n - static_cast<int>(s.size());  // cols beyond rank(min(m,n))
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) < rel_tol * s_max || s_max == 0.0) ++null_dim;
  }

  MatrixXd basis = svd.matrixV().rightCols(null_dim);
  for (int c = 0; c < basis.cols(); ++c) {
    int arg_max = 0;
    basis.col(c).cwiseAbs().maxCoeff(&arg_max);
    if (basis(arg_max, c) < 0.0) basis.col(c) = -basis.col(c);
  }
  return basis;
}

int null_space_dim_stacked(const std::vector<MatrixXd>& blocks, double rel_tol) {
  if (blocks.empty()) throw std::invalid_argument("null_space_dim_stacked: no blocks");
  const int n = static_cast<int>(blocks[0].cols());
  MatrixXd gram = MatrixXd::Zero(n, n);
  for (const auto& b : blocks) {
    if (b.cols() != n) {
      throw std::invalid_argument("null_space_dim_stacked: column mismatch");
    }
    gram.selfadjointView<Eigen::Lower>().rankUpdate(b.transpose());
  }
  gram = gram.selfadjointView<Eigen::Lower>();

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const VectorXd& ev = es.eigenvalues();
  const double ev_max = ev(ev.size() - 1);
  const double cut = rel_tol * rel_tol * ev_max;
  int dim = 0;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) < cut || ev_max <= 0.0) ++dim;
  }
  return dim;
}

}  // namespace steer3d
