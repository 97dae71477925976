#include "nonstat/linalg.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "nonstat/errors.hpp"

namespace nonstat {

Eigen::MatrixXd sym_inverse_sqrt(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("sym_inverse_sqrt: matrix not square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success)
    throw SingularCovariance("sym_inverse_sqrt: eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double largest = ev(ev.size() - 1);
  if (!(largest > 0.0)) throw SingularCovariance("sym_inverse_sqrt: matrix not positive definite");
  Eigen::VectorXd inv_sqrt(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < 1e-12 * largest)
      throw SingularCovariance("sym_inverse_sqrt: matrix numerically singular");
    inv_sqrt(i) = 1.0 / std::sqrt(ev(i));
  }
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
}

double logdet_spd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("logdet_spd: matrix not square");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw SingularCovariance("logdet_spd: matrix not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("matrix_exp: matrix not square");
  const Eigen::Index n = m.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);

  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  }
  const Eigen::MatrixXd a = m / std::ldexp(1.0, squarings);

  // Diagonal Pade coefficients of degree 6:
  // c_0 = 1, c_{k+1} = c_k * (6 - k) / ((12 - k) * (k + 1)).
  double c[7];
  c[0] = 1.0;
  for (int k = 0; k < 6; ++k) c[k + 1] = c[k] * (6.0 - k) / ((12.0 - k) * (k + 1));

  const Eigen::MatrixXd a2 = a * a;
  const Eigen::MatrixXd a4 = a2 * a2;
  const Eigen::MatrixXd a6 = a4 * a2;
  const Eigen::MatrixXd even = c[0] * id + c[2] * a2 + c[4] * a4 + c[6] * a6;
  const Eigen::MatrixXd odd = a * (c[1] * id + c[3] * a2 + c[5] * a4);

  Eigen::MatrixXd result = (even - odd).partialPivLu().solve(even + odd);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

}  // namespace nonstat
