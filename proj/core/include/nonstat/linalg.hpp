#pragma once

#include <Eigen/Core>

namespace nonstat {

/// Inverse symmetric square root of a symmetric positive definite matrix.
/// Eigenvalues below 1e-12 times the largest one raise SingularCovariance.
Eigen::MatrixXd sym_inverse_sqrt(const Eigen::MatrixXd& m);

/// log det of a symmetric positive definite matrix via Cholesky.
/// Raises SingularCovariance when the factorization fails.
double logdet_spd(const Eigen::MatrixXd& m);

/// Matrix exponential by scaling and squaring with a degree-6 diagonal
/// Pade approximant.
Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& m);

}  // namespace nonstat
