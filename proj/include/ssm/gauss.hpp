#pragma once

#include <Eigen/Dense>

#include "ssm/rng.hpp"

namespace ssm {

/// log N(x; mean, cov). A zero covariance is treated as a point mass:
/// 0 on exact match, -inf otherwise.
double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

/// Draw from N(mean, cov); cov may be PSD (zero rows allowed).
Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, RngStream& rng);

/// Symmetrize and clamp tiny negative eigenvalues to zero. Eigenvalues below
/// -1e-10 (relative to the largest magnitude) raise NumericalError.
Eigen::MatrixXd sanitize_covariance(const Eigen::MatrixXd& m);

}  // namespace ssm
