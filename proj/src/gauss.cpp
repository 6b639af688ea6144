#include "ssm/gauss.hpp"

#include <cmath>
#include <limits>

#include "ssm/errors.hpp"

namespace ssm {

double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  const int d = static_cast<int>(x.size());
  if (cov.norm() == 0.0) {
    return (x - mean).norm() == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("mvn_logpdf: covariance not positive definite");
  const Eigen::VectorXd r = x - mean;
  const Eigen::VectorXd w = llt.matrixL().solve(r);
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) logdet += std::log(llt.matrixL()(i, i));
  return -0.5 * d * std::log(2.0 * M_PI) - logdet - 0.5 * w.squaredNorm();
}

Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, RngStream& rng) {
  const int d = static_cast<int>(mean.size());
  if (cov.norm() == 0.0) return mean;
  Eigen::VectorXd eps(d);
  for (int i = 0; i < d; ++i) eps[i] = rng.normal();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return mean + llt.matrixL() * eps;
  // PSD fallback via eigendecomposition
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return mean + es.eigenvectors() * ev.asDiagonal() * eps;
}

Eigen::MatrixXd sanitize_covariance(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double scale = std::max(1.0, std::fabs(ev.maxCoeff()));
  if (ev.minCoeff() < -1e-10 * scale) throw NumericalError("covariance has a significantly negative eigenvalue");
  if (ev.minCoeff() >= 0.0) return s;
  return es.eigenvectors() * ev.cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace ssm
