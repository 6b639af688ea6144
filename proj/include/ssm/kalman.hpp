#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ssm/model.hpp"

namespace ssm {

struct GaussianBelief {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Output of one Kalman forward pass. Per-step quantities are indexed t =
/// 1..T (vector index t-1); steps with fully missing observations contribute
/// 0 to the log-likelihood and skip the update.
struct FilterResult {
  GaussianBelief initial;                      // z_0 belief
  std::vector<GaussianBelief> predicted;       // z_t | y_{1:t-1}
  std::vector<GaussianBelief> filtered;        // z_t | y_{1:t}
  std::vector<Eigen::VectorXd> pred_obs_mean;  // one-step predictive observation mean
  std::vector<Eigen::MatrixXd> pred_obs_cov;   // and covariance (full observation space)
  std::vector<double> step_loglik;
  double loglik = 0.0;
};

/// Exact prediction-error-decomposition marginal log-likelihood for models
/// exposing linear-Gaussian coefficients.
FilterResult kalman_filter(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta);

/// RTS backward recursion; element t-1 is the belief of z_t given y_{1:T}.
std::vector<GaussianBelief> kalman_smoother(const FilterResult& fr, const ModelDefinition& model,
                                            const TimeSeriesData& data, const ParamVector& theta);

/// k-step-ahead state beliefs with no updates, horizons j = 1..k. Coefficient
/// queries past the sample are clamped to the final step.
std::vector<GaussianBelief> forecast(const FilterResult& fr, const ModelDefinition& model, const TimeSeriesData& data,
                                     const ParamVector& theta, int k);

/// One exact draw from p(z_{0:T} | y_{1:T}, theta); columns 0..T.
Eigen::MatrixXd ffbs_sample(const FilterResult& fr, const ModelDefinition& model, const TimeSeriesData& data,
                            const ParamVector& theta, RngStream& rng);

}  // namespace ssm
