#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ssm/model.hpp"

namespace ssm {

/// Weighted particle set at one time step.
struct ParticleEnsemble {
  Eigen::MatrixXd states;   // state_dim x N
  Eigen::VectorXd weights;  // normalized

  double ess() const;  // 1 / sum(w^2)
};

/// Expected copy count N * w_i, low-variance stratified scheme.
std::vector<int> systematic_resample(const Eigen::VectorXd& weights, int N, RngStream& rng);

struct SmcOptions {
  int particles = 1000;
  double ess_threshold = 0.5;  // resample when ESS < threshold * N; <= 0 disables
  bool sample_path = false;    // trace one trajectory through the ancestry
};

struct SmcResult {
  double loglik = 0.0;
  std::vector<double> step_loglik;
  std::vector<double> ess_trace;
  std::vector<Eigen::VectorXd> mean;  // filtered state means
  std::vector<Eigen::VectorXd> var;   // filtered state variances (per coordinate)
  std::optional<Eigen::MatrixXd> path;  // state_dim x (S+1), columns 0..S
  ParticleEnsemble final_ensemble;
};

/// Sequential importance sampling: propagate by f, weight by g, never
/// resample. The ESS trace exposes particle depletion.
SmcResult sis_filter(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta, int N,
                     std::uint64_t seed);

/// Bootstrap filter with adaptive systematic resampling; the likelihood
/// estimate is unbiased, which is what particle-marginal MCMC relies on.
SmcResult bootstrap_filter(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta,
                           const SmcOptions& opts, std::uint64_t seed);

/// Geometric cooling of the parameter-perturbation scales (transformed scale).
struct CoolingSchedule {
  Eigen::VectorXd initial_sd;  // one entry per free parameter
  double factor = 0.97;
};

struct IteratedFilteringResult {
  Eigen::MatrixXd theta_trace;  // (M+1) x n_free, natural scale, row 0 = theta_0
  double final_loglik = 0.0;
  std::vector<double> pass_loglik;
};

/// IF2-style maximization: repeated bootstrap filtering with a parameter
/// swarm perturbed at every observation step, cooled between passes.
IteratedFilteringResult iterated_filtering(const ModelDefinition& model, const TimeSeriesData& data,
                                           const ParamVector& theta0, const CoolingSchedule& schedule, int passes,
                                           int particles, std::uint64_t seed);

}  // namespace ssm
