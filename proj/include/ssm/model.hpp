#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ssm/data.hpp"
#include "ssm/parameters.hpp"
#include "ssm/rng.hpp"

namespace ssm {

/// Mapping from a dataset to the model's process steps. Step t = 1..S carries
/// the state time, the increment dt from the previous state time, and the raw
/// observation indices attached to the step. For most models this is the
/// identity mapping (one record per step); the DCRW maps irregular
/// observations onto a regular state grid.
struct StepSchedule {
  double t0 = 0.0;                         // time of the initial state z_0
  std::vector<double> times;               // state times, steps 1..S
  std::vector<std::vector<int>> obs_at;    // per step, raw record indices

  int steps() const { return static_cast<int>(times.size()); }
  double dt(int t) const { return t == 1 ? times[0] - t0 : times[t - 1] - times[t - 2]; }
};

StepSchedule identity_schedule(const TimeSeriesData& data);

/// Per-step coefficients of a linear-Gaussian model:
///   z_t = T z_{t-1} + c + w,  w ~ N(0, Q)
///   y_t = Z z_t + d + v,      v ~ N(0, H)
struct LinGaussCoeffs {
  Eigen::MatrixXd T, Q, Z, H;
  Eigen::VectorXd c, d;
};

/// Finite-state chain description (HMMs). A model may carry several
/// independent chains sharing parameters (e.g. capture-recapture
/// individuals); each chain reads one observation coordinate.
struct DiscreteStateSpec {
  int n_states = 2;
  int n_chains = 1;
  /// First modeled step of the chain (steps before it contribute nothing).
  std::function<int(int chain)> first_step;
  std::function<Eigen::VectorXd(const ParamVector&, int chain)> initial;
  std::function<Eigen::MatrixXd(const ParamVector&, int t, int chain)> transition;
  /// log Pr(record t, coordinate `chain` | state); missing -> 0 expected from caller.
  std::function<double(int t, int chain, int state, const ParamVector&, const TimeSeriesData&)> emission_loglik;
};

/// Derivatives of log f(z_t | z_{t-1}) with respect to the two states.
struct PairDerivs {
  Eigen::VectorXd g_z, g_zprev;
  Eigen::MatrixXd h_zz, h_zprev_zprev, h_z_zprev;  // h_z_zprev: rows z_t, cols z_{t-1}
};

/// Derivatives of log g(y | z) with respect to the state.
struct ObsStateDerivs {
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
};

/// One additive term of the joint log-likelihood viewed as a function of the
/// latent states; used by the Laplace machinery. `steps` lists the latent
/// step indices the term touches (step 0 is the initial state when latent).
struct TermDerivs {
  std::vector<Eigen::VectorXd> grad;
  std::vector<std::vector<Eigen::MatrixXd>> hess;  // hess[a][b], a <= b, rows block a, cols block b
};
struct JointTerm {
  std::vector<int> steps;
  std::function<double(const ParamVector&, const std::vector<Eigen::VectorXd>&)> value;
  std::function<TermDerivs(const ParamVector&, const std::vector<Eigen::VectorXd>&)> derivs;  // may be null
};

/// The SSM contract: dimensions, parameter spec, densities f and g, samplers,
/// and optional capabilities (linear-Gaussian coefficients, discrete states,
/// analytic state derivatives, diagnostic accessors).
struct ModelDefinition {
  std::string name;
  int state_dim = 1;
  int obs_dim = 1;
  std::shared_ptr<const ParameterSpec> param_spec;
  ParamVector default_params;
  bool time_invariant = false;  // coefficients independent of t (grid caching)

  // Initial state z_0: fixed parameter (zero covariance) or Gaussian.
  std::function<Eigen::VectorXd(const ParamVector&)> initial_mean;
  std::function<Eigen::MatrixXd(const ParamVector&)> initial_cov;

  std::function<double(const Eigen::VectorXd& z, const Eigen::VectorXd& zprev, const ParamVector&, int t, double dt,
                       const TimeSeriesData&)>
      process_log_density;
  std::function<Eigen::VectorXd(const Eigen::VectorXd& zprev, const ParamVector&, int t, double dt,
                                const TimeSeriesData&, RngStream&)>
      process_sample;
  /// log g for raw record i given the state at the record's step; skips
  /// missing coordinates internally.
  std::function<double(int i, const Eigen::VectorXd& z, const ParamVector&, const TimeSeriesData&)> obs_log_density;
  std::function<ObsRecord(int i, const Eigen::VectorXd& z, const ParamVector&, const TimeSeriesData&, RngStream&)>
      obs_sample;

  std::function<StepSchedule(const TimeSeriesData&)> schedule;  // default: identity

  std::function<LinGaussCoeffs(const ParamVector&, int t, const TimeSeriesData&)> linear_gaussian;  // optional
  std::optional<DiscreteStateSpec> discrete;

  // Optional analytic derivatives for the Laplace inner problem.
  std::function<PairDerivs(const Eigen::VectorXd& z, const Eigen::VectorXd& zprev, const ParamVector&, int t,
                           double dt, const TimeSeriesData&)>
      process_derivs;
  std::function<ObsStateDerivs(int i, const Eigen::VectorXd& z, const ParamVector&, const TimeSeriesData&)> obs_derivs;
  /// Models whose joint density is not a first-order function of the stored
  /// state (e.g. DCRW over raw locations) provide the full term list instead.
  std::function<std::vector<JointTerm>(const TimeSeriesData&, const StepSchedule&)> custom_joint_terms;
  int custom_latent_dim = 0;  // raw latent dimension when custom_joint_terms is set

  // Diagnostic accessors (optional).
  std::function<Eigen::VectorXd(const Eigen::VectorXd& z, const ParamVector&, int i, const TimeSeriesData&)> obs_mean_fn;
  std::function<Eigen::VectorXd(const Eigen::VectorXd& z, const ParamVector&, int i, const TimeSeriesData&)> obs_var_fn;
  /// CDF of scalar observation coordinate c given the state.
  std::function<double(double y, int c, const Eigen::VectorXd& z, const ParamVector&, int i, const TimeSeriesData&)>
      obs_cdf;
  std::function<Eigen::VectorXd(const ObsRecord&)> state_from_obs;  // warm starts
  /// Implied process noise: inverts the process equation at (z_t, z_{t-1}).
  std::function<Eigen::VectorXd(const Eigen::VectorXd& z, const Eigen::VectorXd& zprev, const ParamVector&, int t,
                                double dt, const TimeSeriesData&)>
      process_noise;
  std::function<Eigen::VectorXd(const ParamVector&, int t, double dt)> process_noise_sd;

  bool has_linear_gaussian() const { return static_cast<bool>(linear_gaussian); }
  bool is_discrete() const { return discrete.has_value(); }
  StepSchedule make_schedule(const TimeSeriesData& data) const {
    return schedule ? schedule(data) : identity_schedule(data);
  }
};

struct SimulationResult {
  double t0 = 0.0;
  std::vector<double> state_times;       // steps 1..S
  Eigen::VectorXd initial_state;
  std::vector<Eigen::VectorXd> states;   // steps 1..S
  TimeSeriesData data;
};

/// Draws states recursively from f starting at the initial state and
/// observations from g given the states; deterministic given the seed. The
/// template supplies observation times, quality classes, covariates, and the
/// missingness pattern to reproduce.
SimulationResult simulate(const ModelDefinition& model, const ParamVector& theta, const TimeSeriesData& tmpl,
                          std::uint64_t seed);
SimulationResult simulate(const ModelDefinition& model, const ParamVector& theta, const std::vector<double>& times,
                          std::uint64_t seed);

/// Sum over steps of log f plus log g, skipping the g term for missing
/// observations. `states` holds one state per schedule step.
double joint_log_likelihood(const ModelDefinition& model, const ParamVector& theta,
                            const std::vector<Eigen::VectorXd>& states, const TimeSeriesData& data);

}  // namespace ssm
