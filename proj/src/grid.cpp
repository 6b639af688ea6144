#include "ssm/grid.hpp"

#include <cmath>

#include "ssm/errors.hpp"
#include "ssm/stats.hpp"

namespace ssm {

namespace {

void require_grid_compatible(const ModelDefinition& model) {
  if (model.state_dim != 1)
    throw ConfigError("grid_filter handles 1-D states only; a d-dimensional grid with ~1000 cells per axis "
                      "needs 1000^d cells (curse of dimensionality)");
  if (!model.process_log_density || !model.obs_log_density)
    throw ConfigError("grid_filter requires process and observation densities");
}

/// Transition kernel K(j, k) = f(x_j | x_k) * w (midpoint rule).
Eigen::MatrixXd transition_kernel(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta,
                                  const StateGrid& grid, int t, double dt) {
  const int m = grid.m;
  Eigen::MatrixXd K(m, m);
  Eigen::VectorXd zj(1), zk(1);
  for (int k = 0; k < m; ++k) {
    zk[0] = grid.center(k);
    for (int j = 0; j < m; ++j) {
      zj[0] = grid.center(j);
      K(j, k) = std::exp(model.process_log_density(zj, zk, theta, t, dt, data)) * grid.width();
    }
  }
  return K;
}

}  // namespace

StateGrid::StateGrid(double lo, double hi, int cells) : lower(lo), upper(hi), m(cells) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) throw DomainError("StateGrid: bounds must be finite, lo < hi");
  if (cells < 2) throw DomainError("StateGrid: at least 2 cells required");
}

StateGrid StateGrid::automatic(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta,
                               int cells) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int t = 0; t < data.size(); ++t) {
    const ObsRecord& rec = data.record(t);
    if (rec.all_missing()) continue;
    const double z = model.state_from_obs ? model.state_from_obs(rec)[0]
                                          : (rec.is_observed(0) ? rec.value[0] : 0.0);
    lo = std::min(lo, z);
    hi = std::max(hi, z);
  }
  if (!std::isfinite(lo)) {
    lo = -1.0;
    hi = 1.0;
  }
  double scale = 0.0;
  if (model.param_spec->has("sigma_p")) scale = std::max(scale, theta["sigma_p"]);
  if (model.param_spec->has("sigma_o")) scale = std::max(scale, theta["sigma_o"]);
  if (scale == 0.0) {
    std::vector<double> ys;
    for (int t = 0; t < data.size(); ++t)
      if (data.record(t).is_observed(0)) ys.push_back(data.record(t).value[0]);
    scale = ys.size() >= 2 ? stats::sd(ys) : 1.0;
  }
  return StateGrid(lo - 8.0 * scale, hi + 8.0 * scale, cells);
}

GridFilterResult grid_filter(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta,
                             const StateGrid& grid) {
  require_grid_compatible(model);
  const StepSchedule sched = model.make_schedule(data);
  const int S = sched.steps();
  const int m = grid.m;

  GridFilterResult fr;
  fr.grid = grid;
  fr.predicted.resize(S);
  fr.filtered.resize(S);
  fr.step_loglik.assign(S, 0.0);

  const bool cache_kernel = model.time_invariant;
  Eigen::MatrixXd K;
  if (cache_kernel) K = transition_kernel(model, data, theta, grid, S >= 2 ? 2 : 1, sched.dt(S >= 2 ? 2 : 1));

  // Initial mass: fixed z_0 enters through the first transition directly;
  // a Gaussian initial density is discretized onto the grid first.
  Eigen::VectorXd mass(m);
  const Eigen::VectorXd z0 = model.initial_mean(theta);
  const Eigen::MatrixXd P0 = model.initial_cov(theta);
  Eigen::VectorXd zj(1);
  if (P0.norm() == 0.0) {
    for (int j = 0; j < m; ++j) {
      zj[0] = grid.center(j);
      mass[j] = std::exp(model.process_log_density(zj, z0, theta, 1, sched.dt(1), data)) * grid.width();
    }
  } else {
    Eigen::VectorXd init(m);
    const double sd0 = std::sqrt(P0(0, 0));
    for (int j = 0; j < m; ++j) init[j] = std::exp(stats::norm_logpdf(grid.center(j), z0[0], sd0)) * grid.width();
    const Eigen::MatrixXd K1 = cache_kernel ? K : transition_kernel(model, data, theta, grid, 1, sched.dt(1));
    mass = K1 * init;
  }

  for (int t = 1; t <= S; ++t) {
    if (t >= 2) {
      const Eigen::MatrixXd& Kt = cache_kernel ? K : (K = transition_kernel(model, data, theta, grid, t, sched.dt(t)), K);
      mass = Kt * mass;
    }
    fr.predicted[t - 1] = mass;

    // update with every observation attached to this step
    Eigen::VectorXd upd = mass;
    for (int i : sched.obs_at[t - 1]) {
      if (data.record(i).all_missing()) continue;
      for (int j = 0; j < m; ++j) {
        zj[0] = grid.center(j);
        upd[j] *= std::exp(model.obs_log_density(i, zj, theta, data));
      }
    }
    const double c = upd.sum();
    if (!(c >= 1e-300))
      throw NumericalError("grid_filter: all probability mass escaped the grid at step " + std::to_string(t) +
                           "; widen the grid bounds");
    fr.step_loglik[t - 1] = std::log(c);
    mass = upd / c;
    fr.filtered[t - 1] = mass;
  }
  for (double l : fr.step_loglik) fr.loglik += l;
  return fr;
}

double grid_predictive_cdf(const GridFilterResult& fr, const ModelDefinition& model, const TimeSeriesData& data,
                           const ParamVector& theta, int t, double y) {
  if (!model.obs_cdf) throw ConfigError("model lacks a conditional observation CDF");
  const Eigen::VectorXd& pred = fr.predicted[t - 1];
  const double total = pred.sum();
  double u = 0.0;
  Eigen::VectorXd zj(1);
  for (int j = 0; j < fr.grid.m; ++j) {
    zj[0] = fr.grid.center(j);
    u += pred[j] * model.obs_cdf(y, 0, zj, theta, t - 1, data);
  }
  return u / total;
}

std::pair<double, double> grid_predictive_moments(const GridFilterResult& fr, const ModelDefinition& model,
                                                  const TimeSeriesData& data, const ParamVector& theta, int t) {
  if (!model.obs_mean_fn || !model.obs_var_fn) throw ConfigError("model lacks observation moment accessors");
  const Eigen::VectorXd& pred = fr.predicted[t - 1];
  const double total = pred.sum();
  double m1 = 0.0, m2 = 0.0;
  Eigen::VectorXd zj(1);
  for (int j = 0; j < fr.grid.m; ++j) {
    zj[0] = fr.grid.center(j);
    const double mu = model.obs_mean_fn(zj, theta, t - 1, data)[0];
    const double v = model.obs_var_fn(zj, theta, t - 1, data)[0];
    m1 += pred[j] * mu;
    m2 += pred[j] * (v + mu * mu);
  }
  m1 /= total;
  m2 /= total;
  return {m1, std::max(m2 - m1 * m1, 0.0)};
}

std::vector<Eigen::VectorXd> grid_smooth(const GridFilterResult& fr, const ModelDefinition& model,
                                         const TimeSeriesData& data, const ParamVector& theta) {
  require_grid_compatible(model);
  const StepSchedule sched = model.make_schedule(data);
  const int S = sched.steps();
  const int m = fr.grid.m;

  std::vector<Eigen::VectorXd> smoothed(S);
  Eigen::VectorXd beta = Eigen::VectorXd::Ones(m);
  smoothed[S - 1] = fr.filtered[S - 1];
  Eigen::VectorXd zj(1);
  for (int t = S - 1; t >= 1; --t) {
    // fold the t+1 observation into the backward weights
    Eigen::VectorXd g = Eigen::VectorXd::Ones(m);
    for (int i : sched.obs_at[t]) {
      if (data.record(i).all_missing()) continue;
      for (int j = 0; j < m; ++j) {
        zj[0] = fr.grid.center(j);
        g[j] *= std::exp(model.obs_log_density(i, zj, theta, data));
      }
    }
    const Eigen::MatrixXd K = transition_kernel(model, data, theta, fr.grid, t + 1, sched.dt(t + 1));
    beta = K.transpose() * g.cwiseProduct(beta);
    const double norm = beta.maxCoeff();
    if (norm > 0) beta /= norm;
    Eigen::VectorXd s = fr.filtered[t - 1].cwiseProduct(beta);
    const double c = s.sum();
    if (!(c > 0)) throw NumericalError("grid_smooth: vanishing backward mass at step " + std::to_string(t));
    smoothed[t - 1] = s / c;
  }
  return smoothed;
}

}  // namespace ssm
