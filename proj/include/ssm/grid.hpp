#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ssm/model.hpp"

namespace ssm {

/// Uniform discretization of a 1-D continuous state space.
struct StateGrid {
  double lower = 0.0, upper = 1.0;
  int m = 2;

  StateGrid() = default;
  StateGrid(double lo, double hi, int cells);
  double width() const { return (upper - lower) / m; }
  double center(int j) const { return lower + (j + 0.5) * width(); }

  /// Heuristic sizing: back-projected data range +- 8 * max(sigma_p, sigma_o)
  /// (named parameters when present, else the data standard deviation).
  static StateGrid automatic(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta,
                             int cells);
};

struct GridFilterResult {
  StateGrid grid;
  std::vector<Eigen::VectorXd> predicted;  // unnormalized masses entering each update
  std::vector<Eigen::VectorXd> filtered;   // normalized posterior masses
  std::vector<double> step_loglik;         // log normalization constants
  double loglik = 0.0;
};

/// Exact-on-grid filtering for 1-D state models: transition masses from the
/// midpoint rule, alternating predict/update/normalize.
GridFilterResult grid_filter(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta,
                             const StateGrid& grid);

/// One-step predictive observation CDF at step t evaluated at y (mixture of
/// the model's conditional CDFs over predicted cell masses).
double grid_predictive_cdf(const GridFilterResult& fr, const ModelDefinition& model, const TimeSeriesData& data,
                           const ParamVector& theta, int t, double y);

/// Predictive observation mean and variance at step t from the grid mixture.
std::pair<double, double> grid_predictive_moments(const GridFilterResult& fr, const ModelDefinition& model,
                                                  const TimeSeriesData& data, const ParamVector& theta, int t);

/// Backward pass; element t-1 holds smoothed cell masses for step t.
std::vector<Eigen::VectorXd> grid_smooth(const GridFilterResult& fr, const ModelDefinition& model,
                                         const TimeSeriesData& data, const ParamVector& theta);

}  // namespace ssm
