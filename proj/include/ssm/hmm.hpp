#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ssm/model.hpp"

namespace ssm {

struct HmmForwardResult {
  double loglik = 0.0;
  std::vector<double> chain_loglik;
  /// Per chain: T x n_states filtered probabilities; rows before the chain's
  /// first modeled step are zero.
  std::vector<Eigen::MatrixXd> filtered;
};

/// Exact marginal likelihood by the scaled forward recursion, summed over the
/// model's independent chains.
HmmForwardResult hmm_forward(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta);

/// Backward pass; same layout as HmmForwardResult::filtered, rows summing to 1.
std::vector<Eigen::MatrixXd> hmm_smooth(const HmmForwardResult& fr, const ModelDefinition& model,
                                        const TimeSeriesData& data, const ParamVector& theta);

}  // namespace ssm
