#include "ssm/hmm.hpp"

#include <cmath>

#include "ssm/errors.hpp"

namespace ssm {

namespace {
const DiscreteStateSpec& require_discrete(const ModelDefinition& model) {
  if (!model.is_discrete()) throw ConfigError("model '" + model.name + "' does not declare discrete states");
  return *model.discrete;
}

Eigen::VectorXd emission_weights(const DiscreteStateSpec& ds, int t, int chain, const ParamVector& theta,
                                 const TimeSeriesData& data) {
  Eigen::VectorXd g(ds.n_states);
  for (int s = 0; s < ds.n_states; ++s) g[s] = std::exp(ds.emission_loglik(t, chain, s, theta, data));
  return g;
}
}  // namespace

HmmForwardResult hmm_forward(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta) {
  const DiscreteStateSpec& ds = require_discrete(model);
  const int T = data.size();

  HmmForwardResult fr;
  fr.filtered.assign(ds.n_chains, Eigen::MatrixXd::Zero(T, ds.n_states));
  fr.chain_loglik.assign(ds.n_chains, 0.0);

  for (int chain = 0; chain < ds.n_chains; ++chain) {
    const int f = ds.first_step ? ds.first_step(chain) : 1;
    if (f > T) continue;
    Eigen::VectorXd alpha = ds.initial(theta, chain);
    // fold in the emission at the first modeled step (a no-op when the
    // occasion is conditioned away / missing)
    alpha = alpha.cwiseProduct(emission_weights(ds, f, chain, theta, data));
    double c0 = alpha.sum();
    if (!(c0 > 0.0)) throw DataError("hmm_forward: observation impossible under the model at step " +
                                     std::to_string(f));
    fr.chain_loglik[chain] += std::log(c0);
    alpha /= c0;
    fr.filtered[chain].row(f - 1) = alpha.transpose();

    for (int t = f + 1; t <= T; ++t) {
      const Eigen::MatrixXd G = ds.transition(theta, t, chain);
      alpha = G.transpose() * alpha;
      alpha = alpha.cwiseProduct(emission_weights(ds, t, chain, theta, data));
      const double c = alpha.sum();
      if (!(c > 0.0))
        throw DataError("hmm_forward: observation impossible under the model at step " + std::to_string(t));
      fr.chain_loglik[chain] += std::log(c);
      alpha /= c;
      fr.filtered[chain].row(t - 1) = alpha.transpose();
    }
    fr.loglik += fr.chain_loglik[chain];
  }
  return fr;
}

std::vector<Eigen::MatrixXd> hmm_smooth(const HmmForwardResult& fr, const ModelDefinition& model,
                                        const TimeSeriesData& data, const ParamVector& theta) {
  const DiscreteStateSpec& ds = require_discrete(model);
  const int T = data.size();
  std::vector<Eigen::MatrixXd> smoothed(ds.n_chains, Eigen::MatrixXd::Zero(T, ds.n_states));

  for (int chain = 0; chain < ds.n_chains; ++chain) {
    const int f = ds.first_step ? ds.first_step(chain) : 1;
    if (f > T) continue;
    Eigen::VectorXd beta = Eigen::VectorXd::Ones(ds.n_states);
    smoothed[chain].row(T - 1) = fr.filtered[chain].row(T - 1);
    for (int t = T - 1; t >= f; --t) {
      const Eigen::MatrixXd G = ds.transition(theta, t + 1, chain);
      const Eigen::VectorXd g = emission_weights(ds, t + 1, chain, theta, data);
      beta = G * g.cwiseProduct(beta);
      const double norm = beta.maxCoeff();
      if (norm > 0) beta /= norm;
      Eigen::VectorXd s = fr.filtered[chain].row(t - 1).transpose().cwiseProduct(beta);
      const double c = s.sum();
      if (!(c > 0)) throw NumericalError("hmm_smooth: vanishing backward mass at step " + std::to_string(t));
      smoothed[chain].row(t - 1) = (s / c).transpose();
    }
  }
  return smoothed;
}

}  // namespace ssm
