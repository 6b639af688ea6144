#include "ssm/kalman.hpp"

#include <cmath>

#include "ssm/errors.hpp"
#include "ssm/gauss.hpp"

namespace ssm {

namespace {

void require_linear_gaussian(const ModelDefinition& model) {
  if (!model.has_linear_gaussian())
    throw ConfigError("model '" + model.name + "' does not expose linear-Gaussian coefficients");
}

std::vector<int> observed_coords(const ObsRecord& rec) {
  std::vector<int> idx;
  for (int c = 0; c < rec.dim(); ++c)
    if (rec.is_observed(c)) idx.push_back(c);
  return idx;
}

/// Smoothing gain J = P_filt T' P_pred^{-1}; zero when the prediction is
/// degenerate (deterministic step).
Eigen::MatrixXd smoothing_gain(const GaussianBelief& filt, const Eigen::MatrixXd& T, const GaussianBelief& pred) {
  const int d = static_cast<int>(filt.mean.size());
  if (pred.cov.norm() == 0.0) return Eigen::MatrixXd::Zero(d, d);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(pred.cov);
  if (ldlt.info() != Eigen::Success) throw NumericalError("smoother: predicted covariance factorization failed");
  return ldlt.solve(T * filt.cov).transpose();
}

}  // namespace

FilterResult kalman_filter(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta) {
  require_linear_gaussian(model);
  const int T = data.size();
  const int d = model.state_dim;

  FilterResult fr;
  fr.initial.mean = model.initial_mean(theta);
  fr.initial.cov = sanitize_covariance(model.initial_cov(theta));
  fr.predicted.resize(T);
  fr.filtered.resize(T);
  fr.pred_obs_mean.resize(T);
  fr.pred_obs_cov.resize(T);
  fr.step_loglik.assign(T, 0.0);

  Eigen::VectorXd m = fr.initial.mean;
  Eigen::MatrixXd P = fr.initial.cov;

  for (int t = 1; t <= T; ++t) {
    const LinGaussCoeffs C = model.linear_gaussian(theta, t, data);

    // predict
    Eigen::VectorXd a = C.T * m + C.c;
    Eigen::MatrixXd R = sanitize_covariance(C.T * P * C.T.transpose() + C.Q);
    fr.predicted[t - 1] = {a, R};
    fr.pred_obs_mean[t - 1] = C.Z * a + C.d;
    fr.pred_obs_cov[t - 1] = C.Z * R * C.Z.transpose() + C.H;

    const ObsRecord& rec = data.record(t - 1);
    const auto obs = observed_coords(rec);
    if (obs.empty()) {
      m = a;
      P = R;
      fr.filtered[t - 1] = {m, P};
      continue;
    }

    const int k = static_cast<int>(obs.size());
    Eigen::MatrixXd Zs(k, d);
    Eigen::MatrixXd Hs(k, k);
    Eigen::VectorXd ys(k);
    for (int i = 0; i < k; ++i) {
      Zs.row(i) = C.Z.row(obs[i]);
      ys[i] = rec.value[obs[i]];
      for (int j = 0; j < k; ++j) Hs(i, j) = C.H(obs[i], obs[j]);
    }
    Eigen::VectorXd ds(k);
    for (int i = 0; i < k; ++i) ds[i] = C.d[obs[i]];
    const Eigen::VectorXd innov = ys - (Zs * a + ds);
    const Eigen::MatrixXd S = Zs * R * Zs.transpose() + Hs;

    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success)
      throw NumericalError("singular innovation covariance at step " + std::to_string(t));
    fr.step_loglik[t - 1] = mvn_logpdf(innov, Eigen::VectorXd::Zero(k), S);

    const Eigen::MatrixXd K = llt.solve(Zs * R.transpose()).transpose();  // R Zs' S^{-1}
    m = a + K * innov;
    // Joseph form keeps the covariance symmetric PSD
    const Eigen::MatrixXd IKZ = Eigen::MatrixXd::Identity(d, d) - K * Zs;
    P = sanitize_covariance(IKZ * R * IKZ.transpose() + K * Hs * K.transpose());
    fr.filtered[t - 1] = {m, P};
  }
  for (double l : fr.step_loglik) fr.loglik += l;
  return fr;
}

std::vector<GaussianBelief> kalman_smoother(const FilterResult& fr, const ModelDefinition& model,
                                            const TimeSeriesData& data, const ParamVector& theta) {
  require_linear_gaussian(model);
  const int T = static_cast<int>(fr.filtered.size());
  if (T == 0) throw DomainError("kalman_smoother: empty filter result");
  std::vector<GaussianBelief> sm(T);
  sm[T - 1] = fr.filtered[T - 1];
  for (int t = T - 1; t >= 1; --t) {
    const LinGaussCoeffs C = model.linear_gaussian(theta, t + 1, data);
    const Eigen::MatrixXd J = smoothing_gain(fr.filtered[t - 1], C.T, fr.predicted[t]);
    sm[t - 1].mean = fr.filtered[t - 1].mean + J * (sm[t].mean - fr.predicted[t].mean);
    sm[t - 1].cov =
        sanitize_covariance(fr.filtered[t - 1].cov + J * (sm[t].cov - fr.predicted[t].cov) * J.transpose());
  }
  return sm;
}

std::vector<GaussianBelief> forecast(const FilterResult& fr, const ModelDefinition& model, const TimeSeriesData& data,
                                     const ParamVector& theta, int k) {
  require_linear_gaussian(model);
  if (k < 1) throw DomainError("forecast: horizon must be at least 1");
  const int T = static_cast<int>(fr.filtered.size());
  Eigen::VectorXd m = fr.filtered[T - 1].mean;
  Eigen::MatrixXd P = fr.filtered[T - 1].cov;
  std::vector<GaussianBelief> out(k);
  const LinGaussCoeffs C = model.linear_gaussian(theta, T, data);
  for (int j = 0; j < k; ++j) {
    m = C.T * m + C.c;
    P = sanitize_covariance(C.T * P * C.T.transpose() + C.Q);
    out[j] = {m, P};
  }
  return out;
}

Eigen::MatrixXd ffbs_sample(const FilterResult& fr, const ModelDefinition& model, const TimeSeriesData& data,
                            const ParamVector& theta, RngStream& rng) {
  require_linear_gaussian(model);
  const int T = static_cast<int>(fr.filtered.size());
  const int d = static_cast<int>(fr.filtered[0].mean.size());
  Eigen::MatrixXd path(d, T + 1);

  path.col(T) = mvn_sample(fr.filtered[T - 1].mean, fr.filtered[T - 1].cov, rng);
  for (int t = T - 1; t >= 0; --t) {
    const GaussianBelief& belief = t >= 1 ? fr.filtered[t - 1] : fr.initial;
    const LinGaussCoeffs C = model.linear_gaussian(theta, t + 1, data);
    const Eigen::MatrixXd J = smoothing_gain(belief, C.T, fr.predicted[t]);
    const Eigen::VectorXd mean = belief.mean + J * (path.col(t + 1) - fr.predicted[t].mean);
    const Eigen::MatrixXd cov =
        sanitize_covariance(belief.cov - J * fr.predicted[t].cov * J.transpose());
    path.col(t) = mvn_sample(mean, cov, rng);
  }
  return path;
}

}  // namespace ssm
