#include "ssm/model.hpp"

#include <cmath>

#include "ssm/errors.hpp"

namespace ssm {

StepSchedule identity_schedule(const TimeSeriesData& data) {
  StepSchedule s;
  s.times = data.times();
  const int T = data.size();
  // z_0 sits one increment before the first record; unit spacing for T = 1.
  const double dt1 = T >= 2 ? data.time(1) - data.time(0) : 1.0;
  s.t0 = data.time(0) - dt1;
  s.obs_at.resize(T);
  for (int t = 0; t < T; ++t) s.obs_at[t] = {t};
  return s;
}

SimulationResult simulate(const ModelDefinition& model, const ParamVector& theta, const TimeSeriesData& tmpl,
                          std::uint64_t seed) {
  const StepSchedule sched = model.make_schedule(tmpl);
  const int S = sched.steps();

  RngStream init_rng = RngStream::derive_path(seed, {0});
  RngStream proc_rng = RngStream::derive_path(seed, {1});
  RngStream obs_rng = RngStream::derive_path(seed, {2});

  Eigen::VectorXd z0 = model.initial_mean(theta);
  const Eigen::MatrixXd P0 = model.initial_cov(theta);
  if (P0.norm() > 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(P0);
    Eigen::VectorXd eps(z0.size());
    for (int i = 0; i < eps.size(); ++i) eps[i] = init_rng.normal();
    z0 += llt.matrixL() * eps;
  }

  SimulationResult out;
  out.t0 = sched.t0;
  out.state_times = sched.times;
  out.initial_state = z0;
  out.states.resize(S);

  Eigen::VectorXd zprev = z0;
  for (int t = 1; t <= S; ++t) {
    out.states[t - 1] = model.process_sample(zprev, theta, t, sched.dt(t), tmpl, proc_rng);
    zprev = out.states[t - 1];
  }

  std::vector<ObsRecord> records(tmpl.size());
  for (int t = 1; t <= S; ++t) {
    for (int i : sched.obs_at[t - 1]) {
      ObsRecord rec = model.obs_sample(i, out.states[t - 1], theta, tmpl, obs_rng);
      // Mirror the template's missingness pattern.
      for (int c = 0; c < rec.dim(); ++c) {
        if (!tmpl.record(i).is_observed(c)) {
          rec.observed[c] = 0;
          rec.value[c] = std::numeric_limits<double>::quiet_NaN();
        }
      }
      records[i] = rec;
    }
  }
  out.data = TimeSeriesData(tmpl.times(), std::move(records), tmpl.covariates(), tmpl.quality_classes());
  return out;
}

SimulationResult simulate(const ModelDefinition& model, const ParamVector& theta, const std::vector<double>& times,
                          std::uint64_t seed) {
  std::vector<ObsRecord> blanks(times.size(), ObsRecord(Eigen::VectorXd::Zero(model.obs_dim)));
  TimeSeriesData tmpl(times, std::move(blanks));
  return simulate(model, theta, tmpl, seed);
}

double joint_log_likelihood(const ModelDefinition& model, const ParamVector& theta,
                            const std::vector<Eigen::VectorXd>& states, const TimeSeriesData& data) {
  const StepSchedule sched = model.make_schedule(data);
  const int S = sched.steps();
  if (static_cast<int>(states.size()) != S) throw DomainError("joint_log_likelihood: states not aligned with data steps");
  if (model.is_discrete()) {
    for (const auto& z : states) {
      for (int c = 0; c < z.size(); ++c) {
        if (z[c] != 0.0 && z[c] != 1.0) throw DomainError("joint_log_likelihood: discrete state out of support");
      }
    }
  }
  double ll = 0.0;
  Eigen::VectorXd zprev = model.initial_mean(theta);
  for (int t = 1; t <= S; ++t) {
    ll += model.process_log_density(states[t - 1], zprev, theta, t, sched.dt(t), data);
    for (int i : sched.obs_at[t - 1]) {
      if (!data.record(i).all_missing()) ll += model.obs_log_density(i, states[t - 1], theta, data);
    }
    zprev = states[t - 1];
  }
  return ll;
}

}  // namespace ssm
