#include "ssm/smc.hpp"

#include <cmath>

#include "ssm/errors.hpp"
#include "ssm/gauss.hpp"
#include "ssm/parallel.hpp"
#include "ssm/stats.hpp"

namespace ssm {

namespace {
constexpr int kBlock = 256;  // particles per derived stream
}

double ParticleEnsemble::ess() const {
  const double s2 = weights.squaredNorm();
  return s2 > 0 ? 1.0 / s2 : 0.0;
}

std::vector<int> systematic_resample(const Eigen::VectorXd& weights, int N, RngStream& rng) {
  const int n = static_cast<int>(weights.size());
  const double total = weights.sum();
  if (!(total > 0.0)) throw NumericalError("systematic_resample: degenerate all-zero weights");
  std::vector<int> idx(N);
  const double u0 = rng.uniform();
  double cum = weights[0] / total;
  int j = 0;
  for (int i = 0; i < N; ++i) {
    const double u = (i + u0) / N;
    while (u > cum && j + 1 < n) cum += weights[++j] / total;
    idx[i] = j;
  }
  return idx;
}

namespace {

struct FilterState {
  Eigen::MatrixXd particles;            // d x N
  Eigen::VectorXd logw;                 // unnormalized log weights
  Eigen::VectorXd w;                    // normalized weights
  std::vector<std::vector<int>> parents;  // ancestry per step (resampling or identity)
};

SmcResult run_filter(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta,
                     const SmcOptions& opts, std::uint64_t seed) {
  const int N = opts.particles;
  if (N < 2) throw DomainError("particle filters need at least 2 particles");
  const StepSchedule sched = model.make_schedule(data);
  const int S = sched.steps();
  const int d = model.state_dim;

  SmcResult res;
  res.step_loglik.assign(S, 0.0);
  res.ess_trace.assign(S, 0.0);
  res.mean.resize(S);
  res.var.resize(S);

  FilterState fs;
  fs.particles.resize(d, N);
  fs.w = Eigen::VectorXd::Constant(N, 1.0 / N);
  std::vector<Eigen::MatrixXd> history;     // pre-resample states per step
  std::vector<std::vector<int>> perms(S);   // resample permutation per step (empty = identity)
  Eigen::VectorXd w_pre;                    // weights before the final resample
  if (opts.sample_path) history.resize(S);

  // initial states
  {
    const Eigen::VectorXd m0 = model.initial_mean(theta);
    const Eigen::MatrixXd P0 = model.initial_cov(theta);
    if (P0.norm() == 0.0) {
      for (int i = 0; i < N; ++i) fs.particles.col(i) = m0;
    } else {
      RngStream rng = RngStream::derive_path(seed, {0});
      for (int i = 0; i < N; ++i) fs.particles.col(i) = mvn_sample(m0, P0, rng);
    }
  }
  Eigen::MatrixXd initial_particles = fs.particles;
  std::vector<int> initial_parent(N);
  for (int i = 0; i < N; ++i) initial_parent[i] = i;

  Eigen::MatrixXd next(d, N);
  Eigen::VectorXd incr(N);
  const int nblocks = (N + kBlock - 1) / kBlock;

  for (int t = 1; t <= S; ++t) {
    // propagate and weight, block by block with derived streams
    auto block_work = [&](int b) {
      RngStream rng = RngStream::derive_path(seed, {static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(b) + 1});
      const int lo = b * kBlock;
      const int hi = std::min(N, lo + kBlock);
      for (int i = lo; i < hi; ++i) {
        next.col(i) = model.process_sample(fs.particles.col(i), theta, t, sched.dt(t), data, rng);
        double lw = 0.0;
        for (int k : sched.obs_at[t - 1]) {
          if (!data.record(k).all_missing()) lw += model.obs_log_density(k, next.col(i), theta, data);
        }
        incr[i] = lw;
      }
    };
    if (N >= 4 * kBlock) parallel_for(nblocks, block_work);
    else
      for (int b = 0; b < nblocks; ++b) block_work(b);
    fs.particles.swap(next);

    // step log-likelihood: log sum_i W_{t-1,i} exp(lw_i)
    std::vector<double> terms(N);
    for (int i = 0; i < N; ++i) terms[i] = std::log(fs.w[i]) + incr[i];
    const double step_ll = stats::logsumexp(terms);
    if (!std::isfinite(step_ll))
      throw NumericalError("particle depletion: all particle weights vanished at step " + std::to_string(t));
    res.step_loglik[t - 1] = step_ll;

    // weight update and normalization
    double wmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i) {
      terms[i] = std::log(fs.w[i]) + incr[i];
      wmax = std::max(wmax, terms[i]);
    }
    double wsum = 0.0;
    for (int i = 0; i < N; ++i) {
      fs.w[i] = std::exp(terms[i] - wmax);
      wsum += fs.w[i];
    }
    fs.w /= wsum;

    const double ess = 1.0 / fs.w.squaredNorm();
    res.ess_trace[t - 1] = ess;

    // filtered moments before any resampling noise
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < N; ++i) mean += fs.w[i] * fs.particles.col(i);
    Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < N; ++i) {
      const Eigen::VectorXd c = fs.particles.col(i) - mean;
      var += fs.w[i] * c.cwiseProduct(c);
    }
    res.mean[t - 1] = mean;
    res.var[t - 1] = var;

    if (opts.sample_path) {
      history[t - 1] = fs.particles;
      w_pre = fs.w;
    }

    if (opts.ess_threshold > 0.0 && ess < opts.ess_threshold * N) {
      RngStream rng = RngStream::derive_path(seed, {static_cast<std::uint64_t>(t), 0});
      const std::vector<int> idx = systematic_resample(fs.w, N, rng);
      Eigen::MatrixXd resampled(d, N);
      for (int i = 0; i < N; ++i) resampled.col(i) = fs.particles.col(idx[i]);
      fs.particles.swap(resampled);
      fs.w.setConstant(1.0 / N);
      perms[t - 1] = idx;
    }
  }

  for (double l : res.step_loglik) res.loglik += l;
  res.final_ensemble.states = fs.particles;
  res.final_ensemble.weights = fs.w;

  if (opts.sample_path) {
    // sample the endpoint from the filtering weights, then walk the ancestry
    RngStream rng = RngStream::derive_path(seed, {static_cast<std::uint64_t>(S) + 1, 0});
    const double u = rng.uniform();
    int idx = N - 1;
    double cum = 0.0;
    for (int i = 0; i < N; ++i) {
      cum += w_pre[i];
      if (u <= cum) {
        idx = i;
        break;
      }
    }
    Eigen::MatrixXd path(d, S + 1);
    for (int t = S; t >= 1; --t) {
      path.col(t) = history[t - 1].col(idx);
      if (t >= 2 && !perms[t - 2].empty()) idx = perms[t - 2][idx];
    }
    path.col(0) = initial_particles.col(idx);
    res.path = path;
  }
  return res;
}

}  // namespace

SmcResult sis_filter(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta, int N,
                     std::uint64_t seed) {
  SmcOptions opts;
  opts.particles = N;
  opts.ess_threshold = 0.0;
  return run_filter(model, data, theta, opts, seed);
}

SmcResult bootstrap_filter(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta,
                           const SmcOptions& opts, std::uint64_t seed) {
  return run_filter(model, data, theta, opts, seed);
}

IteratedFilteringResult iterated_filtering(const ModelDefinition& model, const TimeSeriesData& data,
                                           const ParamVector& theta0, const CoolingSchedule& schedule, int passes,
                                           int particles, std::uint64_t seed) {
  const auto spec = theta0.spec;
  const int nfree = spec->n_free();
  if (schedule.initial_sd.size() != nfree)
    throw DomainError("iterated_filtering: one perturbation SD per free parameter required");
  for (int i = 0; i < nfree; ++i)
    if (schedule.initial_sd[i] < 0) throw DomainError("iterated_filtering: perturbation SDs must be nonnegative");
  if (!(schedule.factor > 0 && schedule.factor < 1))
    throw DomainError("iterated_filtering: cooling factor must lie in (0,1)");
  if (particles < 2) throw DomainError("iterated_filtering: need at least 2 particles");

  const StepSchedule sched = model.make_schedule(data);
  const int S = sched.steps();
  const int d = model.state_dim;
  const int N = particles;

  IteratedFilteringResult res;
  res.theta_trace.resize(passes + 1, nfree);
  res.pass_loglik.assign(passes, 0.0);

  const Eigen::VectorXd x0 = to_unconstrained(*spec, theta0);
  {
    const ParamVector nat = from_unconstrained(spec, x0);
    int k = 0;
    for (int i = 0; i < spec->size(); ++i)
      if (!spec->is_fixed(i)) res.theta_trace(0, k++) = nat.values[i];
  }

  Eigen::MatrixXd xs = x0.replicate(1, N);  // nfree x N parameter swarm
  Eigen::MatrixXd zs(d, N);
  Eigen::MatrixXd znext(d, N);
  Eigen::MatrixXd xnext(nfree, N);
  Eigen::VectorXd w(N), incr(N);

  for (int m = 0; m < passes; ++m) {
    const double cool = std::pow(schedule.factor, m);
    const Eigen::VectorXd sd = schedule.initial_sd * cool;
    double pass_ll = 0.0;
    w.setConstant(1.0 / N);

    // pass-start perturbation and state initialization
    {
      RngStream rng = RngStream::derive_path(seed, {static_cast<std::uint64_t>(m) + 1, 0});
      for (int i = 0; i < N; ++i) {
        for (int p = 0; p < nfree; ++p) xs(p, i) += sd[p] * rng.normal();
        const ParamVector th = from_unconstrained(spec, xs.col(i));
        const Eigen::MatrixXd P0 = model.initial_cov(th);
        if (P0.norm() == 0.0) zs.col(i) = model.initial_mean(th);
        else zs.col(i) = mvn_sample(model.initial_mean(th), P0, rng);
      }
    }

    for (int t = 1; t <= S; ++t) {
      RngStream rng = RngStream::derive_path(seed, {static_cast<std::uint64_t>(m) + 1, static_cast<std::uint64_t>(t)});
      try {
        for (int i = 0; i < N; ++i) {
          for (int p = 0; p < nfree; ++p) xs(p, i) += sd[p] * rng.normal();
          const ParamVector th = from_unconstrained(spec, xs.col(i));
          znext.col(i) = model.process_sample(zs.col(i), th, t, sched.dt(t), data, rng);
          double lw = 0.0;
          for (int k : sched.obs_at[t - 1]) {
            if (!data.record(k).all_missing()) lw += model.obs_log_density(k, znext.col(i), th, data);
          }
          incr[i] = lw;
        }
      } catch (const Error& e) {
        throw NumericalError("iterated_filtering: filter failure at pass " + std::to_string(m + 1) + ", step " +
                             std::to_string(t) + ": " + e.what());
      }
      zs.swap(znext);

      std::vector<double> terms(N);
      for (int i = 0; i < N; ++i) terms[i] = std::log(w[i]) + incr[i];
      const double step_ll = stats::logsumexp(terms);
      if (!std::isfinite(step_ll))
        throw NumericalError("iterated_filtering: particle depletion at pass " + std::to_string(m + 1) + ", step " +
                             std::to_string(t));
      pass_ll += step_ll;

      double wmax = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < N; ++i) wmax = std::max(wmax, terms[i]);
      double wsum = 0.0;
      for (int i = 0; i < N; ++i) {
        w[i] = std::exp(terms[i] - wmax);
        wsum += w[i];
      }
      w /= wsum;

      const double ess = 1.0 / w.squaredNorm();
      if (ess < 0.5 * N) {
        const std::vector<int> idx = systematic_resample(w, N, rng);
        Eigen::MatrixXd zres(d, N), xres(nfree, N);
        for (int i = 0; i < N; ++i) {
          zres.col(i) = zs.col(idx[i]);
          xres.col(i) = xs.col(idx[i]);
        }
        zs.swap(zres);
        xs.swap(xres);
        w.setConstant(1.0 / N);
      }
    }

    res.pass_loglik[m] = pass_ll;
    // swarm center on the natural scale
    Eigen::VectorXd xmean = Eigen::VectorXd::Zero(nfree);
    for (int i = 0; i < N; ++i) xmean += w[i] * xs.col(i);
    const ParamVector nat = from_unconstrained(spec, xmean);
    int k = 0;
    for (int i = 0; i < spec->size(); ++i)
      if (!spec->is_fixed(i)) res.theta_trace(m + 1, k++) = nat.values[i];
  }
  res.final_loglik = res.pass_loglik.empty() ? 0.0 : res.pass_loglik.back();
  return res;
}

}  // namespace ssm
