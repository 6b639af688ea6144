#include "ssm/zoo.hpp"

#include <cmath>
#include <limits>

#include "ssm/errors.hpp"
#include "ssm/gauss.hpp"
#include "ssm/stats.hpp"

namespace ssm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::shared_ptr<const ParameterSpec> make_spec(std::vector<std::string> names, std::vector<Transform> transforms) {
  return std::make_shared<const ParameterSpec>(std::move(names), std::move(transforms));
}

ParamVector make_defaults(const std::shared_ptr<const ParameterSpec>& spec, std::initializer_list<double> vals) {
  Eigen::VectorXd v(spec->size());
  int i = 0;
  for (double x : vals) v[i++] = x;
  return ParamVector(spec, std::move(v));
}

double record_dt(const TimeSeriesData& data, int t) {
  if (t <= 1) return data.size() >= 2 ? data.time(1) - data.time(0) : 1.0;
  return data.time(t - 1) - data.time(t - 2);
}

}  // namespace

void finalize_linear_gaussian(ModelDefinition& m) {
  auto lg = m.linear_gaussian;

  m.process_log_density = [lg](const Eigen::VectorXd& z, const Eigen::VectorXd& zprev, const ParamVector& th, int t,
                               double, const TimeSeriesData& data) {
    const LinGaussCoeffs C = lg(th, t, data);
    return mvn_logpdf(z, C.T * zprev + C.c, C.Q);
  };
  m.process_sample = [lg](const Eigen::VectorXd& zprev, const ParamVector& th, int t, double,
                          const TimeSeriesData& data, RngStream& rng) {
    const LinGaussCoeffs C = lg(th, t, data);
    return mvn_sample(C.T * zprev + C.c, C.Q, rng);
  };
  m.obs_log_density = [lg](int i, const Eigen::VectorXd& z, const ParamVector& th, const TimeSeriesData& data) {
    const ObsRecord& rec = data.record(i);
    std::vector<int> obs;
    for (int c = 0; c < rec.dim(); ++c)
      if (rec.is_observed(c)) obs.push_back(c);
    if (obs.empty()) return 0.0;
    const LinGaussCoeffs C = lg(th, i + 1, data);
    const Eigen::VectorXd mean = C.Z * z + C.d;
    Eigen::VectorXd y(obs.size()), mu(obs.size());
    Eigen::MatrixXd H(obs.size(), obs.size());
    for (size_t a = 0; a < obs.size(); ++a) {
      y[a] = rec.value[obs[a]];
      mu[a] = mean[obs[a]];
      for (size_t b = 0; b < obs.size(); ++b) H(a, b) = C.H(obs[a], obs[b]);
    }
    return mvn_logpdf(y, mu, H);
  };
  m.obs_sample = [lg](int i, const Eigen::VectorXd& z, const ParamVector& th, const TimeSeriesData& data,
                      RngStream& rng) {
    const LinGaussCoeffs C = lg(th, i + 1, data);
    return ObsRecord(mvn_sample(C.Z * z + C.d, C.H, rng));
  };
  m.process_derivs = [lg](const Eigen::VectorXd& z, const Eigen::VectorXd& zprev, const ParamVector& th, int t,
                          double, const TimeSeriesData& data) {
    const LinGaussCoeffs C = lg(th, t, data);
    Eigen::LLT<Eigen::MatrixXd> llt(C.Q);
    if (llt.info() != Eigen::Success) throw NumericalError("linear-Gaussian derivatives need positive-definite Q");
    const Eigen::VectorXd r = z - C.T * zprev - C.c;
    const Eigen::MatrixXd Qi = llt.solve(Eigen::MatrixXd::Identity(z.size(), z.size()));
    PairDerivs d;
    d.g_z = -Qi * r;
    d.g_zprev = C.T.transpose() * Qi * r;
    d.h_zz = -Qi;
    d.h_z_zprev = Qi * C.T;
    d.h_zprev_zprev = -C.T.transpose() * Qi * C.T;
    return d;
  };
  m.obs_derivs = [lg](int i, const Eigen::VectorXd& z, const ParamVector& th, const TimeSeriesData& data) {
    const ObsRecord& rec = data.record(i);
    const LinGaussCoeffs C = lg(th, i + 1, data);
    ObsStateDerivs d;
    d.g = Eigen::VectorXd::Zero(z.size());
    d.h = Eigen::MatrixXd::Zero(z.size(), z.size());
    std::vector<int> obs;
    for (int c = 0; c < rec.dim(); ++c)
      if (rec.is_observed(c)) obs.push_back(c);
    if (obs.empty()) return d;
    Eigen::MatrixXd Zs(obs.size(), z.size());
    Eigen::MatrixXd Hs(obs.size(), obs.size());
    Eigen::VectorXd r(obs.size());
    const Eigen::VectorXd mean = C.Z * z + C.d;
    for (size_t a = 0; a < obs.size(); ++a) {
      Zs.row(a) = C.Z.row(obs[a]);
      r[a] = rec.value[obs[a]] - mean[obs[a]];
      for (size_t b = 0; b < obs.size(); ++b) Hs(a, b) = C.H(obs[a], obs[b]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(Hs);
    if (llt.info() != Eigen::Success) throw NumericalError("linear-Gaussian derivatives need positive-definite H");
    d.g = Zs.transpose() * llt.solve(r);
    d.h = -Zs.transpose() * llt.solve(Zs);
    return d;
  };
  m.obs_mean_fn = [lg](const Eigen::VectorXd& z, const ParamVector& th, int i, const TimeSeriesData& data) {
    const LinGaussCoeffs C = lg(th, i + 1, data);
    return Eigen::VectorXd(C.Z * z + C.d);
  };
  m.obs_var_fn = [lg](const Eigen::VectorXd&, const ParamVector& th, int i, const TimeSeriesData& data) {
    const LinGaussCoeffs C = lg(th, i + 1, data);
    return Eigen::VectorXd(C.H.diagonal());
  };
  m.obs_cdf = [lg](double y, int c, const Eigen::VectorXd& z, const ParamVector& th, int i,
                   const TimeSeriesData& data) {
    const LinGaussCoeffs C = lg(th, i + 1, data);
    const double mu = (C.Z * z + C.d)[c];
    const double sd = std::sqrt(C.H(c, c));
    if (!(sd > 0)) return y >= mu ? 1.0 : 0.0;
    return stats::norm_cdf((y - mu) / sd);
  };
  m.process_noise = [lg](const Eigen::VectorXd& z, const Eigen::VectorXd& zprev, const ParamVector& th, int t,
                         double, const TimeSeriesData& data) {
    const LinGaussCoeffs C = lg(th, t, data);
    return Eigen::VectorXd(z - C.T * zprev - C.c);
  };
  m.process_noise_sd = [lg](const ParamVector& th, int t, double) {
    std::vector<ObsRecord> blank(std::max(t, 2), ObsRecord(Eigen::VectorXd::Zero(1)));
    std::vector<double> times(blank.size());
    for (size_t k = 0; k < times.size(); ++k) times[k] = static_cast<double>(k + 1);
    const TimeSeriesData dummy(times, blank);
    const LinGaussCoeffs C = lg(th, t, dummy);
    return Eigen::VectorXd(C.Q.diagonal().cwiseSqrt());
  };
}

// ---------------------------------------------------------------------------
// NDLM

ModelDefinition make_ndlm(double alpha, double beta, double sigma_p, double sigma_o, double z0) {
  if (sigma_p < 0 || sigma_o < 0) throw DomainError("make_ndlm: noise scales must be nonnegative");
  if (sigma_p == 0 && sigma_o == 0) throw ConfigError("make_ndlm: sigma_p and sigma_o cannot both be zero");
  ModelDefinition m;
  m.name = "ndlm";
  m.state_dim = 1;
  m.obs_dim = 1;
  m.time_invariant = true;
  m.param_spec = make_spec({"alpha", "beta", "sigma_p", "sigma_o", "z0"},
                           {Transform::identity(), Transform::identity(), Transform::log(), Transform::log(),
                            Transform::identity()});
  m.default_params = make_defaults(m.param_spec, {alpha, beta, sigma_p, sigma_o, z0});
  m.initial_mean = [](const ParamVector& th) { return Eigen::VectorXd::Constant(1, th["z0"]); };
  m.initial_cov = [](const ParamVector&) { return Eigen::MatrixXd::Zero(1, 1); };
  m.linear_gaussian = [](const ParamVector& th, int, const TimeSeriesData&) {
    LinGaussCoeffs C;
    C.T = Eigen::MatrixXd::Constant(1, 1, th["beta"]);
    C.c = Eigen::VectorXd::Zero(1);
    C.Q = Eigen::MatrixXd::Constant(1, 1, th["sigma_p"] * th["sigma_p"]);
    C.Z = Eigen::MatrixXd::Constant(1, 1, th["alpha"]);
    C.d = Eigen::VectorXd::Zero(1);
    C.H = Eigen::MatrixXd::Constant(1, 1, th["sigma_o"] * th["sigma_o"]);
    return C;
  };
  finalize_linear_gaussian(m);
  m.state_from_obs = [](const ObsRecord& rec) {
    const double y = rec.is_observed(0) ? rec.value[0] : 0.0;
    return Eigen::VectorXd::Constant(1, y);
  };
  return m;
}

// ---------------------------------------------------------------------------
// Stochastic logistic

ModelDefinition make_logistic(double beta0, double beta1, double sigma_p, double sigma_o, LogisticScale scale,
                              double z0) {
  if (beta1 > 0) throw DomainError("make_logistic: beta1 <= 0 determines how much the growth rate decreases");
  if (!(sigma_p > 0) || !(sigma_o > 0)) throw DomainError("make_logistic: noise scales must be positive");
  if (!(z0 > 0)) throw DomainError("make_logistic: z0 must be positive");
  ModelDefinition m;
  m.name = scale == LogisticScale::Natural ? "logistic" : "logistic_log";
  m.state_dim = 1;
  m.obs_dim = 1;
  m.time_invariant = true;
  m.param_spec = make_spec({"beta0", "beta1", "sigma_p", "sigma_o", "z0"},
                           {Transform::identity(), Transform::identity(), Transform::log(), Transform::log(),
                            Transform::log()});
  m.default_params = make_defaults(m.param_spec, {beta0, beta1, sigma_p, sigma_o, z0});
  const bool natural = scale == LogisticScale::Natural;
  m.initial_mean = [natural](const ParamVector& th) {
    return Eigen::VectorXd::Constant(1, natural ? th["z0"] : std::log(th["z0"]));
  };
  m.initial_cov = [](const ParamVector&) { return Eigen::MatrixXd::Zero(1, 1); };

  if (natural) {
    m.process_log_density = [](const Eigen::VectorXd& z, const Eigen::VectorXd& zp, const ParamVector& th, int,
                               double, const TimeSeriesData&) {
      if (!(z[0] > 0) || !(zp[0] > 0)) return -kInf;
      const double eps = std::log(z[0]) - std::log(zp[0]) - th["beta0"] - th["beta1"] * zp[0];
      return stats::norm_logpdf(eps, 0.0, th["sigma_p"]) - std::log(z[0]);
    };
    m.process_sample = [](const Eigen::VectorXd& zp, const ParamVector& th, int, double, const TimeSeriesData&,
                          RngStream& rng) {
      const double e = th["sigma_p"] * rng.normal();
      return Eigen::VectorXd::Constant(1, zp[0] * std::exp(th["beta0"] + th["beta1"] * zp[0] + e));
    };
    m.process_derivs = [](const Eigen::VectorXd& z, const Eigen::VectorXd& zp, const ParamVector& th, int, double,
                          const TimeSeriesData&) {
      const double s2 = th["sigma_p"] * th["sigma_p"];
      const double u = 1.0 / z[0], up = 1.0 / zp[0];
      const double a = up + th["beta1"];  // -d eps / d zprev
      const double eps = std::log(z[0]) - std::log(zp[0]) - th["beta0"] - th["beta1"] * zp[0];
      PairDerivs d;
      d.g_z = Eigen::VectorXd::Constant(1, -eps * u / s2 - u);
      d.g_zprev = Eigen::VectorXd::Constant(1, eps * a / s2);
      d.h_zz = Eigen::MatrixXd::Constant(1, 1, (eps - 1.0) * u * u / s2 + u * u);
      d.h_z_zprev = Eigen::MatrixXd::Constant(1, 1, u * a / s2);
      d.h_zprev_zprev = Eigen::MatrixXd::Constant(1, 1, (-a * a - eps * up * up) / s2);
      return d;
    };
    m.process_noise = [](const Eigen::VectorXd& z, const Eigen::VectorXd& zp, const ParamVector& th, int, double,
                         const TimeSeriesData&) {
      return Eigen::VectorXd::Constant(1, std::log(z[0]) - std::log(zp[0]) - th["beta0"] - th["beta1"] * zp[0]);
    };
    m.state_from_obs = [](const ObsRecord& rec) {
      const double y = rec.is_observed(0) ? rec.value[0] : 1.0;
      return Eigen::VectorXd::Constant(1, std::max(y, 1e-6));
    };
    // y = z + eta
    m.obs_log_density = [](int i, const Eigen::VectorXd& z, const ParamVector& th, const TimeSeriesData& data) {
      const ObsRecord& rec = data.record(i);
      if (!rec.is_observed(0)) return 0.0;
      return stats::norm_logpdf(rec.value[0], z[0], th["sigma_o"]);
    };
    m.obs_sample = [](int, const Eigen::VectorXd& z, const ParamVector& th, const TimeSeriesData&, RngStream& rng) {
      return ObsRecord(Eigen::VectorXd::Constant(1, z[0] + th["sigma_o"] * rng.normal()));
    };
    m.obs_derivs = [](int i, const Eigen::VectorXd& z, const ParamVector& th, const TimeSeriesData& data) {
      ObsStateDerivs d;
      d.g = Eigen::VectorXd::Zero(1);
      d.h = Eigen::MatrixXd::Zero(1, 1);
      const ObsRecord& rec = data.record(i);
      if (!rec.is_observed(0)) return d;
      const double s2 = th["sigma_o"] * th["sigma_o"];
      d.g[0] = (rec.value[0] - z[0]) / s2;
      d.h(0, 0) = -1.0 / s2;
      return d;
    };
    m.obs_mean_fn = [](const Eigen::VectorXd& z, const ParamVector&, int, const TimeSeriesData&) { return z; };
    m.obs_var_fn = [](const Eigen::VectorXd&, const ParamVector& th, int, const TimeSeriesData&) {
      return Eigen::VectorXd::Constant(1, th["sigma_o"] * th["sigma_o"]);
    };
    m.obs_cdf = [](double y, int, const Eigen::VectorXd& z, const ParamVector& th, int, const TimeSeriesData&) {
      return stats::norm_cdf((y - z[0]) / th["sigma_o"]);
    };
  } else {
    m.process_log_density = [](const Eigen::VectorXd& w, const Eigen::VectorXd& wp, const ParamVector& th, int,
                               double, const TimeSeriesData&) {
      const double eps = w[0] - wp[0] - th["beta0"] - th["beta1"] * std::exp(wp[0]);
      return stats::norm_logpdf(eps, 0.0, th["sigma_p"]);
    };
    m.process_sample = [](const Eigen::VectorXd& wp, const ParamVector& th, int, double, const TimeSeriesData&,
                          RngStream& rng) {
      const double e = th["sigma_p"] * rng.normal();
      return Eigen::VectorXd::Constant(1, wp[0] + th["beta0"] + th["beta1"] * std::exp(wp[0]) + e);
    };
    m.process_derivs = [](const Eigen::VectorXd& w, const Eigen::VectorXd& wp, const ParamVector& th, int, double,
                          const TimeSeriesData&) {
      const double s2 = th["sigma_p"] * th["sigma_p"];
      const double ew = std::exp(wp[0]);
      const double A = 1.0 + th["beta1"] * ew;  // -d eps / d wprev
      const double eps = w[0] - wp[0] - th["beta0"] - th["beta1"] * ew;
      PairDerivs d;
      d.g_z = Eigen::VectorXd::Constant(1, -eps / s2);
      d.g_zprev = Eigen::VectorXd::Constant(1, eps * A / s2);
      d.h_zz = Eigen::MatrixXd::Constant(1, 1, -1.0 / s2);
      d.h_z_zprev = Eigen::MatrixXd::Constant(1, 1, A / s2);
      d.h_zprev_zprev = Eigen::MatrixXd::Constant(1, 1, (-A * A - eps * th["beta1"] * ew) / s2);
      return d;
    };
    m.process_noise = [](const Eigen::VectorXd& w, const Eigen::VectorXd& wp, const ParamVector& th, int, double,
                         const TimeSeriesData&) {
      return Eigen::VectorXd::Constant(1, w[0] - wp[0] - th["beta0"] - th["beta1"] * std::exp(wp[0]));
    };
    m.state_from_obs = [](const ObsRecord& rec) {
      const double y = rec.is_observed(0) ? rec.value[0] : 1.0;
      return Eigen::VectorXd::Constant(1, std::log(std::max(y, 1e-6)));
    };
    m.obs_log_density = [](int i, const Eigen::VectorXd& w, const ParamVector& th, const TimeSeriesData& data) {
      const ObsRecord& rec = data.record(i);
      if (!rec.is_observed(0)) return 0.0;
      return stats::norm_logpdf(rec.value[0], std::exp(w[0]), th["sigma_o"]);
    };
    m.obs_sample = [](int, const Eigen::VectorXd& w, const ParamVector& th, const TimeSeriesData&, RngStream& rng) {
      return ObsRecord(Eigen::VectorXd::Constant(1, std::exp(w[0]) + th["sigma_o"] * rng.normal()));
    };
    m.obs_derivs = [](int i, const Eigen::VectorXd& w, const ParamVector& th, const TimeSeriesData& data) {
      ObsStateDerivs d;
      d.g = Eigen::VectorXd::Zero(1);
      d.h = Eigen::MatrixXd::Zero(1, 1);
      const ObsRecord& rec = data.record(i);
      if (!rec.is_observed(0)) return d;
      const double s2 = th["sigma_o"] * th["sigma_o"];
      const double ew = std::exp(w[0]);
      const double r = rec.value[0] - ew;
      d.g[0] = r * ew / s2;
      d.h(0, 0) = ew * (r - ew) / s2;
      return d;
    };
    m.obs_mean_fn = [](const Eigen::VectorXd& w, const ParamVector&, int, const TimeSeriesData&) {
      return Eigen::VectorXd::Constant(1, std::exp(w[0]));
    };
    m.obs_var_fn = [](const Eigen::VectorXd&, const ParamVector& th, int, const TimeSeriesData&) {
      return Eigen::VectorXd::Constant(1, th["sigma_o"] * th["sigma_o"]);
    };
    m.obs_cdf = [](double y, int, const Eigen::VectorXd& w, const ParamVector& th, int, const TimeSeriesData&) {
      return stats::norm_cdf((y - std::exp(w[0])) / th["sigma_o"]);
    };
  }
  m.process_noise_sd = [](const ParamVector& th, int, double) {
    return Eigen::VectorXd::Constant(1, th["sigma_p"]);
  };
  return m;
}

// ---------------------------------------------------------------------------
// Stochastic Gompertz

ModelDefinition make_gompertz(double beta0, double beta1, double sigma_p, double sigma_o, GompertzForm form,
                              std::optional<std::string> covariate_name, double beta2, double z0) {
  if (!(sigma_p > 0) || !(sigma_o > 0)) throw DomainError("make_gompertz: noise scales must be positive");
  if (!(z0 > 0)) throw DomainError("make_gompertz: z0 must be positive");
  ModelDefinition m;
  m.name = form == GompertzForm::Raw ? "gompertz_raw" : "gompertz";
  m.state_dim = 1;
  m.obs_dim = 1;
  m.time_invariant = !covariate_name.has_value();
  m.param_spec = make_spec({"beta0", "beta1", "sigma_p", "sigma_o", "beta2", "z0"},
                           {Transform::identity(), Transform::identity(), Transform::log(), Transform::log(),
                            Transform::identity(), Transform::log()});
  if (!covariate_name) {
    // beta2 is inert without a covariate; keep it fixed at 0
    m.param_spec = std::make_shared<const ParameterSpec>(m.param_spec->with_fixed("beta2", 0.0));
    beta2 = 0.0;
  }
  m.default_params = make_defaults(m.param_spec, {beta0, beta1, sigma_p, sigma_o, beta2, z0});
  const std::string cov = covariate_name.value_or("");

  auto intercept = [cov](const ParamVector& th, int t, const TimeSeriesData& data) {
    double c = th["beta0"];
    if (!cov.empty()) c += th["beta2"] * data.covariate(cov)[t - 1];
    return c;
  };

  if (form == GompertzForm::Linearized) {
    m.initial_mean = [](const ParamVector& th) { return Eigen::VectorXd::Constant(1, std::log(th["z0"])); };
    m.initial_cov = [](const ParamVector&) { return Eigen::MatrixXd::Zero(1, 1); };
    m.linear_gaussian = [intercept](const ParamVector& th, int t, const TimeSeriesData& data) {
      LinGaussCoeffs C;
      C.T = Eigen::MatrixXd::Constant(1, 1, 1.0 + th["beta1"]);
      C.c = Eigen::VectorXd::Constant(1, intercept(th, t, data));
      C.Q = Eigen::MatrixXd::Constant(1, 1, th["sigma_p"] * th["sigma_p"]);
      C.Z = Eigen::MatrixXd::Constant(1, 1, 1.0);
      C.d = Eigen::VectorXd::Zero(1);
      C.H = Eigen::MatrixXd::Constant(1, 1, th["sigma_o"] * th["sigma_o"]);
      return C;
    };
    finalize_linear_gaussian(m);
    m.state_from_obs = [](const ObsRecord& rec) {
      return Eigen::VectorXd::Constant(1, rec.is_observed(0) ? rec.value[0] : 0.0);
    };
    return m;
  }

  // Raw form: population scale, lognormal observation error.
  m.initial_mean = [](const ParamVector& th) { return Eigen::VectorXd::Constant(1, th["z0"]); };
  m.initial_cov = [](const ParamVector&) { return Eigen::MatrixXd::Zero(1, 1); };
  m.process_log_density = [intercept](const Eigen::VectorXd& z, const Eigen::VectorXd& zp, const ParamVector& th,
                                      int t, double, const TimeSeriesData& data) {
    if (!(z[0] > 0) || !(zp[0] > 0)) return -kInf;
    const double eps = std::log(z[0]) - (1.0 + th["beta1"]) * std::log(zp[0]) - intercept(th, t, data);
    return stats::norm_logpdf(eps, 0.0, th["sigma_p"]) - std::log(z[0]);
  };
  m.process_sample = [intercept](const Eigen::VectorXd& zp, const ParamVector& th, int t, double,
                                 const TimeSeriesData& data, RngStream& rng) {
    const double e = th["sigma_p"] * rng.normal();
    const double w = (1.0 + th["beta1"]) * std::log(zp[0]) + intercept(th, t, data) + e;
    return Eigen::VectorXd::Constant(1, std::exp(w));
  };
  m.process_derivs = [intercept](const Eigen::VectorXd& z, const Eigen::VectorXd& zp, const ParamVector& th, int t,
                                 double, const TimeSeriesData& data) {
    const double s2 = th["sigma_p"] * th["sigma_p"];
    const double u = 1.0 / z[0], up = 1.0 / zp[0];
    const double b = 1.0 + th["beta1"];
    const double a = b * up;  // -d eps / d zprev
    const double eps = std::log(z[0]) - b * std::log(zp[0]) - intercept(th, t, data);
    PairDerivs d;
    d.g_z = Eigen::VectorXd::Constant(1, -eps * u / s2 - u);
    d.g_zprev = Eigen::VectorXd::Constant(1, eps * a / s2);
    d.h_zz = Eigen::MatrixXd::Constant(1, 1, (eps - 1.0) * u * u / s2 + u * u);
    d.h_z_zprev = Eigen::MatrixXd::Constant(1, 1, u * a / s2);
    d.h_zprev_zprev = Eigen::MatrixXd::Constant(1, 1, (-a * a - eps * b * up * up) / s2);
    return d;
  };
  m.process_noise = [intercept](const Eigen::VectorXd& z, const Eigen::VectorXd& zp, const ParamVector& th, int t,
                                double, const TimeSeriesData& data) {
    return Eigen::VectorXd::Constant(1, std::log(z[0]) - (1.0 + th["beta1"]) * std::log(zp[0]) -
                                            intercept(th, t, data));
  };
  m.process_noise_sd = [](const ParamVector& th, int, double) {
    return Eigen::VectorXd::Constant(1, th["sigma_p"]);
  };
  m.obs_log_density = [](int i, const Eigen::VectorXd& z, const ParamVector& th, const TimeSeriesData& data) {
    const ObsRecord& rec = data.record(i);
    if (!rec.is_observed(0)) return 0.0;
    const double y = rec.value[0];
    if (!(y > 0) || !(z[0] > 0)) return -kInf;
    return stats::norm_logpdf(std::log(y), std::log(z[0]), th["sigma_o"]) - std::log(y);
  };
  m.obs_sample = [](int, const Eigen::VectorXd& z, const ParamVector& th, const TimeSeriesData&, RngStream& rng) {
    return ObsRecord(Eigen::VectorXd::Constant(1, z[0] * std::exp(th["sigma_o"] * rng.normal())));
  };
  m.obs_derivs = [](int i, const Eigen::VectorXd& z, const ParamVector& th, const TimeSeriesData& data) {
    ObsStateDerivs d;
    d.g = Eigen::VectorXd::Zero(1);
    d.h = Eigen::MatrixXd::Zero(1, 1);
    const ObsRecord& rec = data.record(i);
    if (!rec.is_observed(0)) return d;
    const double s2 = th["sigma_o"] * th["sigma_o"];
    const double u = 1.0 / z[0];
    const double r = std::log(rec.value[0]) - std::log(z[0]);
    d.g[0] = r * u / s2;
    d.h(0, 0) = (-1.0 - r) * u * u / s2;
    return d;
  };
  m.obs_mean_fn = [](const Eigen::VectorXd& z, const ParamVector& th, int, const TimeSeriesData&) {
    // lognormal mean
    return Eigen::VectorXd::Constant(1, z[0] * std::exp(0.5 * th["sigma_o"] * th["sigma_o"]));
  };
  m.obs_var_fn = [](const Eigen::VectorXd& z, const ParamVector& th, int, const TimeSeriesData&) {
    const double s2 = th["sigma_o"] * th["sigma_o"];
    return Eigen::VectorXd::Constant(1, (std::exp(s2) - 1.0) * std::exp(s2) * z[0] * z[0]);
  };
  m.obs_cdf = [](double y, int, const Eigen::VectorXd& z, const ParamVector& th, int, const TimeSeriesData&) {
    if (!(y > 0)) return 0.0;
    return stats::norm_cdf((std::log(y) - std::log(z[0])) / th["sigma_o"]);
  };
  m.state_from_obs = [](const ObsRecord& rec) {
    const double y = rec.is_observed(0) ? rec.value[0] : 1.0;
    return Eigen::VectorXd::Constant(1, std::max(y, 1e-6));
  };
  return m;
}

// ---------------------------------------------------------------------------
// DCRW

void DcrwErrorTable::validate() const {
  if (classes.empty()) throw DomainError("DcrwErrorTable: at least one quality class is required");
  for (const auto& [q, e] : classes) {
    if (!(e.s_lon > 0 && e.s_lat > 0)) throw DomainError("DcrwErrorTable: scales must be positive");
    if (!(e.df_lon > 0 && e.df_lat > 0)) throw DomainError("DcrwErrorTable: degrees of freedom must be positive");
    (void)q;
  }
}

InterpolationIndex dcrw_interpolation_index(const std::vector<double>& times, double grid_interval) {
  if (!(grid_interval > 0)) throw DomainError("grid_interval must be positive");
  InterpolationIndex idx;
  const double t1 = times.front();
  const int S = std::max(1, static_cast<int>(std::ceil((times.back() - t1) / grid_interval - 1e-9)));
  for (double ti : times) {
    int k;
    double j;
    if (ti <= t1) {
      k = 1;
      j = 0.0;
    } else {
      k = static_cast<int>(std::ceil((ti - t1) / grid_interval - 1e-9));
      k = std::min(std::max(k, 1), S);
      j = (ti - (t1 + (k - 1) * grid_interval)) / grid_interval;
      j = std::min(std::max(j, 0.0), 1.0);
    }
    idx.step.push_back(k);
    idx.frac.push_back(j);
  }
  return idx;
}

ModelDefinition make_dcrw(double gamma, double sigma_lon, double sigma_lat, double rho,
                          const DcrwErrorTable& error_table, double grid_interval, double z0_lon, double z0_lat) {
  if (!(gamma >= 0 && gamma <= 1)) throw DomainError("make_dcrw: gamma can take values between 0 and 1");
  if (sigma_lon < 0 || sigma_lat < 0) throw DomainError("make_dcrw: process scales must be nonnegative");
  if (!(rho > -1 && rho < 1)) throw DomainError("make_dcrw: rho must lie in (-1, 1)");
  if (!(grid_interval > 0)) throw DomainError("make_dcrw: grid_interval must be positive");
  error_table.validate();

  ModelDefinition m;
  m.name = "dcrw";
  m.state_dim = 4;  // (z_t, z_{t-1}) stacked, lon/lat pairs
  m.obs_dim = 2;
  m.param_spec = make_spec(
      {"gamma", "sigma_lon", "sigma_lat", "rho", "psi_lon", "psi_lat", "z0_lon", "z0_lat"},
      {Transform::logit(0, 1), Transform::log(), Transform::log(), Transform::logit(-1, 1), Transform::log(),
       Transform::log(), Transform::identity(), Transform::identity()});
  m.default_params = make_defaults(m.param_spec, {gamma, sigma_lon, sigma_lat, rho, 1.0, 1.0, z0_lon, z0_lat});
  const DcrwErrorTable table = error_table;
  const double dt_grid = grid_interval;

  m.initial_mean = [](const ParamVector& th) {
    Eigen::VectorXd z(4);
    z << th["z0_lon"], th["z0_lat"], th["z0_lon"], th["z0_lat"];
    return z;
  };
  m.initial_cov = [](const ParamVector&) { return Eigen::MatrixXd::Zero(4, 4); };

  m.schedule = [dt_grid](const TimeSeriesData& data) {
    StepSchedule s;
    const auto idx = dcrw_interpolation_index(data.times(), dt_grid);
    const double t1 = data.time(0);
    int S = 1;
    for (int k : idx.step) S = std::max(S, k);
    s.t0 = t1;
    s.times.resize(S);
    for (int k = 1; k <= S; ++k) s.times[k - 1] = t1 + k * dt_grid;
    s.obs_at.assign(S, {});
    for (int i = 0; i < data.size(); ++i) s.obs_at[idx.step[i] - 1].push_back(i);
    return s;
  };

  auto proc_cov = [](const ParamVector& th) {
    Eigen::Matrix2d S;
    const double sl = th["sigma_lon"], st = th["sigma_lat"], r = th["rho"];
    S << sl * sl, r * sl * st, r * sl * st, st * st;
    return S;
  };

  m.process_log_density = [proc_cov](const Eigen::VectorXd& z, const Eigen::VectorXd& zp, const ParamVector& th,
                                     int, double, const TimeSeriesData&) {
    // copy constraint of the augmentation: previous-location block must match
    if (z[2] != zp[0] || z[3] != zp[1]) return -kInf;
    const double g = th["gamma"];
    Eigen::Vector2d mean = zp.head<2>() + g * (zp.head<2>() - zp.tail<2>());
    return mvn_logpdf(z.head<2>(), mean, proc_cov(th));
  };
  m.process_sample = [proc_cov](const Eigen::VectorXd& zp, const ParamVector& th, int, double,
                                const TimeSeriesData&, RngStream& rng) {
    const double g = th["gamma"];
    Eigen::Vector2d mean = zp.head<2>() + g * (zp.head<2>() - zp.tail<2>());
    Eigen::VectorXd nz = mvn_sample(mean, proc_cov(th), rng);
    Eigen::VectorXd out(4);
    out << nz[0], nz[1], zp[0], zp[1];
    return out;
  };

  auto frac_of = [dt_grid](int i, const TimeSeriesData& data) {
    const double t1 = data.time(0);
    const double ti = data.time(i);
    if (ti <= t1) return 0.0;
    const int S = std::max(1, static_cast<int>(std::ceil((data.time(data.size() - 1) - t1) / dt_grid - 1e-9)));
    int k = static_cast<int>(std::ceil((ti - t1) / dt_grid - 1e-9));
    k = std::min(std::max(k, 1), S);
    const double j = (ti - (t1 + (k - 1) * dt_grid)) / dt_grid;
    return std::min(std::max(j, 0.0), 1.0);
  };
  auto entry_of = [table](int i, const TimeSeriesData& data) -> const DcrwErrorTable::Entry& {
    if (!data.has_quality()) throw DataError("DCRW requires per-record quality classes");
    const int q = data.quality(i);
    auto it = table.classes.find(q);
    if (it == table.classes.end())
      throw DataError("observation quality class " + std::to_string(q) + " is absent from the error table");
    return it->second;
  };

  m.obs_log_density = [frac_of, entry_of](int i, const Eigen::VectorXd& z, const ParamVector& th,
                                          const TimeSeriesData& data) {
    const ObsRecord& rec = data.record(i);
    if (rec.all_missing()) return 0.0;
    const double j = frac_of(i, data);
    const auto& e = entry_of(i, data);
    const double scale[2] = {th["psi_lon"] * e.s_lon, th["psi_lat"] * e.s_lat};
    const double df[2] = {e.df_lon, e.df_lat};
    double ll = 0.0;
    for (int c = 0; c < 2; ++c) {
      if (!rec.is_observed(c)) continue;
      const double center = (1.0 - j) * z[2 + c] + j * z[c];
      ll += stats::t_logpdf(rec.value[c], center, scale[c], df[c]);
    }
    return ll;
  };
  m.obs_sample = [frac_of, entry_of](int i, const Eigen::VectorXd& z, const ParamVector& th,
                                     const TimeSeriesData& data, RngStream& rng) {
    const double j = frac_of(i, data);
    const auto& e = entry_of(i, data);
    const double scale[2] = {th["psi_lon"] * e.s_lon, th["psi_lat"] * e.s_lat};
    const double df[2] = {e.df_lon, e.df_lat};
    Eigen::VectorXd y(2);
    for (int c = 0; c < 2; ++c) {
      const double center = (1.0 - j) * z[2 + c] + j * z[c];
      y[c] = center + scale[c] * rng.student_t(df[c]);
    }
    return ObsRecord(y);
  };
  m.obs_mean_fn = [frac_of](const Eigen::VectorXd& z, const ParamVector&, int i, const TimeSeriesData& data) {
    const double j = frac_of(i, data);
    Eigen::VectorXd mu(2);
    for (int c = 0; c < 2; ++c) mu[c] = (1.0 - j) * z[2 + c] + j * z[c];
    return mu;
  };
  m.obs_var_fn = [entry_of](const Eigen::VectorXd&, const ParamVector& th, int i, const TimeSeriesData& data) {
    const auto& e = entry_of(i, data);
    Eigen::VectorXd v(2);
    const double s[2] = {th["psi_lon"] * e.s_lon, th["psi_lat"] * e.s_lat};
    const double df[2] = {e.df_lon, e.df_lat};
    for (int c = 0; c < 2; ++c)
      v[c] = df[c] > 2 ? s[c] * s[c] * df[c] / (df[c] - 2.0) : std::numeric_limits<double>::quiet_NaN();
    return v;
  };
  m.process_noise = [](const Eigen::VectorXd& z, const Eigen::VectorXd& zp, const ParamVector& th, int, double,
                       const TimeSeriesData&) {
    const double g = th["gamma"];
    Eigen::Vector2d eps = z.head<2>() - z.tail<2>() - g * (z.tail<2>() - zp.tail<2>());
    return Eigen::VectorXd(eps);
  };
  m.process_noise_sd = [](const ParamVector& th, int, double) {
    Eigen::VectorXd s(2);
    s << th["sigma_lon"], th["sigma_lat"];
    return s;
  };
  m.state_from_obs = [](const ObsRecord& rec) {
    Eigen::VectorXd z(4);
    const double lon = rec.is_observed(0) ? rec.value[0] : 0.0;
    const double lat = rec.is_observed(1) ? rec.value[1] : 0.0;
    z << lon, lat, lon, lat;
    return z;
  };

  // Laplace over the raw location sequence: second-order process terms, each
  // observation tied to its interval endpoints.
  m.custom_latent_dim = 2;
  m.custom_joint_terms = [proc_cov, table, dt_grid](const TimeSeriesData& data, const StepSchedule& sched) {
    const auto idx = dcrw_interpolation_index(data.times(), dt_grid);
    const int S = sched.steps();
    std::vector<JointTerm> terms;

    for (int t = 1; t <= S; ++t) {
      JointTerm term;
      for (int s : {t - 2, t - 1, t})
        if (s >= 1) term.steps.push_back(s);
      term.value = [t, proc_cov](const ParamVector& th, const std::vector<Eigen::VectorXd>& zs) {
        const double g = th["gamma"];
        Eigen::Vector2d init;
        init << th["z0_lon"], th["z0_lat"];
        // zs holds the involved latent states in ascending step order
        int k = 0;
        Eigen::Vector2d zm2 = t - 2 >= 1 ? Eigen::Vector2d(zs[k++]) : init;
        Eigen::Vector2d zm1 = t - 1 >= 1 ? Eigen::Vector2d(zs[k++]) : init;
        Eigen::Vector2d zt = Eigen::Vector2d(zs[k]);
        Eigen::Vector2d mean = zm1 + g * (zm1 - zm2);
        return mvn_logpdf(zt, mean, proc_cov(th));
      };
      term.derivs = [t, proc_cov](const ParamVector& th, const std::vector<Eigen::VectorXd>& zs) {
        const double g = th["gamma"];
        Eigen::Vector2d init;
        init << th["z0_lon"], th["z0_lat"];
        int k = 0;
        const bool has_m2 = t - 2 >= 1, has_m1 = t - 1 >= 1;
        Eigen::Vector2d zm2 = has_m2 ? Eigen::Vector2d(zs[k++]) : init;
        Eigen::Vector2d zm1 = has_m1 ? Eigen::Vector2d(zs[k++]) : init;
        Eigen::Vector2d zt = Eigen::Vector2d(zs[k]);
        const Eigen::Matrix2d Q = proc_cov(th);
        const Eigen::Matrix2d Qi = Q.inverse();
        const Eigen::Vector2d r = zt - zm1 - g * (zm1 - zm2);
        const int n = static_cast<int>(zs.size());
        TermDerivs d;
        d.grad.resize(n);
        d.hess.assign(n, std::vector<Eigen::MatrixXd>(n));
        // coefficients of r with respect to each involved state
        std::vector<double> coef;  // d r / d z_s  (times identity)
        if (has_m2) coef.push_back(g);
        if (has_m1) coef.push_back(-(1.0 + g));
        coef.push_back(1.0);
        for (int a = 0; a < n; ++a) {
          d.grad[a] = -coef[a] * (Qi * r);
          for (int b = a; b < n; ++b) d.hess[a][b] = -coef[a] * coef[b] * Qi;
        }
        return d;
      };
      terms.push_back(std::move(term));
    }

    for (int i = 0; i < data.size(); ++i) {
      if (data.record(i).all_missing()) continue;
      const int kstep = idx.step[i];
      const double j = idx.frac[i];
      JointTerm term;
      for (int s : {kstep - 1, kstep})
        if (s >= 1) term.steps.push_back(s);
      const bool has_prev = kstep - 1 >= 1;
      auto coords = [&data, i, table, j, has_prev](const ParamVector& th, const std::vector<Eigen::VectorXd>& zs,
                                                   auto&& fn) {
        const ObsRecord& rec = data.record(i);
        const int q = data.quality(i);
        const auto& e = table.classes.at(q);
        Eigen::Vector2d init;
        init << th["z0_lon"], th["z0_lat"];
        Eigen::Vector2d zprev = has_prev ? Eigen::Vector2d(zs[0]) : init;
        Eigen::Vector2d zcur = Eigen::Vector2d(zs[has_prev ? 1 : 0]);
        const double scale[2] = {th["psi_lon"] * e.s_lon, th["psi_lat"] * e.s_lat};
        const double df[2] = {e.df_lon, e.df_lat};
        for (int c = 0; c < 2; ++c) {
          if (!rec.is_observed(c)) continue;
          const double center = (1.0 - j) * zprev[c] + j * zcur[c];
          fn(c, rec.value[c], center, scale[c], df[c]);
        }
      };
      term.value = [coords](const ParamVector& th, const std::vector<Eigen::VectorXd>& zs) {
        double ll = 0.0;
        coords(th, zs, [&](int, double y, double center, double s, double df) {
          ll += stats::t_logpdf(y, center, s, df);
        });
        return ll;
      };
      term.derivs = [coords, j, has_prev](const ParamVector& th, const std::vector<Eigen::VectorXd>& zs) {
        const int n = static_cast<int>(zs.size());
        TermDerivs d;
        d.grad.assign(n, Eigen::VectorXd::Zero(2));
        d.hess.assign(n, std::vector<Eigen::MatrixXd>(n));
        for (int a = 0; a < n; ++a)
          for (int b = a; b < n; ++b) d.hess[a][b] = Eigen::MatrixXd::Zero(2, 2);
        coords(th, zs, [&](int c, double y, double center, double s, double df) {
          const double x = (y - center) / s;
          const double dc = (df + 1.0) * x / (s * (df + x * x));
          const double d2c = -(df + 1.0) * (df - x * x) / (s * s * (df + x * x) * (df + x * x));
          const int cur = has_prev ? 1 : 0;
          d.grad[cur][c] += j * dc;
          d.hess[cur][cur](c, c) += j * j * d2c;
          if (has_prev) {
            d.grad[0][c] += (1.0 - j) * dc;
            d.hess[0][0](c, c) += (1.0 - j) * (1.0 - j) * d2c;
            d.hess[0][1](c, c) += (1.0 - j) * j * d2c;
          }
        });
        return d;
      };
      terms.push_back(std::move(term));
    }
    return terms;
  };
  return m;
}

// ---------------------------------------------------------------------------
// OU correlated random walk

OuCoeffs oucrw_transition(double delta, double beta_ou, double sigma_ou) {
  if (!(delta > 0)) throw DomainError("oucrw_transition: delta must be positive");
  if (!(beta_ou > 0)) throw DomainError("oucrw_transition: beta_ou must be positive");
  if (!(sigma_ou > 0)) throw DomainError("oucrw_transition: sigma_ou must be positive");
  const double eb = std::exp(-beta_ou * delta);
  const double s2 = sigma_ou * sigma_ou;
  OuCoeffs C;
  C.transition << 1.0, (1.0 - eb) / beta_ou, 0.0, eb;
  const double om = 1.0 - eb;
  C.noise_cov << s2 / (beta_ou * beta_ou), s2 / (2.0 * beta_ou * beta_ou) * om * om,
      s2 / (2.0 * beta_ou * beta_ou) * om * om, s2 * (1.0 - std::exp(-2.0 * beta_ou * delta)) / (2.0 * beta_ou);
  return C;
}

ModelDefinition make_oucrw(double beta_ou, double sigma_ou, double sigma_o, double z0_location, double z0_velocity) {
  if (!(beta_ou > 0) || !(sigma_ou > 0) || !(sigma_o > 0))
    throw DomainError("make_oucrw: parameters must be positive");
  ModelDefinition m;
  m.name = "oucrw";
  m.state_dim = 2;  // (location, velocity)
  m.obs_dim = 1;
  m.param_spec = make_spec({"beta_ou", "sigma_ou", "sigma_o", "z0_mu", "z0_v"},
                           {Transform::log(), Transform::log(), Transform::log(), Transform::identity(),
                            Transform::identity()});
  m.default_params = make_defaults(m.param_spec, {beta_ou, sigma_ou, sigma_o, z0_location, z0_velocity});
  m.initial_mean = [](const ParamVector& th) {
    Eigen::VectorXd z(2);
    z << th["z0_mu"], th["z0_v"];
    return z;
  };
  m.initial_cov = [](const ParamVector&) { return Eigen::MatrixXd::Zero(2, 2); };
  m.linear_gaussian = [](const ParamVector& th, int t, const TimeSeriesData& data) {
    const double dt = record_dt(data, t);
    const OuCoeffs ou = oucrw_transition(dt, th["beta_ou"], th["sigma_ou"]);
    LinGaussCoeffs C;
    C.T = ou.transition;
    C.c = Eigen::VectorXd::Zero(2);
    C.Q = ou.noise_cov;
    C.Z = Eigen::MatrixXd::Zero(1, 2);
    C.Z(0, 0) = 1.0;
    C.d = Eigen::VectorXd::Zero(1);
    C.H = Eigen::MatrixXd::Constant(1, 1, th["sigma_o"] * th["sigma_o"]);
    return C;
  };
  finalize_linear_gaussian(m);
  m.state_from_obs = [](const ObsRecord& rec) {
    Eigen::VectorXd z(2);
    z << (rec.is_observed(0) ? rec.value[0] : 0.0), 0.0;
    return z;
  };
  return m;
}

// ---------------------------------------------------------------------------
// Cormack-Jolly-Seber

ModelDefinition make_cjs(double phi, double p, const std::vector<int>& first_capture) {
  if (!(phi >= 0 && phi <= 1)) throw DomainError("make_cjs: phi must lie in [0,1]");
  if (!(p >= 0 && p <= 1)) throw DomainError("make_cjs: p must lie in [0,1]");
  if (first_capture.empty()) throw DomainError("make_cjs: at least one individual required");
  for (int f : first_capture)
    if (f < 1) throw DomainError("make_cjs: first-capture occasions are 1-based");
  const int n = static_cast<int>(first_capture.size());
  const std::vector<int> fc = first_capture;

  ModelDefinition m;
  m.name = "cjs";
  m.state_dim = n;
  m.obs_dim = n;
  m.time_invariant = true;
  m.param_spec = make_spec({"phi", "p"}, {Transform::logit(0, 1), Transform::logit(0, 1)});
  m.default_params = make_defaults(m.param_spec, {phi, p});
  m.initial_mean = [n](const ParamVector&) { return Eigen::VectorXd::Ones(n); };
  m.initial_cov = [n](const ParamVector&) { return Eigen::MatrixXd::Zero(n, n); };

  DiscreteStateSpec ds;
  ds.n_states = 2;  // 0 = dead, 1 = alive
  ds.n_chains = n;
  ds.first_step = [fc](int chain) { return fc[chain]; };
  ds.initial = [](const ParamVector&, int) {
    Eigen::VectorXd v(2);
    v << 0.0, 1.0;  // fixed alive at first capture
    return v;
  };
  ds.transition = [](const ParamVector& th, int, int) {
    Eigen::MatrixXd G(2, 2);
    const double ph = th["phi"];
    G << 1.0, 0.0, 1.0 - ph, ph;
    return G;
  };
  ds.emission_loglik = [](int t, int chain, int state, const ParamVector& th, const TimeSeriesData& data) {
    const ObsRecord& rec = data.record(t - 1);
    if (!rec.is_observed(chain)) return 0.0;
    const int y = rec.value[chain] != 0.0 ? 1 : 0;
    const double pc = th["p"];
    if (state == 1) return y == 1 ? std::log(pc) : std::log1p(-pc);
    return y == 1 ? -kInf : 0.0;
  };
  m.discrete = ds;

  m.process_log_density = [fc](const Eigen::VectorXd& z, const Eigen::VectorXd& zp, const ParamVector& th, int t,
                               double, const TimeSeriesData&) {
    double ll = 0.0;
    const double ph = th["phi"];
    for (size_t i = 0; i < fc.size(); ++i) {
      if (t <= fc[i]) continue;  // state fixed alive up to first capture
      const int zi = z[i] != 0.0 ? 1 : 0;
      const int zpi = zp[i] != 0.0 ? 1 : 0;
      const double pr = zpi == 1 ? (zi == 1 ? ph : 1.0 - ph) : (zi == 1 ? 0.0 : 1.0);
      if (pr <= 0.0) return -kInf;
      ll += std::log(pr);
    }
    return ll;
  };
  m.process_sample = [fc](const Eigen::VectorXd& zp, const ParamVector& th, int t, double, const TimeSeriesData&,
                          RngStream& rng) {
    Eigen::VectorXd z(zp.size());
    const double ph = th["phi"];
    for (int i = 0; i < zp.size(); ++i) {
      if (t <= fc[i]) {
        z[i] = 1.0;
      } else {
        z[i] = (zp[i] != 0.0 && rng.uniform() < ph) ? 1.0 : 0.0;
      }
    }
    return z;
  };
  m.obs_log_density = [fc](int i, const Eigen::VectorXd& z, const ParamVector& th, const TimeSeriesData& data) {
    const ObsRecord& rec = data.record(i);
    double ll = 0.0;
    const double pc = th["p"];
    for (int c = 0; c < rec.dim(); ++c) {
      if (!rec.is_observed(c)) continue;
      const int y = rec.value[c] != 0.0 ? 1 : 0;
      const double pr = z[c] != 0.0 ? (y == 1 ? pc : 1.0 - pc) : (y == 1 ? 0.0 : 1.0);
      if (pr <= 0.0) return -kInf;
      ll += std::log(pr);
    }
    (void)fc;
    return ll;
  };
  m.obs_sample = [](int, const Eigen::VectorXd& z, const ParamVector& th, const TimeSeriesData&, RngStream& rng) {
    Eigen::VectorXd y(z.size());
    const double pc = th["p"];
    for (int c = 0; c < z.size(); ++c) y[c] = (z[c] != 0.0 && rng.uniform() < pc) ? 1.0 : 0.0;
    return ObsRecord(y);
  };
  return m;
}

TimeSeriesData make_cjs_data(const std::vector<std::vector<int>>& histories, const std::vector<int>& first_capture) {
  if (histories.empty()) throw DataError("make_cjs_data: empty history");
  const int T = static_cast<int>(histories.size());
  const int n = static_cast<int>(histories[0].size());
  if (static_cast<int>(first_capture.size()) != n) throw DataError("make_cjs_data: first_capture count mismatch");
  std::vector<double> times(T);
  std::vector<ObsRecord> recs;
  for (int t = 0; t < T; ++t) {
    times[t] = t + 1.0;
    if (static_cast<int>(histories[t].size()) != n) throw DataError("make_cjs_data: ragged history");
    Eigen::VectorXd y(n);
    std::vector<std::uint8_t> flags(n, 1);
    for (int i = 0; i < n; ++i) {
      y[i] = histories[t][i] != 0 ? 1.0 : 0.0;
      if (t + 1 <= first_capture[i]) flags[i] = 0;  // conditioned on first capture
    }
    recs.emplace_back(y, flags);
  }
  return TimeSeriesData(std::move(times), std::move(recs));
}

}  // namespace ssm
