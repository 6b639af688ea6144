#include "support.hpp"

#include <cmath>

#include "ssm/stats.hpp"

namespace ssm::test {

ModelDefinition redundant_product_model(double a, double b, double sigma_p, double sigma_o, double z0) {
  ModelDefinition m;
  m.name = "redundant_ab";
  m.state_dim = 1;
  m.obs_dim = 1;
  m.time_invariant = true;
  m.param_spec = std::make_shared<const ParameterSpec>(
      std::vector<std::string>{"a", "b", "sigma_p", "sigma_o", "z0"},
      std::vector<Transform>{Transform::log(), Transform::log(), Transform::log(), Transform::log(),
                             Transform::identity()});
  Eigen::VectorXd v(5);
  v << a, b, sigma_p, sigma_o, z0;
  m.default_params = ParamVector(m.param_spec, v);
  m.initial_mean = [](const ParamVector& th) { return Eigen::VectorXd::Constant(1, th["z0"]); };
  m.initial_cov = [](const ParamVector&) { return Eigen::MatrixXd::Zero(1, 1); };
  m.linear_gaussian = [](const ParamVector& th, int, const TimeSeriesData&) {
    LinGaussCoeffs C;
    C.T = Eigen::MatrixXd::Constant(1, 1, 1.0);
    C.c = Eigen::VectorXd::Zero(1);
    C.Q = Eigen::MatrixXd::Constant(1, 1, th["sigma_p"] * th["sigma_p"]);
    C.Z = Eigen::MatrixXd::Constant(1, 1, th["a"] * th["b"]);
    C.d = Eigen::VectorXd::Zero(1);
    C.H = Eigen::MatrixXd::Constant(1, 1, th["sigma_o"] * th["sigma_o"]);
    return C;
  };
  m.process_log_density = [](const Eigen::VectorXd& z, const Eigen::VectorXd& zp, const ParamVector& th, int, double,
                             const TimeSeriesData&) {
    return stats::norm_logpdf(z[0], zp[0], th["sigma_p"]);
  };
  m.process_sample = [](const Eigen::VectorXd& zp, const ParamVector& th, int, double, const TimeSeriesData&,
                        RngStream& rng) {
    return Eigen::VectorXd::Constant(1, zp[0] + th["sigma_p"] * rng.normal());
  };
  m.obs_log_density = [](int i, const Eigen::VectorXd& z, const ParamVector& th, const TimeSeriesData& data) {
    const ObsRecord& rec = data.record(i);
    if (!rec.is_observed(0)) return 0.0;
    return stats::norm_logpdf(rec.value[0], th["a"] * th["b"] * z[0], th["sigma_o"]);
  };
  m.obs_sample = [](int, const Eigen::VectorXd& z, const ParamVector& th, const TimeSeriesData&, RngStream& rng) {
    return ObsRecord(Eigen::VectorXd::Constant(1, th["a"] * th["b"] * z[0] + th["sigma_o"] * rng.normal()));
  };
  return m;
}

double cjs_brute_force_loglik(double phi, double p, const std::vector<int>& history, int first_capture) {
  const int T = static_cast<int>(history.size());
  const int n_free = T - first_capture;  // states at occasions first_capture+1 .. T
  if (n_free <= 0) return 0.0;
  double total = 0.0;
  for (int mask = 0; mask < (1 << n_free); ++mask) {
    double prob = 1.0;
    int zprev = 1;  // alive at first capture
    for (int k = 0; k < n_free; ++k) {
      const int z = (mask >> k) & 1;
      const int y = history[first_capture + k];  // occasion first_capture + k + 1
      const double ptrans = zprev == 1 ? (z == 1 ? phi : 1.0 - phi) : (z == 1 ? 0.0 : 1.0);
      const double pobs = z == 1 ? (y == 1 ? p : 1.0 - p) : (y == 1 ? 0.0 : 1.0);
      prob *= ptrans * pobs;
      zprev = z;
    }
    total += prob;
  }
  return std::log(total);
}

}  // namespace ssm::test
