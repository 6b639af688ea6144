#pragma once

#include <map>
#include <optional>
#include <string>

#include "ssm/model.hpp"

namespace ssm {

/// Fills densities, samplers, state derivatives, and diagnostic accessors of
/// a model from its linear-Gaussian coefficient accessor. Called by the zoo
/// constructors; available for custom linear-Gaussian models.
void finalize_linear_gaussian(ModelDefinition& m);

/// Toy normal dynamic linear model:
///   z_t = beta z_{t-1} + N(0, sigma_p^2),  y_t = alpha z_t + N(0, sigma_o^2),
/// with z_0 a fixed unknown parameter.
ModelDefinition make_ndlm(double alpha, double beta, double sigma_p, double sigma_o, double z0);

enum class LogisticScale { Natural, LogState };

/// Stochastic logistic population model. Natural scale:
///   z_t = z_{t-1} exp(beta0 + beta1 z_{t-1} + eps_t),  y_t = z_t + eta_t.
/// Log-state scale works with w_t = log z_t and observes y_t = exp(w_t) + eta_t.
ModelDefinition make_logistic(double beta0, double beta1, double sigma_p, double sigma_o,
                              LogisticScale scale = LogisticScale::Natural, double z0 = 1.0);

enum class GompertzForm { Raw, Linearized };

/// Stochastic Gompertz model. Raw form keeps the population scale with
/// lognormal observation error; the linearized form
///   w_t = beta0 + (1 + beta1) w_{t-1} [+ beta2 p_t] + eps_t,  g_t = w_t + eta_t
/// expects data already on the log scale (g_t = log y_t). The optional
/// covariate (e.g. pond counts) shifts the state mean by beta2 * p_t.
ModelDefinition make_gompertz(double beta0, double beta1, double sigma_p, double sigma_o,
                              GompertzForm form = GompertzForm::Linearized,
                              std::optional<std::string> covariate_name = std::nullopt, double beta2 = 0.0,
                              double z0 = 1.0);

/// Per-quality-class t-distribution scales and degrees of freedom for Argos
/// location errors, one pair per coordinate.
struct DcrwErrorTable {
  struct Entry {
    double s_lon, s_lat;
    double df_lon, df_lat;
  };
  std::map<int, Entry> classes;

  void validate() const;  // scales > 0, df > 0
  bool has(int q) const { return classes.count(q) > 0; }
};

/// Regular-grid interval index and interpolation fraction per observation.
struct InterpolationIndex {
  std::vector<int> step;     // 1-based grid interval
  std::vector<double> frac;  // j_i in [0, 1]
};

InterpolationIndex dcrw_interpolation_index(const std::vector<double>& times, double grid_interval);

/// First-difference correlated random walk on a regular time grid with
/// t-distributed observation errors and irregular-time interpolation. The
/// stored state is the pair (z_t, z_{t-1}) so the first-order Markov contract
/// holds; correction factors psi_lon/psi_lat are free parameters.
ModelDefinition make_dcrw(double gamma, double sigma_lon, double sigma_lat, double rho,
                          const DcrwErrorTable& error_table, double grid_interval, double z0_lon = 0.0,
                          double z0_lat = 0.0);

/// Closed-form transition matrix and noise covariance of the OU correlated
/// random walk over an interval of length delta; state is (location, velocity).
struct OuCoeffs {
  Eigen::Matrix2d transition;
  Eigen::Matrix2d noise_cov;
};
OuCoeffs oucrw_transition(double delta, double beta_ou, double sigma_ou);

/// Continuous-time OU correlated random walk observed at irregular times,
/// one coordinate; a linear-Gaussian model.
ModelDefinition make_oucrw(double beta_ou, double sigma_ou, double sigma_o, double z0_location = 0.0,
                           double z0_velocity = 0.0);

/// Cormack-Jolly-Seber survival/capture model with constant phi and p.
/// States per individual: 0 = dead, 1 = alive; the state at first capture is
/// fixed alive and earlier occasions are conditioned away.
/// `first_capture` holds the 1-based first-capture occasion per individual.
ModelDefinition make_cjs(double phi, double p, const std::vector<int>& first_capture);

/// Capture histories (occasion-major, one column per individual) to the CJS
/// data layout: occasions up to and including first capture are masked.
TimeSeriesData make_cjs_data(const std::vector<std::vector<int>>& histories, const std::vector<int>& first_capture);

}  // namespace ssm
