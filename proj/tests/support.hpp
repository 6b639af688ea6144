#pragma once

// Shared helpers for the unit and acceptance suites: canonical toy-model
// builders, simulation shortcuts, and independent oracles.

#include <Eigen/Dense>
#include <vector>

#include "ssm/model.hpp"
#include "ssm/zoo.hpp"

namespace ssm::test {

inline std::vector<double> unit_times(int T) {
  std::vector<double> t(T);
  for (int i = 0; i < T; ++i) t[i] = i + 1.0;
  return t;
}

/// Fig-4 toy model: alpha = beta = 1, sigma_p = sigma_o = 0.1, z0 = 0.
inline ModelDefinition toy_model(double sigma_p = 0.1, double sigma_o = 0.1, double z0 = 0.0) {
  return make_ndlm(1.0, 1.0, sigma_p, sigma_o, z0);
}

inline TimeSeriesData simulate_toy(int T, std::uint64_t seed, double sigma_p = 0.1, double sigma_o = 0.1,
                                   double z0 = 0.0) {
  const ModelDefinition m = toy_model(sigma_p, sigma_o, z0);
  return simulate(m, m.default_params, unit_times(T), seed).data;
}

/// Deliberately redundant linear-Gaussian model y = a * b * z + noise; the
/// product a*b is identifiable but the factors are not.
ModelDefinition redundant_product_model(double a, double b, double sigma_p, double sigma_o, double z0);

/// Brute-force CJS likelihood: sums over every post-first-capture state path
/// of one individual. History is 0/1 per occasion (1-based occasions).
double cjs_brute_force_loglik(double phi, double p, const std::vector<int>& history, int first_capture);

}  // namespace ssm::test
