#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

namespace ssm {

enum class TransformKind { Identity, Log, Logit };

/// Bijective map between a parameter's natural support and the real line.
struct Transform {
  TransformKind kind = TransformKind::Identity;
  double lo = 0.0, hi = 1.0;  // logit bounds

  static Transform identity() { return {TransformKind::Identity, 0, 0}; }
  static Transform log() { return {TransformKind::Log, 0, 0}; }
  static Transform logit(double a, double b) { return {TransformKind::Logit, a, b}; }

  bool in_support(double natural) const;
  double to_unconstrained(double natural) const;
  double from_unconstrained(double x) const;
  /// d(natural)/d(unconstrained) evaluated at the unconstrained value.
  double jacobian(double x) const;
};

/// Named parameters with per-parameter transforms and a fixed mask. Fixed
/// parameters carry their value in the spec and are excluded from the
/// unconstrained vector.
class ParameterSpec {
 public:
  ParameterSpec() = default;
  ParameterSpec(std::vector<std::string> names, std::vector<Transform> transforms);

  int size() const { return static_cast<int>(names_.size()); }
  int n_free() const;
  const std::vector<std::string>& names() const { return names_; }
  const Transform& transform(int i) const { return transforms_[i]; }
  int index_of(const std::string& name) const;  // throws DomainError if unknown
  bool has(const std::string& name) const;
  bool is_fixed(int i) const { return fixed_[i] != 0; }
  double fixed_value(int i) const { return fixed_values_[i]; }
  std::vector<int> free_indices() const;

  /// Copy of this spec with `name` fixed at `value`.
  ParameterSpec with_fixed(const std::string& name, double value) const;
  ParameterSpec with_free(const std::string& name) const;

 private:
  std::vector<std::string> names_;
  std::vector<Transform> transforms_;
  std::vector<std::uint8_t> fixed_;
  std::vector<double> fixed_values_;
};

/// Natural-scale parameter values keyed by a ParameterSpec.
struct ParamVector {
  std::shared_ptr<const ParameterSpec> spec;
  Eigen::VectorXd values;

  ParamVector() = default;
  ParamVector(std::shared_ptr<const ParameterSpec> s, Eigen::VectorXd v);

  double operator[](const std::string& name) const { return values[spec->index_of(name)]; }
  double at(int i) const { return values[i]; }
  ParamVector with(const std::string& name, double value) const;
};

/// Free parameters mapped to the unconstrained scale. Out-of-support values
/// raise DomainError naming the parameter.
Eigen::VectorXd to_unconstrained(const ParameterSpec& spec, const ParamVector& theta);

/// Inverse of to_unconstrained; fixed parameters are filled from the spec.
ParamVector from_unconstrained(const std::shared_ptr<const ParameterSpec>& spec, const Eigen::VectorXd& x);

/// Per-free-parameter d(natural)/d(unconstrained), for delta-method standard errors.
Eigen::VectorXd unconstrained_jacobian(const ParameterSpec& spec, const Eigen::VectorXd& x);

/// Sum of log |d(natural)/d(unconstrained)| over free parameters (the change
/// of variables term for densities specified on the natural scale).
double log_jacobian(const ParameterSpec& spec, const Eigen::VectorXd& x);

}  // namespace ssm
