#include "ssm/parameters.hpp"

#include <cmath>
#include <set>

#include "ssm/errors.hpp"

namespace ssm {

bool Transform::in_support(double natural) const {
  switch (kind) {
    case TransformKind::Identity:
      return std::isfinite(natural);
    case TransformKind::Log:
      return natural > 0.0 && std::isfinite(natural);
    case TransformKind::Logit:
      return natural > lo && natural < hi;
  }
  return false;
}

double Transform::to_unconstrained(double natural) const {
  switch (kind) {
    case TransformKind::Identity:
      return natural;
    case TransformKind::Log:
      return std::log(natural);
    case TransformKind::Logit: {
      const double p = (natural - lo) / (hi - lo);
      return std::log(p) - std::log1p(-p);
    }
  }
  return natural;
}

double Transform::from_unconstrained(double x) const {
  switch (kind) {
    case TransformKind::Identity:
      return x;
    case TransformKind::Log:
      return std::exp(x);
    case TransformKind::Logit: {
      const double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      return lo + (hi - lo) * s;
    }
  }
  return x;
}

double Transform::jacobian(double x) const {
  switch (kind) {
    case TransformKind::Identity:
      return 1.0;
    case TransformKind::Log:
      return std::exp(x);
    case TransformKind::Logit: {
      const double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      return (hi - lo) * s * (1.0 - s);
    }
  }
  return 1.0;
}

ParameterSpec::ParameterSpec(std::vector<std::string> names, std::vector<Transform> transforms)
    : names_(std::move(names)), transforms_(std::move(transforms)) {
  if (names_.size() != transforms_.size()) throw DomainError("ParameterSpec: names/transforms size mismatch");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw DomainError("ParameterSpec: duplicate parameter name '" + n + "'");
  }
  for (const auto& t : transforms_) {
    if (t.kind == TransformKind::Logit && !(t.lo < t.hi)) throw DomainError("ParameterSpec: logit bounds must satisfy a < b");
  }
  fixed_.assign(names_.size(), 0);
  fixed_values_.assign(names_.size(), 0.0);
}

int ParameterSpec::n_free() const {
  int n = 0;
  for (auto f : fixed_)
    if (!f) ++n;
  return n;
}

int ParameterSpec::index_of(const std::string& name) const {
  for (int i = 0; i < size(); ++i)
    if (names_[i] == name) return i;
  throw DomainError("unknown parameter '" + name + "'");
}

bool ParameterSpec::has(const std::string& name) const {
  for (const auto& n : names_)
    if (n == name) return true;
  return false;
}

std::vector<int> ParameterSpec::free_indices() const {
  std::vector<int> idx;
  for (int i = 0; i < size(); ++i)
    if (!fixed_[i]) idx.push_back(i);
  return idx;
}

ParameterSpec ParameterSpec::with_fixed(const std::string& name, double value) const {
  ParameterSpec s = *this;
  const int i = s.index_of(name);
  if (!s.transforms_[i].in_support(value))
    throw DomainError("fixed value for '" + name + "' is outside the parameter's support");
  s.fixed_[i] = 1;
  s.fixed_values_[i] = value;
  return s;
}

ParameterSpec ParameterSpec::with_free(const std::string& name) const {
  ParameterSpec s = *this;
  const int i = s.index_of(name);
  s.fixed_[i] = 0;
  return s;
}

ParamVector::ParamVector(std::shared_ptr<const ParameterSpec> s, Eigen::VectorXd v)
    : spec(std::move(s)), values(std::move(v)) {
  if (values.size() != spec->size()) throw DomainError("ParamVector: value count does not match spec");
}

ParamVector ParamVector::with(const std::string& name, double value) const {
  ParamVector out = *this;
  out.values[spec->index_of(name)] = value;
  return out;
}

Eigen::VectorXd to_unconstrained(const ParameterSpec& spec, const ParamVector& theta) {
  Eigen::VectorXd x(spec.n_free());
  int k = 0;
  for (int i = 0; i < spec.size(); ++i) {
    if (spec.is_fixed(i)) continue;
    const double v = theta.values[i];
    if (!spec.transform(i).in_support(v))
      throw DomainError("parameter '" + spec.names()[i] + "' value " + std::to_string(v) +
                        " is outside its transform support");
    x[k++] = spec.transform(i).to_unconstrained(v);
  }
  return x;
}

ParamVector from_unconstrained(const std::shared_ptr<const ParameterSpec>& spec, const Eigen::VectorXd& x) {
  if (x.size() != spec->n_free()) throw DomainError("from_unconstrained: wrong free-parameter count");
  for (int i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw DomainError("from_unconstrained: non-finite input");
  }
  Eigen::VectorXd v(spec->size());
  int k = 0;
  for (int i = 0; i < spec->size(); ++i) {
    v[i] = spec->is_fixed(i) ? spec->fixed_value(i) : spec->transform(i).from_unconstrained(x[k++]);
  }
  return ParamVector(spec, std::move(v));
}

Eigen::VectorXd unconstrained_jacobian(const ParameterSpec& spec, const Eigen::VectorXd& x) {
  Eigen::VectorXd j(spec.n_free());
  int k = 0;
  for (int i = 0; i < spec.size(); ++i) {
    if (spec.is_fixed(i)) continue;
    j[k] = spec.transform(i).jacobian(x[k]);
    ++k;
  }
  return j;
}

double log_jacobian(const ParameterSpec& spec, const Eigen::VectorXd& x) {
  const Eigen::VectorXd j = unconstrained_jacobian(spec, x);
  double s = 0.0;
  for (int i = 0; i < j.size(); ++i) s += std::log(std::fabs(j[i]));
  return s;
}

}  // namespace ssm
