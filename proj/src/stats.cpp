#include "ssm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ssm/errors.hpp"

namespace ssm::stats {

namespace {
constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364;  // log(sqrt(2*pi))
}

double norm_logpdf(double x, double mean, double sd) {
  if (!(sd > 0.0)) {
    // Degenerate density: point mass. Exact hit has infinite density; report
    // 0 contribution for an exact match and -inf otherwise.
    return x == mean ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  const double z = (x - mean) / sd;
  return -kLogSqrt2Pi - std::log(sd) - 0.5 * z * z;
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double norm_quantile(double p) {
  // Wichura (1988), algorithm AS241, double precision variant.
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw DomainError("norm_quantile requires p in [0,1]");
  }
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                45921.953931549871457) *
                   r +
               13731.693765509461125) *
                  r +
              1971.5909503065514427) *
                 r +
             133.14166789178437745) *
                r +
            3.387132872796366608) /
           (((((((5226.495278852545703 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                21213.794301586595867) *
                   r +
               5394.1960214247511077) *
                  r +
              687.1870074920579083) *
                 r +
             42.313330701600911252) *
                r +
            1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
               1.27045825245236838258) *
                  r +
              3.64784832476320460504) *
                 r +
             5.7694972214606914055) *
                r +
            4.6303378461565452959) *
               r +
           1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
               0.14810397642748007459) *
                  r +
              0.68976733498510000455) *
                 r +
             1.6763848301838038494) *
                r +
            2.05319162663775882187) *
               r +
           1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
               0.026532189526576123093) *
                  r +
              0.29656057182850489123) *
                 r +
             1.7848265399172913358) *
                r +
            5.4637849111641143699) *
               r +
           6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
               7.868691311456132591e-4) *
                  r +
              0.0148753612908506148525) *
                 r +
             0.13692988092273580531) *
                r +
            0.59983220655588793769) *
               r +
           1.0);
  }
  return q < 0.0 ? -val : val;
}

double t_logpdf(double x, double loc, double scale, double df) {
  if (!(scale > 0.0) || !(df > 0.0)) throw DomainError("t_logpdf requires scale > 0 and df > 0");
  const double z = (x - loc) / scale;
  return std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * M_PI) - std::log(scale) -
         0.5 * (df + 1.0) * std::log1p(z * z / df);
}

double logsumexp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double mean(std::span<const double> v) {
  if (v.empty()) throw DomainError("mean of empty sequence");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  if (v.size() < 2) throw DomainError("variance requires at least 2 values");
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double sd(std::span<const double> v) { return std::sqrt(variance(v)); }

std::vector<double> acf(std::span<const double> v, int max_lag) {
  const int n = static_cast<int>(v.size());
  if (n < max_lag + 2) throw DomainError("acf: series length must exceed max_lag + 1");
  const double m = mean(v);
  double denom = 0.0;
  for (double x : v) denom += (x - m) * (x - m);
  std::vector<double> r(max_lag + 1);
  r[0] = 1.0;
  if (denom == 0.0) {
    // Constant series: autocorrelation undefined beyond lag 0.
    for (int k = 1; k <= max_lag; ++k) r[k] = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  for (int k = 1; k <= max_lag; ++k) {
    double num = 0.0;
    for (int t = 0; t + k < n; ++t) num += (v[t] - m) * (v[t + k] - m);
    r[k] = num / denom;
  }
  return r;
}

double ks_pvalue(double d, int n) {
  if (n <= 0) throw DomainError("ks_pvalue requires n > 0");
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  // Q_KS(lambda) = 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace ssm::stats
