#pragma once

#include <span>
#include <vector>

namespace ssm::stats {

double norm_logpdf(double x, double mean, double sd);
double norm_cdf(double z);        // standard normal CDF
double norm_quantile(double p);   // inverse standard normal CDF (Wichura AS241)

/// log density of a location-scale Student-t.
double t_logpdf(double x, double loc, double scale, double df);

double logsumexp(std::span<const double> v);

double mean(std::span<const double> v);
double variance(std::span<const double> v);  // unbiased (n-1)
double sd(std::span<const double> v);

/// Sample autocorrelation, lag 0..max_lag (lag 0 is exactly 1).
std::vector<double> acf(std::span<const double> v, int max_lag);

/// Asymptotic Kolmogorov-Smirnov p-value with Stephens' small-sample correction.
double ks_pvalue(double d, int n);

}  // namespace ssm::stats
