#include <doctest.h>

#include <chrono>
#include <cmath>

#include "ssm/kalman.hpp"
#include "ssm/stats.hpp"
#include "ssm/zoo.hpp"
#include "support.hpp"

using namespace ssm;

namespace {

TimeSeriesData single_obs(double y) {
  return TimeSeriesData({1.0}, {ObsRecord(Eigen::VectorXd::Constant(1, y))});
}

double median_filter_ms(const ModelDefinition& m, const TimeSeriesData& d, int reps) {
  std::vector<double> ms;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    volatile double sink = kalman_filter(m, d, m.default_params).loglik;
    (void)sink;
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  return ms[ms.size() / 2];
}

}  // namespace

TEST_SUITE("kalman") {

TEST_CASE("one-step filter matches the closed-form hand derivation") {
  const ModelDefinition m = make_ndlm(1.0, 1.0, 1.0, 1.0, 0.0);
  const FilterResult fr = kalman_filter(m, single_obs(2.0), m.default_params);
  CHECK(fr.predicted[0].mean[0] == doctest::Approx(0.0));
  CHECK(fr.predicted[0].cov(0, 0) == doctest::Approx(1.0));
  CHECK(fr.pred_obs_cov[0](0, 0) == doctest::Approx(2.0));
  CHECK(fr.filtered[0].mean[0] == doctest::Approx(1.0));
  CHECK(fr.filtered[0].cov(0, 0) == doctest::Approx(0.5));
  CHECK(fr.loglik == doctest::Approx(stats::norm_logpdf(2.0, 0.0, std::sqrt(2.0))).epsilon(1e-12));
  CHECK(fr.loglik == doctest::Approx(-2.265512).epsilon(1e-6));
}

TEST_CASE("exact observation limit: sigma_o = 0 pins the filtered mean to the data") {
  const ModelDefinition m = make_ndlm(1.0, 1.0, 0.1, 0.0, 0.0);
  const TimeSeriesData d = ssm::test::simulate_toy(40, 6);
  const FilterResult fr = kalman_filter(m, d, m.default_params);
  for (int t = 0; t < 40; ++t) CHECK(fr.filtered[t].mean[0] == doctest::Approx(d.record(t).value[0]).epsilon(1e-10));
}

TEST_CASE("total log-likelihood is the sum of step contributions; missing steps contribute 0") {
  const ModelDefinition m = ssm::test::toy_model();
  TimeSeriesData d = ssm::test::simulate_toy(30, 12).with_missing({4, 5, 17});
  const FilterResult fr = kalman_filter(m, d, m.default_params);
  double s = 0.0;
  for (double l : fr.step_loglik) s += l;
  CHECK(fr.loglik == doctest::Approx(s).epsilon(1e-12));
  CHECK(fr.step_loglik[4] == 0.0);
  CHECK(fr.step_loglik[5] == 0.0);
  CHECK(fr.step_loglik[17] == 0.0);
}

TEST_CASE("partially missing multivariate record: dropping a sensor equals the one-sensor model") {
  // two independent sensors on a shared random-walk state
  ModelDefinition two = make_ndlm(1.0, 1.0, 0.2, 0.3, 0.0);
  two.obs_dim = 2;
  two.linear_gaussian = [](const ParamVector& th, int, const TimeSeriesData&) {
    LinGaussCoeffs C;
    C.T = Eigen::MatrixXd::Constant(1, 1, th["beta"]);
    C.c = Eigen::VectorXd::Zero(1);
    C.Q = Eigen::MatrixXd::Constant(1, 1, th["sigma_p"] * th["sigma_p"]);
    C.Z = Eigen::MatrixXd::Constant(2, 1, th["alpha"]);
    C.d = Eigen::VectorXd::Zero(2);
    C.H = Eigen::MatrixXd::Identity(2, 2) * th["sigma_o"] * th["sigma_o"];
    return C;
  };
  const ModelDefinition one = make_ndlm(1.0, 1.0, 0.2, 0.3, 0.0);
  const TimeSeriesData base = ssm::test::simulate_toy(25, 3);
  std::vector<ObsRecord> recs2;
  for (int t = 0; t < base.size(); ++t) {
    Eigen::VectorXd y(2);
    y << base.record(t).value[0], std::numeric_limits<double>::quiet_NaN();
    recs2.emplace_back(y);
  }
  const TimeSeriesData d2(base.times(), recs2);
  CHECK(kalman_filter(two, d2, two.default_params).loglik ==
        doctest::Approx(kalman_filter(one, base, one.default_params).loglik).epsilon(1e-12));
}

TEST_CASE("smoother: T=1 equals the filter") {
  const ModelDefinition m = ssm::test::toy_model();
  const FilterResult fr = kalman_filter(m, single_obs(0.3), m.default_params);
  const auto sm = kalman_smoother(fr, m, single_obs(0.3), m.default_params);
  CHECK(sm[0].mean[0] == doctest::Approx(fr.filtered[0].mean[0]));
  CHECK(sm[0].cov(0, 0) == doctest::Approx(fr.filtered[0].cov(0, 0)));
}

TEST_CASE("smoother: uninformative future (huge sigma_p) leaves the filter untouched") {
  const ModelDefinition m = make_ndlm(1.0, 1.0, 1e6, 1.0, 0.0);
  const TimeSeriesData d = ssm::test::simulate_toy(10, 9);
  const FilterResult fr = kalman_filter(m, d, m.default_params);
  const auto sm = kalman_smoother(fr, m, d, m.default_params);
  for (int t = 0; t < 10; ++t)
    CHECK(sm[t].mean[0] == doctest::Approx(fr.filtered[t].mean[0]).epsilon(1e-6));
}

TEST_CASE("smoothed variance never exceeds the filtered variance on the diagonal") {
  const ModelDefinition m = ssm::test::toy_model();
  const TimeSeriesData d = ssm::test::simulate_toy(60, 15);
  const FilterResult fr = kalman_filter(m, d, m.default_params);
  const auto sm = kalman_smoother(fr, m, d, m.default_params);
  for (int t = 0; t < 60; ++t) CHECK(sm[t].cov(0, 0) <= fr.filtered[t].cov(0, 0) + 1e-12);
}

TEST_CASE("forecast: k=1 equals the predicted belief of an appended filter step") {
  const ModelDefinition m = ssm::test::toy_model();
  const TimeSeriesData d = ssm::test::simulate_toy(20, 33);
  const FilterResult fr = kalman_filter(m, d, m.default_params);
  const auto fc = forecast(fr, m, d, m.default_params, 1);
  // appended step: extend data with a missing record
  std::vector<double> times = d.times();
  times.push_back(times.back() + 1.0);
  std::vector<ObsRecord> recs = d.records();
  recs.push_back(ObsRecord(Eigen::VectorXd::Constant(1, std::numeric_limits<double>::quiet_NaN())));
  const TimeSeriesData ext(times, recs);
  const FilterResult fr2 = kalman_filter(m, ext, m.default_params);
  CHECK(fc[0].mean[0] == doctest::Approx(fr2.predicted[20].mean[0]).epsilon(1e-12));
  CHECK(fc[0].cov(0, 0) == doctest::Approx(fr2.predicted[20].cov(0, 0)).epsilon(1e-12));
}

TEST_CASE("forecast: beta=1 grows the variance by j*sigma_p^2; beta=0 has mean zero") {
  const ModelDefinition m = ssm::test::toy_model();
  const TimeSeriesData d = ssm::test::simulate_toy(15, 44);
  const FilterResult fr = kalman_filter(m, d, m.default_params);
  const auto fc = forecast(fr, m, d, m.default_params, 5);
  const double pf = fr.filtered[14].cov(0, 0);
  for (int j = 1; j <= 5; ++j)
    CHECK(fc[j - 1].cov(0, 0) == doctest::Approx(pf + j * 0.01).epsilon(1e-10));
  for (int j = 1; j < 5; ++j) CHECK(fc[j].cov(0, 0) >= fc[j - 1].cov(0, 0));

  const ModelDefinition m0 = make_ndlm(1.0, 0.0, 0.1, 0.1, 0.0);
  const FilterResult fr0 = kalman_filter(m0, d, m0.default_params);
  const auto fc0 = forecast(fr0, m0, d, m0.default_params, 3);
  for (const auto& b : fc0) CHECK(b.mean[0] == doctest::Approx(0.0));
}

TEST_CASE("ffbs: degenerate process returns the deterministic skeleton") {
  const ModelDefinition m = make_ndlm(1.0, 1.0, 0.0, 0.1, 2.0);
  const TimeSeriesData d = ssm::test::simulate_toy(12, 3);
  const FilterResult fr = kalman_filter(m, d, m.default_params);
  RngStream rng(5);
  const Eigen::MatrixXd path = ffbs_sample(fr, m, d, m.default_params, rng);
  for (int t = 0; t <= 12; ++t) CHECK(path(0, t) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("ffbs: fixed seed reproduces the trajectory") {
  const ModelDefinition m = ssm::test::toy_model();
  const TimeSeriesData d = ssm::test::simulate_toy(10, 21);
  const FilterResult fr = kalman_filter(m, d, m.default_params);
  RngStream a(77), b(77);
  const Eigen::MatrixXd pa = ffbs_sample(fr, m, d, m.default_params, a);
  const Eigen::MatrixXd pb = ffbs_sample(fr, m, d, m.default_params, b);
  CHECK((pa - pb).norm() == 0.0);
}

TEST_CASE("ffbs: sample means converge to the smoother means") {
  const ModelDefinition m = ssm::test::toy_model();
  const TimeSeriesData d = ssm::test::simulate_toy(10, 57);
  const FilterResult fr = kalman_filter(m, d, m.default_params);
  const auto sm = kalman_smoother(fr, m, d, m.default_params);
  const int R = 10000;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(10);
  Eigen::VectorXd acc2 = Eigen::VectorXd::Zero(10);
  RngStream rng(123);
  for (int r = 0; r < R; ++r) {
    const Eigen::MatrixXd path = ffbs_sample(fr, m, d, m.default_params, rng);
    for (int t = 1; t <= 10; ++t) {
      acc[t - 1] += path(0, t);
      acc2[t - 1] += path(0, t) * path(0, t);
    }
  }
  for (int t = 0; t < 10; ++t) {
    const double mean = acc[t] / R;
    const double var = acc2[t] / R - mean * mean;
    const double se = std::sqrt(var / R);
    CHECK(std::fabs(mean - sm[t].mean[0]) < 3.5 * se);
  }
}

TEST_CASE("covariances stay symmetric over 1e4 steps") {
  const ModelDefinition m = make_oucrw(0.6, 0.9, 0.2);
  const SimulationResult sim = simulate(m, m.default_params, ssm::test::unit_times(10000), 2);
  const FilterResult fr = kalman_filter(m, sim.data, m.default_params);
  double worst = 0.0;
  for (const auto& b : fr.filtered) worst = std::max(worst, (b.cov - b.cov.transpose()).cwiseAbs().maxCoeff());
  CHECK(worst < 1e-10);
}

TEST_CASE("filter cost is order T") {
  const ModelDefinition m = ssm::test::toy_model();
  const TimeSeriesData d1 = ssm::test::simulate_toy(200000, 7);
  const TimeSeriesData d2 = ssm::test::simulate_toy(400000, 7);
  const double t1 = median_filter_ms(m, d1, 5);
  const double t2 = median_filter_ms(m, d2, 5);
  CHECK(t2 / t1 > 1.6);
  CHECK(t2 / t1 < 2.4);
}

}  // TEST_SUITE
