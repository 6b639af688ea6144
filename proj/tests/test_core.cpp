#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ssm/data.hpp"
#include "ssm/errors.hpp"
#include "ssm/model.hpp"
#include "ssm/parameters.hpp"
#include "ssm/rng.hpp"
#include "ssm/stats.hpp"
#include "ssm/zoo.hpp"
#include "support.hpp"

using namespace ssm;

TEST_SUITE("core") {

TEST_CASE("transforms: named examples") {
  CHECK(Transform::identity().to_unconstrained(2.5) == doctest::Approx(2.5));
  CHECK(Transform::log().to_unconstrained(1.0) == doctest::Approx(0.0));
  CHECK(Transform::logit(0, 1).to_unconstrained(0.5) == doctest::Approx(0.0));
  CHECK(Transform::log().from_unconstrained(0.0) == doctest::Approx(1.0));
}

TEST_CASE("transforms: inverse logit approaches 1 monotonically") {
  const Transform tr = Transform::logit(0, 1);
  double prev = tr.from_unconstrained(0.0);
  for (double x = 1.0; x <= 30.0; x += 1.0) {
    const double v = tr.from_unconstrained(x);
    CHECK(v > prev);
    CHECK(v < 1.0);
    prev = v;
  }
  CHECK(tr.from_unconstrained(40.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transforms: round-trip within 1e-12 over 1000 random draws") {
  RngStream rng(42);
  const std::vector<Transform> kinds = {Transform::identity(), Transform::log(), Transform::logit(0, 1),
                                        Transform::logit(-2.5, 7.0)};
  for (int i = 0; i < 1000; ++i) {
    const Transform& tr = kinds[i % kinds.size()];
    const double x = -8.0 + 16.0 * rng.uniform();
    const double back = tr.to_unconstrained(tr.from_unconstrained(x));
    CHECK(std::fabs(back - x) < 1e-12);
    // and the natural-scale direction
    const double nat = tr.from_unconstrained(x);
    const double nat_back = tr.from_unconstrained(tr.to_unconstrained(nat));
    CHECK(std::fabs(nat_back - nat) <= 1e-12 * std::max(1.0, std::fabs(nat)));
  }
}

TEST_CASE("to_unconstrained: out-of-support value names the parameter") {
  const ModelDefinition m = test::toy_model();
  ParamVector bad = m.default_params.with("sigma_p", -1.0);
  CHECK_THROWS_WITH_AS(to_unconstrained(*m.param_spec, bad), doctest::Contains("sigma_p"), DomainError);
}

TEST_CASE("from_unconstrained: non-finite input rejected, fixed params filled") {
  auto spec = std::make_shared<const ParameterSpec>(
      ParameterSpec({"a", "s"}, {Transform::identity(), Transform::log()}).with_fixed("a", 3.0));
  Eigen::VectorXd x(1);
  x << 0.0;
  const ParamVector th = from_unconstrained(spec, x);
  CHECK(th["a"] == 3.0);
  CHECK(th["s"] == doctest::Approx(1.0));
  x << std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(from_unconstrained(spec, x), DomainError);
}

TEST_CASE("parameter spec: duplicate names rejected") {
  CHECK_THROWS_AS(ParameterSpec({"a", "a"}, {Transform::identity(), Transform::identity()}), DomainError);
}

TEST_CASE("TimeSeriesData invariants") {
  std::vector<ObsRecord> recs = {ObsRecord(Eigen::VectorXd::Zero(1)), ObsRecord(Eigen::VectorXd::Zero(1))};
  CHECK_THROWS_AS(TimeSeriesData({2.0, 1.0}, recs), DataError);
  CHECK_THROWS_AS(TimeSeriesData({}, {}), DataError);
  // missing covariate values are rejected outright
  std::map<std::string, std::vector<double>> cov{{"ponds", {1.0, std::nan("")}}};
  CHECK_THROWS_AS(TimeSeriesData({1.0, 2.0}, recs, cov), DataError);
}

TEST_CASE("CSV round-trip is lossless") {
  const TimeSeriesData d = test::simulate_toy(25, 7);
  const auto path = std::filesystem::temp_directory_path() / "ssm_core_roundtrip.csv";
  d.write_csv(path.string());
  const TimeSeriesData back = TimeSeriesData::read_csv(path.string());
  REQUIRE(back.size() == d.size());
  for (int t = 0; t < d.size(); ++t) {
    CHECK(back.time(t) == doctest::Approx(d.time(t)).epsilon(1e-12));
    CHECK(back.record(t).value[0] == doctest::Approx(d.record(t).value[0]).epsilon(1e-12));
  }
  std::filesystem::remove(path);
}

TEST_CASE("CSV: missing fields and quality ingested") {
  const auto path = std::filesystem::temp_directory_path() / "ssm_core_missing.csv";
  {
    std::ofstream out(path);
    out << "time,y1,quality,ponds\n1,0.5,3,10\n2,NA,2,11\n3,,1,12\n";
  }
  const TimeSeriesData d = TimeSeriesData::read_csv(path.string());
  CHECK(d.size() == 3);
  CHECK(d.record(0).is_observed(0));
  CHECK_FALSE(d.record(1).is_observed(0));
  CHECK_FALSE(d.record(2).is_observed(0));
  CHECK(d.quality(0) == 3);
  CHECK(d.covariate("ponds")[2] == doctest::Approx(12.0));
  std::filesystem::remove(path);
}

TEST_CASE("simulate: zero-noise toy model is the constant skeleton") {
  const ModelDefinition m = test::toy_model();
  const ParamVector th = m.default_params.with("sigma_p", 0.0).with("sigma_o", 0.0).with("z0", 3.0);
  const SimulationResult sim = simulate(m, th, test::unit_times(20), 5);
  for (const auto& z : sim.states) CHECK(z[0] == doctest::Approx(3.0));
  for (int t = 0; t < 20; ++t) CHECK(sim.data.record(t).value[0] == doctest::Approx(3.0));
}

TEST_CASE("simulate: determinism given seed") {
  const ModelDefinition m = test::toy_model();
  const SimulationResult a = simulate(m, m.default_params, test::unit_times(50), 99);
  const SimulationResult b = simulate(m, m.default_params, test::unit_times(50), 99);
  for (int t = 0; t < 50; ++t) {
    CHECK(a.states[t][0] == b.states[t][0]);
    CHECK(a.data.record(t).value[0] == b.data.record(t).value[0]);
  }
}

TEST_CASE("simulate: toy-model increments match N(0, 0.01) moments over T=1e4") {
  const int T = 10000;
  const ModelDefinition m = test::toy_model();
  const SimulationResult sim = simulate(m, m.default_params, test::unit_times(T), 2024);
  std::vector<double> dz(T - 1);
  for (int t = 1; t < T; ++t) dz[t - 1] = sim.states[t][0] - sim.states[t - 1][0];
  const double mu = stats::mean(dz);
  const double v = stats::variance(dz);
  const double se_mean = 0.1 / std::sqrt(static_cast<double>(T - 1));
  const double se_var = 0.01 * std::sqrt(2.0 / (T - 2));
  CHECK(std::fabs(mu) < 3.0 * se_mean);
  CHECK(std::fabs(v - 0.01) < 3.0 * se_var);
}

TEST_CASE("simulate: DCRW with gamma=0 has uncorrelated displacements") {
  DcrwErrorTable table;
  table.classes[3] = {0.1, 0.1, 5.0, 5.0};
  const ModelDefinition m = make_dcrw(0.0, 0.05, 0.05, 0.0, table, 1.0);
  const int T = 10000;
  std::vector<ObsRecord> blanks(T, ObsRecord(Eigen::VectorXd::Zero(2)));
  TimeSeriesData tmpl(test::unit_times(T), std::move(blanks), {}, std::vector<int>(T, 3));
  const SimulationResult sim = simulate(m, m.default_params, tmpl, 11);
  std::vector<double> dx(sim.states.size() - 1);
  for (size_t t = 1; t < sim.states.size(); ++t) dx[t - 1] = sim.states[t][0] - sim.states[t - 1][0];
  const auto r = stats::acf(dx, 1);
  CHECK(std::fabs(r[1]) < 3.0 / std::sqrt(static_cast<double>(dx.size())));
}

TEST_CASE("joint_log_likelihood: hand-checked values") {
  const ModelDefinition m = make_ndlm(1.0, 1.0, 1.0, 1.0, 0.0);
  std::vector<Eigen::VectorXd> states = {Eigen::VectorXd::Zero(1)};
  std::vector<ObsRecord> recs = {ObsRecord(Eigen::VectorXd::Zero(1))};
  TimeSeriesData data({1.0}, recs);
  CHECK(joint_log_likelihood(m, m.default_params, states, data) ==
        doctest::Approx(-std::log(2.0 * M_PI)).epsilon(1e-9));

  // same but the observation missing: only the f term remains
  TimeSeriesData missing = data.with_missing({0});
  CHECK(joint_log_likelihood(m, m.default_params, states, missing) == doctest::Approx(-0.918938533).epsilon(1e-8));
}

TEST_CASE("joint_log_likelihood: matches an independent naive summation") {
  const ModelDefinition m = test::toy_model();
  RngStream rng(314);
  for (int rep = 0; rep < 20; ++rep) {
    const int T = 2 + rng.uniform_int(20);
    const SimulationResult sim = simulate(m, m.default_params, test::unit_times(T), 1000 + rep);
    const double got = joint_log_likelihood(m, m.default_params, sim.states, sim.data);
    // oracle: direct term-by-term loop over the toy equations
    double want = 0.0;
    double zprev = 0.0;
    for (int t = 0; t < T; ++t) {
      const double z = sim.states[t][0];
      want += stats::norm_logpdf(z, zprev, 0.1);
      want += stats::norm_logpdf(sim.data.record(t).value[0], z, 0.1);
      zprev = z;
    }
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("joint_log_likelihood: additive over a time split") {
  const ModelDefinition m = test::toy_model();
  const int T = 30;
  const SimulationResult sim = simulate(m, m.default_params, test::unit_times(T), 77);
  const double full = joint_log_likelihood(m, m.default_params, sim.states, sim.data);
  const int cut = 12;
  std::vector<Eigen::VectorXd> head(sim.states.begin(), sim.states.begin() + cut);
  const double part1 = joint_log_likelihood(m, m.default_params, head, sim.data.head(cut));
  double part2 = 0.0;
  for (int t = cut; t < T; ++t) {
    part2 += stats::norm_logpdf(sim.states[t][0], sim.states[t - 1][0], 0.1);
    part2 += stats::norm_logpdf(sim.data.record(t).value[0], sim.states[t][0], 0.1);
  }
  CHECK(full == doctest::Approx(part1 + part2).epsilon(1e-10));
}

TEST_CASE("rng: derived streams are independent of draw order") {
  RngStream a(123);
  RngStream c1 = a.derive(1);
  a.normal();  // consuming the parent does not change children
  RngStream c1b = RngStream(123).derive(1);
  CHECK(c1.normal() == c1b.normal());
}

TEST_CASE("rng: gamma and t samplers have the right first moments") {
  RngStream rng(8);
  const int N = 200000;
  double s = 0.0;
  for (int i = 0; i < N; ++i) s += rng.gamma(3.0);
  CHECK(s / N == doctest::Approx(3.0).epsilon(0.02));
  double st = 0.0, st2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const double x = rng.student_t(5.0);
    st += x;
    st2 += x * x;
  }
  CHECK(st / N == doctest::Approx(0.0).epsilon(0.05));
  CHECK(st2 / N == doctest::Approx(5.0 / 3.0).epsilon(0.05));
}

}  // TEST_SUITE
