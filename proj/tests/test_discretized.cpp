#include <doctest.h>

#include <cmath>

#include "ssm/errors.hpp"
#include "ssm/grid.hpp"
#include "ssm/hmm.hpp"
#include "ssm/kalman.hpp"
#include "ssm/stats.hpp"
#include "ssm/zoo.hpp"
#include "support.hpp"

using namespace ssm;

namespace {

/// Enumeration oracle: exact forward quantities of a small HMM by summing
/// over every state path.
struct HmmOracle {
  double loglik;
  Eigen::MatrixXd marginals;  // T x n_states smoothed
};

HmmOracle enumerate_hmm(const Eigen::VectorXd& init, const std::vector<Eigen::MatrixXd>& trans,
                        const std::vector<Eigen::VectorXd>& emis) {
  const int T = static_cast<int>(emis.size());
  const int n = static_cast<int>(init.size());
  std::vector<int> path(T);
  double total = 0.0;
  Eigen::MatrixXd marg = Eigen::MatrixXd::Zero(T, n);
  std::function<void(int, double)> rec = [&](int t, double prob) {
    if (t == T) {
      total += prob;
      for (int s = 0; s < T; ++s) marg(s, path[s]) += prob;
      return;
    }
    for (int s = 0; s < n; ++s) {
      path[t] = s;
      const double p = t == 0 ? init[s] : trans[t - 1](path[t - 1], s);
      rec(t + 1, prob * p * emis[t][s]);
    }
  };
  rec(0, 1.0);
  marg /= total;
  return {std::log(total), marg};
}

/// Small generic HMM wrapped as a ModelDefinition (observations carried as
/// record values, emissions N(y; mu_state, 1)).
ModelDefinition toy_hmm(int n_states, const Eigen::MatrixXd& G, const Eigen::VectorXd& init) {
  ModelDefinition m;
  m.name = "toy_hmm";
  m.state_dim = 1;
  m.obs_dim = 1;
  m.param_spec = std::make_shared<const ParameterSpec>(std::vector<std::string>{"dummy"},
                                                       std::vector<Transform>{Transform::identity()});
  m.default_params = ParamVector(m.param_spec, Eigen::VectorXd::Zero(1));
  DiscreteStateSpec ds;
  ds.n_states = n_states;
  ds.n_chains = 1;
  ds.first_step = [](int) { return 1; };
  ds.initial = [init](const ParamVector&, int) { return init; };
  ds.transition = [G](const ParamVector&, int, int) { return G; };
  ds.emission_loglik = [](int t, int, int state, const ParamVector&, const TimeSeriesData& data) {
    return stats::norm_logpdf(data.record(t - 1).value[0], static_cast<double>(state), 1.0);
  };
  m.discrete = ds;
  return m;
}

}  // namespace

TEST_SUITE("discretized") {

TEST_CASE("grid filter matches the Kalman oracle on the toy model") {
  const ModelDefinition m = ssm::test::toy_model();
  const TimeSeriesData d = ssm::test::simulate_toy(50, 101);
  const double exact = kalman_filter(m, d, m.default_params).loglik;
  const StateGrid grid = StateGrid::automatic(m, d, m.default_params, 400);
  const GridFilterResult fr = grid_filter(m, d, m.default_params, grid);
  CHECK(std::fabs(fr.loglik - exact) < 1e-4);
}

TEST_CASE("grid filter matches Kalman on the linearized Gompertz model") {
  const ModelDefinition m = make_gompertz(0.4, -0.3, 0.2, 0.15);
  const SimulationResult sim = simulate(m, m.default_params, ssm::test::unit_times(40), 5);
  const double exact = kalman_filter(m, sim.data, m.default_params).loglik;
  const StateGrid grid = StateGrid::automatic(m, sim.data, m.default_params, 400);
  const GridFilterResult fr = grid_filter(m, sim.data, m.default_params, grid);
  CHECK(std::fabs(fr.loglik - exact) < 1e-4);
}

TEST_CASE("grid self-convergence: doubling m changes the value below 1e-5") {
  const ModelDefinition m = ssm::test::toy_model();
  const TimeSeriesData d = ssm::test::simulate_toy(50, 101);
  const StateGrid g400 = StateGrid::automatic(m, d, m.default_params, 400);
  const StateGrid g800(g400.lower, g400.upper, 800);
  const double a = grid_filter(m, d, m.default_params, g400).loglik;
  const double b = grid_filter(m, d, m.default_params, g800).loglik;
  CHECK(std::fabs(a - b) < 1e-5);
}

TEST_CASE("grid error against Kalman decreases monotonically in m") {
  const ModelDefinition m = ssm::test::toy_model();
  const TimeSeriesData d = ssm::test::simulate_toy(50, 7);
  const double exact = kalman_filter(m, d, m.default_params).loglik;
  // deliberately wide bounds so the cells stay coarse relative to the noise
  // scale and the discretization error is visible across the whole sweep
  double prev = std::numeric_limits<double>::infinity();
  for (int cells : {50, 100, 200, 400}) {
    const StateGrid g(-20.0, 20.0, cells);
    const double err = std::fabs(grid_filter(m, d, m.default_params, g).loglik - exact);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("grid coverage error when all mass escapes") {
  const ModelDefinition m = ssm::test::toy_model();
  const TimeSeriesData d = ssm::test::simulate_toy(10, 8);
  const StateGrid far(100.0, 101.0, 50);
  CHECK_THROWS_AS(grid_filter(m, d, m.default_params, far), NumericalError);
}

TEST_CASE("grid rejects multi-dimensional states") {
  const ModelDefinition m = make_oucrw(0.5, 1.0, 0.2);
  const TimeSeriesData d = ssm::test::simulate_toy(10, 9);
  CHECK_THROWS_WITH_AS(grid_filter(m, d, m.default_params, StateGrid(-1, 1, 50)),
                       doctest::Contains("dimensionality"), ConfigError);
}

TEST_CASE("grid smoother matches Kalman smoother means") {
  const ModelDefinition m = ssm::test::toy_model();
  const TimeSeriesData d = ssm::test::simulate_toy(20, 3);
  const FilterResult kf = kalman_filter(m, d, m.default_params);
  const auto ks = kalman_smoother(kf, m, d, m.default_params);
  const StateGrid grid = StateGrid::automatic(m, d, m.default_params, 400);
  const GridFilterResult fr = grid_filter(m, d, m.default_params, grid);
  const auto gs = grid_smooth(fr, m, d, m.default_params);
  for (int t = 0; t < 20; ++t) {
    double mean = 0.0;
    for (int j = 0; j < grid.m; ++j) mean += gs[t][j] * grid.center(j);
    CHECK(std::fabs(mean - ks[t].mean[0]) < 1e-3);
  }
}

TEST_CASE("CJS forward equals the exhaustive path enumeration") {
  const std::vector<int> history = {1, 0, 1, 0, 0};
  const ModelDefinition m = make_cjs(0.8, 0.5, {1});
  const TimeSeriesData d = make_cjs_data({{1}, {0}, {1}, {0}, {0}}, {1});
  const HmmForwardResult fr = hmm_forward(m, d, m.default_params);
  const double oracle = ssm::test::cjs_brute_force_loglik(0.8, 0.5, history, 1);
  CHECK(fr.loglik == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("CJS: perfect detection with all-ones history gives phi^(T-f)") {
  const ModelDefinition m = make_cjs(0.7, 1.0, {1});
  const TimeSeriesData d = make_cjs_data({{1}, {1}, {1}, {1}, {1}, {1}}, {1});
  const HmmForwardResult fr = hmm_forward(m, d, m.default_params);
  CHECK(fr.loglik == doctest::Approx(5.0 * std::log(0.7)).epsilon(1e-12));
}

TEST_CASE("CJS: capture under p=0 raises the impossible-data error") {
  const ModelDefinition m = make_cjs(0.8, 0.0, {1});
  const TimeSeriesData d = make_cjs_data({{1}, {0}, {1}}, {1});
  CHECK_THROWS_AS(hmm_forward(m, d, m.default_params), DataError);
}

TEST_CASE("CJS: dead is absorbing; alive mass stays at zero once lost") {
  // p = 1 and a later non-capture forces the dead state
  const ModelDefinition m = make_cjs(0.9, 1.0, {1});
  const TimeSeriesData d = make_cjs_data({{1}, {1}, {0}, {0}, {0}}, {1});
  const HmmForwardResult fr = hmm_forward(m, d, m.default_params);
  CHECK(fr.filtered[0](2, 1) == doctest::Approx(0.0));
  CHECK(fr.filtered[0](3, 1) == doctest::Approx(0.0));
  CHECK(fr.filtered[0](4, 1) == doctest::Approx(0.0));
}

TEST_CASE("CJS population model sums individual chains") {
  const ModelDefinition m = make_cjs(0.8, 0.5, {1, 2});
  const TimeSeriesData d = make_cjs_data({{1, 0}, {0, 1}, {1, 1}, {0, 0}}, {1, 2});
  const HmmForwardResult fr = hmm_forward(m, d, m.default_params);
  const double want = ssm::test::cjs_brute_force_loglik(0.8, 0.5, {1, 0, 1, 0}, 1) +
                      ssm::test::cjs_brute_force_loglik(0.8, 0.5, {0, 1, 1, 0}, 2);
  CHECK(fr.loglik == doctest::Approx(want).epsilon(1e-12));
  CHECK(fr.chain_loglik.size() == 2);
}

TEST_CASE("identity transition with state-independent emissions: loglik ignores the initial mass") {
  Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  ModelDefinition m = toy_hmm(2, I2, (Eigen::VectorXd(2) << 0.3, 0.7).finished());
  // override emissions to ignore the state
  m.discrete->emission_loglik = [](int t, int, int, const ParamVector&, const TimeSeriesData& data) {
    return stats::norm_logpdf(data.record(t - 1).value[0], 0.0, 1.0);
  };
  std::vector<ObsRecord> recs;
  std::vector<double> times;
  double want = 0.0;
  for (int t = 0; t < 6; ++t) {
    const double y = 0.2 * t - 0.5;
    recs.emplace_back(Eigen::VectorXd::Constant(1, y));
    times.push_back(t + 1.0);
    want += stats::norm_logpdf(y, 0.0, 1.0);
  }
  const TimeSeriesData d(times, recs);
  const HmmForwardResult a = hmm_forward(m, d, m.default_params);
  CHECK(a.loglik == doctest::Approx(want).epsilon(1e-12));

  ModelDefinition m2 = m;
  m2.discrete->initial = [](const ParamVector&, int) { return (Eigen::VectorXd(2) << 0.9, 0.1).finished(); };
  CHECK(hmm_forward(m2, d, m2.default_params).loglik == doctest::Approx(a.loglik).epsilon(1e-12));
}

TEST_CASE("hmm_smooth: T=1 equals filtered; posterior marginals match enumeration") {
  RngStream rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 3, T = 6;
    // random row-stochastic transition and initial mass
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        G(i, j) = 0.05 + rng.uniform();
        s += G(i, j);
      }
      G.row(i) /= s;
    }
    Eigen::VectorXd init(n);
    double s0 = 0.0;
    for (int i = 0; i < n; ++i) {
      init[i] = 0.1 + rng.uniform();
      s0 += init[i];
    }
    init /= s0;

    const ModelDefinition m = toy_hmm(n, G, init);
    std::vector<ObsRecord> recs;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> emis;
    for (int t = 0; t < T; ++t) {
      const double y = 3.0 * rng.uniform();
      recs.emplace_back(Eigen::VectorXd::Constant(1, y));
      times.push_back(t + 1.0);
      Eigen::VectorXd e(n);
      for (int st = 0; st < n; ++st) e[st] = std::exp(stats::norm_logpdf(y, st, 1.0));
      emis.push_back(e);
    }
    const TimeSeriesData d(times, recs);
    const HmmForwardResult fr = hmm_forward(m, d, m.default_params);
    const auto sm = hmm_smooth(fr, m, d, m.default_params);
    const HmmOracle oracle = enumerate_hmm(init, std::vector<Eigen::MatrixXd>(T - 1, G), emis);
    CHECK(fr.loglik == doctest::Approx(oracle.loglik).epsilon(1e-10));
    for (int t = 0; t < T; ++t) {
      CHECK(sm[0].row(t).sum() == doctest::Approx(1.0).epsilon(1e-10));
      for (int st = 0; st < n; ++st) CHECK(sm[0](t, st) == doctest::Approx(oracle.marginals(t, st)).epsilon(1e-8));
    }
  }
}

TEST_CASE("hmm forward is invariant to state relabeling") {
  Eigen::MatrixXd G(2, 2);
  G << 0.9, 0.1, 0.3, 0.7;
  Eigen::VectorXd init(2);
  init << 0.6, 0.4;
  const ModelDefinition m = toy_hmm(2, G, init);

  // swapped labels: permute transition, initial, and emission means
  Eigen::MatrixXd Gp(2, 2);
  Gp << 0.7, 0.3, 0.1, 0.9;
  Eigen::VectorXd initp(2);
  initp << 0.4, 0.6;
  ModelDefinition mp = toy_hmm(2, Gp, initp);
  mp.discrete->emission_loglik = [](int t, int, int state, const ParamVector&, const TimeSeriesData& data) {
    return stats::norm_logpdf(data.record(t - 1).value[0], 1.0 - state, 1.0);
  };

  const TimeSeriesData d = ssm::test::simulate_toy(8, 12);
  const HmmForwardResult a = hmm_forward(m, d, m.default_params);
  const HmmForwardResult b = hmm_forward(mp, d, mp.default_params);
  CHECK(a.loglik == doctest::Approx(b.loglik).epsilon(1e-12));
  for (int t = 0; t < 8; ++t) {
    CHECK(a.filtered[0](t, 0) == doctest::Approx(b.filtered[0](t, 1)).epsilon(1e-10));
  }
}

TEST_CASE("CJS smoothing: a final capture pins earlier alive probabilities to 1") {
  const ModelDefinition m = make_cjs(0.8, 0.4, {1});
  const TimeSeriesData d = make_cjs_data({{1}, {0}, {0}, {0}, {1}}, {1});
  const HmmForwardResult fr = hmm_forward(m, d, m.default_params);
  const auto sm = hmm_smooth(fr, m, d, m.default_params);
  for (int t = 0; t < 5; ++t) CHECK(sm[0](t, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

}  // TEST_SUITE
