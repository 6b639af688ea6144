#include "ssm/laplace.hpp"

#include <cmath>

#include "ssm/errors.hpp"
#include "ssm/gauss.hpp"

namespace ssm {

// ---------------------------------------------------------------------------
// BandedSym

BandedSym::BandedSym(int n, int bw) : n_(n), bw_(bw), band_(Eigen::MatrixXd::Zero(bw + 1, n)) {}

double& BandedSym::at(int i, int j) {
  return band_(i - j, j);
}

double BandedSym::at(int i, int j) const { return band_(i - j, j); }

void BandedSym::clear() {
  band_.setZero();
  factored_ = false;
}

bool BandedSym::cholesky() {
  fact_ = band_;
  for (int j = 0; j < n_; ++j) {
    double s = fact_(0, j);
    for (int k = std::max(0, j - bw_); k < j; ++k) {
      const double l = fact_(j - k, k);
      s -= l * l;
    }
    if (!(s > 0.0) || !std::isfinite(s)) {
      factored_ = false;
      return false;
    }
    const double ljj = std::sqrt(s);
    fact_(0, j) = ljj;
    for (int i = j + 1; i <= std::min(n_ - 1, j + bw_); ++i) {
      double v = fact_(i - j, j);
      for (int k = std::max({0, i - bw_, j - bw_}); k < j; ++k) v -= fact_(i - k, k) * fact_(j - k, k);
      fact_(i - j, j) = v / ljj;
    }
  }
  factored_ = true;
  return true;
}

double BandedSym::half_logdet() const {
  if (!factored_) throw NumericalError("BandedSym: logdet requires a factored matrix");
  double s = 0.0;
  for (int j = 0; j < n_; ++j) s += std::log(fact_(0, j));
  return s;
}

Eigen::VectorXd BandedSym::solve(const Eigen::VectorXd& b) const {
  if (!factored_) throw NumericalError("BandedSym: solve requires a factored matrix");
  Eigen::VectorXd y(n_);
  for (int i = 0; i < n_; ++i) {
    double v = b[i];
    for (int k = std::max(0, i - bw_); k < i; ++k) v -= fact_(i - k, k) * y[k];
    y[i] = v / fact_(0, i);
  }
  Eigen::VectorXd x(n_);
  for (int i = n_ - 1; i >= 0; --i) {
    double v = y[i];
    for (int k = i + 1; k <= std::min(n_ - 1, i + bw_); ++k) v -= fact_(k - i, i) * x[k];
    x[i] = v / fact_(0, i);
  }
  return x;
}

Eigen::VectorXd BandedSym::solve_lt(const Eigen::VectorXd& b) const {
  if (!factored_) throw NumericalError("BandedSym: solve requires a factored matrix");
  Eigen::VectorXd x(n_);
  for (int i = n_ - 1; i >= 0; --i) {
    double v = b[i];
    for (int k = i + 1; k <= std::min(n_ - 1, i + bw_); ++k) v -= fact_(k - i, i) * x[k];
    x[i] = v / fact_(0, i);
  }
  return x;
}

Eigen::MatrixXd BandedSym::dense() const {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_, n_);
  for (int j = 0; j < n_; ++j) {
    for (int i = j; i <= std::min(n_ - 1, j + bw_); ++i) {
      A(i, j) = band_(i - j, j);
      A(j, i) = A(i, j);
    }
  }
  return A;
}

// ---------------------------------------------------------------------------
// latent problem assembly

namespace {

struct LatentProblem {
  int d = 1;           // latent block dimension
  int n_blocks = 0;    // latent steps
  int first_step = 1;  // 0 when z_0 is latent
  int bw_blocks = 1;
  std::vector<JointTerm> terms;
};

/// Finite-difference derivatives of one joint term, step 1e-5 * (1 + |z|).
TermDerivs fd_term_derivs(const JointTerm& term, const ParamVector& theta, const std::vector<Eigen::VectorXd>& zs) {
  const int nb = static_cast<int>(zs.size());
  const int d = static_cast<int>(zs[0].size());
  auto eval = [&](const std::vector<Eigen::VectorXd>& z) { return term.value(theta, z); };

  TermDerivs out;
  out.grad.assign(nb, Eigen::VectorXd::Zero(d));
  out.hess.assign(nb, std::vector<Eigen::MatrixXd>(nb));
  for (int a = 0; a < nb; ++a)
    for (int b = a; b < nb; ++b) out.hess[a][b] = Eigen::MatrixXd::Zero(d, d);

  auto h_of = [](double z) { return 1e-5 * (1.0 + std::fabs(z)); };
  const double f0 = eval(zs);

  std::vector<Eigen::VectorXd> w = zs;
  for (int a = 0; a < nb; ++a) {
    for (int r = 0; r < d; ++r) {
      const double h = h_of(zs[a][r]);
      w[a][r] = zs[a][r] + h;
      const double fp = eval(w);
      w[a][r] = zs[a][r] - h;
      const double fm = eval(w);
      w[a][r] = zs[a][r];
      out.grad[a][r] = (fp - fm) / (2.0 * h);
      out.hess[a][a](r, r) = (fp - 2.0 * f0 + fm) / (h * h);
    }
  }
  // off-diagonal second derivatives
  for (int a = 0; a < nb; ++a) {
    for (int b = a; b < nb; ++b) {
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
          if (a == b && c <= r) continue;
          const double hr = h_of(zs[a][r]), hc = h_of(zs[b][c]);
          w[a][r] = zs[a][r] + hr;
          w[b][c] += hc;
          const double fpp = eval(w);
          w[b][c] -= 2.0 * hc;
          const double fpm = eval(w);
          w[a][r] = zs[a][r] - hr;
          const double fmm = eval(w);
          w[b][c] += 2.0 * hc;
          const double fmp = eval(w);
          w[a][r] = zs[a][r];
          w[b][c] = zs[b][c];
          const double v = (fpp - fpm - fmp + fmm) / (4.0 * hr * hc);
          out.hess[a][b](r, c) = v;
          if (a == b) out.hess[a][a](c, r) = v;
        }
      }
    }
  }
  return out;
}

LatentProblem build_latent_problem(const ModelDefinition& model, const TimeSeriesData& data,
                                   const StepSchedule& sched, const ParamVector& theta) {
  LatentProblem lp;
  const int S = sched.steps();

  if (model.custom_joint_terms) {
    lp.d = model.custom_latent_dim;
    lp.n_blocks = S;
    lp.first_step = 1;
    lp.terms = model.custom_joint_terms(data, sched);
    int bw = 1;
    for (const auto& t : lp.terms)
      if (t.steps.size() >= 2) bw = std::max(bw, t.steps.back() - t.steps.front());
    lp.bw_blocks = bw;
    return lp;
  }

  lp.d = model.state_dim;
  const bool z0_latent = model.initial_cov(theta).norm() > 0.0;
  lp.first_step = z0_latent ? 0 : 1;
  lp.n_blocks = S + (z0_latent ? 1 : 0);
  lp.bw_blocks = 1;

  if (z0_latent) {
    JointTerm init;
    init.steps = {0};
    init.value = [&model](const ParamVector& th, const std::vector<Eigen::VectorXd>& zs) {
      return mvn_logpdf(zs[0], model.initial_mean(th), model.initial_cov(th));
    };
    lp.terms.push_back(std::move(init));
  }

  for (int t = 1; t <= S; ++t) {
    JointTerm proc;
    const double dt = sched.dt(t);
    const bool prev_latent = (t - 1 >= 1) || z0_latent;
    if (prev_latent) proc.steps = {t - 1, t};
    else proc.steps = {t};
    proc.value = [&model, &data, t, dt, prev_latent](const ParamVector& th, const std::vector<Eigen::VectorXd>& zs) {
      const Eigen::VectorXd zprev = prev_latent ? zs[0] : model.initial_mean(th);
      const Eigen::VectorXd& z = prev_latent ? zs[1] : zs[0];
      return model.process_log_density(z, zprev, th, t, dt, data);
    };
    if (model.process_derivs) {
      proc.derivs = [&model, &data, t, dt, prev_latent](const ParamVector& th,
                                                        const std::vector<Eigen::VectorXd>& zs) {
        const Eigen::VectorXd zprev = prev_latent ? zs[0] : model.initial_mean(th);
        const Eigen::VectorXd& z = prev_latent ? zs[1] : zs[0];
        const PairDerivs pd = model.process_derivs(z, zprev, th, t, dt, data);
        TermDerivs out;
        if (prev_latent) {
          out.grad = {pd.g_zprev, pd.g_z};
          out.hess.assign(2, std::vector<Eigen::MatrixXd>(2));
          out.hess[0][0] = pd.h_zprev_zprev;
          out.hess[0][1] = pd.h_z_zprev.transpose();  // rows zprev, cols z
          out.hess[1][1] = pd.h_zz;
        } else {
          out.grad = {pd.g_z};
          out.hess.assign(1, std::vector<Eigen::MatrixXd>(1));
          out.hess[0][0] = pd.h_zz;
        }
        return out;
      };
    }
    lp.terms.push_back(std::move(proc));

    for (int i : sched.obs_at[t - 1]) {
      if (data.record(i).all_missing()) continue;
      JointTerm obs;
      obs.steps = {t};
      obs.value = [&model, &data, i](const ParamVector& th, const std::vector<Eigen::VectorXd>& zs) {
        return model.obs_log_density(i, zs[0], th, data);
      };
      if (model.obs_derivs) {
        obs.derivs = [&model, &data, i](const ParamVector& th, const std::vector<Eigen::VectorXd>& zs) {
          const ObsStateDerivs od = model.obs_derivs(i, zs[0], th, data);
          TermDerivs out;
          out.grad = {od.g};
          out.hess.assign(1, std::vector<Eigen::MatrixXd>(1));
          out.hess[0][0] = od.h;
          return out;
        };
      }
      lp.terms.push_back(std::move(obs));
    }
  }
  return lp;
}

double problem_value(const LatentProblem& lp, const ParamVector& theta, const Eigen::MatrixXd& x) {
  double v = 0.0;
  std::vector<Eigen::VectorXd> zs;
  for (const auto& term : lp.terms) {
    zs.clear();
    for (int s : term.steps) zs.push_back(x.col(s - lp.first_step));
    v += term.value(theta, zs);
  }
  return v;
}

/// Gradient and negative Hessian (banded) of the joint log-likelihood.
void problem_derivs(const LatentProblem& lp, const ParamVector& theta, const Eigen::MatrixXd& x, Eigen::VectorXd& g,
                    BandedSym& negH) {
  const int d = lp.d;
  g.setZero();
  negH.clear();
  std::vector<Eigen::VectorXd> zs;
  for (const auto& term : lp.terms) {
    zs.clear();
    for (int s : term.steps) zs.push_back(x.col(s - lp.first_step));
    const TermDerivs td = term.derivs ? term.derivs(theta, zs) : fd_term_derivs(term, theta, zs);
    const int nb = static_cast<int>(term.steps.size());
    for (int a = 0; a < nb; ++a) {
      const int ba = term.steps[a] - lp.first_step;
      g.segment(ba * d, d) += td.grad[a];
      for (int b = a; b < nb; ++b) {
        const int bb = term.steps[b] - lp.first_step;
        const Eigen::MatrixXd& h = td.hess[a][b];
        if (a == b) {
          for (int r = 0; r < d; ++r)
            for (int c = 0; c <= r; ++c) negH.at(ba * d + r, ba * d + c) -= 0.5 * (h(r, c) + h(c, r));
        } else {
          // lower-triangle rows live in the later block
          for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) negH.at(bb * d + r, ba * d + c) -= h(c, r);
        }
      }
    }
  }
}

Eigen::MatrixXd default_warm_start(const ModelDefinition& model, const TimeSeriesData& data,
                                   const StepSchedule& sched, const ParamVector& theta, const LatentProblem& lp) {
  Eigen::MatrixXd x(lp.d, lp.n_blocks);
  Eigen::VectorXd fallback = Eigen::VectorXd::Zero(lp.d);
  if (!model.custom_joint_terms) fallback = model.initial_mean(theta);
  else fallback = model.initial_mean(theta).head(lp.d);
  Eigen::VectorXd cur = fallback;
  for (int b = 0; b < lp.n_blocks; ++b) {
    const int step = lp.first_step + b;
    if (step >= 1 && model.state_from_obs) {
      for (int i : sched.obs_at[step - 1]) {
        if (!data.record(i).all_missing()) {
          cur = model.state_from_obs(data.record(i)).head(lp.d);
          break;
        }
      }
    }
    x.col(b) = cur;
  }
  return x;
}

}  // namespace

LaplaceResult inner_mode(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta,
                         const std::optional<Eigen::MatrixXd>& z_init, const LaplaceOptions& opts) {
  if (model.is_discrete())
    throw ConfigError("the Laplace approximation requires continuous, twice-differentiable states");
  const StepSchedule sched = model.make_schedule(data);
  const LatentProblem lp = build_latent_problem(model, data, sched, theta);
  const int n = lp.d * lp.n_blocks;
  const int bw = lp.bw_blocks * lp.d + lp.d - 1;

  Eigen::MatrixXd x = z_init ? *z_init : default_warm_start(model, data, sched, theta, lp);
  if (x.rows() != lp.d || x.cols() != lp.n_blocks) throw DomainError("inner_mode: z_init has the wrong shape");

  double f = problem_value(lp, theta, x);
  if (!std::isfinite(f)) throw NumericalError("inner_mode: joint log-likelihood not finite at the start point");

  Eigen::VectorXd g(n);
  BandedSym negH(n, bw);
  LaplaceResult res;
  res.first_step = lp.first_step;

  bool converged = false;
  int it = 0;
  for (; it < opts.max_newton; ++it) {
    problem_derivs(lp, theta, x, g, negH);
    res.grad_norm = g.lpNorm<Eigen::Infinity>();
    if (res.grad_norm < opts.tol) {
      converged = true;
      break;
    }

    // Levenberg regularization until the negative curvature factors
    double maxdiag = 0.0;
    for (int i = 0; i < n; ++i) maxdiag = std::max(maxdiag, std::fabs(negH.at(i, i)));
    double lambda = 0.0;
    BandedSym fact = negH;
    int retry = 0;
    while (!fact.cholesky()) {
      if (++retry > opts.max_reg_retries)
        throw NumericalError("inner_mode: curvature not positive definite after regularization retries "
                             "(suspected multimodal state posterior)");
      lambda = lambda == 0.0 ? 1e-8 * std::max(maxdiag, 1.0) : lambda * 10.0;
      fact = negH;
      for (int i = 0; i < n; ++i) fact.at(i, i) += lambda;
    }
    Eigen::VectorXd step = fact.solve(g);

    // backtracking in case the quadratic model oversteps
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      Eigen::MatrixXd xn = x;
      for (int b = 0; b < lp.n_blocks; ++b) xn.col(b) += alpha * step.segment(b * lp.d, lp.d);
      const double fn = problem_value(lp, theta, xn);
      if (std::isfinite(fn) && fn >= f - 1e-12 * std::fabs(f)) {
        x = xn;
        f = fn;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // no improving step; report current gradient norm
  }

  problem_derivs(lp, theta, x, g, negH);
  res.grad_norm = g.lpNorm<Eigen::Infinity>();
  res.converged = converged || res.grad_norm < opts.tol;
  res.newton_iters = it;
  res.mode = x;
  res.joint_loglik = f;
  res.neg_hessian = negH;
  if (!res.neg_hessian.cholesky())
    throw NumericalError("inner_mode: negative Hessian at the mode is not positive definite "
                         "(suspected multimodal state posterior)");
  res.neg_hessian_logdet = 2.0 * res.neg_hessian.half_logdet();
  res.marginal_loglik = f + 0.5 * n * std::log(2.0 * M_PI) - 0.5 * res.neg_hessian_logdet;
  return res;
}

double laplace_marginal_loglik(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta,
                               const LaplaceOptions& opts) {
  return inner_mode(model, data, theta, std::nullopt, opts).marginal_loglik;
}

Eigen::MatrixXd laplace_state_draw(const LaplaceResult& lr, RngStream& rng) {
  const int n = lr.neg_hessian.dim();
  Eigen::VectorXd eps(n);
  for (int i = 0; i < n; ++i) eps[i] = rng.normal();
  const Eigen::VectorXd delta = lr.neg_hessian.solve_lt(eps);
  Eigen::MatrixXd draw = lr.mode;
  const int d = static_cast<int>(lr.mode.rows());
  for (int b = 0; b < lr.mode.cols(); ++b) draw.col(b) += delta.segment(b * d, d);
  return draw;
}

}  // namespace ssm
