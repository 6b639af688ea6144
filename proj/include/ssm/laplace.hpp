#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ssm/model.hpp"

namespace ssm {

/// Symmetric banded matrix in lower-band storage: band(k, j) = A(j+k, j),
/// k = 0..bw. cholesky() factors in place (A = L L'), after which logdet,
/// solve, and sampling against L' are available.
class BandedSym {
 public:
  BandedSym() = default;
  BandedSym(int n, int bw);

  int dim() const { return n_; }
  int bandwidth() const { return bw_; }
  double& at(int i, int j);        // i >= j, i - j <= bw
  double at(int i, int j) const;
  void clear();

  bool cholesky();                 // false if not positive definite
  double half_logdet() const;      // sum log diag(L) (call after cholesky)
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;             // L L' x = b
  Eigen::VectorXd solve_lt(const Eigen::VectorXd& b) const;          // L' x = b
  Eigen::MatrixXd dense() const;   // pre-factorization contents, symmetrized

 private:
  int n_ = 0, bw_ = 0;
  Eigen::MatrixXd band_;   // original coefficients
  Eigen::MatrixXd fact_;   // Cholesky factor
  bool factored_ = false;
};

struct LaplaceOptions {
  double tol = 1e-8;        // gradient infinity-norm at the mode
  int max_newton = 200;
  int max_reg_retries = 20;
};

struct LaplaceResult {
  Eigen::MatrixXd mode;        // latent_dim x n_blocks, block b = latent state at step first_step+b
  int first_step = 1;          // 0 when the initial state is latent
  double joint_loglik = 0.0;   // joint log-likelihood at the mode
  double marginal_loglik = 0.0;
  double grad_norm = 0.0;
  int newton_iters = 0;
  bool converged = false;
  BandedSym neg_hessian;       // factored negative curvature at the mode
  double neg_hessian_logdet = 0.0;
};

/// Newton maximization of the joint log-likelihood over the latent states,
/// exploiting the banded curvature induced by the Markov structure.
LaplaceResult inner_mode(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta,
                         const std::optional<Eigen::MatrixXd>& z_init = std::nullopt, const LaplaceOptions& opts = {});

/// log L_M(theta) ~ joint at mode + (n_z/2) log(2pi) - 1/2 log det(-H).
double laplace_marginal_loglik(const ModelDefinition& model, const TimeSeriesData& data, const ParamVector& theta,
                               const LaplaceOptions& opts = {});

/// One draw from the Gaussian state approximation N(mode, (-H)^{-1});
/// the non-Bayesian stand-in for a posterior state trajectory.
Eigen::MatrixXd laplace_state_draw(const LaplaceResult& lr, RngStream& rng);

}  // namespace ssm
