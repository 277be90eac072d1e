#pragma once

#include "sbl/types.hpp"

namespace sbl {

/// Cholesky factor of Sigma_y(gamma) = noise_var * I + G diag(gamma) G^T.
/// Columns with gamma[n] == 0 are skipped entirely.
CovFactor assemble_covariance(const ProblemInstance& problem, const Hyperparams& gamma);

/// v[n] = G[:,n]^T Sigma_y^{-1} G[:,n], one triangular solve per column.
DualWeights compute_dual_weights(const ProblemInstance& problem, const CovFactor& factor);

/// Posterior mean X = diag(gamma) G^T Sigma_y^{-1} Y. Rows with gamma[n] == 0
/// come out as exact zeros and are excluded from the active set.
SourceEstimate posterior_mean(const ProblemInstance& problem, const Hyperparams& gamma,
                              const CovFactor& factor);

/// Closed-form variance update gamma[n] = ||X[n,:]|| / sqrt(T (v[n] + rho)).
Hyperparams gamma_from_x(const SourceEstimate& x, const DualWeights& v, double rho,
                         Index t_samples);

/// Negative log marginal likelihood in the joint-cost scaling:
/// (1/T) tr(Y^T Sigma_y^{-1} Y) + log|Sigma_y| + rho * sum(gamma).
double eval_type2(const ProblemInstance& problem, const Hyperparams& gamma);

/// Conjugate value at the iterate, w*(v) = v^T gamma_prev - log|Sigma_y(gamma_prev)|,
/// valid when v was computed from gamma_prev. Stable: no division by gamma.
double eval_wstar_at_iterate(const DualWeights& v, const Hyperparams& gamma_prev,
                             const ProblemInstance& problem);
double eval_wstar_at_iterate(const DualWeights& v, const Hyperparams& gamma_prev,
                             const CovFactor& factor);

/// Surrogate objective
/// F = ||Y - G X||_F^2 / (T noise_var) + 2 sum_n sqrt((rho + v[n])/T) ||X[n,:]|| - w*.
double eval_F(const SourceEstimate& x, const DualWeights& v, double wstar_value,
              const ProblemInstance& problem);

/// Low-SNR surrogate for the log-determinant: tr(G diag(gamma) G^T)
/// = sum_n gamma[n] ||G[:,n]||^2.
double logdet_lowsnr_approx(const ProblemInstance& problem, const Hyperparams& gamma);

/// Penalty weights of the reweighted inner problem: lambda[n] = sqrt(T) sqrt(rho + v[n]).
GroupWeights inner_weights_from_dual(const DualWeights& v, double rho, Index t_samples);

}  // namespace sbl
