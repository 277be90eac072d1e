#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sbl/types.hpp"

namespace sbl {

enum class SolverVariant { champagne, reweighted, low_snr };

std::string to_string(SolverVariant variant);
SolverVariant variant_from_string(const std::string& name);

struct SolverConfig {
    SolverVariant variant = SolverVariant::reweighted;
    int max_outer = 500;
    int inner_k = 20;            // proximal-gradient steps per outer iteration
    double outer_tol = 1e-6;     // relative objective change
    double inner_tol = 1e-10;
    bool accelerated = true;
    double gamma_init = 1.0;     // gamma(0) = gamma_init * ones
    double sigma0_sq = 0.0;      // low-SNR noise hyperparameter; <= 0 -> noise_var
    double prune_rel = 1e-12;    // gamma[n] < prune_rel * max(gamma) -> 0

    void validate() const;
};

struct IterTrace {
    int iter = 0;
    double wall_seconds = 0.0;
    double objective = 0.0;  // F for champagne/reweighted, lasso cost for low_snr
    double data_fit = 0.0;   // ||Y - G X||_F^2
    int n_active = 0;
    std::optional<double> recon_snr_db;
};

struct SolverResult {
    SourceEstimate estimate;
    Hyperparams gamma;
    std::vector<IterTrace> trace;
    bool converged = false;
    int outer_iterations = 0;
};

/// Baseline fixed-point iteration on (v, X, gamma). Estimates stay dense on
/// the unpruned support.
SolverResult champagne_solve(const ProblemInstance& problem, const SolverConfig& config,
                             const Matrix* x_true = nullptr);

/// Reweighted l21 sparse coding: each outer iteration refreshes the dual
/// weights and runs inner_k warm-started proximal-gradient steps.
SolverResult reweighted_solve(const ProblemInstance& problem, const SolverConfig& config,
                              const Matrix* x_true = nullptr);

/// One non-reweighted group-lasso solve with column-norm weights
/// lambda[n] = sigma0_sq * sqrt(T) * sqrt(||G[:,n]||^2 + rho),
/// traced per inner_k-step block. Runs to inner convergence (iterate change
/// or duality gap below inner_tol) within a max_outer*inner_k step budget.
SolverResult low_snr_solve(const ProblemInstance& problem, const SolverConfig& config,
                           const Matrix* x_true = nullptr);

SolverResult solve(const ProblemInstance& problem, const SolverConfig& config,
                   const Matrix* x_true = nullptr);

}  // namespace sbl
