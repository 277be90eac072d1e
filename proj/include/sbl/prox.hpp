#pragma once

#include "sbl/types.hpp"

namespace sbl {

/// Weighted l21-regularized least squares:
///   min_X  data_scale/2 ||Y - G X||_F^2 + sum_n lambda[n] ||X[n,:]||.
/// Non-owning views; the referenced matrices must outlive the problem.
struct InnerProblem {
    const Matrix* G = nullptr;
    const Matrix* Y = nullptr;
    GroupWeights weights;
    double data_scale = 1.0;

    InnerProblem(const Matrix& g, const Matrix& y, GroupWeights w, double scale)
        : G(&g), Y(&y), weights(std::move(w)), data_scale(scale) {
        if (!(data_scale > 0.0))
            throw std::invalid_argument("InnerProblem: data_scale must be > 0");
        if (weights.lambda.size() != g.cols())
            throw std::invalid_argument("InnerProblem: weights length != N");
        if (!weights.lambda.allFinite() || (weights.lambda.array() < 0.0).any())
            throw std::invalid_argument("InnerProblem: weights must be finite and >= 0");
        if (y.rows() != g.rows())
            throw std::invalid_argument("InnerProblem: G/Y row mismatch");
    }

    Index n() const { return G->cols(); }
    Index t() const { return Y->cols(); }
};

/// Mutable iterate of the proximal-gradient loop. Keeps the products G*X
/// cached so one pass costs two mat-mats regardless of acceleration.
struct InnerState {
    Matrix X;
    Matrix X_prev;
    Matrix GX;
    Matrix GX_prev;
    double momentum = 1.0;   // FISTA t_k
    double lipschitz = 0.0;
    double objective = 0.0;  // objective at X
    long iterations = 0;
    bool accelerated = true;
};

struct InnerRunStatus {
    long steps = 0;
    bool converged = false;
    double last_gap = std::numeric_limits<double>::quiet_NaN();
};

struct InnerSolveReport {
    long iterations = 0;
    bool converged = false;
    double objective = 0.0;
    double gap = std::numeric_limits<double>::quiet_NaN();
};

/// prox of threshold*||.|| : shrinks the row by max(0, 1 - threshold/||row||),
/// exact zero at or below the threshold.
Eigen::RowVectorXd block_soft_threshold(const Eigen::RowVectorXd& row, double threshold);

/// Row-wise in-place variant used by the solver loop.
void block_soft_threshold_rows(Eigen::Ref<Matrix> x, const Vector& thresholds);

/// data_scale * sigma_max(G)^2 by power iteration on G^T G, inflated by 1.01.
/// A zero matrix yields data_scale * machine epsilon and sets *zero_matrix.
double lipschitz_estimate(const Matrix& g, double data_scale, double tol = 1e-10,
                          int max_iter = 500, bool* zero_matrix = nullptr);

/// Gradient of the quadratic term: data_scale * G^T (G X - Y).
Matrix smooth_grad(const Matrix& x, const InnerProblem& inner);

double inner_objective(const Matrix& x, const InnerProblem& inner);

/// Certified optimality gap from the scaled-residual dual point
/// Theta = data_scale * s * (Y - G X), s = min(1, min_n lambda[n]/||(G^T c R)[n,:]||).
/// If every row is unpenalized the smooth gradient norm is returned instead
/// and *all_unpenalized is set.
double duality_gap(const Matrix& x, const InnerProblem& inner,
                   bool* all_unpenalized = nullptr);

/// Fresh state at x0; lipschitz == 0 requests a power-iteration estimate.
InnerState make_inner_state(const InnerProblem& inner, Matrix x0, bool accelerated,
                            double lipschitz = 0.0);

/// Advances the state by at most max_steps proximal-gradient iterations,
/// stopping early when the relative iterate change or the duality gap drops
/// below tol. Resumable: chunked calls replay the exact same trajectory as a
/// single long call.
InnerRunStatus run_inner(InnerState& state, const InnerProblem& inner, long max_steps,
                         double tol);

/// One-shot ISTA/FISTA solve from x0 with step 1/L.
SourceEstimate weighted_l21_solve(const InnerProblem& inner, const SourceEstimate& x0,
                                  long max_iter, double tol, bool accelerated,
                                  InnerSolveReport* report = nullptr,
                                  double lipschitz = 0.0);

}  // namespace sbl
