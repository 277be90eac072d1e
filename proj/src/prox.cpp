#include "sbl/prox.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace sbl {

namespace {

constexpr double kNormFloor = 1e-30;

double objective_given_product(const Matrix& gx, const Matrix& x,
                               const InnerProblem& inner) {
    double penalty = 0.0;
    for (Index n = 0; n < x.rows(); ++n)
        penalty += inner.weights.lambda[n] * x.row(n).norm();
    return 0.5 * inner.data_scale * (*inner.Y - gx).squaredNorm() + penalty;
}

// Duality gap with the residual R = Y - G X already at hand.
double gap_given_residual(const Matrix& x, const Matrix& residual,
                          const InnerProblem& inner, bool* all_unpenalized) {
    const double c = inner.data_scale;
    double primal = 0.5 * c * residual.squaredNorm();
    for (Index n = 0; n < x.rows(); ++n)
        primal += inner.weights.lambda[n] * x.row(n).norm();

    const Matrix gtr = inner.G->transpose() * residual;
    double scale = 1.0;
    bool any_penalized = false;
    for (Index n = 0; n < gtr.rows(); ++n) {
        const double lambda = inner.weights.lambda[n];
        if (lambda <= 0.0) continue;
        any_penalized = true;
        const double row = c * gtr.row(n).norm();
        if (row > lambda) scale = std::min(scale, lambda / row);
    }
    if (all_unpenalized) *all_unpenalized = !any_penalized;
    if (!any_penalized) return c * gtr.norm();  // plain least-squares residual

    const double cs = c * scale;
    const double dual =
        cs * (residual.array() * inner.Y->array()).sum() -
        cs * cs * residual.squaredNorm() / (2.0 * c);
    return std::max(primal - dual, 0.0);
}

}  // namespace

Eigen::RowVectorXd block_soft_threshold(const Eigen::RowVectorXd& row, double threshold) {
    if (!(threshold >= 0.0))
        throw std::invalid_argument("block_soft_threshold: threshold must be >= 0");
    if (threshold == 0.0) return row;
    const double norm = row.norm();
    if (norm <= threshold) return Eigen::RowVectorXd::Zero(row.size());
    return row * (1.0 - threshold / norm);
}

void block_soft_threshold_rows(Eigen::Ref<Matrix> x, const Vector& thresholds) {
    for (Index n = 0; n < x.rows(); ++n) {
        const double tau = thresholds[n];
        if (tau <= 0.0) continue;
        const double norm = x.row(n).norm();
        if (norm <= tau)
            x.row(n).setZero();
        else
            x.row(n) *= 1.0 - tau / norm;
    }
}

double lipschitz_estimate(const Matrix& g, double data_scale, double tol, int max_iter,
                          bool* zero_matrix) {
    if (!(tol > 0.0)) throw std::invalid_argument("lipschitz_estimate: tol must be > 0");
    if (zero_matrix) *zero_matrix = false;
    if (g.size() == 0 || g.squaredNorm() == 0.0) {
        if (zero_matrix) *zero_matrix = true;
        return data_scale * std::numeric_limits<double>::epsilon();
    }

    std::mt19937 rng(0x51f15e3u);
    std::normal_distribution<double> normal;
    Vector z(g.cols());
    for (Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    z.normalize();

    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const Vector gz = g * z;
        const double lambda_new = gz.squaredNorm();  // z^T G^T G z, z unit
        const Vector w = g.transpose() * gz;
        const double wn = w.norm();
        if (wn == 0.0) {
            // start vector fell into the null space; re-seed once
            for (Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
            z.normalize();
            continue;
        }
        z = w / wn;
        if (std::abs(lambda_new - lambda) <= tol * lambda_new) {
            lambda = lambda_new;
            break;
        }
        lambda = lambda_new;
    }
    return data_scale * lambda * 1.01;
}

Matrix smooth_grad(const Matrix& x, const InnerProblem& inner) {
    return inner.data_scale * (inner.G->transpose() * (*inner.G * x - *inner.Y));
}

double inner_objective(const Matrix& x, const InnerProblem& inner) {
    return objective_given_product(*inner.G * x, x, inner);
}

double duality_gap(const Matrix& x, const InnerProblem& inner, bool* all_unpenalized) {
    return gap_given_residual(x, *inner.Y - *inner.G * x, inner, all_unpenalized);
}

InnerState make_inner_state(const InnerProblem& inner, Matrix x0, bool accelerated,
                            double lipschitz) {
    if (x0.rows() != inner.n() || x0.cols() != inner.t())
        throw std::invalid_argument("make_inner_state: x0 must be N x T");
    InnerState state;
    state.lipschitz =
        lipschitz > 0.0 ? lipschitz : lipschitz_estimate(*inner.G, inner.data_scale);
    state.GX = *inner.G * x0;
    state.GX_prev = state.GX;
    state.objective = objective_given_product(state.GX, x0, inner);
    state.X = std::move(x0);
    state.X_prev = state.X;
    state.accelerated = accelerated;
    return state;
}

InnerRunStatus run_inner(InnerState& state, const InnerProblem& inner, long max_steps,
                         double tol) {
    InnerRunStatus status;
    const double inv_l = 1.0 / state.lipschitz;
    const Vector thresholds = inner.weights.lambda * inv_l;

    for (long step = 0; step < max_steps; ++step) {
        double t_next = 1.0;
        Matrix z;
        if (state.accelerated) {
            const double t = state.momentum;
            t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            const double beta = (t - 1.0) / t_next;
            const Matrix gy = state.GX + beta * (state.GX - state.GX_prev);
            z = state.X + beta * (state.X - state.X_prev) -
                inv_l * inner.data_scale * (inner.G->transpose() * (gy - *inner.Y));
        } else {
            z = state.X -
                inv_l * inner.data_scale *
                    (inner.G->transpose() * (state.GX - *inner.Y));
        }
        block_soft_threshold_rows(z, thresholds);
        Matrix gx_new = *inner.G * z;
        double obj_new = objective_given_product(gx_new, z, inner);

        if (state.accelerated && obj_new > state.objective) {
            // Momentum overshot: reset and retake a plain descent step from X.
            t_next = 1.0;
            z = state.X -
                inv_l * inner.data_scale *
                    (inner.G->transpose() * (state.GX - *inner.Y));
            block_soft_threshold_rows(z, thresholds);
            gx_new = *inner.G * z;
            obj_new = objective_given_product(gx_new, z, inner);
        }

        if (!std::isfinite(obj_new))
            throw std::runtime_error(
                "weighted_l21_solve: non-finite iterate (bad step size or inputs)");

        const double diff_norm = (z - state.X).norm();
        state.X_prev.swap(state.X);
        state.GX_prev.swap(state.GX);
        state.X = std::move(z);
        state.GX = std::move(gx_new);
        state.momentum = t_next;
        state.objective = obj_new;
        ++state.iterations;
        ++status.steps;

        const double rel_change = diff_norm / std::max(state.X.norm(), kNormFloor);
        if (rel_change < tol) {
            status.converged = true;
            break;
        }
        // the gap needs an extra mat-mat; only certify once the iterate is
        // already nearly stationary
        if (rel_change < 1e3 * tol) {
            status.last_gap =
                gap_given_residual(state.X, *inner.Y - state.GX, inner, nullptr);
            if (status.last_gap < tol) {
                status.converged = true;
                break;
            }
        }
    }
    return status;
}

SourceEstimate weighted_l21_solve(const InnerProblem& inner, const SourceEstimate& x0,
                                  long max_iter, double tol, bool accelerated,
                                  InnerSolveReport* report, double lipschitz) {
    if (max_iter < 1)
        throw std::invalid_argument("weighted_l21_solve: max_iter must be >= 1");
    InnerState state = make_inner_state(inner, x0.X, accelerated, lipschitz);
    const InnerRunStatus status = run_inner(state, inner, max_iter, tol);
    if (report) {
        report->iterations = status.steps;
        report->converged = status.converged;
        report->objective = state.objective;
        report->gap = status.last_gap;
    }
    return SourceEstimate::from_matrix(std::move(state.X));
}

}  // namespace sbl
