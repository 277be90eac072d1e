#include "sbl/model.hpp"

#include <cmath>

namespace sbl {

CovFactor assemble_covariance(const ProblemInstance& problem, const Hyperparams& gamma) {
    if (gamma.gamma.size() != problem.n())
        throw std::invalid_argument("assemble_covariance: gamma length != N");
    check_hyperparams(gamma);

    const Index m = problem.m();
    Matrix sigma = Matrix::Zero(m, m);

    std::vector<Index> active;
    for (Index n = 0; n < gamma.gamma.size(); ++n)
        if (gamma.gamma[n] > 0.0) active.push_back(n);

    if (!active.empty()) {
        // Sigma += Gs Gs^T with Gs the active columns scaled by sqrt(gamma).
        Matrix gs(m, static_cast<Index>(active.size()));
        for (Index j = 0; j < gs.cols(); ++j)
            gs.col(j) = problem.G.col(active[static_cast<size_t>(j)]) *
                        std::sqrt(gamma.gamma[active[static_cast<size_t>(j)]]);
        sigma.selfadjointView<Eigen::Lower>().rankUpdate(gs);
        sigma.triangularView<Eigen::StrictlyUpper>() =
            sigma.triangularView<Eigen::StrictlyLower>().transpose();
    }
    sigma.diagonal().array() += problem.noise_var;
    return CovFactor(sigma);
}

DualWeights compute_dual_weights(const ProblemInstance& problem, const CovFactor& factor) {
    if (factor.dim() != problem.m())
        throw std::invalid_argument("compute_dual_weights: factor dimension mismatch");
    const Matrix z = factor.half_solve(problem.G);
    return DualWeights{z.colwise().squaredNorm().transpose()};
}

SourceEstimate posterior_mean(const ProblemInstance& problem, const Hyperparams& gamma,
                              const CovFactor& factor) {
    if (gamma.gamma.size() != problem.n())
        throw std::invalid_argument("posterior_mean: gamma length != N");
    const Matrix w = factor.solve(problem.Y);                       // Sigma^{-1} Y
    Matrix x = gamma.gamma.asDiagonal() * (problem.G.transpose() * w);
    return SourceEstimate::from_matrix(std::move(x));
}

Hyperparams gamma_from_x(const SourceEstimate& x, const DualWeights& v, double rho,
                         Index t_samples) {
    if (v.v.size() != x.X.rows())
        throw std::invalid_argument("gamma_from_x: v length != rows of X");
    if (t_samples < 1) throw std::invalid_argument("gamma_from_x: T must be >= 1");
    for (Index n = 0; n < v.v.size(); ++n)
        if (!(v.v[n] + rho > 0.0))
            throw std::invalid_argument("gamma_from_x: v[n] + rho must be > 0");

    Vector gamma(v.v.size());
    const double t = static_cast<double>(t_samples);
    for (Index n = 0; n < gamma.size(); ++n) {
        const double row_norm = x.X.row(n).norm();
        gamma[n] = row_norm == 0.0 ? 0.0 : row_norm / std::sqrt(t * (v.v[n] + rho));
    }
    return Hyperparams{std::move(gamma)};
}

double eval_type2(const ProblemInstance& problem, const Hyperparams& gamma) {
    const CovFactor factor = assemble_covariance(problem, gamma);
    const double t = static_cast<double>(problem.t());
    return factor.quad_form_trace(problem.Y) / t + factor.log_det() +
           problem.rho * gamma.gamma.sum();
}

double eval_wstar_at_iterate(const DualWeights& v, const Hyperparams& gamma_prev,
                             const CovFactor& factor) {
    return v.v.dot(gamma_prev.gamma) - factor.log_det();
}

double eval_wstar_at_iterate(const DualWeights& v, const Hyperparams& gamma_prev,
                             const ProblemInstance& problem) {
    return eval_wstar_at_iterate(v, gamma_prev, assemble_covariance(problem, gamma_prev));
}

double eval_F(const SourceEstimate& x, const DualWeights& v, double wstar_value,
              const ProblemInstance& problem) {
    const double t = static_cast<double>(problem.t());
    const double fit =
        (problem.Y - problem.G * x.X).squaredNorm() / (t * problem.noise_var);
    double penalty = 0.0;
    for (Index n = 0; n < v.v.size(); ++n)
        penalty += 2.0 * std::sqrt((problem.rho + v.v[n]) / t) * x.X.row(n).norm();
    return fit + penalty - wstar_value;
}

double logdet_lowsnr_approx(const ProblemInstance& problem, const Hyperparams& gamma) {
    if (gamma.gamma.size() != problem.n())
        throw std::invalid_argument("logdet_lowsnr_approx: gamma length != N");
    return (gamma.gamma.array() * problem.G.colwise().squaredNorm().transpose().array())
        .sum();
}

GroupWeights inner_weights_from_dual(const DualWeights& v, double rho, Index t_samples) {
    const double sqrt_t = std::sqrt(static_cast<double>(t_samples));
    return GroupWeights{(sqrt_t * (v.v.array() + rho).sqrt()).matrix()};
}

}  // namespace sbl
