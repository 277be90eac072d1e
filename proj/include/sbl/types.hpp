#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace sbl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Inverse problem data: observations Y generated through a sensing
/// (leadfield) matrix G under white Gaussian noise of known variance.
struct ProblemInstance {
    Matrix G;           // M x N sensing matrix
    Matrix Y;           // M x T observations
    double noise_var;   // observation noise variance, > 0
    double rho;         // exponential prior rate on the source variances, >= 0

    ProblemInstance(Matrix g, Matrix y, double noise_var_, double rho_ = 0.0)
        : G(std::move(g)), Y(std::move(y)), noise_var(noise_var_), rho(rho_) {
        if (!(noise_var > 0.0))
            throw std::invalid_argument("ProblemInstance: noise_var must be > 0");
        if (!(rho >= 0.0))
            throw std::invalid_argument("ProblemInstance: rho must be >= 0");
        if (Y.rows() != G.rows())
            throw std::invalid_argument(
                "ProblemInstance: G is " + std::to_string(G.rows()) + "x" +
                std::to_string(G.cols()) + " but Y has " + std::to_string(Y.rows()) +
                " rows");
        if (!G.allFinite() || !Y.allFinite())
            throw std::invalid_argument("ProblemInstance: G and Y must be finite");
    }

    Index m() const { return G.rows(); }
    Index n() const { return G.cols(); }
    Index t() const { return Y.cols(); }

    /// Copy of this instance with a different prior rate.
    ProblemInstance with_rho(double rho_) const { return {G, Y, noise_var, rho_}; }
};

/// Per-source variance vector gamma (the SBL latent being optimized).
struct Hyperparams {
    Vector gamma;

    static Hyperparams constant(Index n, double value) {
        return Hyperparams{Vector::Constant(n, value)};
    }
};

inline void check_hyperparams(const Hyperparams& h) {
    if (!h.gamma.allFinite() || (h.gamma.array() < 0.0).any())
        throw std::invalid_argument("Hyperparams: gamma must be finite and >= 0");
}

/// Cholesky factorization of the marginal covariance
/// noise_var * I_M + G * diag(gamma) * G^T, exposing solves, the
/// log-determinant, and quadratic forms without ever forming the inverse.
class CovFactor {
  public:
    explicit CovFactor(const Matrix& sigma) : llt_(sigma) {
        if (llt_.info() != Eigen::Success)
            throw std::runtime_error(
                "CovFactor: covariance factorization failed (non-finite input?)");
        log_det_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
        if (!std::isfinite(log_det_))
            throw std::runtime_error("CovFactor: non-finite log-determinant");
    }

    Index dim() const { return llt_.matrixLLT().rows(); }
    double log_det() const { return log_det_; }

    /// Sigma^{-1} * B
    Matrix solve(const Matrix& b) const { return llt_.solve(b); }

    /// L^{-1} * B with Sigma = L L^T (one triangular solve per column)
    Matrix half_solve(const Matrix& b) const {
        return llt_.matrixL().solve(b);
    }

    /// tr(B^T Sigma^{-1} B) = ||L^{-1} B||_F^2
    double quad_form_trace(const Matrix& b) const {
        return half_solve(b).squaredNorm();
    }

  private:
    Eigen::LLT<Matrix> llt_;
    double log_det_ = 0.0;
};

/// Dual vector v with v[n] = G[:,n]^T Sigma_y^{-1} G[:,n]; drives the
/// reweighting of the l21 penalty.
struct DualWeights {
    Vector v;
};

/// Row-sparse source estimate. Rows outside active_set are exact zeros.
struct SourceEstimate {
    Matrix X;   // N x T
    std::vector<Index> active_set;

    static SourceEstimate from_matrix(Matrix x) {
        SourceEstimate est{std::move(x), {}};
        for (Index n = 0; n < est.X.rows(); ++n)
            if ((est.X.row(n).array() != 0.0).any()) est.active_set.push_back(n);
        return est;
    }

    Index n_active() const { return static_cast<Index>(active_set.size()); }
};

/// Per-row penalty weights of a weighted l21 term.
struct GroupWeights {
    Vector lambda;
};

}  // namespace sbl
