#include "sbl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace sbl {

namespace {

constexpr double kNoiselessVar = 1e-12;  // stand-in variance for exact-data trials

Matrix standard_normal(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

void normalize_columns(Matrix& g) {
    for (Index j = 0; j < g.cols(); ++j) {
        const double norm = g.col(j).norm();
        if (norm == 0.0)
            throw std::runtime_error("generator produced a zero column");
        g.col(j) /= norm;
    }
}

std::vector<Index> sample_support(Index n, Index k, std::mt19937_64& rng) {
    // partial Fisher-Yates, then sorted for reproducible row order
    std::vector<Index> pool(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
    for (Index i = 0; i < k; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(pick(rng))]);
    }
    std::vector<Index> support(pool.begin(), pool.begin() + k);
    std::sort(support.begin(), support.end());
    return support;
}

Index active_count(const TrialSpec& spec) {
    const Index k = static_cast<Index>(std::llround(spec.active_fraction *
                                                    static_cast<double>(spec.N)));
    if (k < 1)
        throw std::invalid_argument(
            "TrialSpec: active_fraction * N rounds below one active source");
    if (k > spec.N) throw std::invalid_argument("TrialSpec: active_fraction > 1");
    return k;
}

void check_dims(const TrialSpec& spec) {
    if (spec.M < 1 || spec.N < 1 || spec.T < 1)
        throw std::invalid_argument("TrialSpec: M, N, T must be >= 1");
}

/// Draws noise, rescales it so the realized sensor SNR equals the target
/// exactly, and packages the instance. Infinite target -> exact data.
std::pair<ProblemInstance, GroundTruth> assemble_trial(Matrix g, Matrix x_true,
                                                       std::vector<Index> support,
                                                       const TrialSpec& spec,
                                                       std::mt19937_64& rng) {
    const Matrix signal = g * x_true;
    Matrix y;
    double noise_var;
    double realized;
    if (std::isinf(spec.target_snr_db)) {
        y = signal;
        noise_var = kNoiselessVar;
        realized = std::numeric_limits<double>::infinity();
    } else {
        Matrix noise = standard_normal(spec.M, spec.T, rng);
        const double wanted_energy =
            signal.squaredNorm() * std::pow(10.0, -spec.target_snr_db / 10.0);
        const double raw = noise.squaredNorm();
        if (raw == 0.0 || wanted_energy == 0.0)
            throw std::runtime_error("gen: degenerate noise calibration");
        noise *= std::sqrt(wanted_energy / raw);
        noise_var = noise.squaredNorm() / static_cast<double>(spec.M * spec.T);
        realized = sensor_snr_db(g, x_true, noise);
        y = signal + noise;
    }
    return {ProblemInstance(std::move(g), std::move(y), noise_var, 0.0),
            GroundTruth{std::move(x_true), std::move(support), realized}};
}

}  // namespace

std::string to_string(Generator generator) {
    return generator == Generator::gaussian_cs ? "gaussian_cs" : "meg_like";
}

Generator generator_from_string(const std::string& name) {
    if (name == "gaussian_cs") return Generator::gaussian_cs;
    if (name == "meg_like") return Generator::meg_like;
    throw std::invalid_argument("unknown generator: " + name);
}

std::pair<ProblemInstance, GroundTruth> gen_compressed_sensing(const TrialSpec& spec) {
    check_dims(spec);
    if (spec.generator != Generator::gaussian_cs)
        throw std::invalid_argument("gen_compressed_sensing: wrong generator tag");
    const Index k = active_count(spec);

    std::mt19937_64 rng(spec.seed);
    Matrix g = standard_normal(spec.M, spec.N, rng);
    normalize_columns(g);

    std::vector<Index> support = sample_support(spec.N, k, rng);
    Matrix x_true = Matrix::Zero(spec.N, spec.T);
    std::normal_distribution<double> normal;
    for (Index row : support)
        for (Index t = 0; t < spec.T; ++t) x_true(row, t) = normal(rng);

    return assemble_trial(std::move(g), std::move(x_true), std::move(support), spec, rng);
}

Matrix meg_coherent_basis(Index m, Index n, double coherence, std::uint64_t seed) {
    if (!(coherence >= 0.0 && coherence < 1.0))
        throw std::invalid_argument("meg_coherent_basis: coherence must be in [0,1)");
    std::mt19937_64 rng(seed);
    Matrix b(m, n);
    std::normal_distribution<double> normal;
    Vector z(m);
    const double fresh = std::sqrt(1.0 - coherence * coherence);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < m; ++i) z[i] = normal(rng);
        if (j == 0)
            b.col(j) = z;
        else
            b.col(j) = coherence * b.col(j - 1) + fresh * z;
    }
    return b;
}

Matrix make_meg_leadfield(Index m, Index n, double coherence, std::uint64_t seed) {
    // Gaussian-bump sensor mixing makes rows of G smooth and ill-conditioned,
    // mimicking volume conduction.
    constexpr double kBandwidth = 2.0;
    Matrix mixer(m, m);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j) {
            const double d = static_cast<double>(i - j);
            mixer(i, j) = std::exp(-d * d / (2.0 * kBandwidth * kBandwidth));
        }
    Matrix g = mixer * meg_coherent_basis(m, n, coherence, seed);
    normalize_columns(g);
    return g;
}

std::pair<ProblemInstance, GroundTruth> gen_meg_like_with_leadfield(
    const TrialSpec& spec, const Matrix& leadfield, const SinusoidParams& sines) {
    check_dims(spec);
    if (spec.generator != Generator::meg_like)
        throw std::invalid_argument("gen_meg_like: wrong generator tag");
    if (leadfield.rows() != spec.M || leadfield.cols() != spec.N)
        throw std::invalid_argument("gen_meg_like: leadfield shape mismatch");
    const Index k = active_count(spec);

    Matrix g = leadfield;
    normalize_columns(g);

    // Source/noise draws depend only on the trial seed, so a fixed leadfield
    // can be reused across trials.
    std::mt19937_64 rng(spec.seed ^ 0x6d656721ull);
    std::vector<Index> support = sample_support(spec.N, k, rng);

    std::uniform_real_distribution<double> amp(sines.amp_lo, sines.amp_hi);
    std::uniform_real_distribution<double> freq(sines.freq_lo, sines.freq_hi);
    std::uniform_real_distribution<double> phase(sines.phase_lo, sines.phase_hi);
    constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

    Matrix x_true = Matrix::Zero(spec.N, spec.T);
    for (Index row : support) {
        const double a = amp(rng);
        const double f = freq(rng);
        const double p = phase(rng);
        for (Index t = 0; t < spec.T; ++t)
            x_true(row, t) =
                a * std::sin(kTwoPi * f * static_cast<double>(t) /
                                 static_cast<double>(spec.T) +
                             p);
    }

    return assemble_trial(std::move(g), std::move(x_true), std::move(support), spec, rng);
}

std::pair<ProblemInstance, GroundTruth> gen_meg_like(const TrialSpec& spec,
                                                     double coherence,
                                                     const SinusoidParams& sines) {
    check_dims(spec);
    return gen_meg_like_with_leadfield(
        spec, make_meg_leadfield(spec.M, spec.N, coherence, spec.seed), sines);
}

double sensor_snr_db(const Matrix& g, const Matrix& x_true, const Matrix& noise) {
    if (g.cols() != x_true.rows() || g.rows() != noise.rows() ||
        x_true.cols() != noise.cols())
        throw std::invalid_argument("sensor_snr_db: shape mismatch");
    const double noise_energy = noise.squaredNorm();
    if (noise_energy == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10((g * x_true).squaredNorm() / noise_energy);
}

double recon_snr_db(const Matrix& x_true, const Matrix& x_est) {
    if (x_true.rows() != x_est.rows() || x_true.cols() != x_est.cols())
        throw std::invalid_argument("recon_snr_db: shape mismatch");
    const double signal = x_true.squaredNorm();
    if (signal == 0.0) throw std::invalid_argument("recon_snr_db: X_true is zero");
    const double err = (x_est - x_true).squaredNorm();
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(signal / err);
}

SupportMetrics support_metrics(const GroundTruth& truth, const SourceEstimate& estimate) {
    if (truth.X_true.rows() != estimate.X.rows())
        throw std::invalid_argument("support_metrics: row-count mismatch");
    if (truth.support.empty())
        throw std::invalid_argument("support_metrics: empty ground-truth support");

    std::vector<Index> truth_sorted = truth.support;
    std::sort(truth_sorted.begin(), truth_sorted.end());
    std::vector<Index> est_sorted = estimate.active_set;
    std::sort(est_sorted.begin(), est_sorted.end());

    std::vector<Index> hit;
    std::set_intersection(truth_sorted.begin(), truth_sorted.end(), est_sorted.begin(),
                          est_sorted.end(), std::back_inserter(hit));

    SupportMetrics metrics;
    metrics.recall = static_cast<double>(hit.size()) /
                     static_cast<double>(truth_sorted.size());
    if (est_sorted.empty()) {
        metrics.precision_defined = false;
        metrics.precision = std::numeric_limits<double>::quiet_NaN();
        metrics.f1 = 0.0;
        return metrics;
    }
    metrics.precision =
        static_cast<double>(hit.size()) / static_cast<double>(est_sorted.size());
    metrics.f1 = (metrics.precision + metrics.recall) == 0.0
                     ? 0.0
                     : 2.0 * metrics.precision * metrics.recall /
                           (metrics.precision + metrics.recall);
    return metrics;
}

AggregateResult aggregate_median(const std::vector<std::vector<SeriesPoint>>& trials,
                                 const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("aggregate_median: empty grid");
    if (trials.empty()) throw std::invalid_argument("aggregate_median: no trials");
    for (const auto& series : trials)
        if (series.empty())
            throw std::invalid_argument("aggregate_median: a trial series is empty");

    std::vector<std::vector<SeriesPoint>> sorted = trials;
    for (auto& series : sorted)
        std::stable_sort(series.begin(), series.end(),
                         [](const SeriesPoint& a, const SeriesPoint& b) {
                             return a.time < b.time;
                         });

    AggregateResult result;
    result.grid = grid;
    result.median.resize(grid.size());
    for (const auto& series : sorted) result.terminal.push_back(series.back().value);

    std::vector<double> column(sorted.size());
    for (size_t gi = 0; gi < grid.size(); ++gi) {
        for (size_t tr = 0; tr < sorted.size(); ++tr) {
            const auto& series = sorted[tr];
            // last sample at or before the grid time; first sample before that
            auto it = std::upper_bound(
                series.begin(), series.end(), grid[gi],
                [](double t, const SeriesPoint& p) { return t < p.time; });
            column[tr] = it == series.begin() ? series.front().value
                                              : std::prev(it)->value;
        }
        std::vector<double> sorted_col = column;
        std::sort(sorted_col.begin(), sorted_col.end());
        const size_t half = sorted_col.size() / 2;
        result.median[gi] = sorted_col.size() % 2 == 1
                                ? sorted_col[half]
                                : 0.5 * (sorted_col[half - 1] + sorted_col[half]);
    }
    return result;
}

}  // namespace sbl
