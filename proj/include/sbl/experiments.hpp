#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sbl/types.hpp"

namespace sbl {

struct GroundTruth {
    Matrix X_true;   // N x T
    std::vector<Index> support;
    double sensor_snr_db = 0.0;  // realized SNR of Y in sensor space
};

enum class Generator { gaussian_cs, meg_like };

std::string to_string(Generator generator);
Generator generator_from_string(const std::string& name);

struct TrialSpec {
    Index M = 0;
    Index N = 0;
    Index T = 1;
    double active_fraction = 0.1;
    double target_snr_db = 25.0;  // +inf means noiseless
    Generator generator = Generator::gaussian_cs;
    std::uint64_t seed = 0;
};

/// Distributions of the per-source sinusoids used by the MEG-like generator.
struct SinusoidParams {
    double amp_lo = 0.5, amp_hi = 1.5;
    double freq_lo = 1.0, freq_hi = 5.0;   // cycles per window
    double phase_lo = 0.0, phase_hi = 2.0 * 3.14159265358979323846;
};

/// Column-normalized standard Gaussian design with a row-sparse Gaussian
/// signal; noise rescaled so the realized sensor SNR matches the target
/// exactly. Bit-deterministic per seed.
std::pair<ProblemInstance, GroundTruth> gen_compressed_sensing(const TrialSpec& spec);

/// Gaussian matrix whose adjacent columns have correlation `coherence`
/// (AR(1) across columns); building block of the surrogate leadfield.
Matrix meg_coherent_basis(Index m, Index n, double coherence, std::uint64_t seed);

/// Surrogate leadfield: sensor-space smoothing mixer applied to a
/// column-coherent Gaussian basis, then column-normalized.
Matrix make_meg_leadfield(Index m, Index n, double coherence, std::uint64_t seed);

/// MEG-like trial on the surrogate leadfield: sparse sinusoidal sources,
/// noise calibrated to the target sensor SNR.
std::pair<ProblemInstance, GroundTruth> gen_meg_like(const TrialSpec& spec,
                                                     double coherence,
                                                     const SinusoidParams& sines = {});

/// Same signal/noise model on a caller-supplied leadfield (columns are
/// normalized first). Used when a real leadfield is loaded from file.
std::pair<ProblemInstance, GroundTruth> gen_meg_like_with_leadfield(
    const TrialSpec& spec, const Matrix& leadfield, const SinusoidParams& sines = {});

/// 10 log10(||G X||_F^2 / ||noise||_F^2); +inf for zero noise.
double sensor_snr_db(const Matrix& g, const Matrix& x_true, const Matrix& noise);

/// 10 log10(||X_true||_F^2 / ||X_est - X_true||_F^2); +inf on exact recovery.
double recon_snr_db(const Matrix& x_true, const Matrix& x_est);

struct SupportMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_defined = true;  // false when the estimated support is empty
};

SupportMetrics support_metrics(const GroundTruth& truth, const SourceEstimate& estimate);

struct SeriesPoint {
    double time = 0.0;
    double value = 0.0;
};

struct AggregateResult {
    std::vector<double> grid;
    std::vector<double> median;     // pointwise median of step-interpolated series
    std::vector<double> terminal;   // last value of each trial
};

/// Step-interpolates each trial series (last value carried forward, first
/// value carried backward) onto the grid and takes the pointwise median.
AggregateResult aggregate_median(const std::vector<std::vector<SeriesPoint>>& trials,
                                 const std::vector<double>& grid);

}  // namespace sbl
