#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sbl/experiments.hpp"
#include "sbl/matrix_io.hpp"
#include "sbl/solvers.hpp"

namespace sbl::bench {

/// Raised for bad keys, bad values, or inconsistent inputs; maps to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat "key = value" text, '#' comments. Later assignments win.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in, const std::string& origin);
KeyValues load_config_file(const std::filesystem::path& path);

/// Applies "--key=value" arguments on top of the file-provided values.
void apply_overrides(KeyValues& kv, const std::vector<std::string>& args);

struct SolverEntry {
    std::string label;
    SolverConfig config;
    double rho = 0.0;
};

struct BenchConfig {
    TrialSpec trial;            // trial.seed holds the base seed
    double coherence = 0.9;
    std::vector<SolverEntry> solvers;
    int n_trials = 1;
    int parallelism = 1;
    std::filesystem::path out_dir;
    double conv_rel_tol = 1e-4;  // time-to-convergence threshold
    MatrixFormat format = MatrixFormat::binary;
};

/// Ordered record written as "key = value" lines.
using Summary = std::vector<std::pair<std::string, std::string>>;

void write_file_atomic(const std::filesystem::path& path, const std::string& content);
void write_summary(const std::filesystem::path& path, const Summary& summary);
Summary read_summary(const std::filesystem::path& path);

/// Fixed schema: iter,wall_seconds,objective,data_fit,n_active,recon_snr_db
/// (last column empty without ground truth).
std::string trace_csv(const std::vector<IterTrace>& trace);
void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<IterTrace>& trace);

/// First wall time at which the trace objective is within rel_tol
/// (relatively) of its final value.
double time_to_convergence(const std::vector<IterTrace>& trace, double rel_tol);

int cmd_gen(const KeyValues& kv);
int cmd_solve(const KeyValues& kv);
int cmd_bench(const KeyValues& kv);

/// Dispatches gen/solve/bench with --config/--key=value arguments.
int run_cli(int argc, const char* const* argv);

}  // namespace sbl::bench
