#include "sbl/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

namespace sbl::bench {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string fmt(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

double median_of(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const size_t half = values.size() / 2;
    return values.size() % 2 == 1 ? values[half]
                                  : 0.5 * (values[half - 1] + values[half]);
}

/// Typed access over a KeyValues map that tracks which keys were consumed,
/// so leftovers can be reported as configuration errors.
class KeyReader {
  public:
    explicit KeyReader(const KeyValues& kv) : kv_(kv) {}

    std::optional<std::string> get(const std::string& key) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return std::nullopt;
        used_.insert(key);
        return it->second;
    }

    std::string require(const std::string& key) {
        auto value = get(key);
        if (!value) throw ConfigError("missing required key: " + key);
        return *value;
    }

    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    long get_long(const std::string& key, long fallback) {
        auto value = get(key);
        return value ? to_long(key, *value) : fallback;
    }

    long require_long(const std::string& key) { return to_long(key, require(key)); }

    double get_double(const std::string& key, double fallback) {
        auto value = get(key);
        return value ? to_double(key, *value) : fallback;
    }

    double require_double(const std::string& key) {
        return to_double(key, require(key));
    }

    bool get_bool(const std::string& key, bool fallback) {
        auto value = get(key);
        if (!value) return fallback;
        if (*value == "1" || *value == "true" || *value == "yes") return true;
        if (*value == "0" || *value == "false" || *value == "no") return false;
        throw ConfigError("key " + key + ": expected a boolean, got \"" + *value + "\"");
    }

    void finish() const {
        std::string unknown;
        for (const auto& [key, value] : kv_)
            if (!used_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
        if (!unknown.empty()) throw ConfigError("unknown keys: " + unknown);
    }

  private:
    static long to_long(const std::string& key, const std::string& value) {
        try {
            size_t pos = 0;
            const long parsed = std::stol(value, &pos);
            if (pos != value.size()) throw std::invalid_argument(value);
            return parsed;
        } catch (const std::exception&) {
            throw ConfigError("key " + key + ": expected an integer, got \"" + value +
                              "\"");
        }
    }

    static double to_double(const std::string& key, const std::string& value) {
        if (value == "inf" || value == "+inf")
            return std::numeric_limits<double>::infinity();
        try {
            size_t pos = 0;
            const double parsed = std::stod(value, &pos);
            if (pos != value.size()) throw std::invalid_argument(value);
            return parsed;
        } catch (const std::exception&) {
            throw ConfigError("key " + key + ": expected a number, got \"" + value +
                              "\"");
        }
    }

    const KeyValues& kv_;
    std::set<std::string> used_;
};

SolverEntry parse_solver(KeyReader& keys, const std::string& prefix,
                         const std::string& label) {
    SolverEntry entry;
    entry.label = label;
    SolverConfig& c = entry.config;
    try {
        c.variant = variant_from_string(keys.require(prefix + "variant"));
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }
    c.max_outer = static_cast<int>(keys.get_long(prefix + "max_outer", c.max_outer));
    c.inner_k = static_cast<int>(keys.get_long(prefix + "inner_k", c.inner_k));
    c.outer_tol = keys.get_double(prefix + "outer_tol", c.outer_tol);
    c.inner_tol = keys.get_double(prefix + "inner_tol", c.inner_tol);
    c.accelerated = keys.get_bool(prefix + "accelerated", c.accelerated);
    c.gamma_init = keys.get_double(prefix + "gamma_init", c.gamma_init);
    c.sigma0_sq = keys.get_double(prefix + "sigma0_sq", c.sigma0_sq);
    c.prune_rel = keys.get_double(prefix + "prune_rel", c.prune_rel);
    entry.rho = keys.get_double(prefix + "rho", 0.0);
    try {
        c.validate();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }
    return entry;
}

TrialSpec parse_trial(KeyReader& keys) {
    TrialSpec spec;
    spec.M = keys.require_long("M");
    spec.N = keys.require_long("N");
    spec.T = keys.get_long("T", 1);
    spec.active_fraction = keys.require_double("active_fraction");
    spec.target_snr_db = keys.require_double("snr_db");
    try {
        spec.generator = generator_from_string(keys.require("generator"));
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }
    spec.seed = static_cast<std::uint64_t>(keys.get_long("seed", 0));
    if (spec.M < 1 || spec.N < 1 || spec.T < 1)
        throw ConfigError("M, N, T must all be >= 1");
    return spec;
}

MatrixFormat parse_format(KeyReader& keys) {
    const std::string format = keys.get("format").value_or("binary");
    if (format == "binary") return MatrixFormat::binary;
    if (format == "text") return MatrixFormat::text;
    throw ConfigError("key format: expected text or binary, got \"" + format + "\"");
}

std::filesystem::path require_out_dir(KeyReader& keys) {
    const std::filesystem::path out(keys.require("out"));
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec)
        throw ConfigError("cannot create output directory " + out.string() + ": " +
                          ec.message());
    return out;
}

std::pair<ProblemInstance, GroundTruth> make_trial(const TrialSpec& base,
                                                   double coherence,
                                                   std::uint64_t seed,
                                                   const Matrix* fixed_leadfield) {
    TrialSpec spec = base;
    spec.seed = seed;
    if (spec.generator == Generator::gaussian_cs) return gen_compressed_sensing(spec);
    if (fixed_leadfield)
        return gen_meg_like_with_leadfield(spec, *fixed_leadfield);
    return gen_meg_like(spec, coherence);
}

struct RunRecord {
    std::string label;
    bool failed = false;
    std::string error;
    Summary summary;
    std::vector<IterTrace> trace;
    double final_recon_snr = std::numeric_limits<double>::quiet_NaN();
    double ttc = std::numeric_limits<double>::quiet_NaN();
};

void append_solver_echo(Summary& s, const SolverEntry& entry) {
    const SolverConfig& c = entry.config;
    s.emplace_back("variant", to_string(c.variant));
    s.emplace_back("rho", fmt(entry.rho));
    s.emplace_back("sigma0_sq", fmt(c.sigma0_sq));
    s.emplace_back("inner_k", std::to_string(c.inner_k));
    s.emplace_back("max_outer", std::to_string(c.max_outer));
    s.emplace_back("outer_tol", fmt(c.outer_tol));
    s.emplace_back("inner_tol", fmt(c.inner_tol));
    s.emplace_back("accelerated", c.accelerated ? "true" : "false");
    s.emplace_back("gamma_init", fmt(c.gamma_init));
    s.emplace_back("prune_rel", fmt(c.prune_rel));
}

RunRecord run_one(const ProblemInstance& base_problem, const GroundTruth* truth,
                  const SolverEntry& entry, std::uint64_t seed, double conv_rel_tol) {
    RunRecord record;
    record.label = entry.label;

    Summary& s = record.summary;
    s.emplace_back("label", entry.label);
    append_solver_echo(s, entry);
    s.emplace_back("seed", std::to_string(seed));
    s.emplace_back("M", std::to_string(base_problem.m()));
    s.emplace_back("N", std::to_string(base_problem.n()));
    s.emplace_back("T", std::to_string(base_problem.t()));
    s.emplace_back("noise_var", fmt(base_problem.noise_var));
    if (truth) s.emplace_back("sensor_snr_db", fmt(truth->sensor_snr_db));

    try {
        const ProblemInstance problem = base_problem.with_rho(entry.rho);
        const auto start = std::chrono::steady_clock::now();
        const SolverResult result =
            solve(problem, entry.config, truth ? &truth->X_true : nullptr);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();

        record.trace = result.trace;
        record.ttc = time_to_convergence(result.trace, conv_rel_tol);

        s.emplace_back("status", "ok");
        s.emplace_back("converged", result.converged ? "true" : "false");
        s.emplace_back("outer_iterations", std::to_string(result.outer_iterations));
        s.emplace_back("n_active", std::to_string(result.estimate.n_active()));
        s.emplace_back("final_objective",
                       fmt(result.trace.empty() ? 0.0 : result.trace.back().objective));
        s.emplace_back("data_fit",
                       fmt(result.trace.empty() ? 0.0 : result.trace.back().data_fit));
        if (truth && truth->X_true.squaredNorm() > 0.0) {
            record.final_recon_snr = recon_snr_db(truth->X_true, result.estimate.X);
            s.emplace_back("recon_snr_db", fmt(record.final_recon_snr));
            const SupportMetrics sm = support_metrics(*truth, result.estimate);
            s.emplace_back("support_precision",
                           sm.precision_defined ? fmt(sm.precision) : "undefined");
            s.emplace_back("support_recall", fmt(sm.recall));
            s.emplace_back("support_f1", fmt(sm.f1));
        }
        s.emplace_back("wall_seconds", fmt(wall));
        s.emplace_back("time_to_convergence_s", fmt(record.ttc));
    } catch (const std::exception& err) {
        record.failed = true;
        record.error = err.what();
        s.emplace_back("status", "failed");
        s.emplace_back("error", record.error);
    }
    return record;
}

std::string meta_for_trial(const TrialSpec& spec, double coherence,
                           const ProblemInstance& problem, const GroundTruth& truth) {
    std::ostringstream out;
    out << "generator = " << to_string(spec.generator) << "\n";
    out << "seed = " << spec.seed << "\n";
    out << "M = " << spec.M << "\n";
    out << "N = " << spec.N << "\n";
    out << "T = " << spec.T << "\n";
    out << "active_fraction = " << fmt(spec.active_fraction) << "\n";
    out << "target_snr_db = " << fmt(spec.target_snr_db) << "\n";
    if (spec.generator == Generator::meg_like)
        out << "coherence = " << fmt(coherence) << "\n";
    out << "noise_var = " << fmt(problem.noise_var) << "\n";
    out << "sensor_snr_db = " << fmt(truth.sensor_snr_db) << "\n";
    std::string support;
    for (Index row : truth.support)
        support += (support.empty() ? "" : ",") + std::to_string(row);
    out << "support = " << support << "\n";
    return out.str();
}

}  // namespace

KeyValues parse_key_values(std::istream& in, const std::string& origin) {
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

KeyValues load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    return parse_key_values(in, path.string());
}

void apply_overrides(KeyValues& kv, const std::vector<std::string>& args) {
    for (const std::string& arg : args) {
        if (arg.rfind("--", 0) != 0)
            throw ConfigError("expected --key=value argument, got \"" + arg + "\"");
        const size_t eq = arg.find('=');
        if (eq == std::string::npos || eq == 2)
            throw ConfigError("expected --key=value argument, got \"" + arg + "\"");
        kv[arg.substr(2, eq - 2)] = arg.substr(eq + 1);
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_summary(const std::filesystem::path& path, const Summary& summary) {
    std::string content;
    for (const auto& [key, value] : summary) content += key + " = " + value + "\n";
    write_file_atomic(path, content);
}

Summary read_summary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open summary: " + path.string());
    Summary summary;
    std::string line;
    while (std::getline(in, line)) {
        const size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        summary.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return summary;
}

std::string trace_csv(const std::vector<IterTrace>& trace) {
    std::string out = "iter,wall_seconds,objective,data_fit,n_active,recon_snr_db\n";
    for (const IterTrace& row : trace) {
        out += std::to_string(row.iter) + "," + fmt(row.wall_seconds) + "," +
               fmt(row.objective) + "," + fmt(row.data_fit) + "," +
               std::to_string(row.n_active) + ",";
        if (row.recon_snr_db) out += fmt(*row.recon_snr_db);
        out += "\n";
    }
    return out;
}

void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<IterTrace>& trace) {
    write_file_atomic(path, trace_csv(trace));
}

double time_to_convergence(const std::vector<IterTrace>& trace, double rel_tol) {
    if (trace.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double final = trace.back().objective;
    const double slack = rel_tol * std::max(std::abs(final), 1e-30);
    for (const IterTrace& row : trace)
        if (std::abs(row.objective - final) <= slack) return row.wall_seconds;
    return trace.back().wall_seconds;
}

int cmd_gen(const KeyValues& kv) {
    KeyReader keys(kv);
    const std::filesystem::path out = require_out_dir(keys);
    const TrialSpec base = parse_trial(keys);
    const double coherence = keys.get_double("coherence", 0.9);
    const int n_trials = static_cast<int>(keys.get_long("trials", 1));
    const MatrixFormat format = parse_format(keys);
    keys.finish();
    if (n_trials < 1) throw ConfigError("trials must be >= 1");

    // The MEG-like generator keeps the seed-0 leadfield fixed across trials.
    std::optional<Matrix> leadfield;
    if (base.generator == Generator::meg_like)
        leadfield = make_meg_leadfield(base.M, base.N, coherence, base.seed);

    int failures = 0;
    for (int i = 0; i < n_trials; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "trial_%04d", i);
        const std::filesystem::path dir = out / name;
        std::filesystem::create_directories(dir);
        try {
            TrialSpec spec = base;
            spec.seed = base.seed + static_cast<std::uint64_t>(i);
            auto [problem, truth] =
                make_trial(base, coherence, spec.seed,
                           leadfield ? &*leadfield : nullptr);
            save_matrix(dir / "G.dat", problem.G, format);
            save_matrix(dir / "Y.dat", problem.Y, format);
            save_matrix(dir / "X_true.dat", truth.X_true, format);
            write_file_atomic(dir / "meta.txt",
                              meta_for_trial(spec, coherence, problem, truth));
        } catch (const std::exception& err) {
            ++failures;
            std::cerr << "gen: trial " << i << " failed: " << err.what() << "\n";
            write_file_atomic(dir / "meta.txt",
                              std::string("status = failed\nerror = ") + err.what() +
                                  "\n");
        }
    }
    return failures == 0 ? 0 : 2;
}

int cmd_solve(const KeyValues& kv) {
    KeyReader keys(kv);
    const std::filesystem::path out = require_out_dir(keys);
    SolverEntry entry = parse_solver(keys, "", keys.get("label").value_or("solver"));
    const double conv_rel_tol = keys.get_double("conv_rel_tol", 1e-4);

    std::optional<ProblemInstance> problem;
    std::optional<GroundTruth> truth;
    std::uint64_t seed = 0;

    if (keys.has("G")) {
        const Matrix g = load_matrix(keys.require("G"));
        const Matrix y = load_matrix(keys.require("Y"));
        if (g.rows() != y.rows())
            throw ConfigError("dimension mismatch: G is " + std::to_string(g.rows()) +
                              "x" + std::to_string(g.cols()) + " but Y is " +
                              std::to_string(y.rows()) + "x" +
                              std::to_string(y.cols()));
        const double noise_var = keys.require_double("noise_var");
        problem.emplace(g, y, noise_var, 0.0);
        if (auto x_path = keys.get("X_true")) {
            Matrix x_true = load_matrix(*x_path);
            if (x_true.rows() != g.cols() || x_true.cols() != y.cols())
                throw ConfigError("dimension mismatch: X_true is " +
                                  std::to_string(x_true.rows()) + "x" +
                                  std::to_string(x_true.cols()) + ", expected " +
                                  std::to_string(g.cols()) + "x" +
                                  std::to_string(y.cols()));
            GroundTruth t;
            t.X_true = std::move(x_true);
            for (Index n = 0; n < t.X_true.rows(); ++n)
                if ((t.X_true.row(n).array() != 0.0).any()) t.support.push_back(n);
            t.sensor_snr_db = std::numeric_limits<double>::quiet_NaN();
            truth = std::move(t);
        }
        keys.finish();
    } else {
        const TrialSpec spec = parse_trial(keys);
        const double coherence = keys.get_double("coherence", 0.9);
        seed = spec.seed;
        keys.finish();
        auto [p, t] = make_trial(spec, coherence, spec.seed, nullptr);
        problem.emplace(std::move(p));
        truth = std::move(t);
    }

    const RunRecord record =
        run_one(*problem, truth ? &*truth : nullptr, entry, seed, conv_rel_tol);
    write_trace_csv(out / "trace.csv", record.trace);
    write_summary(out / "summary.txt", record.summary);
    for (const auto& [key, value] : record.summary)
        std::cout << key << " = " << value << "\n";
    if (record.failed) {
        std::cerr << "solve failed: " << record.error << "\n";
        return 2;
    }
    return 0;
}

int cmd_bench(const KeyValues& kv) {
    KeyReader keys(kv);
    const std::filesystem::path out = require_out_dir(keys);
    const TrialSpec base = parse_trial(keys);
    const double coherence = keys.get_double("coherence", 0.9);
    const int n_trials = static_cast<int>(keys.get_long("trials", 1));
    const int parallelism = static_cast<int>(keys.get_long("parallelism", 1));
    const double conv_rel_tol = keys.get_double("conv_rel_tol", 1e-4);

    std::vector<SolverEntry> solvers;
    {
        std::stringstream labels(keys.require("solvers"));
        std::string label;
        while (std::getline(labels, label, ',')) {
            label = trim(label);
            if (label.empty()) continue;
            solvers.push_back(parse_solver(keys, label + ".", label));
        }
    }
    keys.finish();
    if (solvers.empty()) throw ConfigError("solvers list is empty");
    if (n_trials < 1) throw ConfigError("trials must be >= 1");
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");

    {
        std::string echo;
        for (const auto& [key, value] : kv) echo += key + " = " + value + "\n";
        write_file_atomic(out / "config_echo.txt", echo);
    }
    for (const SolverEntry& entry : solvers)
        std::filesystem::create_directories(out / entry.label);

    std::optional<Matrix> leadfield;
    if (base.generator == Generator::meg_like)
        leadfield = make_meg_leadfield(base.M, base.N, coherence, base.seed);

    std::vector<std::vector<RunRecord>> trials(static_cast<size_t>(n_trials));
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n_trials) return;
            const std::uint64_t seed = base.seed + static_cast<std::uint64_t>(i);
            std::vector<RunRecord>& records = trials[static_cast<size_t>(i)];
            try {
                const auto [problem, truth] =
                    make_trial(base, coherence, seed, leadfield ? &*leadfield : nullptr);
                for (const SolverEntry& entry : solvers)
                    records.push_back(
                        run_one(problem, &truth, entry, seed, conv_rel_tol));
            } catch (const std::exception& err) {
                // generation failed: every solver inherits the failure record
                for (const SolverEntry& entry : solvers) {
                    RunRecord record;
                    record.label = entry.label;
                    record.failed = true;
                    record.error = err.what();
                    record.summary.emplace_back("label", entry.label);
                    record.summary.emplace_back("seed", std::to_string(seed));
                    record.summary.emplace_back("status", "failed");
                    record.summary.emplace_back("error", record.error);
                    records.push_back(std::move(record));
                }
            }
        }
    };

    {
        const int workers = std::min(parallelism, n_trials);
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    // Single-threaded reporting after the join point.
    int failures = 0;
    double t_max = 0.0;
    for (int i = 0; i < n_trials; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "trial_%04d", i);
        for (const RunRecord& record : trials[static_cast<size_t>(i)]) {
            const std::filesystem::path dir = out / record.label;
            write_summary(dir / (std::string(name) + "_summary.txt"), record.summary);
            write_trace_csv(dir / (std::string(name) + "_trace.csv"), record.trace);
            if (record.failed)
                ++failures;
            else if (!record.trace.empty())
                t_max = std::max(t_max, record.trace.back().wall_seconds);
        }
    }

    std::vector<double> grid;
    for (int k = 0; k <= 200; ++k)
        grid.push_back(t_max * static_cast<double>(k) / 200.0);

    std::string table =
        "label,median_recon_snr_db,median_time_to_convergence_s,"
        "median_final_objective,failed_trials\n";
    for (const SolverEntry& entry : solvers) {
        std::vector<std::vector<SeriesPoint>> obj_series;
        std::vector<std::vector<SeriesPoint>> snr_series;
        std::vector<double> recon, ttc, final_obj;
        int failed = 0;
        for (const auto& records : trials)
            for (const RunRecord& record : records) {
                if (record.label != entry.label) continue;
                if (record.failed) {
                    ++failed;
                    continue;
                }
                std::vector<SeriesPoint> obj, snr;
                for (const IterTrace& row : record.trace) {
                    obj.push_back({row.wall_seconds, row.objective});
                    if (row.recon_snr_db)
                        snr.push_back({row.wall_seconds, *row.recon_snr_db});
                }
                if (!obj.empty()) obj_series.push_back(std::move(obj));
                if (!snr.empty()) snr_series.push_back(std::move(snr));
                if (!std::isnan(record.final_recon_snr))
                    recon.push_back(record.final_recon_snr);
                ttc.push_back(record.ttc);
                if (!record.trace.empty())
                    final_obj.push_back(record.trace.back().objective);
            }

        if (!obj_series.empty()) {
            const AggregateResult obj_med = aggregate_median(obj_series, grid);
            const AggregateResult* snr_med = nullptr;
            AggregateResult snr_storage;
            if (snr_series.size() == obj_series.size()) {
                snr_storage = aggregate_median(snr_series, grid);
                snr_med = &snr_storage;
            }
            std::string csv = "time_s,median_objective,median_recon_snr_db\n";
            for (size_t gi = 0; gi < grid.size(); ++gi) {
                csv += fmt(grid[gi]) + "," + fmt(obj_med.median[gi]) + ",";
                if (snr_med) csv += fmt(snr_med->median[gi]);
                csv += "\n";
            }
            write_file_atomic(out / (entry.label + "_median.csv"), csv);
        }

        table += entry.label + "," + fmt(median_of(recon)) + "," +
                 fmt(median_of(ttc)) + "," + fmt(median_of(final_obj)) + "," +
                 std::to_string(failed) + "\n";
    }
    write_file_atomic(out / "comparison.csv", table);
    std::cout << table;

    return failures == 0 ? 0 : 2;
}

int run_cli(int argc, const char* const* argv) {
    const std::string usage =
        "usage: sbl_bench <gen|solve|bench> [--config=FILE] [--key=value ...]\n";
    if (argc < 2) {
        std::cerr << usage;
        return 1;
    }
    const std::string command = argv[1];
    if (command == "-h" || command == "--help" || command == "help") {
        std::cout << usage;
        return 0;
    }

    try {
        KeyValues kv;
        std::vector<std::string> overrides;
        for (int i = 2; i < argc; ++i) {
            const std::string arg = argv[i];
            if (arg.rfind("--config=", 0) == 0) {
                const KeyValues from_file = load_config_file(arg.substr(9));
                for (const auto& [key, value] : from_file) kv[key] = value;
            } else {
                overrides.push_back(arg);
            }
        }
        apply_overrides(kv, overrides);

        if (command == "gen") return cmd_gen(kv);
        if (command == "solve") return cmd_solve(kv);
        if (command == "bench") return cmd_bench(kv);
        std::cerr << "unknown command: " << command << "\n" << usage;
        return 1;
    } catch (const ConfigError& err) {
        std::cerr << "configuration error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
}

}  // namespace sbl::bench
