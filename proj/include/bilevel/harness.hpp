#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bilevel/agm_bio.hpp"
#include "bilevel/baselines.hpp"
#include "bilevel/p_agm_bio.hpp"

namespace bilevel {

// PCG32 stream ids, one per consumer of the experiment seed.
inline constexpr std::uint64_t kStreamStart = 1;
inline constexpr std::uint64_t kStreamData = 2;
inline constexpr std::uint64_t kStreamSplit = 3;
inline constexpr std::uint64_t kStreamOutcome = 4;

/// Rectangular numeric CSV. Throws ParseError with a 1-based line number.
Matrix load_csv_matrix(const std::filesystem::path& path, bool has_header);
Matrix parse_csv_matrix(std::istream& in, bool has_header);

struct RegressionProblem {
    BilevelProblem problem;
    Eigen::Index outcome_col = 0;
    std::vector<Eigen::Index> train_rows;
    std::vector<Eigen::Index> validation_rows;
};

/// Validation loss over the training-loss minimizers in Ball(0, radius).
/// Rows are shuffled with the seed; floor(train_frac * rows) go to training.
/// A missing outcome column is drawn from the seed.
RegressionProblem make_regression_problem(const Matrix& data, std::optional<Eigen::Index> outcome_col,
                                          double train_frac, double radius, std::uint64_t seed);

/// f = 0.5 ||x||^2, g = 0.5 (sum x - 1)^2 over the nonnegative orthant, with
/// x* = 1/n, f* = 1/(2n), g* = 0 and Holder data r = 2, M = 1/sqrt(n).
BilevelProblem make_linear_inverse(Eigen::Index n, double alpha = 1.0);

struct MinNormProblem {
    BilevelProblem problem;
    Matrix a;
    Vector b;
    std::uint64_t seed_used = 0;
    int regenerations = 0;
};

/// Underdetermined Gaussian system b = A x_seed; f = 0.5 ||x||^2, g = 0.5 ||Ax - b||^2,
/// Z = Ball(0, radius_mult ||x*||) with x* the minimum-norm solution from a
/// pseudoinverse solve. Ill-conditioned draws are regenerated with seed + 1.
MinNormProblem make_min_norm_synthetic(Eigen::Index m, Eigen::Index d, double radius_mult, std::uint64_t seed);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

inline constexpr const char* kTraceHeader = "k,wall_s,f_val,g_val,f_gap,abs_f_gap,g_gap,a_k,A_k";

std::string format_trace_row(const TraceRecord& r);

/// Streams rows to a CSV file, flushing every `flush_every` rows and on close.
class TraceWriter {
public:
    explicit TraceWriter(const std::filesystem::path& path, std::size_t flush_every = 100);
    void write(const TraceRecord& r);
    void close();

private:
    std::ofstream out_;
    std::size_t flush_every_;
    std::size_t pending_ = 0;
};

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> read_trace_csv(const std::filesystem::path& path);

enum class SolverKind { AgmBio, PAgmBio, RApm, PbApg };

std::string to_string(SolverKind kind);

struct SolverSpec {
    std::string label;
    SolverKind kind = SolverKind::AgmBio;
    SolverConfig config;
    std::optional<double> eta;
    std::optional<double> penalty;
    /// Weight of an l1 term added to the upper level (P-AGM-BiO only).
    std::optional<double> upper_l1;
    nlohmann::json echo;
};

struct ExperimentSpec {
    std::string name;
    BilevelProblem problem;
    std::vector<SolverSpec> solvers;
    std::size_t K = 0;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;
    nlohmann::json problem_echo;
};

struct SolverOutcome {
    std::string label;
    bool ok = false;
    std::string error;
    std::filesystem::path trace_path;
    std::optional<TraceRecord> final_record;
    std::vector<TraceRecord> trace;
};

struct ExperimentResult {
    std::vector<SolverOutcome> outcomes;
    std::filesystem::path manifest_path;

    std::vector<std::filesystem::path> trace_paths() const;
    bool all_ok() const;
};

/// Runs one solver spec on a problem.
SolveResult run_solver(const BilevelProblem& problem, const SolverSpec& spec);

/// Runs each solver (concurrently, up to `threads`), writes one CSV per
/// solver and a JSON manifest. Solver errors are recorded, not thrown.
ExperimentResult run_experiment(const ExperimentSpec& spec, int threads = 1);

/// Thread cap from BILEVEL_AGM_THREADS, else 1.
int run_parallelism();

/// Version string baked in at configure time.
std::string version_string();

/// Start point drawn uniformly from [0, 1)^n on the start stream.
Vector random_nonneg_start(Eigen::Index n, std::uint64_t seed);

}  // namespace bilevel
