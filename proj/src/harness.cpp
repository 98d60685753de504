#include "bilevel/harness.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <string_view>

#include "bilevel/rng.hpp"

#ifndef BILEVEL_VERSION
#define BILEVEL_VERSION "unknown"
#endif

namespace bilevel {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view cell, double& out) {
    cell = trim(cell);
    if (cell.empty()) return false;
    if (cell.front() == '+') cell.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc() && ptr == cell.data() + cell.size();
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

Matrix select_rows(const Matrix& data, const std::vector<Eigen::Index>& rows, const std::vector<Eigen::Index>& cols) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = data(rows[i], cols[j]);
    return out;
}

Vector select_entries(const Matrix& data, const std::vector<Eigen::Index>& rows, Eigen::Index col) {
    Vector out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = data(rows[i], col);
    return out;
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

nlohmann::json record_json(const TraceRecord& r) {
    const auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    const auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : nlohmann::json(nullptr); };
    return {{"k", r.k},         {"wall_s", num(r.wall_s)}, {"f_val", num(r.f_val)},
            {"g_val", num(r.g_val)}, {"f_gap", opt(r.f_gap)}, {"abs_f_gap", opt(r.abs_f_gap)},
            {"g_gap", opt(r.g_gap)}, {"a_k", num(r.a_k)},     {"A_k", num(r.A_k)}};
}

}  // namespace

Matrix parse_csv_matrix(std::istream& in, bool has_header) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (has_header && line_no == 1) continue;
        if (trim(line).empty()) continue;
        const auto cells = split_commas(line);
        if (rows.empty()) width = cells.size();
        if (cells.size() != width)
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                                 " columns, found " + std::to_string(cells.size()),
                             line_no);
        std::vector<double> row(width);
        for (std::size_t j = 0; j < width; ++j)
            if (!parse_double(cells[j], row[j]))
                throw ParseError("line " + std::to_string(line_no) + ": non-numeric cell '" + std::string(cells[j]) +
                                     "' in column " + std::to_string(j + 1),
                                 line_no);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("no data rows", line_no);
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j) m(i, j) = rows[i][j];
    return m;
}

Matrix load_csv_matrix(const std::filesystem::path& path, bool has_header) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string(), 0);
    return parse_csv_matrix(in, has_header);
}

RegressionProblem make_regression_problem(const Matrix& data, std::optional<Eigen::Index> outcome_col,
                                          double train_frac, double radius, std::uint64_t seed) {
    if (!(train_frac > 0.0 && train_frac < 1.0)) throw ConfigError("train_frac", "must lie in (0, 1)");
    if (data.cols() < 2) throw ConfigError("data", "need an outcome column and at least one feature");
    RegressionProblem out;
    if (outcome_col) {
        if (*outcome_col < 0 || *outcome_col >= data.cols()) throw ConfigError("outcome_col", "out of range");
        out.outcome_col = *outcome_col;
    } else {
        Pcg32 pick(seed, kStreamOutcome);
        out.outcome_col = pick.below(static_cast<std::uint32_t>(data.cols()));
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(data.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Pcg32 rng(seed, kStreamSplit);
    rng.shuffle(order);
    const auto n_train = static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(data.rows())));
    if (n_train == 0 || n_train == order.size()) throw ConfigError("train_frac", "split leaves an empty partition");
    out.train_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.validation_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

    std::vector<Eigen::Index> features;
    for (Eigen::Index j = 0; j < data.cols(); ++j)
        if (j != out.outcome_col) features.push_back(j);

    auto& p = out.problem;
    p.name = "regression";
    p.lower = least_squares_oracle(select_rows(data, out.train_rows, features),
                                   select_entries(data, out.train_rows, out.outcome_col));
    p.upper = least_squares_oracle(select_rows(data, out.validation_rows, features),
                                   select_entries(data, out.validation_rows, out.outcome_col));
    p.set = FeasibleSet::ball(Vector::Zero(static_cast<Eigen::Index>(features.size())), radius);
    return out;
}

BilevelProblem make_linear_inverse(Eigen::Index n, double alpha) {
    if (n < 1) throw ConfigError("n", "must be >= 1");
    BilevelProblem p;
    p.name = "linear_inverse";
    p.upper = quadratic_norm_oracle(n);
    p.lower = least_squares_oracle(Matrix::Ones(1, n), Vector::Ones(1), static_cast<double>(n));
    p.set = FeasibleSet::nonneg_orthant();
    const double nd = static_cast<double>(n);
    p.truth = Truth{Vector::Constant(n, 1.0 / nd), 1.0 / (2.0 * nd), 0.0};
    p.holder = HolderParams{2.0, alpha, 1.0 / std::sqrt(nd)};
    // Uniform on the simplex via normalized exponentials.
    p.lower_solutions = [n](std::size_t count, std::uint64_t seed) {
        Pcg32 rng(seed, kStreamData);
        std::vector<Vector> pts;
        pts.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            Vector e(n);
            for (Eigen::Index j = 0; j < n; ++j) {
                double u = rng.uniform();
                while (u <= 0.0) u = rng.uniform();
                e[j] = -std::log(u);
            }
            pts.push_back(e / e.sum());
        }
        return pts;
    };
    p.validate();
    return p;
}

MinNormProblem make_min_norm_synthetic(Eigen::Index m, Eigen::Index d, double radius_mult, std::uint64_t seed) {
    if (!(m >= 1 && m < d)) throw ConfigError("m", "min-norm problem needs 1 <= m < d");
    if (!(radius_mult > 1.0)) throw ConfigError("radius_mult", "must exceed 1 so x* is interior");
    MinNormProblem out;
    for (int attempt = 0; attempt < 64; ++attempt) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt);
        Pcg32 rng(s, kStreamData);
        Matrix a = rng.normal_matrix(m, d);
        const Vector x_seed = rng.normal_vector(d);
        Vector b = a * x_seed;

        const Eigen::JacobiSVD<Matrix> svd(a);
        const auto& sv = svd.singularValues();
        if (sv[sv.size() - 1] < 1e-8 * sv[0]) continue;

        const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
        Vector x_star = cod.solve(b);

        auto& p = out.problem;
        p.name = "min_norm";
        p.upper = quadratic_norm_oracle(d);
        p.lower = least_squares_oracle(a, b);
        p.set = FeasibleSet::ball(Vector::Zero(d), radius_mult * x_star.norm());
        // X_g* = (x* + null(A)) ∩ Z; x* is orthogonal to null(A).
        const Eigen::JacobiSVD<Matrix> full(a, Eigen::ComputeFullV);
        const Matrix null_basis = full.matrixV().rightCols(d - m);
        const double slack = std::sqrt(std::max(0.0, std::pow(radius_mult * x_star.norm(), 2) - x_star.squaredNorm()));
        p.lower_solutions = [null_basis, x_star, slack](std::size_t count, std::uint64_t sample_seed) {
            Pcg32 rng(sample_seed, kStreamData);
            std::vector<Vector> pts;
            pts.reserve(count);
            for (std::size_t i = 0; i < count; ++i) {
                Vector w = rng.normal_vector(null_basis.cols());
                w *= slack * rng.uniform() / w.norm();
                pts.push_back(x_star + null_basis * w);
            }
            return pts;
        };
        p.truth = make_truth(p, std::move(x_star), 0.0);
        p.validate();
        out.a = std::move(a);
        out.b = std::move(b);
        out.seed_used = s;
        out.regenerations = attempt;
        return out;
    }
    throw ConfigError("seed", "could not draw a well-conditioned min-norm instance");
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string format_trace_row(const TraceRecord& r) {
    std::string row;
    row += std::to_string(r.k);
    row += ',' + format_double(r.wall_s);
    row += ',' + format_double(r.f_val);
    row += ',' + format_double(r.g_val);
    row += ',' + optional_cell(r.f_gap);
    row += ',' + optional_cell(r.abs_f_gap);
    row += ',' + optional_cell(r.g_gap);
    row += ',' + format_double(r.a_k);
    row += ',' + format_double(r.A_k);
    return row;
}

TraceWriter::TraceWriter(const std::filesystem::path& path, std::size_t flush_every)
    : out_(path, std::ios::binary | std::ios::trunc), flush_every_(flush_every) {
    if (!out_) throw Error("cannot write trace " + path.string());
    out_ << kTraceHeader << '\n';
}

void TraceWriter::write(const TraceRecord& r) {
    out_ << format_trace_row(r) << '\n';
    if (++pending_ >= flush_every_) {
        out_.flush();
        pending_ = 0;
    }
}

void TraceWriter::close() {
    out_.flush();
    out_.close();
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRecord>& trace) {
    TraceWriter w(path);
    for (const auto& r : trace) w.write(r);
    w.close();
}

std::vector<TraceRecord> read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string(), 0);
    std::string line;
    std::getline(in, line);
    if (trim(line) != kTraceHeader) throw ParseError("unexpected trace header", 1);
    std::vector<TraceRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_commas(line);
        if (cells.size() != 9) throw ParseError("trace row with wrong column count", line_no);
        const auto req = [&](std::size_t i) {
            double v = 0.0;
            if (!parse_double(cells[i], v)) throw ParseError("bad numeric cell", line_no);
            return v;
        };
        const auto opt = [&](std::size_t i) -> std::optional<double> {
            if (trim(cells[i]).empty()) return std::nullopt;
            return req(i);
        };
        TraceRecord r;
        r.k = static_cast<std::size_t>(req(0));
        r.wall_s = req(1);
        r.f_val = req(2);
        r.g_val = req(3);
        r.f_gap = opt(4);
        r.abs_f_gap = opt(5);
        r.g_gap = opt(6);
        r.a_k = req(7);
        r.A_k = req(8);
        out.push_back(r);
    }
    return out;
}

std::string to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::AgmBio: return "agm_bio";
        case SolverKind::PAgmBio: return "p_agm_bio";
        case SolverKind::RApm: return "r_apm";
        case SolverKind::PbApg: return "pb_apg";
    }
    return "unknown";
}

std::vector<std::filesystem::path> ExperimentResult::trace_paths() const {
    std::vector<std::filesystem::path> paths;
    for (const auto& o : outcomes)
        if (!o.trace_path.empty()) paths.push_back(o.trace_path);
    return paths;
}

bool ExperimentResult::all_ok() const {
    for (const auto& o : outcomes)
        if (!o.ok) return false;
    return true;
}

SolveResult run_solver(const BilevelProblem& problem, const SolverSpec& spec) {
    switch (spec.kind) {
        case SolverKind::AgmBio: return solve(problem, spec.config);
        case SolverKind::PAgmBio: {
            CompositeBilevelProblem composite = as_composite(problem);
            if (spec.upper_l1) composite.upper.nonsmooth = ProxTerm::l1(*spec.upper_l1);
            if (!composite.upper.nonsmooth.is_zero() && problem.set.is_whole_space())
                composite.lower.nonsmooth = ProxTerm::zero();
            return p_agm_bio_solve(composite, spec.config);
        }
        case SolverKind::RApm:
            return r_apm_solve(problem, spec.config.K, spec.eta, {spec.config.x0, spec.config.on_record});
        case SolverKind::PbApg:
            return pb_apg_solve(problem, spec.config.K, spec.penalty, {spec.config.x0, spec.config.on_record});
    }
    throw ContractViolation("unknown solver kind");
}

ExperimentResult run_experiment(const ExperimentSpec& spec, int threads) {
    if (spec.solvers.empty()) throw ConfigError("solvers", "experiment needs at least one solver");
    if (spec.K < 1) throw ConfigError("K", "must be >= 1");
    spec.problem.validate();
    std::filesystem::create_directories(spec.output_dir);

    ExperimentResult result;
    result.outcomes.resize(spec.solvers.size());
    const auto count = static_cast<int>(spec.solvers.size());
    const int workers = std::max(1, std::min(threads, count));

#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
    for (int i = 0; i < count; ++i) {
        const SolverSpec& s = spec.solvers[static_cast<std::size_t>(i)];
        SolverOutcome& o = result.outcomes[static_cast<std::size_t>(i)];
        o.label = s.label;
        o.trace_path = spec.output_dir / (spec.name + "__" + s.label + ".csv");
        try {
            TraceWriter writer(o.trace_path);
            SolverSpec local = s;
            local.config.on_record = [&writer](const TraceRecord& r) { writer.write(r); };
            SolveResult solved = run_solver(spec.problem, local);
            writer.close();
            o.trace = std::move(solved.trace);
            if (!o.trace.empty()) o.final_record = o.trace.back();
            o.ok = true;
        } catch (const std::exception& e) {
            o.ok = false;
            o.error = e.what();
        }
    }

    nlohmann::json manifest;
    manifest["name"] = spec.name;
    manifest["seed"] = spec.seed;
    manifest["K"] = spec.K;
    manifest["version"] = version_string();
    manifest["problem"] = spec.problem_echo;
    manifest["solvers"] = nlohmann::json::array();
    manifest["failures"] = nlohmann::json::array();
    for (std::size_t i = 0; i < spec.solvers.size(); ++i) {
        const auto& o = result.outcomes[i];
        nlohmann::json entry = {{"label", o.label},
                                {"kind", to_string(spec.solvers[i].kind)},
                                {"config", spec.solvers[i].echo},
                                {"trace", o.trace_path.filename().string()},
                                {"ok", o.ok}};
        if (o.final_record) entry["final"] = record_json(*o.final_record);
        manifest["solvers"].push_back(entry);
        if (!o.ok) manifest["failures"].push_back({{"label", o.label}, {"error", o.error}});
    }
    result.manifest_path = spec.output_dir / (spec.name + "__manifest.json");
    std::ofstream(result.manifest_path, std::ios::binary | std::ios::trunc) << manifest.dump(2) << '\n';
    return result;
}

int run_parallelism() {
    if (const char* env = std::getenv("BILEVEL_AGM_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return 1;
}

std::string version_string() { return BILEVEL_VERSION; }

Vector random_nonneg_start(Eigen::Index n, std::uint64_t seed) {
    Pcg32 rng(seed, kStreamStart);
    return rng.uniform_vector(n, 0.0, 1.0);
}

}  // namespace bilevel
