#include "bilevel/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

namespace bilevel::cli {
namespace {

using nlohmann::json;

// Walks one JSON object, remembering which keys were read so leftovers can be
// rejected with their full path.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string key(const std::string& name) const { return path_.empty() ? name : path_ + "." + name; }

    bool has(const std::string& name) {
        seen_.insert(name);
        return obj_.contains(name) && !obj_.at(name).is_null();
    }

    const json& raw(const std::string& name) {
        if (!has(name)) throw ConfigError(key(name), "missing required key");
        return obj_.at(name);
    }

    double number(const std::string& name) {
        const json& v = raw(name);
        if (!v.is_number()) throw ConfigError(key(name), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(key(name), "expected a finite number");
        return d;
    }

    std::optional<double> maybe_number(const std::string& name) {
        if (!has(name)) return std::nullopt;
        return number(name);
    }

    std::uint64_t count(const std::string& name) {
        const json& v = raw(name);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            throw ConfigError(key(name), "expected a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    std::string text(const std::string& name) {
        const json& v = raw(name);
        if (!v.is_string()) throw ConfigError(key(name), "expected a string");
        return v.get<std::string>();
    }

    bool flag(const std::string& name, bool fallback) {
        if (!has(name)) return fallback;
        const json& v = obj_.at(name);
        if (!v.is_boolean()) throw ConfigError(key(name), "expected true or false");
        return v.get<bool>();
    }

    void finish() const {
        for (const auto& [k, v] : obj_.items())
            if (!seen_.contains(k)) throw ConfigError(key(k), "unknown key");
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

double positive(ObjectReader& r, const std::string& name, double fallback) {
    const double v = r.maybe_number(name).value_or(fallback);
    if (!(v > 0.0)) throw ConfigError(r.key(name), "must be positive");
    return v;
}

Eigen::Index dimension_param(ObjectReader& r, const std::string& name) {
    const auto v = r.count(name);
    if (v < 1) throw ConfigError(r.key(name), "must be >= 1");
    return static_cast<Eigen::Index>(v);
}

BilevelProblem build_problem(ObjectReader& r, std::uint64_t seed, json& echo, std::string& kind) {
    kind = r.text("kind");
    if (kind == "linear_inverse") {
        const Eigen::Index n = dimension_param(r, "n");
        const double alpha = positive(r, "alpha", 1.0);
        echo["n"] = n;
        echo["alpha"] = alpha;
        return make_linear_inverse(n, alpha);
    }
    if (kind == "min_norm") {
        const Eigen::Index m = dimension_param(r, "m");
        const Eigen::Index d = dimension_param(r, "d");
        if (m >= d) throw ConfigError(r.key("m"), "min_norm needs m < d");
        const double radius_mult = r.maybe_number("radius_mult").value_or(2.0);
        if (!(radius_mult > 1.0)) throw ConfigError(r.key("radius_mult"), "must exceed 1");
        MinNormProblem mn = make_min_norm_synthetic(m, d, radius_mult, seed);
        echo["m"] = m;
        echo["d"] = d;
        echo["radius_mult"] = radius_mult;
        echo["seed_used"] = mn.seed_used;
        echo["regenerations"] = mn.regenerations;
        return std::move(mn.problem);
    }
    if (kind == "regression") {
        const std::string data = r.text("data");
        const bool header = r.flag("header", false);
        std::optional<Eigen::Index> outcome;
        if (r.has("outcome_col")) outcome = static_cast<Eigen::Index>(r.count("outcome_col"));
        const double train_frac = r.maybe_number("train_frac").value_or(0.75);
        if (!(train_frac > 0.0 && train_frac < 1.0)) throw ConfigError(r.key("train_frac"), "must lie in (0, 1)");
        const double radius = positive(r, "radius", 1.0);
        Matrix m;
        try {
            m = load_csv_matrix(data, header);
        } catch (const ParseError& e) {
            throw ConfigError(r.key("data"), e.what());
        }
        RegressionProblem rp;
        try {
            rp = make_regression_problem(m, outcome, train_frac, radius, seed);
        } catch (const ConfigError& e) {
            throw ConfigError(r.key(e.key_path), e.what());
        }
        echo["data"] = data;
        echo["rows"] = m.rows();
        echo["cols"] = m.cols();
        echo["outcome_col"] = rp.outcome_col;
        echo["train_rows"] = rp.train_rows.size();
        echo["validation_rows"] = rp.validation_rows.size();
        echo["train_frac"] = train_frac;
        echo["radius"] = radius;
        return std::move(rp.problem);
    }
    throw ConfigError(r.key("kind"), "unsupported problem kind '" + kind + "'");
}

std::optional<Vector> parse_start(const json& v, const std::string& key, Eigen::Index n, std::uint64_t seed) {
    if (v.is_string()) {
        const auto mode = v.get<std::string>();
        if (mode == "zero") return std::nullopt;
        if (mode == "random") return random_nonneg_start(n, seed);
        throw ConfigError(key, "expected \"zero\", \"random\" or an array");
    }
    if (v.is_array()) {
        if (static_cast<Eigen::Index>(v.size()) != n)
            throw ConfigError(key, "start point needs " + std::to_string(n) + " entries");
        Vector x(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const json& e = v.at(static_cast<std::size_t>(i));
            if (!e.is_number()) throw ConfigError(key + "[" + std::to_string(i) + "]", "expected a number");
            x[i] = e.get<double>();
        }
        return x;
    }
    throw ConfigError(key, "expected \"zero\", \"random\" or an array");
}

GammaRegime parse_regime(const std::string& s, const std::string& key) {
    if (s == "compact") return GammaRegime::CompactSet;
    if (s == "holderian") return GammaRegime::Holderian;
    if (s == "weak_sharp") return GammaRegime::WeakSharp;
    if (s == "manual") return GammaRegime::Manual;
    throw ConfigError(key, "expected compact, holderian, weak_sharp or manual");
}

SolverKind parse_kind(const std::string& s, const std::string& key) {
    if (s == "agm_bio") return SolverKind::AgmBio;
    if (s == "p_agm_bio") return SolverKind::PAgmBio;
    if (s == "r_apm") return SolverKind::RApm;
    if (s == "pb_apg") return SolverKind::PbApg;
    throw ConfigError(key, "expected agm_bio, p_agm_bio, r_apm or pb_apg");
}

SolverSpec parse_solver(const json& node, std::size_t index, const ExperimentSpec& exp, const json& default_start) {
    ObjectReader r(node, "solvers[" + std::to_string(index) + "]");
    SolverSpec s;
    s.echo = node;
    s.kind = parse_kind(r.text("kind"), r.key("kind"));
    s.label = r.has("label") ? r.text("label") : to_string(s.kind);
    if (s.label.empty() || s.label.find_first_of("/\\") != std::string::npos)
        throw ConfigError(r.key("label"), "label must be a nonempty name without path separators");

    s.config.K = exp.K;
    if (r.has("K")) {
        s.config.K = r.count("K");
        if (s.config.K < 1) throw ConfigError(r.key("K"), "must be >= 1");
    }
    const json& start = r.has("x0") ? r.raw("x0") : default_start;
    s.config.x0 = parse_start(start, r.has("x0") ? r.key("x0") : "x0", exp.problem.dimension(), exp.seed);

    const bool cutting = s.kind == SolverKind::AgmBio || s.kind == SolverKind::PAgmBio;
    if (cutting) {
        GammaSettings& g = s.config.gamma;
        g.regime = r.has("gamma") ? parse_regime(r.text("gamma"), r.key("gamma")) : GammaRegime::CompactSet;
        g.r = r.maybe_number("r");
        g.alpha = r.maybe_number("alpha");
        g.M = r.maybe_number("M");
        g.gamma = r.maybe_number("gamma_value");
        if (g.regime == GammaRegime::CompactSet && !exp.problem.set.diameter())
            throw ConfigError(r.key("gamma"), "compact regime needs a bounded feasible set");
        try {
            gamma_for({g, 1.0, 1.0, s.config.K});
        } catch (const ConfigError& e) {
            const std::string field = e.key_path == "gamma" ? "gamma_value" : e.key_path;
            const std::string what = e.what();
            throw ConfigError(r.key(field), what.substr(what.find(": ") + 2));
        }
        if (r.has("aux_mode")) {
            const auto mode = r.text("aux_mode");
            if (mode == "per_iteration")
                s.config.aux_mode = AuxMode::PerIteration;
            else if (mode == "constant_last")
                s.config.aux_mode = AuxMode::ConstantLast;
            else
                throw ConfigError(r.key("aux_mode"), "expected per_iteration or constant_last");
        }
        if (r.has("dykstra_tol")) s.config.dykstra.tol = positive(r, "dykstra_tol", 1.0);
        if (r.has("dykstra_max_sweeps")) {
            s.config.dykstra.max_sweeps = static_cast<int>(r.count("dykstra_max_sweeps"));
            if (s.config.dykstra.max_sweeps < 1) throw ConfigError(r.key("dykstra_max_sweeps"), "must be >= 1");
        }
    }
    if (s.kind == SolverKind::PAgmBio && r.has("upper_l1")) {
        s.upper_l1 = r.number("upper_l1");
        if (!(*s.upper_l1 >= 0.0)) throw ConfigError(r.key("upper_l1"), "must be >= 0");
    }
    if (s.kind == SolverKind::RApm && r.has("eta")) s.eta = positive(r, "eta", 1.0);
    if (s.kind == SolverKind::PbApg && r.has("penalty")) s.penalty = positive(r, "penalty", 1.0);
    r.finish();
    return s;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open config file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string(), std::string("invalid JSON: ") + e.what());
    }
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << std::scientific << v;
    return os.str();
}

}  // namespace

RunConfig parse_run_config(const json& doc, const Overrides& overrides) {
    ObjectReader r(doc, "");
    RunConfig rc;
    ExperimentSpec& exp = rc.experiment;
    exp.name = r.has("name") ? r.text("name") : "experiment";
    if (exp.name.empty() || exp.name.find_first_of("/\\") != std::string::npos)
        throw ConfigError("name", "name must be nonempty and contain no path separators");
    exp.seed = overrides.seed.value_or(r.has("seed") ? r.count("seed") : 0);
    exp.K = r.count("K");
    if (exp.K < 1) throw ConfigError("K", "must be >= 1");
    exp.output_dir = r.has("output_dir") ? r.text("output_dir") : "out";
    if (overrides.output_dir) exp.output_dir = *overrides.output_dir;

    {
        ObjectReader pr(r.raw("problem"), "problem");
        exp.problem_echo = r.raw("problem");
        exp.problem = build_problem(pr, exp.seed, exp.problem_echo, rc.problem_kind);
        if (pr.has("gradient_fault")) {
            rc.gradient_fault = pr.number("gradient_fault");
            exp.problem.lower = std::make_shared<ScaledGradientFault>(exp.problem.lower, *rc.gradient_fault);
        }
        pr.finish();
    }

    const json default_start = r.has("x0") ? r.raw("x0") : json("zero");
    parse_start(default_start, "x0", exp.problem.dimension(), exp.seed);

    const json& solvers = r.raw("solvers");
    if (!solvers.is_array()) throw ConfigError("solvers", "expected an array");
    if (solvers.empty()) throw ConfigError("solvers", "experiment needs at least one solver");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < solvers.size(); ++i) {
        SolverSpec s = parse_solver(solvers[i], i, exp, default_start);
        if (!labels.insert(s.label).second)
            throw ConfigError("solvers[" + std::to_string(i) + "].label", "duplicate label '" + s.label + "'");
        exp.solvers.push_back(std::move(s));
    }
    r.finish();
    return rc;
}

RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides) {
    return parse_run_config(read_json_file(path), overrides);
}

int cmd_solve(const std::filesystem::path& config_path, const Overrides& overrides, std::ostream& out,
              std::ostream& err) {
    RunConfig rc;
    try {
        rc = load_run_config(config_path, overrides);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    }

    ExperimentResult result;
    try {
        result = run_experiment(rc.experiment, run_parallelism());
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kSolverFailure;
    }

    for (const auto& o : result.outcomes) {
        if (!o.ok) {
            out << o.label << "  FAILED  " << o.error << "\n";
            continue;
        }
        const TraceRecord& last = *o.final_record;
        out << o.label << "  k=" << last.k;
        if (last.f_gap)
            out << "  f_gap=" << fmt(*last.f_gap);
        else
            out << "  f_val=" << fmt(last.f_val);
        if (last.g_gap)
            out << "  g_gap=" << fmt(*last.g_gap);
        else
            out << "  g_val=" << fmt(last.g_val);
        out << "  trace=" << o.trace_path.string() << "\n";
    }
    out << "manifest=" << result.manifest_path.string() << "\n";
    return result.all_ok() ? kOk : kSolverFailure;
}

namespace {

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
    if (!out) throw Error("write failed for " + path.string());
}

json vector_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

double param(const std::map<std::string, double>& params, const std::string& name, std::optional<double> fallback) {
    if (auto it = params.find(name); it != params.end()) return it->second;
    if (!fallback) throw ConfigError(name, "missing required parameter");
    return *fallback;
}

Eigen::Index index_param(const std::map<std::string, double>& params, const std::string& name,
                         std::optional<double> fallback) {
    const double v = param(params, name, fallback);
    if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError(name, "must be a positive integer");
    return static_cast<Eigen::Index>(v);
}

}  // namespace

int cmd_gen(const std::string& kind, const std::map<std::string, double>& params,
            const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err) {
    json truth;
    Matrix a;
    Vector b;
    BilevelProblem problem;
    try {
        if (kind == "linear_inverse") {
            const Eigen::Index n = index_param(params, "n", std::nullopt);
            const double alpha = param(params, "alpha", 1.0);
            if (!(alpha > 0.0)) throw ConfigError("alpha", "must be positive");
            problem = make_linear_inverse(n, alpha);
            a = Matrix::Ones(1, n);
            b = Vector::Ones(1);
            truth["n"] = n;
        } else if (kind == "min_norm") {
            const Eigen::Index m = index_param(params, "m", std::nullopt);
            const Eigen::Index d = index_param(params, "d", std::nullopt);
            if (m >= d) throw ConfigError("m", "min_norm needs m < d");
            const double radius_mult = param(params, "radius_mult", 2.0);
            if (!(radius_mult > 1.0)) throw ConfigError("radius_mult", "must exceed 1");
            const double seed = param(params, "seed", 0.0);
            if (!(seed >= 0.0) || seed != std::floor(seed)) throw ConfigError("seed", "must be a nonnegative integer");
            MinNormProblem mn = make_min_norm_synthetic(m, d, radius_mult, static_cast<std::uint64_t>(seed));
            a = mn.a;
            b = mn.b;
            problem = std::move(mn.problem);
            truth["m"] = m;
            truth["d"] = d;
            truth["radius_mult"] = radius_mult;
            truth["seed_used"] = mn.seed_used;
            truth["regenerations"] = mn.regenerations;
        } else {
            err << "config error: unsupported kind '" << kind << "' (expected linear_inverse or min_norm)\n";
            return kConfigError;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    }

    try {
        std::filesystem::create_directories(out_dir);
        write_matrix_csv(out_dir / "A.csv", a);
        write_matrix_csv(out_dir / "b.csv", b);
        truth["kind"] = kind;
        truth["x_star"] = vector_json(problem.truth->x_star);
        truth["f_star"] = problem.truth->f_star;
        truth["g_star"] = problem.truth->g_star;
        truth["L_f"] = problem.upper->lipschitz();
        truth["L_g"] = problem.lower->lipschitz();
        truth["set"] = problem.set.describe();
        if (problem.holder) truth["holder"] = {{"r", problem.holder->r}, {"alpha", problem.holder->alpha}, {"M", problem.holder->M}};
        truth["version"] = version_string();
        std::ofstream j(out_dir / "truth.json", std::ios::binary);
        j << truth.dump(2) << "\n";
        if (!j) throw Error("cannot write truth.json");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kSolverFailure;
    }
    out << "wrote " << (out_dir / "A.csv").string() << ", " << (out_dir / "b.csv").string() << ", "
        << (out_dir / "truth.json").string() << "\n";
    return kOk;
}

namespace {

struct CheckRow {
    std::string name;
    bool pass = false;
    std::string detail;
};

constexpr double kBoundSlack = 1.05;
constexpr double kContainmentTol = 1e-10;
constexpr std::size_t kContainmentSamples = 1000;

void check_bounds(const BilevelProblem& p, const SolverSpec& s, const std::vector<TraceRecord>& trace,
                  const Vector& x0, std::vector<CheckRow>& rows) {
    if (!p.truth) return;
    const double L_f = p.upper->lipschitz();
    const double L_g = p.lower->lipschitz();
    const double dist0_sq = (x0 - p.truth->x_star).squaredNorm();
    const GammaPolicy policy = gamma_for({s.config.gamma, L_f, L_g, s.config.K});
    const std::size_t K = trace.size() - 1;

    if (policy.regime == GammaRegime::CompactSet && p.set.diameter()) {
        const double D = *p.set.diameter();
        double f_ratio = 0.0;
        double g_ratio = 0.0;
        for (std::size_t k = 2; k <= K; ++k) {
            f_ratio = std::max(f_ratio, *trace[k].f_gap / bounds::compact_f_upper(k, L_f, dist0_sq));
            g_ratio = std::max(g_ratio, *trace[k].g_gap / bounds::compact_g_upper(k, L_g, dist0_sq, D));
        }
        rows.push_back({s.label + ": f bound (compact)", f_ratio <= kBoundSlack, "max ratio " + fmt(f_ratio)});
        rows.push_back({s.label + ": g bound (compact)", g_ratio <= kBoundSlack, "max ratio " + fmt(g_ratio)});
    } else if (policy.regime == GammaRegime::WeakSharp) {
        const auto& g = s.config.gamma;
        double worst = 0.0;
        bool ok = true;
        for (std::size_t k = 1; k <= K; ++k) {
            const auto b = bounds::weak_sharp(k, policy.gamma, L_f, L_g, dist0_sq, *g.alpha, *g.M);
            const auto& r = trace[k];
            ok = ok && *r.f_gap <= kBoundSlack * b.f_upper && *r.f_gap >= kBoundSlack * b.f_lower &&
                 *r.g_gap <= kBoundSlack * b.g_upper;
            worst = std::max({worst, *r.f_gap / b.f_upper, *r.g_gap / b.g_upper});
        }
        rows.push_back({s.label + ": weak sharp bounds", ok, "max ratio " + fmt(worst)});
    } else if (policy.regime == GammaRegime::Holderian && K >= 20) {
        const double slope = bounds::loglog_slope(trace, K / 10, K, &TraceRecord::g_gap);
        rows.push_back({s.label + ": g gap slope", slope <= -1.2, "slope " + fmt(slope) + " (need <= -1.2)"});
    }
}

}  // namespace

int cmd_check(const std::filesystem::path& config_path, const Overrides& overrides, std::ostream& out,
              std::ostream& err) {
    RunConfig rc;
    try {
        rc = load_run_config(config_path, overrides);
        rc.experiment.problem.validate();
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    }
    const ExperimentSpec& exp = rc.experiment;
    const BilevelProblem& p = exp.problem;
    std::vector<CheckRow> rows;
    bool solver_failed = false;

    for (const auto& [which, oracle] : {std::pair{"upper", p.upper}, std::pair{"lower", p.lower}}) {
        const GradientReport rep = check_gradient(*oracle, 20, exp.seed);
        rows.push_back({std::string("gradient ") + which + " (" + oracle->name() + ")", rep.max_rel_err < 1e-5,
                        "max rel err " + fmt(rep.max_rel_err)});
    }

    std::vector<Vector> samples;
    if (p.lower_solutions) samples = p.lower_solutions(kContainmentSamples, exp.seed);
    Matrix sample_cols(p.dimension(), static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) sample_cols.col(static_cast<Eigen::Index>(i)) = samples[i];

    bool aux_done = false;
    for (const auto& spec : exp.solvers) {
        SolverSpec local = spec;
        const Vector x0 = p.set.project(spec.config.x0.value_or(Vector::Zero(p.dimension())));
        const bool cutting = spec.kind == SolverKind::AgmBio || spec.kind == SolverKind::PAgmBio;

        if (cutting && !aux_done && p.truth) {
            aux_done = true;
            const AuxSequence aux = run_lower_apg(*p.lower, p.set, x0, spec.config.K);
            const double dist0_sq = (x0 - p.truth->x_star).squaredNorm();
            bool ok = true;
            double worst = 0.0;
            for (std::size_t k = 0; k <= aux.horizon(); ++k) {
                const double gap = aux[k] - p.truth->g_star;
                const double bound = bounds::aux_upper(k, p.lower->lipschitz(), dist0_sq);
                ok = ok && gap >= -1e-12 && gap <= bound && (k == 0 || aux[k] <= aux[k - 1]);
                if (bound > 0.0) worst = std::max(worst, gap / bound);
            }
            rows.push_back({"aux sequence bound", ok, "max ratio " + fmt(worst)});
        }

        double worst_violation = -std::numeric_limits<double>::infinity();
        std::size_t cuts = 0;
        if (cutting && samples.size() > 0) {
            local.config.on_cut = [&](std::size_t, const Halfspace& h) {
                if (h.trivial) return;
                ++cuts;
                const double v = ((sample_cols.transpose() * h.normal).array() - h.offset).maxCoeff();
                worst_violation = std::max(worst_violation, v);
            };
        }

        SolveResult solved;
        try {
            solved = run_solver(p, local);
        } catch (const std::exception& e) {
            rows.push_back({spec.label + ": run", false, e.what()});
            solver_failed = true;
            continue;
        }

        if (cutting && samples.size() > 0)
            rows.push_back({spec.label + ": cut containment", !(worst_violation > kContainmentTol),
                            std::to_string(cuts) + " cuts, worst " + fmt(std::max(worst_violation, 0.0))});
        if (spec.kind == SolverKind::AgmBio) check_bounds(p, spec, solved.trace, x0, rows);
        if (p.truth && p.holder) {
            double slack = std::numeric_limits<double>::infinity();
            for (const auto& r : solved.trace)
                slack = std::min(slack, *r.f_gap - bounds::holder_f_lower(std::max(*r.g_gap, 0.0), *p.holder));
            rows.push_back({spec.label + ": holder lower bound", slack >= -1e-9, "min slack " + fmt(slack)});
        }
    }

    std::size_t width = 0;
    for (const auto& r : rows) width = std::max(width, r.name.size());
    bool all = true;
    for (const auto& r : rows) {
        out << std::left << std::setw(static_cast<int>(width) + 2) << r.name << (r.pass ? "PASS  " : "FAIL  ")
            << r.detail << "\n";
        all = all && r.pass;
    }
    if (solver_failed) return kSolverFailure;
    return all ? kOk : kDiagnosticFailure;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Convex simple bilevel optimization"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version_string());

    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir;

    auto* solve = app.add_subcommand("solve", "Run the solvers in a config and write traces");
    solve->add_option("config", config, "JSON run config")->required();
    solve->add_option("--seed", seed, "Override the config seed");
    solve->add_option("--out", out_dir, "Override the output directory");

    auto* check = app.add_subcommand("check", "Run the invariant diagnostics for a config");
    check->add_option("config", config, "JSON run config")->required();
    check->add_option("--seed", seed, "Override the config seed");

    std::string kind;
    std::map<std::string, double> params;
    std::optional<double> n, m, d, gen_seed, radius_mult, alpha;
    auto* gen = app.add_subcommand("gen", "Write a synthetic problem as CSV plus a truth sidecar");
    gen->add_option("kind", kind, "linear_inverse or min_norm")->required();
    gen->add_option("--n", n, "Dimension (linear_inverse)");
    gen->add_option("--m", m, "Rows (min_norm)");
    gen->add_option("--d", d, "Columns (min_norm)");
    gen->add_option("--seed", gen_seed, "Seed (min_norm)");
    gen->add_option("--radius-mult", radius_mult, "Ball radius over ||x*|| (min_norm)");
    gen->add_option("--alpha", alpha, "Holder modulus (linear_inverse)");
    gen->add_option("--out", out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    Overrides ov;
    ov.seed = seed;
    if (!out_dir.empty()) ov.output_dir = out_dir;
    if (*solve) return cmd_solve(config, ov, out, err);
    if (*check) return cmd_check(config, ov, out, err);
    for (const auto& [name, v] : {std::pair{"n", n}, std::pair{"m", m}, std::pair{"d", d}, std::pair{"seed", gen_seed},
                                  std::pair{"radius_mult", radius_mult}, std::pair{"alpha", alpha}})
        if (v) params[name] = *v;
    return cmd_gen(kind, params, out_dir, out, err);
}

}  // namespace bilevel::cli
