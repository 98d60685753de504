#include "bilevel/agm_bio.hpp"

#include <cmath>
#include <limits>

namespace bilevel {

std::string to_string(GammaRegime regime) {
    switch (regime) {
        case GammaRegime::CompactSet: return "compact";
        case GammaRegime::Holderian: return "holderian";
        case GammaRegime::WeakSharp: return "weak_sharp";
        case GammaRegime::Manual: return "manual";
    }
    return "unknown";
}

GammaPolicy gamma_for(const GammaInputs& in) {
    const auto& s = in.settings;
    if (!(in.L_f > 0.0)) throw ConfigError("L_f", "upper Lipschitz constant must be positive");
    GammaPolicy policy{s.regime, 1.0};
    switch (s.regime) {
        case GammaRegime::CompactSet:
            policy.gamma = 1.0;
            break;
        case GammaRegime::Holderian: {
            if (!s.r) throw ConfigError("r", "holderian regime requires r");
            if (!(*s.r > 1.0)) throw ConfigError("r", "holderian regime requires r > 1");
            if (in.T < 1) throw ConfigError("K", "holderian regime requires a horizon T >= 1");
            const double r = *s.r;
            const double exponent = (2.0 * r - 2.0) / (2.0 * r - 1.0);
            policy.gamma = 1.0 / ((2.0 * in.L_g / in.L_f) * std::pow(static_cast<double>(in.T), exponent) + 2.0);
            break;
        }
        case GammaRegime::WeakSharp: {
            if (!s.alpha) throw ConfigError("alpha", "weak_sharp regime requires alpha");
            if (!s.M) throw ConfigError("M", "weak_sharp regime requires M");
            if (!(*s.alpha > 0.0)) throw ConfigError("alpha", "alpha must be positive");
            if (!(*s.M > 0.0)) throw ConfigError("M", "M must be positive");
            const double alpha = *s.alpha;
            policy.gamma = std::min(2.0 * alpha * in.L_f / (2.0 * *s.M * in.L_g + alpha * in.L_f), 1.0);
            break;
        }
        case GammaRegime::Manual:
            if (!s.gamma) throw ConfigError("gamma", "manual regime requires gamma");
            if (!(*s.gamma > 0.0 && *s.gamma <= 1.0)) throw ConfigError("gamma", "gamma must lie in (0, 1]");
            policy.gamma = *s.gamma;
            break;
    }
    return policy;
}

double step_size(double gamma, std::size_t k, double L_f) {
    if (!(L_f > 0.0)) throw ContractViolation("step_size: L_f must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ContractViolation("step_size: gamma must lie in (0, 1]");
    return gamma * static_cast<double>(k + 1) / (4.0 * L_f);
}

Halfspace build_cutting_plane(const SmoothFunction& lower, const Vector& y, double level, double grad_tol) {
    if (!y.allFinite() || !std::isfinite(level)) throw ContractViolation("cutting plane: non-finite input");
    Vector grad = lower.gradient(y);
    const double g_y = lower.value(y);
    if (grad.norm() <= grad_tol) {
        if (g_y <= level + grad_tol) return Halfspace::whole_space(y.size());
        throw DegenerateCutError("stationary anchor with g(y) = " + std::to_string(g_y) + " above level " +
                                 std::to_string(level));
    }
    const double offset = level - g_y + grad.dot(y);
    return Halfspace{std::move(grad), offset, false};
}

SolverState SolverState::start(const Vector& x0) {
    SolverState s;
    s.x = x0;
    s.y = x0;
    s.z = x0;
    return s;
}

Halfspace safeguard_cut(const FeasibleSet& set, Halfspace cut, std::size_t k, double g_at_y, double level) {
    if (cut.trivial) return cut;
    const double lowest = set.min_linear(cut.normal);
    if (lowest <= cut.offset) return cut;
    cut.offset += kLevelRelaxation;
    if (lowest <= cut.offset) return cut;
    throw InfeasibleRegionError("cutting-plane region is empty at iteration " + std::to_string(k), k, g_at_y, level);
}

SolverState agm_bio_step(const SolverState& state, const BilevelProblem& problem, double level, double gamma,
                         const StepOptions& options) {
    SolverState next;
    next.k = state.k + 1;
    const double a = step_size(gamma, state.k, problem.upper->lipschitz());
    const double total = state.A + a;
    const double wx = state.A / total;
    const double wz = a / total;

    Vector y = wx * state.x + wz * state.z;
    Halfspace cut = build_cutting_plane(*problem.lower, y, level, options.grad_tol);
    if (!cut.trivial) cut = safeguard_cut(problem.set, std::move(cut), state.k, problem.lower->value(y), level);
    if (options.on_cut) options.on_cut(state.k, cut);

    const Vector target = state.z - a * problem.upper->gradient(y);
    Vector z = project_set_halfspace(problem.set, cut, target, options.dykstra);

    next.x = wx * state.x + wz * z;
    next.y = std::move(y);
    next.z = std::move(z);
    next.A = total;
    next.a = a;
    return next;
}

double default_grad_tol(const SmoothFunction& lower, const Vector& x0) {
    return 1e-12 * (1.0 + lower.gradient(x0).norm());
}

SolveResult solve(const BilevelProblem& problem, const SolverConfig& config) {
    problem.validate();
    const WallClock clock;
    const Eigen::Index n = problem.dimension();
    const Vector x0 = problem.set.project(config.x0.value_or(Vector::Zero(n)));
    if (x0.size() != n) throw ContractViolation("x0 has wrong dimension");

    const GammaPolicy policy =
        gamma_for({config.gamma, problem.upper->lipschitz(), problem.lower->lipschitz(), config.K});

    SolveResult result;
    result.solver = "agm_bio";
    result.trace.reserve(config.K + 1);
    const auto record = [&](const SolverState& s) {
        const double f = problem.upper->value(s.x);
        const double g = problem.lower->value(s.x);
        if (!std::isfinite(f) || !std::isfinite(g))
            throw DivergenceError("agm_bio: non-finite objective at iteration " + std::to_string(s.k), s.k);
        const double a_k = step_size(policy.gamma, s.k, problem.upper->lipschitz());
        result.trace.push_back(make_record(s.k, clock.seconds(), f, g, problem.truth, a_k, s.A));
        if (config.on_record) config.on_record(result.trace.back());
    };

    SolverState state = SolverState::start(x0);
    record(state);
    if (config.K > 0) {
        AuxSequence aux = run_lower_apg(*problem.lower, problem.set, x0, config.K);
        if (config.aux_mode == AuxMode::ConstantLast) aux = freeze_to_last(aux);
        StepOptions options;
        options.grad_tol = default_grad_tol(*problem.lower, x0);
        options.dykstra = config.dykstra;
        options.on_cut = config.on_cut;
        for (std::size_t k = 0; k < config.K; ++k) {
            state = agm_bio_step(state, problem, aux[k], policy.gamma, options);
            record(state);
        }
    }
    result.x = state.x;
    return result;
}

namespace bounds {

double aux_upper(std::size_t k, double L_g, double dist0_sq) {
    const double kp1 = static_cast<double>(k + 1);
    return 2.0 * L_g * dist0_sq / (kp1 * kp1);
}

double compact_f_upper(std::size_t k, double L_f, double dist0_sq) {
    const double kk = static_cast<double>(k);
    return 4.0 * L_f * dist0_sq / (kk * (kk + 1.0));
}

double compact_g_upper(std::size_t k, double L_g, double dist0_sq, double diameter) {
    const double kk = static_cast<double>(k);
    return 4.0 * L_g * dist0_sq * (std::log(kk) + 1.0) / (kk * (kk + 1.0)) + 2.0 * L_g * diameter * diameter / (kk + 1.0);
}

WeakSharpBounds weak_sharp(std::size_t k, double gamma, double L_f, double L_g, double dist0_sq, double alpha,
                           double M) {
    const double kk = static_cast<double>(k);
    const double denom = kk * (kk + 1.0);
    const double c_f = 4.0 * L_f * dist0_sq;
    const double c_g = 8.0 * L_g * dist0_sq;
    const double log_term = std::log(kk) + 1.0;
    WeakSharpBounds b{};
    b.f_upper = c_f / (gamma * denom);
    b.f_lower = -c_g * M * log_term / (alpha * denom) - c_f / (gamma * denom);
    b.g_upper = c_g * log_term / denom + alpha * c_f / (gamma * M * denom);
    return b;
}

double holder_f_lower(double g_gap, const HolderParams& holder) {
    return -holder.M * std::pow(holder.r * std::max(g_gap, 0.0) / holder.alpha, 1.0 / holder.r);
}

double loglog_slope(const std::vector<TraceRecord>& trace, std::size_t k_lo, std::size_t k_hi,
                    std::optional<double> TraceRecord::*field) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t count = 0;
    for (const auto& rec : trace) {
        if (rec.k < k_lo || rec.k > k_hi || rec.k == 0) continue;
        const auto& v = rec.*field;
        if (!v || !(*v > 0.0)) continue;
        const double lx = std::log(static_cast<double>(rec.k));
        const double ly = std::log(*v);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++count;
    }
    if (count < 2) return std::numeric_limits<double>::quiet_NaN();
    const double c = static_cast<double>(count);
    return (c * sxy - sx * sy) / (c * sxx - sx * sx);
}

}  // namespace bounds

}  // namespace bilevel
