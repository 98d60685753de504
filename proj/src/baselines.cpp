#include "bilevel/baselines.hpp"

#include <cmath>
#include <string>

namespace bilevel {

ScalarizedRun r_apm_setup(const BilevelProblem& problem, std::size_t K, std::optional<double> eta) {
    if (K < 1) throw ContractViolation("r_apm: K must be >= 1");
    const double w = eta.value_or(default_r_apm_eta(K));
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("eta", "must be finite and nonnegative");
    return {w, 1.0, problem.lower->lipschitz() + w * problem.upper->lipschitz(), K};
}

ScalarizedRun pb_apg_setup(const BilevelProblem& problem, std::size_t K, std::optional<double> penalty) {
    if (K < 1) throw ContractViolation("pb_apg: K must be >= 1");
    const double w = penalty.value_or(kDefaultPenalty);
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("penalty", "must be finite and nonnegative");
    return {1.0, w, problem.upper->lipschitz() + w * problem.lower->lipschitz(), K};
}

SolveResult scalarized_apg(const BilevelProblem& problem, const ScalarizedRun& run, const BaselineOptions& options,
                           const char* label) {
    problem.validate();
    if (!(run.lipschitz > 0.0)) throw ContractViolation(std::string(label) + ": combined Lipschitz must be positive");
    const WallClock clock;
    const WeightedSum objective(problem.upper, run.weight_on_upper, problem.lower, run.weight_on_lower);
    const double step = 1.0 / run.lipschitz;

    SolveResult result;
    result.solver = label;
    result.trace.reserve(run.K + 1);
    double t = 1.0;
    const auto record = [&](std::size_t k, const Vector& x) {
        const double f = problem.upper->value(x);
        const double g = problem.lower->value(x);
        if (!std::isfinite(f) || !std::isfinite(g) || !x.allFinite())
            throw DivergenceError(std::string(label) + ": non-finite objective at iteration " + std::to_string(k), k);
        result.trace.push_back(make_record(k, clock.seconds(), f, g, problem.truth, step, t));
        if (options.on_record) options.on_record(result.trace.back());
    };

    Vector x = problem.set.project(options.x0.value_or(Vector::Zero(problem.dimension())));
    Vector y = x;
    Vector x_prev = x;
    record(0, x);
    for (std::size_t k = 1; k <= run.K; ++k) {
        x_prev.swap(x);
        x = problem.set.project(y - step * objective.gradient(y));
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = x + ((t - 1.0) / t_next) * (x - x_prev);
        t = t_next;
        record(k, x);
    }
    result.x = x;
    return result;
}

SolveResult r_apm_solve(const BilevelProblem& problem, std::size_t K, std::optional<double> eta,
                        const BaselineOptions& options) {
    return scalarized_apg(problem, r_apm_setup(problem, K, eta), options, "r_apm");
}

SolveResult pb_apg_solve(const BilevelProblem& problem, std::size_t K, std::optional<double> penalty,
                         const BaselineOptions& options) {
    return scalarized_apg(problem, pb_apg_setup(problem, K, penalty), options, "pb_apg");
}

}  // namespace bilevel
