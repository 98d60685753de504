#include "bilevel/aux_bound.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace bilevel {

AuxSequence::AuxSequence(std::vector<double> values, AuxMode mode, Vector source_x0, bool certified_feasible)
    : values_(std::move(values)), mode_(mode), source_x0_(std::move(source_x0)), certified_feasible_(certified_feasible) {
    if (values_.empty()) throw ContractViolation("auxiliary sequence must be nonempty");
    for (std::size_t k = 1; k < values_.size(); ++k)
        if (!(values_[k] <= values_[k - 1])) throw ContractViolation("auxiliary sequence must be nonincreasing");
}

double AuxSequence::get(std::size_t k) const {
    if (k >= values_.size())
        throw ContractViolation("auxiliary index " + std::to_string(k) + " beyond horizon " +
                                std::to_string(horizon()));
    return mode_ == AuxMode::ConstantLast ? values_.back() : values_[k];
}

namespace {

using ProxStep = std::function<Vector(const Vector&)>;
using Evaluate = std::function<double(const Vector&)>;

AuxSequence run_fista(const SmoothFunction& smooth, const ProxStep& prox, const Evaluate& total, Vector x,
                      std::size_t K) {
    if (K < 1) throw ContractViolation("auxiliary run needs K >= 1");
    const double lipschitz = smooth.lipschitz();
    if (!(lipschitz > 0.0)) throw ContractViolation("auxiliary run needs a positive Lipschitz constant");
    const double step = 1.0 / lipschitz;

    std::vector<double> values;
    values.reserve(K + 1);
    double best = total(x);
    if (!std::isfinite(best)) throw DivergenceError("auxiliary run: non-finite value at iteration 0", 0);
    values.push_back(best);

    const Vector start = x;
    Vector y = x;
    Vector x_prev = x;
    double t = 1.0;
    for (std::size_t k = 1; k <= K; ++k) {
        x_prev.swap(x);
        x = prox(y - step * smooth.gradient(y));
        const double value = total(x);
        if (!std::isfinite(value) || !x.allFinite())
            throw DivergenceError("auxiliary run: non-finite value at iteration " + std::to_string(k), k);
        best = std::min(best, value);
        values.push_back(best);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = x + ((t - 1.0) / t_next) * (x - x_prev);
        t = t_next;
    }
    return AuxSequence(std::move(values), AuxMode::PerIteration, start, true);
}

}  // namespace

AuxSequence run_lower_apg(const SmoothFunction& lower, const FeasibleSet& set, const Vector& x0, std::size_t K) {
    return run_fista(
        lower, [&set](const Vector& v) { return set.project(v); },
        [&lower](const Vector& v) { return lower.value(v); }, set.project(x0), K);
}

AuxSequence run_lower_apg(const CompositeObjective& lower, const Vector& x0, std::size_t K) {
    const double step = 1.0 / lower.smooth->lipschitz();
    const auto prox = [&lower, step](const Vector& v) { return lower.nonsmooth.prox(step, v); };
    Vector start = std::isfinite(lower.value(x0)) ? x0 : prox(x0);
    return run_fista(*lower.smooth, prox, [&lower](const Vector& v) { return lower.value(v); }, std::move(start), K);
}

AuxSequence freeze_to_last(const AuxSequence& seq) {
    std::vector<double> values(seq.values().size(), seq.values().back());
    return AuxSequence(std::move(values), AuxMode::ConstantLast, seq.source_x0(), seq.certified_feasible());
}

}  // namespace bilevel
