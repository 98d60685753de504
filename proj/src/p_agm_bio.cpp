#include "bilevel/p_agm_bio.hpp"

#include <cmath>
#include <string>

namespace bilevel {

bool CompositeCutSet::contains(const Vector& z, double tol) const {
    const double lhs = smooth_value + smooth_gradient.dot(z - anchor) + lower_nonsmooth.value(z);
    return lhs <= level + tol;
}

void require_supported(const ProxTerm& upper_nonsmooth, const ProxTerm& lower_nonsmooth) {
    const bool lower_linear_cut = lower_nonsmooth.is_zero() ||
                                  std::holds_alternative<IndicatorTerm>(lower_nonsmooth.variant());
    if (!lower_linear_cut)
        throw CapabilityError("no prox for f2 = " + upper_nonsmooth.describe() + " with nonlinear cut from g2 = " +
                              lower_nonsmooth.describe());
    if (upper_nonsmooth.is_zero()) return;
    if (std::holds_alternative<L1Term>(upper_nonsmooth.variant()) && lower_nonsmooth.is_zero()) return;
    throw CapabilityError("no prox for f2 = " + upper_nonsmooth.describe() + " with g2 = " + lower_nonsmooth.describe());
}

Vector l1_halfspace_prox(double eta, double weight, const Halfspace& h, const Vector& p) {
    const double threshold = eta * weight;
    if (h.trivial) return soft_threshold(p, threshold);
    const Vector& a = h.normal;
    if (a.squaredNorm() == 0.0) throw DegenerateHalfspaceError("halfspace has a zero normal");
    const auto at = [&](double mu) { return soft_threshold(p - (eta * mu) * a, threshold); };
    const auto excess = [&](double mu) { return a.dot(at(mu)) - h.offset; };

    if (excess(0.0) <= 0.0) return at(0.0);
    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; excess(hi) > 0.0; ++i) {
        if (i > 2000) throw NonConvergenceError("l1 halfspace prox: could not bracket the multiplier", at(hi), hi);
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-17 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (excess(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }

    // <a, u(mu)> is linear in mu on the piece with the support and signs of u(hi).
    Vector u = at(hi);
    double numer = -h.offset;
    double denom = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (u[i] == 0.0) continue;
        numer += a[i] * (p[i] - std::copysign(threshold, u[i]));
        denom += a[i] * a[i];
    }
    if (denom > 0.0) {
        const double mu = numer / (eta * denom);
        if (mu >= lo - 1e-12 * hi && mu <= hi + 1e-12 * hi) {
            Vector polished = at(std::max(mu, 0.0));
            if (a.dot(polished) <= h.offset + 1e-12 * (1.0 + std::abs(h.offset))) u = std::move(polished);
        }
    }
    return u;
}

Vector prox_step(const CutProxTerm& term, double a_k, const Vector& point, const DykstraOptions& dykstra) {
    if (!(a_k > 0.0)) throw ContractViolation("prox_step: a_k must be positive");
    if (term.upper_nonsmooth.is_zero()) return project_set_halfspace(term.set, term.cut, point, dykstra);
    if (const auto* l1 = std::get_if<L1Term>(&term.upper_nonsmooth.variant()); l1 && term.set.is_whole_space())
        return l1_halfspace_prox(a_k, l1->weight, term.cut, point);
    throw CapabilityError("no prox for f2 = " + term.upper_nonsmooth.describe() + " with X_k = " +
                          term.set.describe() + " intersected with a halfspace");
}

namespace {

FeasibleSet set_from_lower(const ProxTerm& g2) {
    if (const auto* ind = std::get_if<IndicatorTerm>(&g2.variant())) return ind->set;
    return FeasibleSet::whole_space();
}

}  // namespace

SolveResult p_agm_bio_solve(const CompositeBilevelProblem& problem, const SolverConfig& config) {
    const auto& f1 = problem.upper.smooth;
    const auto& g1 = problem.lower.smooth;
    if (!f1 || !g1) throw ContractViolation("composite problem needs both smooth parts");
    if (f1->dimension() != g1->dimension()) throw ContractViolation("upper and lower dimensions differ");
    require_supported(problem.upper.nonsmooth, problem.lower.nonsmooth);

    const WallClock clock;
    const FeasibleSet set = set_from_lower(problem.lower.nonsmooth);
    const Vector x0 = set.project(config.x0.value_or(Vector::Zero(problem.dimension())));
    const double L_f = f1->lipschitz();
    const GammaPolicy policy = gamma_for({config.gamma, L_f, g1->lipschitz(), config.K});

    SolveResult result;
    result.solver = "p_agm_bio";
    result.trace.reserve(config.K + 1);
    const auto record = [&](std::size_t k, const Vector& x, double A) {
        const double f = problem.upper.value(x);
        const double g = problem.lower.value(x);
        if (!std::isfinite(f) || !std::isfinite(g))
            throw DivergenceError("p_agm_bio: non-finite objective at iteration " + std::to_string(k), k);
        result.trace.push_back(make_record(k, clock.seconds(), f, g, problem.truth, step_size(policy.gamma, k, L_f), A));
        if (config.on_record) config.on_record(result.trace.back());
    };

    Vector x = x0;
    Vector z = x0;
    double A = 0.0;
    record(0, x, A);
    if (config.K > 0) {
        AuxSequence aux = run_lower_apg(problem.lower, x0, config.K);
        if (config.aux_mode == AuxMode::ConstantLast) aux = freeze_to_last(aux);
        const double grad_tol = default_grad_tol(*g1, x0);
        CutProxTerm term{problem.upper.nonsmooth, Halfspace{}, set};
        for (std::size_t k = 0; k < config.K; ++k) {
            const double a = step_size(policy.gamma, k, L_f);
            const double total = A + a;
            const double wx = A / total;
            const double wz = a / total;
            const Vector y = wx * x + wz * z;
            const double level = aux[k];
            term.cut = build_cutting_plane(*g1, y, level, grad_tol);
            if (!term.cut.trivial) term.cut = safeguard_cut(set, std::move(term.cut), k, g1->value(y), level);
            if (config.on_cut) config.on_cut(k, term.cut);
            z = prox_step(term, a, z - a * f1->gradient(y), config.dykstra);
            x = wx * x + wz * z;
            A = total;
            record(k + 1, x, A);
        }
    }
    result.x = x;
    return result;
}

}  // namespace bilevel
