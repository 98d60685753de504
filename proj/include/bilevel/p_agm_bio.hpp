#pragma once

#include "bilevel/agm_bio.hpp"
#include "bilevel/prox.hpp"

namespace bilevel {

/// { z : g1(y) + <grad g1(y), z - y> + g2(z) <= level }.
struct CompositeCutSet {
    Vector anchor;
    double smooth_value = 0.0;
    Vector smooth_gradient;
    double level = 0.0;
    ProxTerm lower_nonsmooth;

    bool contains(const Vector& z, double tol) const;
};

/// f2 + indicator(X_k), restricted to the combinations with exact or
/// bisection-certified proxes:
///   f2 = 0 with g2 in {0, indicator(Z)}: projection onto Z ∩ cut;
///   f2 = w ||.||_1 with g2 = 0: soft threshold under a linear cut, by 1-D dual bisection.
struct CutProxTerm {
    ProxTerm upper_nonsmooth;
    /// The linear part of X_k (trivial when the anchor is stationary).
    Halfspace cut;
    /// Z from g2 = indicator(Z); the whole space when g2 = 0.
    FeasibleSet set;
};

/// Throws CapabilityError naming the combination when no prox is shipped for it.
void require_supported(const ProxTerm& upper_nonsmooth, const ProxTerm& lower_nonsmooth);

/// prox_{a_k (f2 + indicator(X_k))}(point).
Vector prox_step(const CutProxTerm& term, double a_k, const Vector& point, const DykstraOptions& dykstra = {});

/// prox of eta * weight ||.||_1 + indicator{<a, u> <= b}: u(mu) = soft(p - eta mu a, eta weight)
/// with mu >= 0 found by bisection on <a, u(mu)> = b and polished on the final linear piece.
Vector l1_halfspace_prox(double eta, double weight, const Halfspace& h, const Vector& p);

/// Accelerated recursion with the projection replaced by prox_step.
SolveResult p_agm_bio_solve(const CompositeBilevelProblem& problem, const SolverConfig& config);

}  // namespace bilevel
