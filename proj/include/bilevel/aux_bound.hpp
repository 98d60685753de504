#pragma once

#include <cstddef>
#include <vector>

#include "bilevel/oracles.hpp"

namespace bilevel {

enum class AuxMode { PerIteration, ConstantLast };

/// Levels g_0..g_K for the cutting planes. Values are a running minimum of
/// lower-level objective values taken at feasible points, so they are
/// nonincreasing and never below the lower-level optimum.
class AuxSequence {
public:
    AuxSequence(std::vector<double> values, AuxMode mode, Vector source_x0, bool certified_feasible);

    /// g_k; throws ContractViolation for k > K.
    double get(std::size_t k) const;
    double operator[](std::size_t k) const { return get(k); }

    /// K, the index of the last entry.
    std::size_t horizon() const { return values_.size() - 1; }
    const std::vector<double>& values() const { return values_; }
    AuxMode mode() const { return mode_; }
    const Vector& source_x0() const { return source_x0_; }
    bool certified_feasible() const { return certified_feasible_; }

private:
    std::vector<double> values_;
    AuxMode mode_;
    Vector source_x0_;
    bool certified_feasible_;
};

/// K iterations of FISTA with step 1/L_g on the lower level over Z.
/// g_0 = g(P_Z(x0)); g_k is the running minimum through iteration k.
AuxSequence run_lower_apg(const SmoothFunction& lower, const FeasibleSet& set, const Vector& x0, std::size_t K);

/// Same scheme for g1 + g2, with the prox of g2 in place of the projection.
AuxSequence run_lower_apg(const CompositeObjective& lower, const Vector& x0, std::size_t K);

/// Every entry replaced by the final value g_K.
AuxSequence freeze_to_last(const AuxSequence& seq);

}  // namespace bilevel
