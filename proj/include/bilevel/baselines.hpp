#pragma once

#include <cstddef>
#include <optional>

#include "bilevel/oracles.hpp"
#include "bilevel/trace.hpp"

namespace bilevel {

/// Accelerated projected gradient on a fixed scalarization of (f, g).
struct ScalarizedRun {
    double weight_on_upper = 0.0;
    double weight_on_lower = 0.0;
    double lipschitz = 0.0;
    std::size_t K = 0;
};

struct BaselineOptions {
    std::optional<Vector> x0;
    TraceObserver on_record;
};

/// R-APM: FISTA on g + eta f over Z with step 1 / (L_g + eta L_f); eta defaults to 1 / (K + 1).
SolveResult r_apm_solve(const BilevelProblem& problem, std::size_t K, std::optional<double> eta = std::nullopt,
                        const BaselineOptions& options = {});

/// PB-APG: FISTA on f + penalty g over Z with step 1 / (L_f + penalty L_g); penalty defaults to 1e4.
SolveResult pb_apg_solve(const BilevelProblem& problem, std::size_t K, std::optional<double> penalty = std::nullopt,
                         const BaselineOptions& options = {});

inline constexpr double kDefaultPenalty = 1e4;

inline double default_r_apm_eta(std::size_t K) { return 1.0 / static_cast<double>(K + 1); }

/// Scalarization parameters the two baselines would use.
ScalarizedRun r_apm_setup(const BilevelProblem& problem, std::size_t K, std::optional<double> eta);
ScalarizedRun pb_apg_setup(const BilevelProblem& problem, std::size_t K, std::optional<double> penalty);

/// The shared driver: FISTA on w_f f + w_g g over Z. Row k holds the step in
/// a_k and the momentum parameter t_k in A_k.
SolveResult scalarized_apg(const BilevelProblem& problem, const ScalarizedRun& run, const BaselineOptions& options,
                           const char* label);

}  // namespace bilevel
