#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bilevel/aux_bound.hpp"
#include "bilevel/geometry.hpp"
#include "bilevel/oracles.hpp"
#include "bilevel/trace.hpp"

namespace bilevel {

enum class GammaRegime { CompactSet, Holderian, WeakSharp, Manual };

std::string to_string(GammaRegime regime);

/// User-facing choice of step-size regime and the parameters it needs.
struct GammaSettings {
    GammaRegime regime = GammaRegime::CompactSet;
    std::optional<double> r;
    std::optional<double> alpha;
    std::optional<double> M;
    std::optional<double> gamma;
};

struct GammaInputs {
    GammaSettings settings;
    double L_f = 1.0;
    double L_g = 1.0;
    std::size_t T = 0;
};

struct GammaPolicy {
    GammaRegime regime = GammaRegime::CompactSet;
    double gamma = 1.0;
};

/// CompactSet: 1. Holderian (r > 1): 1 / ((2 L_g / L_f) T^((2r-2)/(2r-1)) + 2).
/// WeakSharp: min{2 alpha L_f / (2 M L_g + alpha L_f), 1}. Manual: as given.
/// Throws ConfigError naming the missing or invalid parameter.
GammaPolicy gamma_for(const GammaInputs& inputs);

/// a_k = gamma (k + 1) / (4 L_f).
double step_size(double gamma, std::size_t k, double L_f);

/// Linearization cut {z : g(y) + <grad g(y), z - y> <= level}, stored as
/// <grad g(y), z> <= level - g(y) + <grad g(y), y>. A stationary anchor at or
/// below the level yields the trivial (whole-space) cut.
Halfspace build_cutting_plane(const SmoothFunction& lower, const Vector& y, double level, double grad_tol);

/// Iterate triple and weights of the accelerated recursion.
struct SolverState {
    std::size_t k = 0;
    Vector x;
    Vector y;
    Vector z;
    double A = 0.0;
    double a = 0.0;

    static SolverState start(const Vector& x0);
};

using CutObserver = std::function<void(std::size_t k, const Halfspace& cut)>;

struct StepOptions {
    double grad_tol = 1e-12;
    DykstraOptions dykstra;
    CutObserver on_cut;
};

/// Slack added once to the cut level when the region Z ∩ cut is found empty.
inline constexpr double kLevelRelaxation = 1e-12;

/// Returns the cut, relaxed once by kLevelRelaxation if Z ∩ cut is empty.
/// Throws InfeasibleRegionError if it is still empty.
Halfspace safeguard_cut(const FeasibleSet& set, Halfspace cut, std::size_t k, double g_at_y, double level);

/// One iteration: mix, cut at y_k, project, mix, accumulate.
SolverState agm_bio_step(const SolverState& state, const BilevelProblem& problem, double level, double gamma,
                         const StepOptions& options = {});

struct SolverConfig {
    std::size_t K = 1000;
    GammaSettings gamma;
    AuxMode aux_mode = AuxMode::PerIteration;
    /// Start point; the origin when absent. Projected onto Z before use.
    std::optional<Vector> x0;
    DykstraOptions dykstra;
    TraceObserver on_record;
    CutObserver on_cut;
};

/// grad_tol used for degenerate cuts: 1e-12 (1 + ||grad g(x0)||).
double default_grad_tol(const SmoothFunction& lower, const Vector& x0);

/// Runs K steps and records the trace for x_0..x_K.
SolveResult solve(const BilevelProblem& problem, const SolverConfig& config);

/// Right-hand sides of the convergence guarantees, used as runtime diagnostics.
namespace bounds {

/// 2 L_g ||x0 - x*||^2 / (k + 1)^2
double aux_upper(std::size_t k, double L_g, double dist0_sq);

/// 4 L_f ||x0 - x*||^2 / (k (k + 1))
double compact_f_upper(std::size_t k, double L_f, double dist0_sq);

/// 4 L_g ||x0 - x*||^2 (ln k + 1) / (k (k + 1)) + 2 L_g D^2 / (k + 1)
double compact_g_upper(std::size_t k, double L_g, double dist0_sq, double diameter);

struct WeakSharpBounds {
    double f_upper;
    double f_lower;
    double g_upper;
};

/// Weak-sharp regime bounds with C_f = 4 L_f ||x0 - x*||^2, C_g = 8 L_g ||x0 - x*||^2.
WeakSharpBounds weak_sharp(std::size_t k, double gamma, double L_f, double L_g, double dist0_sq, double alpha,
                           double M);

/// -M (r (g - g*) / alpha)^(1/r)
double holder_f_lower(double g_gap, const HolderParams& holder);

/// Least-squares slope of log(value) against log(k) for k in [k_lo, k_hi],
/// over entries with a positive value.
double loglog_slope(const std::vector<TraceRecord>& trace, std::size_t k_lo, std::size_t k_hi,
                    std::optional<double> TraceRecord::*field);

}  // namespace bounds

}  // namespace bilevel
