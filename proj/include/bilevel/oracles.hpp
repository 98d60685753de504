#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bilevel/geometry.hpp"
#include "bilevel/kernels.hpp"
#include "bilevel/prox.hpp"

namespace bilevel {

/// Convex function with an L-Lipschitz gradient.
class SmoothFunction {
public:
    virtual ~SmoothFunction() = default;

    virtual double value(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;
    virtual double lipschitz() const = 0;
    virtual Eigen::Index dimension() const = 0;
    virtual std::string name() const = 0;
};

using SmoothOracle = std::shared_ptr<const SmoothFunction>;

/// g(x) = 0.5 ||A x - b||^2, gradient A^T (A x - b).
class LeastSquares final : public SmoothFunction {
public:
    /// Estimates L = lambda_max(A^T A) by power iteration unless `lipschitz` is given.
    LeastSquares(Matrix a, Vector b, std::optional<double> lipschitz = std::nullopt);

    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    double lipschitz() const override { return lipschitz_; }
    Eigen::Index dimension() const override { return a_.cols(); }
    std::string name() const override { return "least_squares"; }

    const Matrix& matrix() const { return a_; }
    const Vector& rhs() const { return b_; }

private:
    Vector residual(const Vector& x) const;

    Matrix a_;
    kernels::RowMatrix a_rows_;
    Vector b_;
    double lipschitz_ = 0.0;
    kernels::Backend backend_ = kernels::Backend::Serial;
};

/// f(x) = 0.5 ||x - center||^2 (center defaults to the origin).
class SquaredDistance final : public SmoothFunction {
public:
    explicit SquaredDistance(Eigen::Index n) : center_(Vector::Zero(n)) {}
    explicit SquaredDistance(Vector center) : center_(std::move(center)) {}

    double value(const Vector& x) const override { return 0.5 * (x - center_).squaredNorm(); }
    Vector gradient(const Vector& x) const override { return x - center_; }
    double lipschitz() const override { return 1.0; }
    Eigen::Index dimension() const override { return center_.size(); }
    std::string name() const override { return center_.isZero(0.0) ? "quadratic_norm" : "squared_distance"; }

private:
    Vector center_;
};

/// w1 * f1 + w2 * f2 with Lipschitz constant w1 L1 + w2 L2.
class WeightedSum final : public SmoothFunction {
public:
    WeightedSum(SmoothOracle first, double w1, SmoothOracle second, double w2);

    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    double lipschitz() const override;
    Eigen::Index dimension() const override { return first_->dimension(); }
    std::string name() const override;

private:
    SmoothOracle first_;
    SmoothOracle second_;
    double w1_;
    double w2_;
};

/// Wraps an oracle and scales its gradient. Used as a negative control for
/// gradient validation.
class ScaledGradientFault final : public SmoothFunction {
public:
    ScaledGradientFault(SmoothOracle inner, double factor) : inner_(std::move(inner)), factor_(factor) {}

    double value(const Vector& x) const override { return inner_->value(x); }
    Vector gradient(const Vector& x) const override { return factor_ * inner_->gradient(x); }
    double lipschitz() const override { return inner_->lipschitz(); }
    Eigen::Index dimension() const override { return inner_->dimension(); }
    std::string name() const override { return inner_->name() + "+gradient_fault"; }

private:
    SmoothOracle inner_;
    double factor_;
};

SmoothOracle least_squares_oracle(Matrix a, Vector b, std::optional<double> lipschitz = std::nullopt);
SmoothOracle quadratic_norm_oracle(Eigen::Index n);

struct PowerIterationOptions {
    double tol = 1e-8;
    int max_iterations = 5'000;
    std::uint64_t seed = 0x5eedULL;
};

/// Largest eigenvalue of A^T A. Throws EstimationError when it does not settle.
double lambda_max_gram(const Matrix& a, PowerIterationOptions options = {});

struct GradientReport {
    double max_rel_err = 0.0;
    int probes = 0;
};

/// Central finite differences at seeded points drawn uniformly from [-scale, scale]^n.
/// Error per probe is ||fd - grad|| / ||fd||.
GradientReport check_gradient(const SmoothFunction& oracle, int probes, std::uint64_t seed, double scale = 1.0);

struct CompositeObjective {
    SmoothOracle smooth;
    ProxTerm nonsmooth;

    double value(const Vector& x) const { return smooth->value(x) + nonsmooth.value(x); }
};

struct Truth {
    Vector x_star;
    double f_star = 0.0;
    double g_star = 0.0;
};

/// Holderian error bound parameters (order r, modulus alpha) and
/// M = max ||grad f|| over the lower-level solution set.
struct HolderParams {
    double r = 1.0;
    double alpha = 1.0;
    double M = 0.0;
};

/// Draws `count` points of the lower-level solution set from a seed.
using SolutionSampler = std::function<std::vector<Vector>(std::size_t count, std::uint64_t seed)>;

struct BilevelProblem {
    std::string name;
    SmoothOracle upper;
    SmoothOracle lower;
    FeasibleSet set;
    std::optional<Truth> truth;
    std::optional<HolderParams> holder;
    /// Empty unless the lower-level solution set is known in closed form.
    SolutionSampler lower_solutions;

    Eigen::Index dimension() const { return lower->dimension(); }

    /// Throws ContractViolation when the truth or holder data is inconsistent.
    void validate() const;
};

/// Builds the truth record, taking f* as the upper value at x*.
Truth make_truth(const BilevelProblem& problem, Vector x_star, double g_star);

/// Composite counterpart: constraints live inside the lower nonsmooth part.
struct CompositeBilevelProblem {
    std::string name;
    CompositeObjective upper;
    CompositeObjective lower;
    std::optional<Truth> truth;
    std::optional<HolderParams> holder;

    Eigen::Index dimension() const { return lower.smooth->dimension(); }
};

/// f2 = 0 and g2 = indicator of Z.
CompositeBilevelProblem as_composite(const BilevelProblem& problem);

}  // namespace bilevel
