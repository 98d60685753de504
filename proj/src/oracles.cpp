#include "bilevel/oracles.hpp"

#include <algorithm>
#include <cmath>

#include "bilevel/rng.hpp"

namespace bilevel {

LeastSquares::LeastSquares(Matrix a, Vector b, std::optional<double> lipschitz)
    : a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows() < 1 || a_.cols() < 1) throw ContractViolation("least squares: empty matrix");
    if (b_.size() != a_.rows()) throw ContractViolation("least squares: rhs length does not match rows");
    if (!a_.allFinite() || !b_.allFinite()) throw ContractViolation("least squares: non-finite data");
    a_rows_ = a_;
    backend_ = kernels::backend_for(a_.rows(), a_.cols());
    if (lipschitz) {
        if (!(*lipschitz > 0.0)) throw ContractViolation("least squares: Lipschitz override must be positive");
        lipschitz_ = *lipschitz;
    } else {
        lipschitz_ = lambda_max_gram(a_);
    }
}

Vector LeastSquares::residual(const Vector& x) const {
    if (x.size() != a_.cols()) throw ContractViolation("least squares: dimension mismatch");
    Vector r;
    kernels::gemv(a_rows_, x, r, backend_);
    r -= b_;
    return r;
}

double LeastSquares::value(const Vector& x) const { return 0.5 * residual(x).squaredNorm(); }

Vector LeastSquares::gradient(const Vector& x) const {
    Vector g;
    kernels::gemv_transposed(a_, residual(x), g, backend_);
    return g;
}

WeightedSum::WeightedSum(SmoothOracle first, double w1, SmoothOracle second, double w2)
    : first_(std::move(first)), second_(std::move(second)), w1_(w1), w2_(w2) {
    if (first_->dimension() != second_->dimension()) throw ContractViolation("weighted sum: dimension mismatch");
    if (w1_ < 0.0 || w2_ < 0.0) throw ContractViolation("weighted sum: weights must be nonnegative");
}

double WeightedSum::value(const Vector& x) const {
    // Zero weights skip evaluation so a zero-weight term cannot inject inf * 0.
    double v = 0.0;
    if (w1_ != 0.0) v += w1_ * first_->value(x);
    if (w2_ != 0.0) v += w2_ * second_->value(x);
    return v;
}

Vector WeightedSum::gradient(const Vector& x) const {
    Vector g = Vector::Zero(x.size());
    if (w1_ != 0.0) g += w1_ * first_->gradient(x);
    if (w2_ != 0.0) g += w2_ * second_->gradient(x);
    return g;
}

double WeightedSum::lipschitz() const { return w1_ * first_->lipschitz() + w2_ * second_->lipschitz(); }

std::string WeightedSum::name() const {
    return std::to_string(w1_) + "*" + first_->name() + "+" + std::to_string(w2_) + "*" + second_->name();
}

SmoothOracle least_squares_oracle(Matrix a, Vector b, std::optional<double> lipschitz) {
    return std::make_shared<LeastSquares>(std::move(a), std::move(b), lipschitz);
}

SmoothOracle quadratic_norm_oracle(Eigen::Index n) {
    if (n < 1) throw ContractViolation("quadratic norm: dimension must be positive");
    return std::make_shared<SquaredDistance>(n);
}

double lambda_max_gram(const Matrix& a, PowerIterationOptions options) {
    const kernels::RowMatrix rows = a;
    const auto backend = kernels::backend_for(a.rows(), a.cols());
    Pcg32 rng(options.seed);
    Vector v = rng.uniform_vector(a.cols(), 0.5, 1.5);
    v.normalize();
    Vector av;
    Vector w;
    double estimate = 0.0;
    for (int it = 0; it < options.max_iterations; ++it) {
        kernels::gemv(rows, v, av, backend);
        kernels::gemv_transposed(a, av, w, backend);
        const double next = v.dot(w);
        const double norm = w.norm();
        if (!(norm > 0.0)) throw EstimationError("power iteration: A^T A annihilates the iterate (zero matrix?)");
        v = w / norm;
        if (it > 0 && std::abs(next - estimate) <= options.tol * std::abs(next)) return next;
        estimate = next;
    }
    throw EstimationError("power iteration did not converge in " + std::to_string(options.max_iterations) +
                          " iterations");
}

GradientReport check_gradient(const SmoothFunction& oracle, int probes, std::uint64_t seed, double scale) {
    if (probes < 1) throw ContractViolation("check_gradient: probes must be >= 1");
    Pcg32 rng(seed);
    GradientReport report;
    report.probes = probes;
    const Eigen::Index n = oracle.dimension();
    for (int p = 0; p < probes; ++p) {
        Vector x = rng.uniform_vector(n, -scale, scale);
        const Vector grad = oracle.gradient(x);
        Vector fd(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
            const double saved = x[i];
            x[i] = saved + h;
            const double up = oracle.value(x);
            x[i] = saved - h;
            const double down = oracle.value(x);
            x[i] = saved;
            fd[i] = (up - down) / (2.0 * h);
        }
        const double err = (fd - grad).norm() / std::max(fd.norm(), 1e-10);
        report.max_rel_err = std::max(report.max_rel_err, err);
    }
    return report;
}

void BilevelProblem::validate() const {
    if (!upper || !lower) throw ContractViolation("bilevel problem needs both oracles");
    if (upper->dimension() != lower->dimension()) throw ContractViolation("upper and lower dimensions differ");
    if (truth) {
        if (truth->x_star.size() != dimension()) throw ContractViolation("truth x_star has wrong dimension");
        if (!set.contains(truth->x_star, 1e-10)) throw ContractViolation("truth x_star lies outside Z");
        if (std::abs(lower->value(truth->x_star) - truth->g_star) > 1e-10)
            throw ContractViolation("lower value at x_star differs from g_star");
    }
    if (holder) {
        if (!(holder->r >= 1.0)) throw ContractViolation("holder r must be >= 1");
        if (!(holder->alpha > 0.0)) throw ContractViolation("holder alpha must be > 0");
        if (!(holder->M >= 0.0)) throw ContractViolation("holder M must be >= 0");
    }
}

Truth make_truth(const BilevelProblem& problem, Vector x_star, double g_star) {
    Truth t;
    t.f_star = problem.upper->value(x_star);
    t.g_star = g_star;
    t.x_star = std::move(x_star);
    return t;
}

CompositeBilevelProblem as_composite(const BilevelProblem& problem) {
    CompositeBilevelProblem c;
    c.name = problem.name;
    c.upper = {problem.upper, ProxTerm::zero()};
    c.lower = {problem.lower, ProxTerm::indicator(problem.set)};
    c.truth = problem.truth;
    c.holder = problem.holder;
    return c;
}

}  // namespace bilevel
