#include <doctest.h>

#include <cmath>

#include "bilevel/agm_bio.hpp"
#include "bilevel/aux_bound.hpp"
#include "bilevel/harness.hpp"
#include "bilevel/rng.hpp"
#include "support/problems.hpp"

using namespace bilevel;

namespace {

class Constant final : public SmoothFunction {
public:
    Constant(Eigen::Index n, double c) : n_(n), c_(c) {}
    double value(const Vector&) const override { return c_; }
    Vector gradient(const Vector&) const override { return Vector::Zero(n_); }
    double lipschitz() const override { return 1.0; }
    Eigen::Index dimension() const override { return n_; }
    std::string name() const override { return "constant"; }

private:
    Eigen::Index n_;
    double c_;
};

class Exploding final : public SmoothFunction {
public:
    double value(const Vector& x) const override { return x[0] > 5.0 ? std::nan("") : 0.5 * x.squaredNorm(); }
    Vector gradient(const Vector& x) const override { return -10.0 * x; }
    double lipschitz() const override { return 1.0; }
    Eigen::Index dimension() const override { return 1; }
    std::string name() const override { return "exploding"; }
};

void check_certificate(const BilevelProblem& p, const Vector& x0, std::size_t K) {
    const AuxSequence aux = run_lower_apg(*p.lower, p.set, x0, K);
    const Vector start = p.set.project(x0);
    const double dist0_sq = (start - p.truth->x_star).squaredNorm();
    // The rate bound covers the accelerated iterates k >= 1. At k = 0 it only
    // follows from the descent lemma when grad g(x*) = 0.
    const bool stationary = p.lower->gradient(p.truth->x_star).norm() <= 1e-12;
    REQUIRE(aux.horizon() == K);
    CHECK(aux[0] == p.lower->value(start));
    for (std::size_t k = 0; k <= K; ++k) {
        const double gap = aux[k] - p.truth->g_star;
        CHECK(gap >= 0.0);
        CAPTURE(k);
        if (k > 0 || stationary) CHECK(gap <= bounds::aux_upper(k, p.lower->lipschitz(), dist0_sq));
        if (k > 0) CHECK(aux[k] <= aux[k - 1]);
    }
    CHECK(aux.certified_feasible());
}

}  // namespace

TEST_CASE("scalar quadratic meets its rate bound") {
    const auto g = quadratic_norm_oracle(1);
    const AuxSequence aux = run_lower_apg(*g, FeasibleSet::whole_space(), Vector::Ones(1), 10);
    CHECK(aux[10] <= 2.0 / 121.0);
    CHECK(aux.mode() == AuxMode::PerIteration);
}

TEST_CASE("constant lower level gives a constant sequence") {
    const Constant g(3, 4.5);
    const AuxSequence aux = run_lower_apg(g, FeasibleSet::whole_space(), Vector::Ones(3), 20);
    for (double v : aux.values()) CHECK(v == 4.5);
}

TEST_CASE("linear inverse from the all-ones start") {
    const BilevelProblem p = make_linear_inverse(3);
    check_certificate(p, Vector::Ones(3), 100);
}

TEST_CASE("certificate holds on problems with known truth") {
    Pcg32 rng(15);
    for (const auto& p : {make_linear_inverse(10), make_min_norm_synthetic(5, 10, 2.0, 7).problem,
                          make_min_norm_synthetic(3, 6, 3.0, 2).problem, testprob::default_weak_sharp()}) {
        CAPTURE(p.name);
        for (int t = 0; t < 5; ++t) check_certificate(p, 2.0 * rng.normal_vector(p.dimension()), 300);
    }
}

TEST_CASE("levels do not depend on the horizon") {
    const BilevelProblem p = make_min_norm_synthetic(5, 10, 2.0, 7).problem;
    const Vector x0 = Vector::Constant(10, 0.7);
    const AuxSequence full = run_lower_apg(*p.lower, p.set, x0, 60);
    for (std::size_t K : {1u, 7u, 30u, 60u}) {
        const AuxSequence shorter = run_lower_apg(*p.lower, p.set, x0, K);
        CHECK(shorter[K] == full[K]);
    }
}

TEST_CASE("freeze_to_last examples") {
    const AuxSequence seq({5.0, 3.0, 2.0}, AuxMode::PerIteration, Vector::Zero(1), false);
    const AuxSequence frozen = freeze_to_last(seq);
    CHECK(frozen.values() == std::vector<double>{2.0, 2.0, 2.0});
    CHECK(frozen.mode() == AuxMode::ConstantLast);
    const AuxSequence flat({4.0, 4.0}, AuxMode::PerIteration, Vector::Zero(1), false);
    CHECK(freeze_to_last(flat).values() == std::vector<double>{4.0, 4.0});

    const BilevelProblem p = make_linear_inverse(3);
    const AuxSequence run = run_lower_apg(*p.lower, p.set, Vector::Ones(3), 25);
    const AuxSequence last = freeze_to_last(run);
    for (std::size_t k = 0; k <= 25; ++k) CHECK(last[k] == run[25]);
}

TEST_CASE("get examples and range check") {
    const AuxSequence seq({5.0, 3.0, 2.0}, AuxMode::PerIteration, Vector::Zero(1), false);
    CHECK(seq.get(1) == 3.0);
    CHECK(freeze_to_last(seq).get(0) == 2.0);
    CHECK(seq.get(2) == 2.0);
    CHECK(freeze_to_last(seq).get(2) == 2.0);
    CHECK_THROWS_AS(seq.get(3), ContractViolation);
}

TEST_CASE("sequence construction rejects an increasing or empty sequence") {
    CHECK_THROWS_AS(AuxSequence({}, AuxMode::PerIteration, Vector::Zero(1), false), ContractViolation);
    CHECK_THROWS_AS(AuxSequence({1.0, 2.0}, AuxMode::PerIteration, Vector::Zero(1), false), ContractViolation);
}

TEST_CASE("non-finite values raise a divergence error with the iteration") {
    const Exploding g;
    try {
        run_lower_apg(g, FeasibleSet::whole_space(), Vector::Ones(1), 50);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(e.iteration >= 1);
    }
}

TEST_CASE("composite lower level with an indicator matches the projected run") {
    const BilevelProblem p = make_linear_inverse(4);
    const Vector x0 = Vector::Constant(4, 0.9);
    const AuxSequence smooth = run_lower_apg(*p.lower, p.set, x0, 80);
    const AuxSequence comp = run_lower_apg(CompositeObjective{p.lower, ProxTerm::indicator(p.set)}, x0, 80);
    for (std::size_t k = 0; k <= 80; ++k) CHECK(comp[k] == smooth[k]);
}
