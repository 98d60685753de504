#include <doctest.h>

#include <cmath>

#include "bilevel/agm_bio.hpp"
#include "bilevel/baselines.hpp"
#include "bilevel/harness.hpp"
#include "support/problems.hpp"

using namespace bilevel;

TEST_CASE("scalarization defaults and constants") {
    const BilevelProblem p = make_linear_inverse(3);
    const ScalarizedRun r = r_apm_setup(p, 2000, std::nullopt);
    CHECK(r.weight_on_upper == 1.0 / 2001.0);
    CHECK(r.weight_on_lower == 1.0);
    CHECK(r.lipschitz == doctest::Approx(3.0 + 1.0 / 2001.0).epsilon(1e-12));

    const ScalarizedRun q = pb_apg_setup(p, 2000, std::nullopt);
    CHECK(q.weight_on_upper == 1.0);
    CHECK(q.weight_on_lower == 1e4);
    CHECK(q.lipschitz == doctest::Approx(1.0 + 3e4).epsilon(1e-12));

    CHECK(r_apm_setup(p, 10, 0.2).weight_on_upper == 0.2);
    CHECK(pb_apg_setup(p, 10, 50.0).weight_on_lower == 50.0);
    CHECK_THROWS_AS(r_apm_setup(p, 0, std::nullopt), ContractViolation);
    CHECK_THROWS_AS(pb_apg_setup(p, 10, -1.0), ConfigError);
    CHECK_THROWS_AS(r_apm_setup(p, 10, std::nan("")), ConfigError);
}

TEST_CASE("zero penalty is plain accelerated gradient on the upper level") {
    BilevelProblem p = make_linear_inverse(4);
    const Vector c = (Vector(4) << 0.3, -0.7, 1.2, 0.0).finished();
    p.upper = std::make_shared<SquaredDistance>(c);
    p.truth.reset();
    p.holder.reset();
    const SolveResult r = pb_apg_solve(p, 300, 0.0);
    const Vector expected = c.cwiseMax(0.0);
    CHECK((r.x - expected).norm() < 1e-8);
}

TEST_CASE("baseline iterates stay feasible and the trace is well formed") {
    for (const auto& p : testprob::smooth_suite()) {
        CAPTURE(p.name);
        BaselineOptions opts;
        double worst = 0.0;
        std::size_t rows = 0;
        FeasibleSet set = p.set;
        opts.x0 = Vector::Constant(p.dimension(), 3.0);
        for (const auto& run : {r_apm_solve(p, 150, std::nullopt, opts), pb_apg_solve(p, 150, 100.0, opts)}) {
            rows = run.trace.size();
            CHECK(rows == 151);
            CHECK(set.contains(run.x, 1e-12));
            for (std::size_t k = 0; k < rows; ++k) {
                CHECK(run.trace[k].k == k);
                if (k > 0) worst = std::max(worst, run.trace[k - 1].A_k - run.trace[k].A_k);
            }
        }
        // Momentum parameter t_k is nondecreasing.
        CHECK(worst <= 0.0);
    }
}

TEST_CASE("observer sees every row in order") {
    const BilevelProblem p = make_linear_inverse(3);
    std::vector<std::size_t> seen;
    BaselineOptions opts;
    opts.on_record = [&](const TraceRecord& r) { seen.push_back(r.k); };
    r_apm_solve(p, 20, std::nullopt, opts);
    REQUIRE(seen.size() == 21);
    for (std::size_t k = 0; k <= 20; ++k) CHECK(seen[k] == k);
}

TEST_CASE("penalty baseline converges to its biased floor") {
    // On the linear inverse problem the penalty minimizer is x = t 1 with
    // t = lambda / (1 + n lambda), so g = 0.5 (1 / (1 + n lambda))^2.
    const Eigen::Index n = 3;
    const double lambda = 1e4;
    const BilevelProblem p = make_linear_inverse(n);
    BaselineOptions opts;
    opts.x0 = random_nonneg_start(n, 7);
    const SolveResult r = pb_apg_solve(p, 2000, lambda, opts);
    const double floor = 0.5 * std::pow(1.0 / (1.0 + n * lambda), 2);
    CHECK(*r.trace.back().g_gap == doctest::Approx(floor).epsilon(1e-3));
}

TEST_CASE("regularized baseline converges to its biased floor") {
    // Minimizer of g + eta f: x = t 1 with t = 1 / (n + eta), so g = 0.5 (eta / (n + eta))^2.
    const Eigen::Index n = 3;
    const BilevelProblem p = make_linear_inverse(n);
    const double eta = 1.0 / 2001.0;
    const SolveResult r = r_apm_solve(p, 2000);
    const double floor = 0.5 * std::pow(eta / (n + eta), 2);
    CHECK(*r.trace.back().g_gap == doctest::Approx(floor).epsilon(1e-2));
}

TEST_CASE("regularized baseline stalls above the cutting-plane method from the origin") {
    const BilevelProblem p = make_linear_inverse(3);
    SolverConfig c;
    c.K = 2000;
    c.gamma.regime = GammaRegime::Holderian;
    c.gamma.r = 2.0;
    const SolveResult agm = solve(p, c);
    const SolveResult rapm = r_apm_solve(p, 2000);
    CHECK(*rapm.trace.back().g_gap < 10.0 * *agm.trace.back().g_gap);
    CHECK(*rapm.trace.back().g_gap > 1e-9);
}

TEST_CASE("repeated baseline runs are bit-identical") {
    const BilevelProblem p = make_min_norm_synthetic(3, 6, 2.0, 7).problem;
    const SolveResult a = pb_apg_solve(p, 100);
    const SolveResult b = pb_apg_solve(p, 100);
    for (std::size_t k = 0; k < a.trace.size(); ++k) CHECK(a.trace[k].f_val == b.trace[k].f_val);
}
