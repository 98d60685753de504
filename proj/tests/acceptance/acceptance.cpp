// One line per acceptance criterion. Exit status is nonzero if any fails.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "bilevel/agm_bio.hpp"
#include "bilevel/baselines.hpp"
#include "bilevel/harness.hpp"
#include "bilevel/p_agm_bio.hpp"
#include "bilevel/rng.hpp"
#include "support/problems.hpp"
#include "support/qp_oracle.hpp"

using namespace bilevel;

namespace {

constexpr double kBoundSlack = 1.05;
constexpr std::uint64_t kSeed = 7;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

const MinNormProblem& min_norm() {
    static const MinNormProblem mn = make_min_norm_synthetic(5, 10, 2.0, kSeed);
    return mn;
}

// gamma = 1, K = 1000, from the origin.
const SolveResult& compact_run() {
    static const SolveResult r = [] {
        SolverConfig c;
        c.K = 1000;
        return solve(min_norm().problem, c);
    }();
    return r;
}

SolverConfig holderian(std::size_t K, Eigen::Index n) {
    SolverConfig c;
    c.K = K;
    c.gamma.regime = GammaRegime::Holderian;
    c.gamma.r = 2.0;
    c.x0 = random_nonneg_start(n, kSeed);
    return c;
}

const SolveResult& linear_inverse_run() {
    static const SolveResult r = solve(make_linear_inverse(3), holderian(2000, 3));
    return r;
}

Verdict compact_f_bound() {
    const auto& p = min_norm().problem;
    const double d0 = p.truth->x_star.squaredNorm();
    double worst = 0.0;
    for (std::size_t k = 2; k <= 1000; ++k)
        worst = std::max(worst, *compact_run().trace[k].f_gap / bounds::compact_f_upper(k, p.upper->lipschitz(), d0));
    return {worst <= kBoundSlack, "max gap/bound " + sci(worst)};
}

Verdict compact_g_bound() {
    const auto& p = min_norm().problem;
    const double d0 = p.truth->x_star.squaredNorm();
    const double D = *p.set.diameter();
    double worst = 0.0;
    for (std::size_t k = 2; k <= 1000; ++k)
        worst = std::max(worst,
                         *compact_run().trace[k].g_gap / bounds::compact_g_upper(k, p.lower->lipschitz(), d0, D));
    return {worst <= kBoundSlack, "max gap/bound " + sci(worst)};
}

Verdict aux_certificate() {
    const auto& p = min_norm().problem;
    const Vector x0 = Vector::Zero(p.dimension());
    const AuxSequence aux = run_lower_apg(*p.lower, p.set, x0, 1000);
    const double d0 = (x0 - p.truth->x_star).squaredNorm();
    bool ok = true;
    double worst = 0.0;
    for (std::size_t k = 0; k <= 1000; ++k) {
        const double gap = aux[k] - p.truth->g_star;
        const double bound = bounds::aux_upper(k, p.lower->lipschitz(), d0);
        ok = ok && gap >= 0.0 && gap <= bound && (k == 0 || aux[k] <= aux[k - 1]);
        worst = std::max(worst, gap / bound);
    }
    return {ok, "max gap/bound " + sci(worst)};
}

Verdict linear_inverse_truth() {
    const auto& t = linear_inverse_run().trace;
    const double f_err = std::abs(t.back().f_val - 1.0 / 6.0);
    const double g_gap = *t.back().g_gap;
    const double slope = bounds::loglog_slope(t, 200, 2000, &TraceRecord::g_gap);
    return {f_err <= 1e-3 && g_gap <= 1e-4 && slope <= -1.2,
            "|f-1/6| " + sci(f_err) + ", g gap " + sci(g_gap) + ", slope " + sci(slope)};
}

Verdict holder_lower_bound() {
    const HolderParams h{2.0, 1.0, 1.0 / std::sqrt(3.0)};
    double slack = 1e300;
    for (const auto& r : linear_inverse_run().trace)
        slack = std::min(slack, *r.f_gap - bounds::holder_f_lower(std::max(*r.g_gap, 0.0), h));
    return {slack >= -1e-9, "min slack " + sci(slack)};
}

Verdict cut_containment() {
    const BilevelProblem p = make_linear_inverse(3);
    const auto samples = p.lower_solutions(1000, kSeed);
    SolverConfig c = holderian(2000, 3);
    double worst = -1e300;
    std::size_t cuts = 0;
    c.on_cut = [&](std::size_t, const Halfspace& h) {
        if (h.trivial) return;
        ++cuts;
        for (const auto& z : samples) worst = std::max(worst, h.normal.dot(z) - h.offset);
    };
    solve(p, c);
    return {cuts > 0 && worst <= 1e-10, std::to_string(cuts) + " cuts, worst violation " + sci(worst)};
}

Verdict projection_equivalence() {
    Pcg32 rng(kSeed, 100);
    double worst = 0.0;
    double worst_dykstra = 0.0;
    for (int family = 0; family < 5; ++family) {
        for (int t = 0; t < 100; ++t) {
            const auto n = static_cast<Eigen::Index>(2 + rng.below(9));
            const Vector p = 3.0 * rng.normal_vector(n);
            const Vector c = rng.normal_vector(n);
            const double radius = rng.uniform(0.5, 2.0);
            const Vector a = rng.normal_vector(n);
            Vector got, want;
            if (family == 0) {
                got = FeasibleSet::ball(c, radius).project(p);
                want = oracle::ball(c, radius, p);
            } else if (family == 1) {
                got = FeasibleSet::nonneg_orthant().project(p);
                want = oracle::orthant(p);
            } else if (family == 2) {
                const double b = rng.uniform(-1.0, 1.0);
                got = project_halfspace({a, b, false}, p);
                want = oracle::halfspace(a, b, p);
            } else if (family == 3) {
                // Offset keeps the hyperplane within distance radius / 2 of the center.
                const double b = a.dot(c) + rng.uniform(-0.5, 0.5) * radius * a.norm();
                const Halfspace h{a, b, false};
                got = project_ball_halfspace({c, radius}, h, p);
                want = oracle::with_halfspace([&](const oracle::Vec& v) { return oracle::ball(c, radius, v); }, a, b, p);
                const Projector sets[] = {[&](const Vector& v) { return FeasibleSet::ball(c, radius).project(v); },
                                          [&](const Vector& v) { return project_halfspace(h, v); }};
                const Vector dyk = dykstra_project(sets, p, {1e-14, 1'000'000});
                worst_dykstra = std::max(worst_dykstra, (dyk - got).norm());
            } else {
                const double b = rng.uniform(0.1, 2.0) * a.cwiseMax(0.0).sum() + 0.1;
                got = project_set_halfspace(FeasibleSet::nonneg_orthant(), {a, b, false}, p);
                want = oracle::with_halfspace(oracle::orthant, a, b, p);
            }
            worst = std::max(worst, (got - want).norm());
        }
    }
    return {worst <= 1e-8 && worst_dykstra <= 1e-8, "oracle " + sci(worst) + ", dykstra " + sci(worst_dykstra)};
}

Verdict polyak_identity() {
    Pcg32 rng(kSeed, 101);
    double worst = 0.0;
    int cases = 0;
    while (cases < 100) {
        const auto n = static_cast<Eigen::Index>(1 + rng.below(8));
        SmoothOracle g;
        if (cases % 2 == 0) {
            g = std::make_shared<SquaredDistance>(rng.normal_vector(n));
        } else {
            const Matrix a = rng.normal_matrix(1 + static_cast<Eigen::Index>(rng.below(3)), n);
            g = least_squares_oracle(a, a * rng.normal_vector(n));
        }
        const Vector x = 2.0 * rng.normal_vector(n);
        const Vector grad = g->gradient(x);
        const double gx = g->value(x);
        if (!(gx > 0.0) || grad.norm() == 0.0) continue;
        ++cases;
        const Vector projected = project_halfspace(build_cutting_plane(*g, x, 0.0, 1e-12), x);
        const Vector polyak = x - (gx / grad.squaredNorm()) * grad;
        worst = std::max(worst, (projected - polyak).norm());
    }
    return {worst <= 1e-12, "worst " + sci(worst)};
}

Verdict algorithm_equivalence() {
    double worst = 0.0;
    for (const auto& p : testprob::smooth_suite()) {
        SolverConfig c;
        c.K = 200;
        c.gamma.regime = GammaRegime::Manual;
        c.gamma.gamma = 0.5;
        c.x0 = Vector::Constant(p.dimension(), 0.4);
        const SolveResult plain = solve(p, c);
        const SolveResult comp = p_agm_bio_solve(as_composite(p), c);
        for (std::size_t k = 0; k <= c.K; ++k) {
            worst = std::max(worst, std::abs(plain.trace[k].f_val - comp.trace[k].f_val));
            worst = std::max(worst, std::abs(plain.trace[k].g_val - comp.trace[k].g_val));
        }
        worst = std::max(worst, (plain.x - comp.x).norm());
    }
    return {worst <= 1e-10, "worst " + sci(worst)};
}

Verdict baseline_floor() {
    const Eigen::Index n = 100;
    const std::size_t K = 2000;
    const BilevelProblem p = make_linear_inverse(n);
    const SolverConfig c = holderian(K, n);
    const auto agm = solve(p, c).trace.back();
    const BaselineOptions opts{c.x0, {}};
    const auto pb = pb_apg_solve(p, K, kDefaultPenalty, opts).trace.back();
    const auto rapm = r_apm_solve(p, K, default_r_apm_eta(K), opts).trace.back();
    const bool pb_ok = *pb.g_gap > *agm.g_gap;
    const bool rapm_ok = *rapm.abs_f_gap > *agm.abs_f_gap;
    return {pb_ok && rapm_ok, std::string("g gap pb_apg ") + sci(*pb.g_gap) + (pb_ok ? " > " : " <= ") + "agm_bio " +
                                  sci(*agm.g_gap) + "; |f gap| r_apm " + sci(*rapm.abs_f_gap) +
                                  (rapm_ok ? " > " : " <= ") + "agm_bio " + sci(*agm.abs_f_gap)};
}

Verdict gradient_validation() {
    std::vector<SmoothOracle> oracles;
    for (const auto& p : testprob::smooth_suite()) {
        oracles.push_back(p.upper);
        oracles.push_back(p.lower);
    }
    const auto ws = testprob::default_weak_sharp();
    oracles.push_back(ws.upper);
    oracles.push_back(std::make_shared<WeightedSum>(oracles[0], 0.3, oracles[1], 2.0));
    double worst = 0.0;
    for (const auto& o : oracles) worst = std::max(worst, check_gradient(*o, 20, kSeed).max_rel_err);
    return {worst < 1e-5, std::to_string(oracles.size()) + " oracles, worst " + sci(worst)};
}

Verdict determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "bilevel_acceptance";
    const auto spec = [&](const char* sub) {
        ExperimentSpec s;
        s.name = "li";
        s.problem = make_linear_inverse(10);
        s.K = 300;
        s.seed = kSeed;
        s.output_dir = dir / sub;
        SolverSpec agm;
        agm.label = "agm";
        agm.config = holderian(300, 10);
        SolverSpec rapm;
        rapm.label = "rapm";
        rapm.kind = SolverKind::RApm;
        rapm.config.K = 300;
        rapm.config.x0 = agm.config.x0;
        SolverSpec pb = rapm;
        pb.label = "pb";
        pb.kind = SolverKind::PbApg;
        s.solvers = {agm, rapm, pb};
        return s;
    };
    std::filesystem::remove_all(dir);
    const auto a = run_experiment(spec("a"), 1);
    const auto b = run_experiment(spec("b"), 3);
    bool same = a.all_ok() && b.all_ok();
    std::size_t rows = 0;
    for (std::size_t i = 0; same && i < a.outcomes.size(); ++i) {
        const auto ta = read_trace_csv(a.outcomes[i].trace_path);
        const auto tb = read_trace_csv(b.outcomes[i].trace_path);
        same = ta.size() == tb.size();
        for (std::size_t k = 0; same && k < ta.size(); ++k) {
            same = ta[k].k == tb[k].k && ta[k].f_val == tb[k].f_val && ta[k].g_val == tb[k].g_val &&
                   ta[k].f_gap == tb[k].f_gap && ta[k].abs_f_gap == tb[k].abs_f_gap && ta[k].g_gap == tb[k].g_gap &&
                   ta[k].a_k == tb[k].a_k && ta[k].A_k == tb[k].A_k;
            ++rows;
        }
    }
    return {same, std::to_string(rows) + " rows compared"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"compact f bound", compact_f_bound},
        {"compact g bound", compact_g_bound},
        {"aux sequence certificate", aux_certificate},
        {"linear inverse ground truth", linear_inverse_truth},
        {"holder lower bound", holder_lower_bound},
        {"cut containment", cut_containment},
        {"projection equivalence", projection_equivalence},
        {"polyak identity", polyak_identity},
        {"algorithm equivalence", algorithm_equivalence},
        {"baseline floor", baseline_floor},
        {"gradient validation", gradient_validation},
        {"determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        std::printf("%s  %-28s %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
        failed += !v.pass;
    }
    std::fflush(stdout);
    return failed == 0 ? 0 : 1;
}
