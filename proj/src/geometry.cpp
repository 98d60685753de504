#include "bilevel/geometry.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace bilevel {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Vector project_ball_centered(double radius, const Vector& q) {
    const double norm = q.norm();
    if (norm <= radius) return q;
    return (radius / norm) * q;
}

// Unit vector orthogonal to `unit_normal`, built from the coordinate axis
// least aligned with it.
Vector orthogonal_direction(const Vector& unit_normal) {
    Eigen::Index best = 0;
    unit_normal.cwiseAbs().minCoeff(&best);
    Vector e = Vector::Zero(unit_normal.size());
    e[best] = 1.0;
    e -= unit_normal.dot(e) * unit_normal;
    return e.normalized();
}

}  // namespace

FeasibleSet FeasibleSet::ball(Vector center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ContractViolation("ball radius must be positive");
    if (!center.allFinite()) throw ContractViolation("ball center must be finite");
    return FeasibleSet(Ball{std::move(center), radius});
}

FeasibleSet FeasibleSet::box(Vector lower, Vector upper) {
    if (lower.size() != upper.size()) throw ContractViolation("box bounds differ in dimension");
    if ((lower.array() > upper.array()).any()) throw ContractViolation("box requires lower <= upper");
    return FeasibleSet(Box{std::move(lower), std::move(upper)});
}

std::optional<double> FeasibleSet::diameter() const {
    return std::visit(Overloaded{
                          [](const Ball& b) -> std::optional<double> { return 2.0 * b.radius; },
                          [](const Box& b) -> std::optional<double> {
                              if (!b.lower.allFinite() || !b.upper.allFinite()) return std::nullopt;
                              return (b.upper - b.lower).norm();
                          },
                          [](const auto&) -> std::optional<double> { return std::nullopt; },
                      },
                      variant_);
}

std::optional<Eigen::Index> FeasibleSet::dimension() const {
    return std::visit(Overloaded{
                          [](const Ball& b) -> std::optional<Eigen::Index> { return b.center.size(); },
                          [](const Box& b) -> std::optional<Eigen::Index> { return b.lower.size(); },
                          [](const auto&) -> std::optional<Eigen::Index> { return std::nullopt; },
                      },
                      variant_);
}

void FeasibleSet::check_dimension(const Vector& p) const {
    if (const auto n = dimension(); n && *n != p.size())
        throw ContractViolation("point dimension " + std::to_string(p.size()) + " does not match set dimension " +
                                std::to_string(*n));
}

Vector FeasibleSet::project(const Vector& p) const {
    check_dimension(p);
    return std::visit(Overloaded{
                          [&](const WholeSpace&) -> Vector { return p; },
                          [&](const Ball& b) -> Vector {
                              return b.center + project_ball_centered(b.radius, p - b.center);
                          },
                          [&](const NonnegOrthant&) -> Vector { return p.cwiseMax(0.0); },
                          [&](const Box& b) -> Vector { return p.cwiseMax(b.lower).cwiseMin(b.upper); },
                      },
                      variant_);
}

bool FeasibleSet::contains(const Vector& p, double tol) const {
    check_dimension(p);
    return std::visit(Overloaded{
                          [&](const WholeSpace&) { return p.allFinite(); },
                          [&](const Ball& b) { return (p - b.center).norm() <= b.radius + tol; },
                          [&](const NonnegOrthant&) { return p.size() == 0 || p.minCoeff() >= -tol; },
                          [&](const Box& b) {
                              return ((p - b.lower).array() >= -tol).all() && ((b.upper - p).array() >= -tol).all();
                          },
                      },
                      variant_);
}

double FeasibleSet::min_linear(const Vector& a) const {
    check_dimension(a);
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    return std::visit(Overloaded{
                          [&](const WholeSpace&) { return a.isZero(0.0) ? 0.0 : kNegInf; },
                          [&](const Ball& b) { return a.dot(b.center) - b.radius * a.norm(); },
                          [&](const NonnegOrthant&) { return (a.array() < 0.0).any() ? kNegInf : 0.0; },
                          [&](const Box& b) {
                              double s = 0.0;
                              for (Eigen::Index i = 0; i < a.size(); ++i)
                                  s += a[i] >= 0.0 ? a[i] * b.lower[i] : a[i] * b.upper[i];
                              return s;
                          },
                      },
                      variant_);
}

std::string FeasibleSet::describe() const {
    std::ostringstream os;
    std::visit(Overloaded{
                   [&](const WholeSpace&) { os << "whole_space"; },
                   [&](const Ball& b) { os << "ball(radius=" << b.radius << ", dim=" << b.center.size() << ")"; },
                   [&](const NonnegOrthant&) { os << "nonneg_orthant"; },
                   [&](const Box& b) { os << "box(dim=" << b.lower.size() << ")"; },
               },
               variant_);
    return os.str();
}

Vector project_set(const FeasibleSet& set, const Vector& p) { return set.project(p); }

Vector project_halfspace(const Halfspace& h, const Vector& p) {
    if (h.trivial) return p;
    if (h.normal.size() != p.size()) throw ContractViolation("halfspace dimension mismatch");
    const double norm2 = h.normal.squaredNorm();
    if (norm2 == 0.0) throw DegenerateHalfspaceError("halfspace has a zero normal");
    const double violation = h.normal.dot(p) - h.offset;
    if (violation <= 0.0) return p;
    return p - (violation / norm2) * h.normal;
}

Vector project_ball_halfspace(const Ball& ball, const Halfspace& h, const Vector& p) {
    if (ball.center.size() != p.size()) throw ContractViolation("ball dimension mismatch");
    const double radius = ball.radius;
    const Vector q = p - ball.center;
    if (h.trivial) return ball.center + project_ball_centered(radius, q);
    if (h.normal.size() != p.size()) throw ContractViolation("halfspace dimension mismatch");

    const Vector& a = h.normal;
    const double norm2 = a.squaredNorm();
    if (norm2 == 0.0) throw DegenerateHalfspaceError("halfspace has a zero normal");
    const double norm_a = std::sqrt(norm2);
    const double level = h.offset - a.dot(ball.center);

    const double lowest = -radius * norm_a;
    if (level < lowest - 4.0 * std::numeric_limits<double>::epsilon() * std::abs(lowest))
        throw InfeasibleRegionError("ball and halfspace do not intersect");

    // Ball face only (covers the interior case).
    const Vector on_ball = project_ball_centered(radius, q);
    if (a.dot(on_ball) <= level) return ball.center + on_ball;

    // Halfspace face only.
    const Vector on_plane = q - ((a.dot(q) - level) / norm2) * a;
    if (on_plane.norm() <= radius) return ball.center + on_plane;

    // Both active: the hyperplane cuts the sphere in an (n-2)-sphere centred
    // at shift * unit with radius rim.
    const Vector unit = a / norm_a;
    const double shift = level / norm_a;
    const double rim = std::sqrt(std::max(0.0, radius * radius - shift * shift));
    Vector tangent = q - unit.dot(q) * unit;
    const double tangent_norm = tangent.norm();
    Vector u = shift * unit;
    if (rim > 0.0 && p.size() > 1) {
        if (tangent_norm > 0.0)
            u += (rim / tangent_norm) * tangent;
        else
            u += rim * orthogonal_direction(unit);
    }
    return ball.center + u;
}

Vector dykstra_project(std::span<const Projector> sets, const Vector& p, DykstraOptions options) {
    if (sets.empty()) return p;
    std::vector<Vector> corrections(sets.size(), Vector::Zero(p.size()));
    Vector x = p;
    double displacement = 0.0;
    for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
        const Vector start = x;
        double correction_change2 = 0.0;
        for (std::size_t i = 0; i < sets.size(); ++i) {
            const Vector shifted = x + corrections[i];
            x = sets[i](shifted);
            Vector updated = shifted - x;
            correction_change2 += (updated - corrections[i]).squaredNorm();
            corrections[i] = std::move(updated);
        }
        if (!x.allFinite()) throw NonConvergenceError("dykstra: non-finite iterate", x, INFINITY);
        displacement = (x - start).norm();
        if (displacement <= options.tol && std::sqrt(correction_change2) <= options.tol) return x;
    }
    throw NonConvergenceError("dykstra: exceeded " + std::to_string(options.max_sweeps) + " sweeps", x,
                              displacement);
}

Vector project_set_halfspace(const FeasibleSet& set, const Halfspace& h, const Vector& p, DykstraOptions options) {
    if (h.trivial) return set.project(p);
    if (set.is_whole_space()) return project_halfspace(h, p);
    if (const Ball* b = set.as_ball()) return project_ball_halfspace(*b, h, p);
    if (set.contains(p, 0.0) && h.contains(p)) return p;
    const Projector members[] = {
        [&set](const Vector& v) { return set.project(v); },
        [&h](const Vector& v) { return project_halfspace(h, v); },
    };
    return dykstra_project(members, p, options);
}

}  // namespace bilevel
