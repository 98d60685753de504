#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "bilevel/errors.hpp"

namespace bilevel {

/// { z : <normal, z> <= offset }. A `trivial` halfspace is the whole space.
struct Halfspace {
    Vector normal;
    double offset = 0.0;
    bool trivial = false;

    static Halfspace whole_space(Eigen::Index n) { return {Vector::Zero(n), 0.0, true}; }

    bool contains(const Vector& p, double tol = 0.0) const {
        return trivial || normal.dot(p) <= offset + tol;
    }
};

struct WholeSpace {};

struct Ball {
    Vector center;
    double radius = 1.0;
};

struct NonnegOrthant {};

struct Box {
    Vector lower;
    Vector upper;
};

/// Closed convex set Z with an exact Euclidean projection.
class FeasibleSet {
public:
    using Variant = std::variant<WholeSpace, Ball, NonnegOrthant, Box>;

    FeasibleSet() = default;

    static FeasibleSet whole_space() { return FeasibleSet(WholeSpace{}); }
    static FeasibleSet ball(Vector center, double radius);
    static FeasibleSet nonneg_orthant() { return FeasibleSet(NonnegOrthant{}); }
    static FeasibleSet box(Vector lower, Vector upper);

    const Variant& variant() const { return variant_; }
    const Ball* as_ball() const { return std::get_if<Ball>(&variant_); }
    const Box* as_box() const { return std::get_if<Box>(&variant_); }
    bool is_whole_space() const { return std::holds_alternative<WholeSpace>(variant_); }
    bool is_orthant() const { return std::holds_alternative<NonnegOrthant>(variant_); }

    /// Exact Euclidean diameter for bounded sets.
    std::optional<double> diameter() const;

    /// Fixed dimension, if the set carries one (Ball and Box do).
    std::optional<Eigen::Index> dimension() const;

    Vector project(const Vector& p) const;
    bool contains(const Vector& p, double tol) const;

    /// inf over Z of <a, z>; -infinity when unbounded below.
    double min_linear(const Vector& a) const;

    std::string describe() const;

private:
    explicit FeasibleSet(Variant v) : variant_(std::move(v)) {}
    void check_dimension(const Vector& p) const;

    Variant variant_ = WholeSpace{};
};

using Projector = std::function<Vector(const Vector&)>;

Vector project_set(const FeasibleSet& set, const Vector& p);

/// Projection onto a halfspace; the trivial halfspace projects as identity.
/// Throws DegenerateHalfspaceError for a zero normal without the trivial flag.
Vector project_halfspace(const Halfspace& h, const Vector& p);

/// Closed-form projection onto Ball ∩ Halfspace.
///
/// With q = p - center and b' = b - <a, center>, one of four KKT cases holds:
/// q already feasible; the ball projection satisfies the cut; the halfspace
/// projection lies in the ball; or both constraints are active. In the last
/// case the answer lies on the (n-2)-sphere where the hyperplane meets the
/// sphere, at the point closest to the component of q tangent to the
/// hyperplane.
Vector project_ball_halfspace(const Ball& ball, const Halfspace& h, const Vector& p);

struct DykstraOptions {
    double tol = 1e-10;
    std::size_t max_sweeps = 10'000;
};

/// Dykstra's alternating projection onto the intersection of the given sets.
/// Stops once both the iterate and the correction terms move by at most `tol`
/// over a full sweep. Throws NonConvergenceError after `max_sweeps`.
Vector dykstra_project(std::span<const Projector> sets, const Vector& p, DykstraOptions options = {});

/// Euclidean projection onto Z ∩ h using the cheapest exact route for Z.
Vector project_set_halfspace(const FeasibleSet& set, const Halfspace& h, const Vector& p,
                             DykstraOptions options = {});

}  // namespace bilevel
