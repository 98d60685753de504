#pragma once

#include <string>
#include <variant>

#include "bilevel/geometry.hpp"

namespace bilevel {

struct ZeroTerm {};

/// weight * ||x||_1
struct L1Term {
    double weight = 0.0;
};

/// Indicator of a closed convex set (+inf outside).
struct IndicatorTerm {
    FeasibleSet set;
};

/// A prox-friendly convex term h, with prox(eta, x) = argmin_u ||u - x||^2 / (2 eta) + h(u).
class ProxTerm {
public:
    using Variant = std::variant<ZeroTerm, L1Term, IndicatorTerm>;

    ProxTerm() = default;
    ProxTerm(Variant v) : variant_(std::move(v)) {}  // NOLINT(google-explicit-constructor)

    static ProxTerm zero() { return ProxTerm(ZeroTerm{}); }
    static ProxTerm l1(double weight);
    static ProxTerm indicator(FeasibleSet set) { return ProxTerm(IndicatorTerm{std::move(set)}); }

    const Variant& variant() const { return variant_; }

    /// Extended-real value; +inf outside the domain of an indicator.
    double value(const Vector& x) const;
    Vector prox(double eta, const Vector& x) const;

    /// True when the term is identically zero (ZeroTerm or L1 with zero weight).
    bool is_zero() const;
    std::string describe() const;

private:
    Variant variant_ = ZeroTerm{};
};

/// Componentwise soft threshold: sign(x) * max(|x| - threshold, 0).
Vector soft_threshold(const Vector& x, double threshold);

}  // namespace bilevel
