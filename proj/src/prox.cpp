#include "bilevel/prox.hpp"

#include <cmath>
#include <limits>

namespace bilevel {

namespace {

// Membership slack for indicator values.
constexpr double kIndicatorTol = 1e-10;

}  // namespace

ProxTerm ProxTerm::l1(double weight) {
    if (!(weight >= 0.0) || !std::isfinite(weight)) throw ContractViolation("l1 weight must be finite and nonnegative");
    return ProxTerm(L1Term{weight});
}

double ProxTerm::value(const Vector& x) const {
    if (const auto* l1 = std::get_if<L1Term>(&variant_)) return l1->weight * x.lpNorm<1>();
    if (const auto* ind = std::get_if<IndicatorTerm>(&variant_))
        return ind->set.contains(x, kIndicatorTol) ? 0.0 : std::numeric_limits<double>::infinity();
    return 0.0;
}

Vector ProxTerm::prox(double eta, const Vector& x) const {
    if (!(eta > 0.0)) throw ContractViolation("prox step must be positive");
    if (const auto* l1 = std::get_if<L1Term>(&variant_)) return soft_threshold(x, eta * l1->weight);
    if (const auto* ind = std::get_if<IndicatorTerm>(&variant_)) return ind->set.project(x);
    return x;
}

bool ProxTerm::is_zero() const {
    if (std::holds_alternative<ZeroTerm>(variant_)) return true;
    if (const auto* l1 = std::get_if<L1Term>(&variant_)) return l1->weight == 0.0;
    return false;
}

std::string ProxTerm::describe() const {
    if (const auto* l1 = std::get_if<L1Term>(&variant_)) return "l1(" + std::to_string(l1->weight) + ")";
    if (const auto* ind = std::get_if<IndicatorTerm>(&variant_)) return "indicator(" + ind->set.describe() + ")";
    return "zero";
}

Vector soft_threshold(const Vector& x, double threshold) {
    Vector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double mag = std::abs(x[i]) - threshold;
        out[i] = mag > 0.0 ? std::copysign(mag, x[i]) : 0.0;
    }
    return out;
}

}  // namespace bilevel
