#pragma once

// Distance from zero to (u - p) / eta + w * d||u||_1 + N(u), where N is the
// normal cone of {<a, z> <= b} (empty cone when the halfspace is absent or
// inactive). Evaluated in closed form per coordinate for a fixed multiplier,
// then minimized over the multiplier by ternary search.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>

namespace oracle {

inline double l1_residual_at(const Eigen::VectorXd& u, const Eigen::VectorXd& p, double eta, double w,
                             const Eigen::VectorXd* a, double mu) {
    double sq = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        double base = (u[i] - p[i]) / eta;
        if (a) base += mu * (*a)[i];
        double r;
        if (u[i] > 0.0)
            r = base + w;
        else if (u[i] < 0.0)
            r = base - w;
        else
            r = std::max(0.0, std::abs(base) - w);
        sq += r * r;
    }
    return std::sqrt(sq);
}

inline double l1_prox_residual(const Eigen::VectorXd& u, const Eigen::VectorXd& p, double eta, double w,
                               const Eigen::VectorXd* a = nullptr, std::optional<double> b = std::nullopt,
                               double active_tol = 1e-9) {
    const bool active = a && b && std::abs(a->dot(u) - *b) <= active_tol * (1.0 + std::abs(*b));
    if (!active) return l1_residual_at(u, p, eta, w, nullptr, 0.0);
    const auto res = [&](double mu) { return l1_residual_at(u, p, eta, w, a, mu); };
    double lo = 0.0, hi = 1.0;
    while (res(hi) < res(0.5 * hi) && hi < 1e12) hi *= 2.0;
    for (int i = 0; i < 300; ++i) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (res(m1) < res(m2))
            hi = m2;
        else
            lo = m1;
    }
    return res(0.5 * (lo + hi));
}

}  // namespace oracle
