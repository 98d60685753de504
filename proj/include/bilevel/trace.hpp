#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bilevel/oracles.hpp"

namespace bilevel {

/// One row of an iterate trace.
struct TraceRecord {
    std::size_t k = 0;
    double wall_s = 0.0;
    double f_val = 0.0;
    double g_val = 0.0;
    std::optional<double> f_gap;
    std::optional<double> abs_f_gap;
    std::optional<double> g_gap;
    double a_k = 0.0;
    double A_k = 0.0;
};

using TraceObserver = std::function<void(const TraceRecord&)>;

struct SolveResult {
    std::string solver;
    Vector x;
    std::vector<TraceRecord> trace;
};

/// Fills values and gaps for a point; gaps only when truth is known.
TraceRecord make_record(std::size_t k, double wall_s, double f_val, double g_val, const std::optional<Truth>& truth,
                        double a_k, double A_k);

class WallClock {
public:
    WallClock() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace bilevel
