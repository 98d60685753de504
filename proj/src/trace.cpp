#include "bilevel/trace.hpp"

#include <cmath>

namespace bilevel {

TraceRecord make_record(std::size_t k, double wall_s, double f_val, double g_val, const std::optional<Truth>& truth,
                        double a_k, double A_k) {
    TraceRecord r;
    r.k = k;
    r.wall_s = wall_s;
    r.f_val = f_val;
    r.g_val = g_val;
    if (truth) {
        r.f_gap = f_val - truth->f_star;
        r.abs_f_gap = std::abs(*r.f_gap);
        r.g_gap = g_val - truth->g_star;
    }
    r.a_k = a_k;
    r.A_k = A_k;
    return r;
}

}  // namespace bilevel
