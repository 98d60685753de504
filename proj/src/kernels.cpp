#include "bilevel/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bilevel::kernels {

namespace {

inline double dot(const double* lhs, const double* rhs, Eigen::Index n) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) s += lhs[j] * rhs[j];
    return s;
}

void check_gemv(const RowMatrix& a, const Vector& x) {
    if (a.cols() != x.size()) throw ContractViolation("gemv: dimension mismatch");
}

void check_gemv_t(const Matrix& a, const Vector& r) {
    if (a.rows() != r.size()) throw ContractViolation("gemv_transposed: dimension mismatch");
}

}  // namespace

namespace serial {

void gemv(const RowMatrix& a, const Vector& x, Vector& out) {
    check_gemv(a, x);
    out.resize(a.rows());
    const Eigen::Index n = a.cols();
    for (Eigen::Index i = 0; i < a.rows(); ++i) out[i] = dot(a.data() + i * n, x.data(), n);
}

void gemv_transposed(const Matrix& a, const Vector& r, Vector& out) {
    check_gemv_t(a, r);
    out.resize(a.cols());
    const Eigen::Index m = a.rows();
    for (Eigen::Index j = 0; j < a.cols(); ++j) out[j] = dot(a.data() + j * m, r.data(), m);
}

}  // namespace serial

namespace parallel {

void gemv(const RowMatrix& a, const Vector& x, Vector& out) {
    check_gemv(a, x);
    out.resize(a.rows());
    const Eigen::Index n = a.cols();
    const Eigen::Index rows = a.rows();
    const double* data = a.data();
    const double* xs = x.data();
    double* ys = out.data();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < rows; ++i) ys[i] = dot(data + i * n, xs, n);
}

void gemv_transposed(const Matrix& a, const Vector& r, Vector& out) {
    check_gemv_t(a, r);
    out.resize(a.cols());
    const Eigen::Index m = a.rows();
    const Eigen::Index cols = a.cols();
    const double* data = a.data();
    const double* rs = r.data();
    double* ys = out.data();
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < cols; ++j) ys[j] = dot(data + j * m, rs, m);
}

}  // namespace parallel

void gemv(const RowMatrix& a, const Vector& x, Vector& out, Backend backend) {
    if (backend == Backend::Parallel)
        parallel::gemv(a, x, out);
    else
        serial::gemv(a, x, out);
}

void gemv_transposed(const Matrix& a, const Vector& r, Vector& out, Backend backend) {
    if (backend == Backend::Parallel)
        parallel::gemv_transposed(a, r, out);
    else
        serial::gemv_transposed(a, r, out);
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace bilevel::kernels
