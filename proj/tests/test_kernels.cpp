#include <doctest.h>

#include <omp.h>

#include "bilevel/kernels.hpp"
#include "bilevel/rng.hpp"

using namespace bilevel;

namespace {

// Naive triple-loop references, independent of the library kernels.
Vector naive_gemv(const Matrix& a, const Vector& x) {
    Vector out = Vector::Zero(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out[i] += a(i, j) * x[j];
    return out;
}

Vector naive_gemv_t(const Matrix& a, const Vector& r) {
    Vector out = Vector::Zero(a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) out[j] += a(i, j) * r[i];
    return out;
}

}  // namespace

TEST_CASE("serial kernels match the naive loops") {
    Pcg32 rng(1);
    for (auto [m, n] : {std::pair<Eigen::Index, Eigen::Index>{1, 1}, {3, 7}, {40, 13}, {257, 129}}) {
        const Matrix a = rng.normal_matrix(m, n);
        const kernels::RowMatrix ar = a;
        const Vector x = rng.normal_vector(n);
        const Vector r = rng.normal_vector(m);
        Vector out;
        kernels::serial::gemv(ar, x, out);
        CHECK((out - naive_gemv(a, x)).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + out.lpNorm<Eigen::Infinity>()));
        kernels::serial::gemv_transposed(a, r, out);
        CHECK((out - naive_gemv_t(a, r)).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + out.lpNorm<Eigen::Infinity>()));
    }
}

TEST_CASE("parallel kernels are bit-identical to serial for any thread count") {
    Pcg32 rng(2);
    const Matrix a = rng.normal_matrix(301, 257);
    const kernels::RowMatrix ar = a;
    const Vector x = rng.normal_vector(257);
    const Vector r = rng.normal_vector(301);
    Vector s1, s2;
    kernels::serial::gemv(ar, x, s1);
    kernels::serial::gemv_transposed(a, r, s2);
    const int saved = omp_get_max_threads();
    for (int threads : {1, 2, 3, 8}) {
        omp_set_num_threads(threads);
        Vector p1, p2;
        kernels::parallel::gemv(ar, x, p1);
        kernels::parallel::gemv_transposed(a, r, p2);
        CHECK(p1 == s1);
        CHECK(p2 == s2);
    }
    omp_set_num_threads(saved);
}

TEST_CASE("backend dispatch follows the work threshold") {
    CHECK(kernels::backend_for(10, 10) == kernels::Backend::Serial);
    CHECK(kernels::backend_for(1 << 8, 1 << 7) == kernels::Backend::Parallel);
    CHECK(kernels::max_threads() >= 1);
}

TEST_CASE("dispatching entry points produce the same numbers on both backends") {
    Pcg32 rng(3);
    const Matrix a = rng.normal_matrix(20, 9);
    const kernels::RowMatrix ar = a;
    const Vector x = rng.normal_vector(9);
    Vector s, p;
    kernels::gemv(ar, x, s, kernels::Backend::Serial);
    kernels::gemv(ar, x, p, kernels::Backend::Parallel);
    CHECK(s == p);
}

TEST_CASE("dimension mismatch is a contract violation") {
    const kernels::RowMatrix a = kernels::RowMatrix::Ones(2, 3);
    Vector out;
    CHECK_THROWS_AS(kernels::gemv(a, Vector::Ones(2), out, kernels::Backend::Serial), ContractViolation);
}
