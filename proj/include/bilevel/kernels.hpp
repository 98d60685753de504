#pragma once

#include <Eigen/Dense>

#include "bilevel/errors.hpp"

namespace bilevel::kernels {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Backend { Serial, Parallel };

// Each output entry is one left-to-right dot product, so both backends
// produce bit-identical results regardless of thread count.

/// out = A x, with A stored row-major.
void gemv(const RowMatrix& a, const Vector& x, Vector& out, Backend backend);

/// out = A^T r, with A stored column-major.
void gemv_transposed(const Matrix& a, const Vector& r, Vector& out, Backend backend);

/// Serial reference kernels. Kept for testing and benchmarking.
namespace serial {
void gemv(const RowMatrix& a, const Vector& x, Vector& out);
void gemv_transposed(const Matrix& a, const Vector& r, Vector& out);
}  // namespace serial

/// OpenMP kernels, one row (or column) per loop iteration.
namespace parallel {
void gemv(const RowMatrix& a, const Vector& x, Vector& out);
void gemv_transposed(const Matrix& a, const Vector& r, Vector& out);
}  // namespace parallel

/// Work size (rows * cols) from which the oracles switch to the OpenMP kernels.
inline constexpr Eigen::Index kParallelThreshold = 1 << 15;

inline Backend backend_for(Eigen::Index rows, Eigen::Index cols) {
    return rows * cols >= kParallelThreshold ? Backend::Parallel : Backend::Serial;
}

/// Number of threads an OpenMP region would use (1 without OpenMP).
int max_threads();

}  // namespace bilevel::kernels
