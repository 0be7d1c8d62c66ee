#pragma once

#include <cstddef>

namespace aupipe::kernels {

// Dense kernels behind the training and inference paths. Each kernel exists
// twice: the default entry point parallelizes with OpenMP, and
// kernels::serial holds the plain-loop reference used by the tests and the
// benchmark. Parallel variants assign every output element to exactly one
// thread and keep the per-element summation order identical to the serial
// code, so both variants produce bitwise-identical results.

namespace serial {

/// y[r] = dot(A[r,:], x); A is rows x cols row-major.
void matvec(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);

/// y[r] = dot(A[r,:], x) + b[r].
void matvec_bias(const double* a, std::size_t rows, std::size_t cols, const double* x,
                 const double* b, double* y);

/// y[r] += dot(A[r,:], x).
void matvec_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);

/// y[j] += sum_r A[r*cols+j] * x[r]  (A^T x, accumulated).
void matvec_t_acc(const double* a, std::size_t rows, std::size_t cols, const double* x,
                  double* y);

/// Rank-1 accumulate: A[r*cols+j] += u[r] * v[j].
void ger_acc(double* a, std::size_t rows, std::size_t cols, const double* u, const double* v);

/// s[i*d+j] = sum_r x[r*d+i] * x[r*d+j]; x is n x d row-major, s is d x d (full, symmetric).
void gram(const double* x, std::size_t n, std::size_t d, double* s);

/// mean[j] = (1/n) sum_r x[r*d+j].
void column_mean(const double* x, std::size_t n, std::size_t d, double* mean);

/// In place: x[r*d+j] = (x[r*d+j] - mean[j]) / std[j].
void standardize_rows(double* x, std::size_t n, std::size_t d, const double* mean,
                      const double* stddev);

/// In-place Cholesky of an SPD d x d matrix (lower triangle written, upper left
/// untouched). Returns false if a non-positive pivot is hit.
bool cholesky(double* a, std::size_t d);

/// Solves L L^T x = b in place given the lower factor from cholesky().
void cholesky_solve(const double* l, std::size_t d, double* x);

}  // namespace serial

void matvec(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
void matvec_bias(const double* a, std::size_t rows, std::size_t cols, const double* x,
                 const double* b, double* y);
void matvec_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
void matvec_t_acc(const double* a, std::size_t rows, std::size_t cols, const double* x,
                  double* y);
void ger_acc(double* a, std::size_t rows, std::size_t cols, const double* u, const double* v);
void gram(const double* x, std::size_t n, std::size_t d, double* s);
void column_mean(const double* x, std::size_t n, std::size_t d, double* mean);
void standardize_rows(double* x, std::size_t n, std::size_t d, const double* mean,
                      const double* stddev);
bool cholesky(double* a, std::size_t d);
void cholesky_solve(const double* l, std::size_t d, double* x);

/// Serial dot product. Deliberately not parallelized: splitting one reduction
/// changes the summation order and with it the bits of the result.
double dot(const double* x, const double* y, std::size_t n);

}  // namespace aupipe::kernels
