#include "aupipe/kernels.hpp"

#include <cmath>

namespace aupipe::kernels {

// Work below this many multiply-accumulates is not worth a thread team.
static constexpr std::size_t kParallelCutoff = 64 * 1024;

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

namespace serial {

void matvec(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = kernels::dot(a + r * cols, x, cols);
}

void matvec_bias(const double* a, std::size_t rows, std::size_t cols, const double* x,
                 const double* b, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = kernels::dot(a + r * cols, x, cols) + b[r];
}

void matvec_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += kernels::dot(a + r * cols, x, cols);
}

void matvec_t_acc(const double* a, std::size_t rows, std::size_t cols, const double* x,
                  double* y) {
  for (std::size_t j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) acc += a[r * cols + j] * x[r];
    y[j] += acc;
  }
}

void ger_acc(double* a, std::size_t rows, std::size_t cols, const double* u, const double* v) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = a + r * cols;
    const double ur = u[r];
    for (std::size_t j = 0; j < cols; ++j) row[j] += ur * v[j];
  }
}

void gram(const double* x, std::size_t n, std::size_t d, double* s) {
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < n; ++r) acc += x[r * d + i] * x[r * d + j];
      s[i * d + j] = acc;
      s[j * d + i] = acc;
    }
  }
}

void column_mean(const double* x, std::size_t n, std::size_t d, double* mean) {
  for (std::size_t j = 0; j < d; ++j) {
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) acc += x[r * d + j];
    mean[j] = acc / static_cast<double>(n);
  }
}

void standardize_rows(double* x, std::size_t n, std::size_t d, const double* mean,
                      const double* stddev) {
  for (std::size_t r = 0; r < n; ++r) {
    double* row = x + r * d;
    for (std::size_t j = 0; j < d; ++j) row[j] = (row[j] - mean[j]) / stddev[j];
  }
}

bool cholesky(double* a, std::size_t d) {
  // Right-looking: finish column k, then update the trailing columns.
  for (std::size_t k = 0; k < d; ++k) {
    const double pivot = a[k * d + k];
    if (!(pivot > 0.0)) return false;
    const double lkk = std::sqrt(pivot);
    a[k * d + k] = lkk;
    for (std::size_t i = k + 1; i < d; ++i) a[i * d + k] /= lkk;
    for (std::size_t j = k + 1; j < d; ++j) {
      const double ljk = a[j * d + k];
      for (std::size_t i = j; i < d; ++i) a[i * d + j] -= a[i * d + k] * ljk;
    }
  }
  return true;
}

void cholesky_solve(const double* l, std::size_t d, double* x) {
  for (std::size_t i = 0; i < d; ++i) {
    double acc = x[i];
    for (std::size_t j = 0; j < i; ++j) acc -= l[i * d + j] * x[j];
    x[i] = acc / l[i * d + i];
  }
  for (std::size_t ii = d; ii-- > 0;) {
    double acc = x[ii];
    for (std::size_t j = ii + 1; j < d; ++j) acc -= l[j * d + ii] * x[j];
    x[ii] = acc / l[ii * d + ii];
  }
}

}  // namespace serial

void matvec(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  if (rows * cols < kParallelCutoff) {
    serial::matvec(a, rows, cols, x, y);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::size_t r = 0; r < rows; ++r) y[r] = kernels::dot(a + r * cols, x, cols);
}

void matvec_bias(const double* a, std::size_t rows, std::size_t cols, const double* x,
                 const double* b, double* y) {
  if (rows * cols < kParallelCutoff) {
    serial::matvec_bias(a, rows, cols, x, b, y);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::size_t r = 0; r < rows; ++r) y[r] = kernels::dot(a + r * cols, x, cols) + b[r];
}

void matvec_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  if (rows * cols < kParallelCutoff) {
    serial::matvec_acc(a, rows, cols, x, y);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::size_t r = 0; r < rows; ++r) y[r] += kernels::dot(a + r * cols, x, cols);
}

void matvec_t_acc(const double* a, std::size_t rows, std::size_t cols, const double* x,
                  double* y) {
  if (rows * cols < kParallelCutoff) {
    serial::matvec_t_acc(a, rows, cols, x, y);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) acc += a[r * cols + j] * x[r];
    y[j] += acc;
  }
}

void ger_acc(double* a, std::size_t rows, std::size_t cols, const double* u, const double* v) {
  if (rows * cols < kParallelCutoff) {
    serial::ger_acc(a, rows, cols, u, v);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = a + r * cols;
    const double ur = u[r];
    for (std::size_t j = 0; j < cols; ++j) row[j] += ur * v[j];
  }
}

void gram(const double* x, std::size_t n, std::size_t d, double* s) {
  if (n * d * d < kParallelCutoff) {
    serial::gram(x, n, d, s);
    return;
  }
  // Each (i, j) entry is owned by one thread and summed in row order, so the
  // result matches the serial kernel bit for bit. dynamic schedule balances
  // the triangle.
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < n; ++r) acc += x[r * d + i] * x[r * d + j];
      s[i * d + j] = acc;
      s[j * d + i] = acc;
    }
  }
}

void column_mean(const double* x, std::size_t n, std::size_t d, double* mean) {
  if (n * d < kParallelCutoff) {
    serial::column_mean(x, n, d, mean);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < d; ++j) {
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) acc += x[r * d + j];
    mean[j] = acc / static_cast<double>(n);
  }
}

void standardize_rows(double* x, std::size_t n, std::size_t d, const double* mean,
                      const double* stddev) {
  if (n * d < kParallelCutoff) {
    serial::standardize_rows(x, n, d, mean, stddev);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::size_t r = 0; r < n; ++r) {
    double* row = x + r * d;
    for (std::size_t j = 0; j < d; ++j) row[j] = (row[j] - mean[j]) / stddev[j];
  }
}

bool cholesky(double* a, std::size_t d) {
  if (d * d * d < kParallelCutoff) return serial::cholesky(a, d);
  for (std::size_t k = 0; k < d; ++k) {
    const double pivot = a[k * d + k];
    if (!(pivot > 0.0)) return false;
    const double lkk = std::sqrt(pivot);
    a[k * d + k] = lkk;
    for (std::size_t i = k + 1; i < d; ++i) a[i * d + k] /= lkk;
    // Trailing update: column j only reads columns k and j, so columns can be
    // updated concurrently without changing any per-element order. The tail
    // steps are too small to be worth a team.
#pragma omp parallel for schedule(dynamic, 16) if (d - k > 128)
    for (std::size_t j = k + 1; j < d; ++j) {
      const double ljk = a[j * d + k];
      for (std::size_t i = j; i < d; ++i) a[i * d + j] -= a[i * d + k] * ljk;
    }
  }
  return true;
}

void cholesky_solve(const double* l, std::size_t d, double* x) {
  // Triangular solves are O(d^2) and inherently sequential across rows.
  serial::cholesky_solve(l, d, x);
}

}  // namespace aupipe::kernels
