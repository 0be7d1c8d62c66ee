// Timing comparison of the serial reference kernels against the OpenMP
// variants, with a bitwise equality check on every result. Run with --quick
// for a small smoke configuration.

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "aupipe/kernels.hpp"
#include "aupipe/rng.hpp"

using namespace aupipe;

namespace {

double now_seconds() {
#ifdef _OPENMP
  return omp_get_wtime();
#else
  return static_cast<double>(clock()) / CLOCKS_PER_SEC;
#endif
}

std::vector<double> random_vector(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_seconds();
    fn();
    best = std::min(best, now_seconds() - t0);
  }
  return best;
}

void report(const char* name, const std::string& shape, double serial_s, double parallel_s,
            bool equal) {
  std::printf("%-16s %-18s serial %9.3f ms   openmp %9.3f ms   speedup %5.2fx   %s\n", name,
              shape.c_str(), serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s,
              equal ? "bitwise-equal" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) quick = true;
  }
  const int reps = quick ? 2 : 5;
  Rng rng(42);
  int mismatches = 0;

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP disabled)\n");
#endif

  {  // matvec
    const std::size_t rows = quick ? 256 : 2048;
    const std::size_t cols = quick ? 256 : 2048;
    const std::vector<double> a = random_vector(rows * cols, rng);
    const std::vector<double> x = random_vector(cols, rng);
    std::vector<double> y_serial(rows), y_parallel(rows);
    const double ts = time_best_of(
        reps, [&] { kernels::serial::matvec(a.data(), rows, cols, x.data(), y_serial.data()); });
    const double tp = time_best_of(
        reps, [&] { kernels::matvec(a.data(), rows, cols, x.data(), y_parallel.data()); });
    const bool equal = bitwise_equal(y_serial, y_parallel);
    mismatches += equal ? 0 : 1;
    report("matvec", std::to_string(rows) + "x" + std::to_string(cols), ts, tp, equal);
  }

  {  // gram (the LDA scatter kernel)
    const std::size_t n = quick ? 512 : 4096;
    const std::size_t d = quick ? 64 : 256;
    const std::vector<double> x = random_vector(n * d, rng);
    std::vector<double> s_serial(d * d), s_parallel(d * d);
    const double ts =
        time_best_of(reps, [&] { kernels::serial::gram(x.data(), n, d, s_serial.data()); });
    const double tp = time_best_of(reps, [&] { kernels::gram(x.data(), n, d, s_parallel.data()); });
    const bool equal = bitwise_equal(s_serial, s_parallel);
    mismatches += equal ? 0 : 1;
    report("gram", std::to_string(n) + "x" + std::to_string(d), ts, tp, equal);
  }

  {  // standardize_rows
    const std::size_t n = quick ? 2048 : 65536;
    const std::size_t d = quick ? 64 : 512;
    const std::vector<double> base = random_vector(n * d, rng);
    std::vector<double> mean = random_vector(d, rng);
    std::vector<double> stddev(d, 1.25);
    std::vector<double> x_serial = base, x_parallel = base;
    const double ts = time_best_of(reps, [&] {
      x_serial = base;
      kernels::serial::standardize_rows(x_serial.data(), n, d, mean.data(), stddev.data());
    });
    const double tp = time_best_of(reps, [&] {
      x_parallel = base;
      kernels::standardize_rows(x_parallel.data(), n, d, mean.data(), stddev.data());
    });
    const bool equal = bitwise_equal(x_serial, x_parallel);
    mismatches += equal ? 0 : 1;
    report("standardize", std::to_string(n) + "x" + std::to_string(d), ts, tp, equal);
  }

  {  // cholesky
    const std::size_t d = quick ? 128 : 768;
    const std::vector<double> g = random_vector(d * d, rng);
    // SPD: G G^T + d I.
    std::vector<double> spd(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += g[i * d + k] * g[j * d + k];
        spd[i * d + j] = acc + (i == j ? static_cast<double>(d) : 0.0);
      }
    }
    std::vector<double> a_serial(d * d), a_parallel(d * d);
    const double ts = time_best_of(reps, [&] {
      a_serial = spd;
      kernels::serial::cholesky(a_serial.data(), d);
    });
    const double tp = time_best_of(reps, [&] {
      a_parallel = spd;
      kernels::cholesky(a_parallel.data(), d);
    });
    const bool equal = bitwise_equal(a_serial, a_parallel);
    mismatches += equal ? 0 : 1;
    report("cholesky", std::to_string(d) + "x" + std::to_string(d), ts, tp, equal);
  }

  if (mismatches != 0) {
    std::fprintf(stderr, "%d kernel(s) disagreed with the serial reference\n", mismatches);
    return 1;
  }
  return 0;
}
