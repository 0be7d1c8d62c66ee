#include "doctest.h"

#include <cstring>
#include <vector>

#include "aupipe/kernels.hpp"
#include "aupipe/rng.hpp"

using namespace aupipe;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("parallel kernels match the serial reference bit for bit") {
  // Sizes straddle the internal parallel cutoff so both paths are exercised.
  for (const auto [rows, cols] : {std::pair<std::size_t, std::size_t>{37, 23},
                                  {300, 257},
                                  {1024, 640}}) {
    const std::vector<double> a = random_vector(rows * cols, rows * 1000 + cols);
    const std::vector<double> x = random_vector(cols, 7);
    const std::vector<double> xr = random_vector(rows, 8);
    const std::vector<double> bias = random_vector(rows, 9);

    std::vector<double> serial(rows), parallel(rows);
    kernels::serial::matvec(a.data(), rows, cols, x.data(), serial.data());
    kernels::matvec(a.data(), rows, cols, x.data(), parallel.data());
    CHECK(bitwise_equal(serial, parallel));

    kernels::serial::matvec_bias(a.data(), rows, cols, x.data(), bias.data(), serial.data());
    kernels::matvec_bias(a.data(), rows, cols, x.data(), bias.data(), parallel.data());
    CHECK(bitwise_equal(serial, parallel));

    std::vector<double> acc_serial = bias, acc_parallel = bias;
    kernels::serial::matvec_acc(a.data(), rows, cols, x.data(), acc_serial.data());
    kernels::matvec_acc(a.data(), rows, cols, x.data(), acc_parallel.data());
    CHECK(bitwise_equal(acc_serial, acc_parallel));

    std::vector<double> t_serial(cols, 0.5), t_parallel(cols, 0.5);
    kernels::serial::matvec_t_acc(a.data(), rows, cols, xr.data(), t_serial.data());
    kernels::matvec_t_acc(a.data(), rows, cols, xr.data(), t_parallel.data());
    CHECK(bitwise_equal(t_serial, t_parallel));

    std::vector<double> g_serial = a, g_parallel = a;
    kernels::serial::ger_acc(g_serial.data(), rows, cols, xr.data(), x.data());
    kernels::ger_acc(g_parallel.data(), rows, cols, xr.data(), x.data());
    CHECK(bitwise_equal(g_serial, g_parallel));
  }
}

TEST_CASE("gram and column kernels match serial") {
  for (const auto [n, d] :
       {std::pair<std::size_t, std::size_t>{11, 5}, {500, 40}, {2000, 64}}) {
    const std::vector<double> x = random_vector(n * d, n + d);
    std::vector<double> s_serial(d * d), s_parallel(d * d);
    kernels::serial::gram(x.data(), n, d, s_serial.data());
    kernels::gram(x.data(), n, d, s_parallel.data());
    CHECK(bitwise_equal(s_serial, s_parallel));

    std::vector<double> m_serial(d), m_parallel(d);
    kernels::serial::column_mean(x.data(), n, d, m_serial.data());
    kernels::column_mean(x.data(), n, d, m_parallel.data());
    CHECK(bitwise_equal(m_serial, m_parallel));

    std::vector<double> stddev(d, 2.0);
    std::vector<double> z_serial = x, z_parallel = x;
    kernels::serial::standardize_rows(z_serial.data(), n, d, m_serial.data(), stddev.data());
    kernels::standardize_rows(z_parallel.data(), n, d, m_serial.data(), stddev.data());
    CHECK(bitwise_equal(z_serial, z_parallel));
  }
}

TEST_CASE("gram computes X^T X") {
  // 2x2 by hand: rows (1,2), (3,4).
  const std::vector<double> x = {1, 2, 3, 4};
  std::vector<double> s(4);
  kernels::gram(x.data(), 2, 2, s.data());
  CHECK(s[0] == doctest::Approx(10.0));  // 1*1 + 3*3
  CHECK(s[1] == doctest::Approx(14.0));  // 1*2 + 3*4
  CHECK(s[2] == doctest::Approx(14.0));
  CHECK(s[3] == doctest::Approx(20.0));  // 2*2 + 4*4
}

TEST_CASE("cholesky solves SPD systems") {
  for (const std::size_t d : {std::size_t{3}, std::size_t{48}, std::size_t{160}}) {
    const std::vector<double> g = random_vector(d * d, d);
    std::vector<double> spd(d * d);
    kernels::gram(g.data(), d, d, spd.data());
    for (std::size_t i = 0; i < d; ++i) spd[i * d + i] += double(d);

    // Solve A x = b and check the residual.
    const std::vector<double> x_true = random_vector(d, d + 1);
    std::vector<double> b(d);
    kernels::matvec(spd.data(), d, d, x_true.data(), b.data());

    std::vector<double> a_serial = spd, a_parallel = spd;
    REQUIRE(kernels::serial::cholesky(a_serial.data(), d));
    REQUIRE(kernels::cholesky(a_parallel.data(), d));
    CHECK(bitwise_equal(a_serial, a_parallel));

    std::vector<double> x = b;
    kernels::cholesky_solve(a_parallel.data(), d, x.data());
    for (std::size_t i = 0; i < d; ++i) {
      CHECK(x[i] == doctest::Approx(x_true[i]).epsilon(1e-8));
    }
  }
}

TEST_CASE("cholesky rejects non-positive-definite input") {
  std::vector<double> a = {1.0, 2.0, 2.0, 1.0};  // eigenvalues 3 and -1
  CHECK_FALSE(kernels::serial::cholesky(a.data(), 2));
}
