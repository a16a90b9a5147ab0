#include <doctest.h>

#include "semipartm/nmf.hpp"
#include "support.hpp"

using namespace semipartm;
using support::errc_of;
using support::max_abs_diff;
using support::random_matrix;

namespace {

std::size_t near_zero(const Matrix& m, double threshold) {
  std::size_t n = 0;
  for (double v : m.values())
    if (v <= threshold) ++n;
  return n;
}

double min_entry(const Matrix& m) {
  double lo = m.values().empty() ? 0.0 : m.values()[0];
  for (double v : m.values()) lo = std::min(lo, v);
  return lo;
}

}  // namespace

TEST_CASE("nmf_objective") {
  const Matrix x = Matrix::from_rows({{1, 2}, {0.5, 1}});
  const Matrix b = Matrix::from_rows({{1, 0}, {2, 3}});
  CHECK(nmf_objective(matmul(x, b), x, b, 0.0) == 0.0);
  const Matrix one = Matrix::from_rows({{1}});
  CHECK(nmf_objective(one, one, one, 1.0) == 2.0);
  CHECK(nmf_objective(Matrix::from_rows({{2}}), one, one, 0.0) == 1.0);
  CHECK(errc_of([&] { nmf_objective(one, x, b, 0.0); }) == Errc::DimensionMismatch);
}

TEST_CASE("nmf_step") {
  const Matrix one = Matrix::from_rows({{1}});
  const NmfStep s = nmf_step(Matrix::from_rows({{2}}), one, one, 0.0);
  CHECK(s.x == Matrix::from_rows({{2}}));

  std::mt19937_64 rng(21);
  const Matrix x = random_matrix(4, 3, rng, 0.1, 1.0);
  const Matrix b = random_matrix(3, 5, rng, 0.1, 1.0);
  const Matrix y = matmul(x, b);
  const NmfStep fixed = nmf_step(y, x, b, 0.0);
  CHECK(max_abs_diff(fixed.x, x) <= 1e-12);
  CHECK(max_abs_diff(fixed.b, b) <= 1e-12);

  CHECK(errc_of([&] { nmf_step(y, b, x, 0.0); }) == Errc::DimensionMismatch);
}

TEST_CASE("nmf_step never increases the objective") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t w = 2 + rng() % 6, d = 2 + rng() % 6, t = 1 + rng() % 3;
    const Matrix y = random_matrix(w, d, rng, 0.0, 3.0);
    Matrix x = random_matrix(w, t, rng, 0.01, 1.0);
    Matrix b = random_matrix(t, d, rng, 0.01, 1.0);
    const double xi = (trial % 3 == 0) ? 0.0 : (trial % 3 == 1 ? 1.0 : 3.0);
    for (int it = 0; it < 5; ++it) {
      const double before = nmf_objective(y, x, b, xi);
      NmfStep s = nmf_step(y, x, b, xi);
      const double after = nmf_objective(y, s.x, s.b, xi);
      CHECK(after <= before * (1.0 + 1e-8));
      CHECK(min_entry(s.x) >= 1e-12);
      CHECK(min_entry(s.b) >= 1e-12);
      x = std::move(s.x);
      b = std::move(s.b);
    }
  }
}

TEST_CASE("nmf_fit traces are monotone and floored") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 12; ++trial) {
    const Matrix y = support::random_counts(12, 9, rng, 1.5);
    const double xi = trial % 3 == 0 ? 0.0 : (trial % 3 == 1 ? 1.0 : 3.0);
    NmfOptions opt;
    opt.seed = static_cast<std::uint64_t>(trial);
    opt.max_iters = 200;
    const Factorization f = nmf_fit(y, 3, xi, opt);
    REQUIRE(f.objective_trace.size() == static_cast<std::size_t>(f.iterations_run) + 1);
    for (std::size_t i = 1; i < f.objective_trace.size(); ++i)
      CHECK(f.objective_trace[i] <= f.objective_trace[i - 1] * (1.0 + 1e-8));
    CHECK(min_entry(f.x) >= opt.epsilon_floor);
    CHECK(min_entry(f.b) >= opt.epsilon_floor);
    CHECK(f.x.rows() == 12);
    CHECK(f.b.cols() == 9);
    CHECK(f.xi == xi);
  }
}

TEST_CASE("nmf_fit on degenerate and rank-one inputs") {
  NmfOptions opt;
  const Factorization zero = nmf_fit(Matrix(6, 5), 2, 1.0, opt);
  CHECK(max_abs_diff(zero.x, Matrix(6, 2)) <= 1e-10);
  CHECK(max_abs_diff(zero.b, Matrix(2, 5)) <= 1e-10);
  CHECK(zero.objective_trace.back() <= 1e-9);

  const Matrix u = Matrix::from_rows({{1}, {2}, {0.5}, {3}});
  const Matrix v = Matrix::from_rows({{2, 1, 4, 0.5, 1.5}});
  const Matrix y = matmul(u, v);
  opt.max_iters = 2000;
  opt.rel_tol = 1e-12;
  const Factorization f = nmf_fit(y, 1, 0.0, opt);
  CHECK(frobenius_dist_sq(matmul(f.x, f.b), y) <= 1e-6 * frobenius_sq(y));
}

TEST_CASE("a larger penalty pushes more entries to the floor") {
  std::mt19937_64 rng(24);
  const Matrix y = support::random_counts(50, 30, rng, 1.0);
  NmfOptions opt;
  opt.seed = 5;
  std::size_t previous = 0;
  for (double xi : {0.0, 1.0, 10.0}) {
    const Factorization f = nmf_fit(y, 5, xi, opt);
    const std::size_t zeros = near_zero(f.x, 10 * opt.epsilon_floor) + near_zero(f.b, 10 * opt.epsilon_floor);
    CAPTURE(xi);
    CHECK(zeros >= previous);
    previous = zeros;
  }
  CHECK(previous > 0);
}

TEST_CASE("nmf_fit is deterministic and validates input") {
  std::mt19937_64 rng(25);
  const Matrix y = support::random_counts(10, 8, rng);
  NmfOptions opt;
  opt.seed = 99;
  const Factorization a = nmf_fit(y, 3, 0.5, opt);
  const Factorization b = nmf_fit(y, 3, 0.5, opt);
  CHECK(a.x == b.x);
  CHECK(a.b == b.b);
  CHECK(a.objective_trace == b.objective_trace);
  opt.seed = 100;
  CHECK_FALSE(nmf_fit(y, 3, 0.5, opt).x == a.x);

  Matrix neg = y;
  neg(0, 0) = -1.0;
  CHECK(errc_of([&] { nmf_fit(neg, 2, 0.0); }) == Errc::NonNegativityViolated);
  CHECK(errc_of([&] { nmf_fit(y, 0, 0.0); }) == Errc::InvalidArgument);
  CHECK(errc_of([&] { nmf_fit(y, 9, 0.0); }) == Errc::InvalidArgument);
  NmfOptions bad;
  bad.max_iters = 0;
  CHECK(errc_of([&] { nmf_fit(y, 2, 0.0, bad); }) == Errc::InvalidArgument);
}

TEST_CASE("nmf_transform") {
  NmfOptions opt;
  opt.max_iters = 5000;
  opt.rel_tol = 1e-14;
  const Matrix b = nmf_transform(Matrix::from_rows({{4}}), Matrix::from_rows({{2}}), 0.0, opt);
  CHECK(b(0, 0) == doctest::Approx(2.0).epsilon(1e-6));

  std::mt19937_64 rng(26);
  const Matrix x = random_matrix(8, 2, rng, 0.1, 1.0);
  const Matrix zero = nmf_transform(Matrix(8, 3), x, 0.0, opt);
  CHECK(max_abs_diff(zero, Matrix(2, 3)) <= 1e-10);

  // A training column refolds to its fitted topic column.
  const Matrix y = support::random_counts(15, 12, rng, 3.0);
  NmfOptions fit_opt;
  fit_opt.max_iters = 3000;
  fit_opt.rel_tol = 1e-12;
  const Factorization f = nmf_fit(y, 2, 0.0, fit_opt);
  const std::size_t col[] = {4};
  const Matrix refold = nmf_transform(y.select_cols(col), f.x, 0.0, opt);
  for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(refold(k, 0) - f.b(k, 4)) <= 1e-4);

  CHECK(errc_of([&] { nmf_transform(Matrix(7, 2), x, 0.0); }) == Errc::DimensionMismatch);
}
