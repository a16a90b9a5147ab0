#include "semipartm/nmf.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "semipartm/error.hpp"
#include "semipartm/random.hpp"

namespace semipartm {

namespace {

void require_nonnegative(const Matrix& m, const char* what) {
  for (double v : m.values()) {
    if (v < 0.0) fail(Errc::NonNegativityViolated, std::string(what) + " has a negative entry");
  }
}

void require_conformable(const Matrix& y, const Matrix& x, const Matrix& b, const char* op) {
  if (x.rows() != y.rows() || b.cols() != y.cols() || x.cols() != b.rows()) {
    fail(Errc::DimensionMismatch,
         std::string(op) + ": Y " + std::to_string(y.rows()) + "x" + std::to_string(y.cols()) +
             ", X " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) + ", B " +
             std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

double inner(const Matrix& a, const Matrix& b) {
  double acc = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  return acc;
}

// target <- max(target * num / (den + xi / 2), floor), elementwise. The
// squared loss has gradient 2 (den - num) and the L1 term xi, so xi / 2 is the
// step that never increases ||Y - XB||^2 + xi (|X| + |B|).
void multiplicative_update(Matrix& target, const Matrix& num, const Matrix& den, double xi,
                           double floor) {
  const double shift = 0.5 * xi;
  auto t = target.values();
  auto n = num.values();
  auto d = den.values();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double denom = d[i] + shift;
    if (denom > 0.0) t[i] = std::max(t[i] * n[i] / denom, floor);
  }
}

Matrix random_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = uniform_open_closed(rng);
  return m;
}

// Nonzeros of a matrix by row, so that products with Y skip its zeros without
// branching on them.
struct SparseRows {
  std::size_t cols = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> index;
  std::vector<double> value;

  explicit SparseRows(const Matrix& m) : cols(m.cols()) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const auto r = m.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) {
        if (r[j] == 0.0) continue;
        index.push_back(j);
        value.push_back(r[j]);
      }
      offsets.push_back(index.size());
    }
  }

  std::size_t rows() const { return offsets.size() - 1; }

  // this * b, accumulating in the same order as a dense row-by-row product.
  Matrix times(const Matrix& b) const {
    Matrix out(rows(), b.cols());
    const std::size_t n = b.cols();
    for (std::size_t i = 0; i < rows(); ++i) {
      double* dst = out.row(i).data();
      for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) {
        const double v = value[p];
        const double* src = b.row(index[p]).data();
        for (std::size_t j = 0; j < n; ++j) dst[j] += v * src[j];
      }
    }
    return out;
  }
};

// One multiplicative-update round. Both products with Y are formed as
// (sparse Y) x (dense factor). The objective after the round comes from
// products already computed:
//   ||Y||^2 - 2 <X^T Y, B> + <X^T X, B B^T> + xi (|X| + |B|).
struct UpdateRound {
  SparseRows y;
  SparseRows yt;
  double y_norm_sq;

  explicit UpdateRound(const Matrix& y_)
      : y(y_), yt(transpose(y_)), y_norm_sq(frobenius_sq(y_)) {}

  double run(Matrix& x, Matrix& b, double xi, double floor) const {
    Matrix bbt = matmul_nt(b, b);
    Matrix ybt = y.times(transpose(b));
    Matrix xbbt = matmul(x, bbt);
    multiplicative_update(x, ybt, xbbt, xi, floor);

    Matrix xty = transpose(yt.times(x));
    Matrix xtx = matmul_tn(x, x);
    Matrix xtxb = matmul(xtx, b);
    multiplicative_update(b, xty, xtxb, xi, floor);

    Matrix bbt_new = matmul_nt(b, b);
    const double fit = y_norm_sq - 2.0 * inner(xty, b) + inner(xtx, bbt_new);
    return std::max(fit, 0.0) + xi * (l1_norm(x) + l1_norm(b));
  }
};

}  // namespace

void validate(const NmfOptions& options) {
  if (options.max_iters < 1) fail(Errc::InvalidArgument, "nmf: max_iters must be >= 1");
  if (!(options.rel_tol > 0.0)) fail(Errc::InvalidArgument, "nmf: rel_tol must be > 0");
  if (!(options.epsilon_floor > 0.0))
    fail(Errc::InvalidArgument, "nmf: epsilon_floor must be > 0");
}

double nmf_objective(const Matrix& y, const Matrix& x, const Matrix& b, double xi) {
  require_conformable(y, x, b, "nmf_objective");
  return frobenius_dist_sq(y, matmul(x, b)) + xi * (l1_norm(x) + l1_norm(b));
}

NmfStep nmf_step(const Matrix& y, const Matrix& x, const Matrix& b, double xi,
                 double epsilon_floor) {
  require_conformable(y, x, b, "nmf_step");
  NmfStep out{x, b};
  UpdateRound(y).run(out.x, out.b, xi, epsilon_floor);
  return out;
}

Factorization nmf_fit(const Matrix& y, std::size_t n_topics, double xi,
                      const NmfOptions& options) {
  validate(options);
  require_nonnegative(y, "nmf_fit: Y");
  require_finite(y, "nmf_fit: Y");
  if (!(xi >= 0.0)) fail(Errc::InvalidArgument, "nmf_fit: xi must be >= 0");
  if (n_topics < 1 || n_topics > std::min(y.rows(), y.cols())) {
    fail(Errc::InvalidArgument, "nmf_fit: topic count " + std::to_string(n_topics) +
                                    " outside [1, min(W, D)]");
  }

  Rng rng(options.seed);
  Factorization f;
  f.xi = xi;
  f.x = random_uniform(y.rows(), n_topics, rng);
  f.b = random_uniform(n_topics, y.cols(), rng);
  f.objective_trace.push_back(nmf_objective(y, f.x, f.b, xi));

  const UpdateRound round(y);
  for (int it = 0; it < options.max_iters; ++it) {
    const double prev = f.objective_trace.back();
    const double cur = round.run(f.x, f.b, xi, options.epsilon_floor);
    f.objective_trace.push_back(cur);
    f.iterations_run = it + 1;
    if (prev <= 0.0 || std::abs(prev - cur) < options.rel_tol * prev) {
      f.converged = true;
      break;
    }
  }
  return f;
}

Matrix nmf_transform(const Matrix& y_new, const Matrix& x_fixed, double xi,
                     const NmfOptions& options) {
  validate(options);
  if (y_new.rows() != x_fixed.rows()) {
    fail(Errc::DimensionMismatch, "nmf_transform: Y has " + std::to_string(y_new.rows()) +
                                      " rows, dictionary has " + std::to_string(x_fixed.rows()));
  }
  require_nonnegative(y_new, "nmf_transform: Y");
  require_finite(y_new, "nmf_transform: Y");

  Rng rng(options.seed);
  Matrix b = random_uniform(x_fixed.cols(), y_new.cols(), rng);
  if (y_new.cols() == 0) return b;

  const Matrix xty = matmul_tn(x_fixed, y_new);
  const Matrix xtx = matmul_tn(x_fixed, x_fixed);
  const double y_norm_sq = frobenius_sq(y_new);
  // B-subproblem objective; the constant xi |X| term is omitted.
  auto objective = [&](const Matrix& bm) {
    const double fit = y_norm_sq - 2.0 * inner(xty, bm) + inner(xtx, matmul_nt(bm, bm));
    return std::max(fit, 0.0) + xi * l1_norm(bm);
  };
  double prev = objective(b);
  for (int it = 0; it < options.max_iters; ++it) {
    multiplicative_update(b, xty, matmul(xtx, b), xi, options.epsilon_floor);
    const double cur = objective(b);
    if (prev <= 0.0 || std::abs(prev - cur) < options.rel_tol * prev) break;
    prev = cur;
  }
  return b;
}

}  // namespace semipartm
