#include "semipartm/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "semipartm/error.hpp"

namespace semipartm {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(Errc::DimensionMismatch,
         std::string(op) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
             " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

// Four partial sums break the serial add chain.
double dot(std::span<const double> a, std::span<const double> b) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const std::size_t n = a.size(), n4 = n - n % 4;
  for (std::size_t i = 0; i < n4; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (std::size_t i = n4; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

// Gram-Schmidt completion: replaces the rows of `basis` listed in `missing`
// with unit vectors orthogonal to every other row.
void complete_orthonormal(Matrix& basis, const std::vector<std::size_t>& missing) {
  if (missing.empty()) return;
  std::vector<bool> ready(basis.rows(), true);
  for (std::size_t r : missing) ready[r] = false;
  const std::size_t n = basis.cols();
  std::size_t candidate = 0;
  for (std::size_t r : missing) {
    for (; candidate < n; ++candidate) {
      std::vector<double> v(n, 0.0);
      v[candidate] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t o = 0; o < basis.rows(); ++o) {
          if (!ready[o]) continue;
          double proj = dot(v, basis.row(o));
          auto other = basis.row(o);
          for (std::size_t k = 0; k < n; ++k) v[k] -= proj * other[k];
        }
      }
      double norm = std::sqrt(dot(v, v));
      if (norm > 1e-6) {
        auto out = basis.row(r);
        for (std::size_t k = 0; k < n; ++k) out[k] = v[k] / norm;
        ready[r] = true;
        ++candidate;
        break;
      }
    }
    if (!ready[r]) fail(Errc::ConvergenceFailure, "truncated_svd: cannot complete basis");
  }
}

}  // namespace

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) fail(Errc::DimensionMismatch, "from_rows: ragged rows");
    std::copy(row.begin(), row.end(), m.row(i++).begin());
  }
  return m;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> Matrix::col(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

Matrix Matrix::select_cols(std::span<const std::size_t> indices) const {
  Matrix out(rows_, indices.size());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = 0; k < indices.size(); ++k) out(i, k) = (*this)(i, indices[k]);
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    fail(Errc::DimensionMismatch, "matmul: inner dimensions " + std::to_string(a.cols()) +
                                      " and " + std::to_string(b.rows()));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto src = b.row(k);
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += aik * src[j];
    }
  }
  require_finite(out, "matmul");
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    fail(Errc::DimensionMismatch, "matmul_tn: row counts " + std::to_string(a.rows()) +
                                      " and " + std::to_string(b.rows()));
  }
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto arow = a.row(k);
    auto brow = b.row(k);
    for (std::size_t i = 0; i < arow.size(); ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      auto dst = out.row(i);
      for (std::size_t j = 0; j < brow.size(); ++j) dst[j] += aki * brow[j];
    }
  }
  require_finite(out, "matmul_tn");
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    fail(Errc::DimensionMismatch, "matmul_nt: column counts " + std::to_string(a.cols()) +
                                      " and " + std::to_string(b.cols()));
  }
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = dot(a.row(i), b.row(j));
  }
  require_finite(out, "matmul_nt");
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

double frobenius_sq(const Matrix& a) {
  double acc = 0.0;
  for (double v : a.values()) acc += v * v;
  return acc;
}

double l1_norm(const Matrix& a) {
  double acc = 0.0;
  for (double v : a.values()) acc += std::abs(v);
  return acc;
}

double frobenius_dist_sq(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "frobenius_dist_sq");
  double acc = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    acc += d * d;
  }
  return acc;
}

bool all_finite(const Matrix& a) {
  return std::all_of(a.values().begin(), a.values().end(),
                     [](double v) { return std::isfinite(v); });
}

void require_finite(const Matrix& a, const char* what) {
  if (!all_finite(a)) fail(Errc::NonFinite, std::string(what) + ": non-finite value");
}

Svd truncated_svd(const Matrix& a, std::size_t rank, const SvdOptions& options) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (rank < 1 || rank > std::min(m, n)) {
    fail(Errc::InvalidArgument, "truncated_svd: rank " + std::to_string(rank) +
                                    " outside [1, " + std::to_string(std::min(m, n)) + "]");
  }
  require_finite(a, "truncated_svd");

  // One-sided Jacobi on the columns of the tall orientation. Working vectors
  // are stored as rows so that every rotation touches contiguous memory.
  const bool tall = m >= n;
  Matrix work = tall ? transpose(a) : a;  // q rows of length p
  const std::size_t q = work.rows();
  const std::size_t p = work.cols();
  Matrix rot = Matrix::identity(q);
  // Columns this small are roundoff left in a null direction; rotating them
  // never settles, so they count as zero.
  const double eps = std::numeric_limits<double>::epsilon();
  const double negligible = eps * eps * static_cast<double>(q) * frobenius_sq(a);

  bool converged = false;
  for (int sweep = 0; sweep < options.max_sweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t i = 0; i + 1 < q; ++i) {
      for (std::size_t j = i + 1; j < q; ++j) {
        auto wi = work.row(i);
        auto wj = work.row(j);
        const double alpha = dot(wi, wi);
        const double beta = dot(wj, wj);
        const double gamma = dot(wi, wj);
        if (gamma == 0.0 || alpha <= negligible || beta <= negligible) continue;
        if (std::abs(gamma) <= options.tolerance * std::sqrt(alpha * beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < p; ++k) {
          const double x = wi[k];
          const double y = wj[k];
          wi[k] = c * x - s * y;
          wj[k] = s * x + c * y;
        }
        auto ri = rot.row(i);
        auto rj = rot.row(j);
        for (std::size_t k = 0; k < q; ++k) {
          const double x = ri[k];
          const double y = rj[k];
          ri[k] = c * x - s * y;
          rj[k] = s * x + c * y;
        }
      }
    }
  }
  if (!converged) {
    fail(Errc::ConvergenceFailure,
         "truncated_svd: no convergence in " + std::to_string(options.max_sweeps) + " sweeps");
  }

  std::vector<double> sigma(q);
  for (std::size_t i = 0; i < q; ++i) {
    const double sq = dot(work.row(i), work.row(i));
    sigma[i] = sq <= negligible ? 0.0 : std::sqrt(sq);
  }
  std::vector<std::size_t> order(q);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  // Normalized working vectors: left vectors of the tall orientation.
  Matrix left(rank, p);
  Matrix right(rank, q);
  std::vector<std::size_t> missing;
  Svd out;
  out.s.resize(rank);
  for (std::size_t r = 0; r < rank; ++r) {
    const std::size_t src = order[r];
    out.s[r] = sigma[src];
    auto dst = left.row(r);
    if (sigma[src] > 0.0) {
      auto w = work.row(src);
      for (std::size_t k = 0; k < p; ++k) dst[k] = w[k] / sigma[src];
    } else {
      missing.push_back(r);
    }
    std::copy(rot.row(src).begin(), rot.row(src).end(), right.row(r).begin());
  }
  complete_orthonormal(left, missing);

  // tall: a = left^T diag(s) right; wide: a = right^T diag(s) left.
  out.u = tall ? transpose(left) : transpose(right);
  out.v = tall ? std::move(right) : std::move(left);

  for (std::size_t r = 0; r < rank; ++r) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < m; ++i)
      if (std::abs(out.u(i, r)) > std::abs(out.u(arg, r))) arg = i;
    if (out.u(arg, r) < 0.0) {
      for (std::size_t i = 0; i < m; ++i) out.u(i, r) = -out.u(i, r);
      for (double& v : out.v.row(r)) v = -v;
    }
  }
  return out;
}

std::vector<double> solve_least_squares(const Matrix& a, std::span<const double> y,
                                        double ridge) {
  if (a.rows() != y.size()) {
    fail(Errc::DimensionMismatch, "solve_least_squares: design has " +
                                      std::to_string(a.rows()) + " rows, target has " +
                                      std::to_string(y.size()));
  }
  if (a.rows() == 0) fail(Errc::InvalidArgument, "solve_least_squares: empty design");
  if (!(ridge >= 0.0)) fail(Errc::InvalidArgument, "solve_least_squares: ridge must be >= 0");

  const std::size_t n = a.cols();
  Matrix gram = matmul_tn(a, a);
  std::vector<double> rhs(n, 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto row = a.row(i);
    for (std::size_t k = 0; k < n; ++k) rhs[k] += row[k] * y[i];
  }
  double max_diag = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    gram(k, k) += ridge;
    max_diag = std::max(max_diag, gram(k, k));
  }

  // In-place Cholesky, lower triangle.
  const double threshold = static_cast<double>(n) * 1e-15 * max_diag;
  for (std::size_t j = 0; j < n; ++j) {
    double d = gram(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= gram(j, k) * gram(j, k);
    if (!(d > threshold)) {
      fail(Errc::SingularSystem,
           "solve_least_squares: normal equations singular at column " + std::to_string(j));
    }
    const double ljj = std::sqrt(d);
    gram(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = gram(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= gram(i, k) * gram(j, k);
      gram(i, j) = s / ljj;
    }
  }
  std::vector<double> beta(rhs);
  for (std::size_t i = 0; i < n; ++i) {
    double s = beta[i];
    for (std::size_t k = 0; k < i; ++k) s -= gram(i, k) * beta[k];
    beta[i] = s / gram(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = beta[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= gram(k, i) * beta[k];
    beta[i] = s / gram(i, i);
  }
  for (double v : beta) {
    if (!std::isfinite(v)) fail(Errc::NonFinite, "solve_least_squares: non-finite solution");
  }
  return beta;
}

}  // namespace semipartm
