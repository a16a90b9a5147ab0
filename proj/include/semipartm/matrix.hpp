#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace semipartm {

// Dense row-major matrix of doubles. Zero-sized dimensions are allowed (an
// empty holdout corpus is a W x 0 matrix).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::vector<double> col(std::size_t j) const;

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  // Copy of the columns at `indices`, in that order.
  Matrix select_cols(std::span<const std::size_t> indices) const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// a * b^T without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

double frobenius_sq(const Matrix& a);
double l1_norm(const Matrix& a);
// Squared Frobenius norm of a - b.
double frobenius_dist_sq(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& a);
// Throws Errc::NonFinite naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& a, const char* what);

struct SvdOptions {
  double tolerance = 1e-10;
  int max_sweeps = 60;
};

// Thin SVD truncated to `rank` components: a ~= u * diag(s) * v, with u of
// shape rows x rank and v of shape rank x cols (rows are right singular
// vectors). Singular values are nonincreasing. Each left singular vector is
// sign-normalized so its largest-magnitude entry is positive.
struct Svd {
  Matrix u;
  std::vector<double> s;
  Matrix v;
};

Svd truncated_svd(const Matrix& a, std::size_t rank, const SvdOptions& options = {});

// argmin ||a*beta - y||^2 + ridge*||beta||^2 via Cholesky on the normal
// equations. Throws Errc::SingularSystem when the system is not positive
// definite.
std::vector<double> solve_least_squares(const Matrix& a, std::span<const double> y,
                                        double ridge);

}  // namespace semipartm
