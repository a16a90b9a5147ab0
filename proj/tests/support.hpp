#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>

#include <unistd.h>

#include "semipartm/error.hpp"
#include "semipartm/matrix.hpp"

namespace support {

using semipartm::Matrix;

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                            double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = u(rng);
  return m;
}

inline Matrix random_counts(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                            double mean = 2.0) {
  std::poisson_distribution<int> p(mean);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = p(rng);
  return m;
}

// Triple-loop product, the reference for the optimized kernels.
inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

// Error code thrown by f, or nullopt if it returned normally.
inline std::optional<semipartm::Errc> errc_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const semipartm::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  auto p = std::filesystem::temp_directory_path() /
           ("semipartm_test_" + name + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace support
