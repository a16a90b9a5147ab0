#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "semipartm/matrix.hpp"

namespace semipartm {

struct NmfOptions {
  int max_iters = 500;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;
  // Every updated entry is floored here; an exact zero would be absorbing
  // under multiplicative updates.
  double epsilon_floor = 1e-12;
};

// Throws Errc::InvalidArgument unless max_iters >= 1, rel_tol > 0 and
// epsilon_floor > 0.
void validate(const NmfOptions& options);

// Y ~ X B with X (W x T) the dictionary and B (T x D) the topic distribution.
struct Factorization {
  Matrix x;
  Matrix b;
  double xi = 0.0;
  // objective_trace[0] is the objective at initialization, entry i after the
  // i-th update.
  std::vector<double> objective_trace;
  int iterations_run = 0;
  bool converged = false;
};

// ||Y - XB||_F^2 + xi (||X||_1 + ||B||_1)
double nmf_objective(const Matrix& y, const Matrix& x, const Matrix& b, double xi);

struct NmfStep {
  Matrix x;
  Matrix b;
};

// One round of multiplicative updates: X first, then B using the updated X.
//   X_ik <- X_ik (Y B^T)_ik / ((X B B^T)_ik + xi / 2)
//   B_kj <- B_kj (X^T Y)_kj / ((X^T X B)_kj + xi / 2)
// The halved penalty makes each step a descent step for nmf_objective.
NmfStep nmf_step(const Matrix& y, const Matrix& x, const Matrix& b, double xi,
                 double epsilon_floor = 1e-12);

// Seeded uniform(0,1] initialization (X drawn before B), then nmf_step until
// the relative objective decrease falls below rel_tol or max_iters is hit.
// Throws Errc::NonNegativityViolated if Y has a negative entry.
Factorization nmf_fit(const Matrix& y, std::size_t n_topics, double xi,
                      const NmfOptions& options = {});

// Fold-in: B for new documents with the dictionary frozen, running only the
// B update to convergence.
Matrix nmf_transform(const Matrix& y_new, const Matrix& x_fixed, double xi,
                     const NmfOptions& options = {});

}  // namespace semipartm
