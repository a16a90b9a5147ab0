#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "semipartm/corpus.hpp"
#include "semipartm/matrix.hpp"

namespace semipartm {

struct SplineBasisSpec {
  int degree = 3;
  // Requested interior knots per continuous covariate, placed at training
  // quantiles. Tied quantiles collapse, so fewer may be used.
  int interior_knots = 5;
  // Covariates with at most this many distinct training values enter the
  // model linearly instead of through a spline.
  int linear_max_distinct = 3;
};

// Clamped knot vector for training values z: (degree + 1) copies of min(z),
// the distinct interior quantiles strictly inside (min, max), then
// (degree + 1) copies of max(z).
std::vector<double> quantile_knots(std::span<const double> z, const SplineBasisSpec& spec);

// n x m B-spline basis (m = knots.size() - degree - 1) by Cox-de Boor
// recursion. Inputs outside [knots[degree], knots[m]] are clamped to that
// interval. Throws Errc::InvalidKnots for decreasing or degenerate knots.
Matrix build_basis(std::span<const double> z, const SplineBasisSpec& spec,
                   std::span<const double> knots);

enum class TermKind { Constant, Linear, Spline };

// How one covariate enters the additive model.
struct CovariateTerm {
  std::string name;
  TermKind kind = TermKind::Spline;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> knots;  // Spline only

  // Design columns contributed: 0, 1, or basis width minus one (the first
  // basis function is dropped since the basis sums to one and the model
  // already has an intercept).
  std::size_t width(int degree) const;
};

// Per-topic additive models b^(k)_d = beta0^(k) + sum_l f_l^(k)(Z_dl).
// coefficients row k = [intercept, term 1 columns..., term p columns...].
struct TopicRegressor {
  SplineBasisSpec spec;
  double ridge = 1e-6;
  std::vector<CovariateTerm> terms;
  Matrix coefficients;

  std::size_t n_topics() const { return coefficients.rows(); }
};

// D x (1 + sum of term widths) design matrix for covariate rows `z`.
Matrix design_matrix(const std::vector<CovariateTerm>& terms, int degree, const Matrix& z);

// Fits every topic (row of b, T x D) independently by ridge least squares on
// the shared design. Throws Errc::DimensionMismatch when b.cols() differs
// from the number of covariate rows.
TopicRegressor fit_regressors(const Matrix& b, const AuxiliaryTable& z,
                              const SplineBasisSpec& spec = {}, double ridge = 1e-6);

// T x D' predicted topic scores, negatives floored at zero. Throws
// Errc::CovariateMismatch if the covariate columns differ from training.
Matrix predict_topics(const TopicRegressor& reg, const AuxiliaryTable& z_new);

}  // namespace semipartm
