#include "semipartm/splinereg.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "semipartm/error.hpp"

namespace semipartm {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double prob) {
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void check_knots(std::span<const double> knots, int degree) {
  const auto d = static_cast<std::size_t>(degree);
  if (degree < 1) fail(Errc::InvalidKnots, "spline degree must be >= 1");
  if (knots.size() < 2 * d + 2) {
    fail(Errc::InvalidKnots, "need at least " + std::to_string(2 * d + 2) + " knots, got " +
                                 std::to_string(knots.size()));
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i] >= knots[i - 1])) fail(Errc::InvalidKnots, "knots must be nondecreasing");
  }
  const std::size_t m = knots.size() - d - 1;
  if (!(knots[d] < knots[m])) fail(Errc::InvalidKnots, "knot domain is empty");
}

// Nonzero basis functions N_{span-degree..span} at x (NURBS book A2.2).
void basis_funs(std::size_t span, double x, int degree, std::span<const double> t,
                std::vector<double>& out) {
  const auto p = static_cast<std::size_t>(degree);
  std::vector<double> left(p + 1), right(p + 1);
  out.assign(p + 1, 0.0);
  out[0] = 1.0;
  for (std::size_t j = 1; j <= p; ++j) {
    left[j] = x - t[span + 1 - j];
    right[j] = t[span + j] - x;
    double saved = 0.0;
    for (std::size_t r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom == 0.0 ? 0.0 : out[r] / denom;
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

}  // namespace

std::vector<double> quantile_knots(std::span<const double> z, const SplineBasisSpec& spec) {
  if (z.empty()) fail(Errc::InvalidKnots, "quantile_knots: no training values");
  std::vector<double> sorted(z.begin(), z.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  std::vector<double> knots(static_cast<std::size_t>(spec.degree) + 1, lo);
  std::set<double> interior;
  for (int i = 1; i <= spec.interior_knots; ++i) {
    const double q = quantile_sorted(sorted, static_cast<double>(i) / (spec.interior_knots + 1));
    if (q > lo && q < hi) interior.insert(q);
  }
  knots.insert(knots.end(), interior.begin(), interior.end());
  knots.insert(knots.end(), static_cast<std::size_t>(spec.degree) + 1, hi);
  return knots;
}

Matrix build_basis(std::span<const double> z, const SplineBasisSpec& spec,
                   std::span<const double> knots) {
  check_knots(knots, spec.degree);
  const auto p = static_cast<std::size_t>(spec.degree);
  const std::size_t m = knots.size() - p - 1;
  const double lo = knots[p];
  const double hi = knots[m];
  Matrix out(z.size(), m);
  std::vector<double> local;
  for (std::size_t r = 0; r < z.size(); ++r) {
    const double x = std::clamp(z[r], lo, hi);
    // Last span with knots[span] <= x < knots[span + 1]; the right end
    // belongs to the last nonempty span.
    std::size_t span = p;
    for (std::size_t i = p; i < m; ++i) {
      if (knots[i] < knots[i + 1] && knots[i] <= x) span = i;
    }
    basis_funs(span, x, spec.degree, knots, local);
    for (std::size_t j = 0; j <= p; ++j) out(r, span - p + j) = local[j];
  }
  return out;
}

std::size_t CovariateTerm::width(int degree) const {
  switch (kind) {
    case TermKind::Constant: return 0;
    case TermKind::Linear: return 1;
    case TermKind::Spline: return knots.size() - static_cast<std::size_t>(degree) - 2;
  }
  return 0;
}

Matrix design_matrix(const std::vector<CovariateTerm>& terms, int degree, const Matrix& z) {
  if (z.cols() != terms.size()) {
    fail(Errc::CovariateMismatch, "design_matrix: " + std::to_string(z.cols()) +
                                      " covariates, model expects " +
                                      std::to_string(terms.size()));
  }
  std::size_t width = 1;
  for (const auto& t : terms) width += t.width(degree);
  Matrix out(z.rows(), width);
  for (std::size_t r = 0; r < z.rows(); ++r) out(r, 0) = 1.0;
  std::size_t col = 1;
  SplineBasisSpec spec;
  spec.degree = degree;
  for (std::size_t l = 0; l < terms.size(); ++l) {
    const auto& term = terms[l];
    if (term.kind == TermKind::Linear) {
      for (std::size_t r = 0; r < z.rows(); ++r) out(r, col) = std::clamp(z(r, l), term.lo, term.hi);
      ++col;
    } else if (term.kind == TermKind::Spline) {
      const auto values = z.col(l);
      const Matrix basis = build_basis(values, spec, term.knots);
      for (std::size_t r = 0; r < z.rows(); ++r)
        for (std::size_t j = 1; j < basis.cols(); ++j) out(r, col + j - 1) = basis(r, j);
      col += basis.cols() - 1;
    }
  }
  return out;
}

TopicRegressor fit_regressors(const Matrix& b, const AuxiliaryTable& z,
                              const SplineBasisSpec& spec, double ridge) {
  if (b.cols() != z.n_docs() || z.values.rows() != z.n_docs()) {
    fail(Errc::DimensionMismatch, "fit_regressors: topic matrix has " + std::to_string(b.cols()) +
                                      " documents, covariates have " +
                                      std::to_string(z.values.rows()));
  }
  if (z.n_docs() == 0) fail(Errc::DimensionMismatch, "fit_regressors: no documents");
  if (spec.degree < 1 || spec.interior_knots < 0)
    fail(Errc::InvalidArgument, "fit_regressors: invalid basis spec");
  if (!(ridge >= 0.0)) fail(Errc::InvalidArgument, "fit_regressors: ridge must be >= 0");

  TopicRegressor reg;
  reg.spec = spec;
  reg.ridge = ridge;
  for (std::size_t l = 0; l < z.n_covariates(); ++l) {
    const auto values = z.values.col(l);
    CovariateTerm term;
    term.name = z.columns[l];
    term.lo = *std::min_element(values.begin(), values.end());
    term.hi = *std::max_element(values.begin(), values.end());
    const std::set<double> distinct(values.begin(), values.end());
    if (distinct.size() == 1) {
      term.kind = TermKind::Constant;
    } else if (distinct.size() <= static_cast<std::size_t>(spec.linear_max_distinct)) {
      term.kind = TermKind::Linear;
    } else {
      term.kind = TermKind::Spline;
      term.knots = quantile_knots(values, spec);
    }
    reg.terms.push_back(std::move(term));
  }

  const Matrix design = design_matrix(reg.terms, spec.degree, z.values);
  reg.coefficients = Matrix(b.rows(), design.cols());
  for (std::size_t k = 0; k < b.rows(); ++k) {
    const auto beta = solve_least_squares(design, b.row(k), ridge);
    std::copy(beta.begin(), beta.end(), reg.coefficients.row(k).begin());
  }
  return reg;
}

Matrix predict_topics(const TopicRegressor& reg, const AuxiliaryTable& z_new) {
  if (z_new.n_covariates() != reg.terms.size() || z_new.values.cols() != reg.terms.size()) {
    fail(Errc::CovariateMismatch, "predict_topics: " + std::to_string(z_new.n_covariates()) +
                                      " covariates, model expects " +
                                      std::to_string(reg.terms.size()));
  }
  for (std::size_t l = 0; l < reg.terms.size(); ++l) {
    if (z_new.columns[l] != reg.terms[l].name) {
      fail(Errc::CovariateMismatch, "predict_topics: covariate " + std::to_string(l) + " is '" +
                                        z_new.columns[l] + "', model expects '" +
                                        reg.terms[l].name + "'");
    }
  }
  const Matrix design = design_matrix(reg.terms, reg.spec.degree, z_new.values);
  Matrix out = matmul_nt(reg.coefficients, design);
  for (double& v : out.values()) v = std::max(v, 0.0);
  return out;
}

}  // namespace semipartm
