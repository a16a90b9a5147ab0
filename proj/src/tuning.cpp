#include "semipartm/tuning.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "semipartm/error.hpp"
#include "semipartm/parallel.hpp"
#include "semipartm/random.hpp"

namespace semipartm {

std::vector<std::size_t> assign_folds(std::size_t n_docs, std::size_t folds, std::uint64_t seed) {
  if (folds < 1) fail(Errc::InvalidArgument, "assign_folds: need at least one fold");
  std::vector<std::size_t> order(n_docs);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's shuffle.
  for (std::size_t i = n_docs; i > 1; --i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    std::swap(order[i - 1], order[j]);
  }
  std::vector<std::size_t> fold_of(n_docs);
  for (std::size_t pos = 0; pos < n_docs; ++pos) fold_of[order[pos]] = pos % folds;
  return fold_of;
}

CvResult cross_validate_xi(const Matrix& y, const AuxiliaryTable& z, std::size_t n_topics,
                           const std::vector<double>& grid, const CvOptions& options) {
  if (grid.empty()) fail(Errc::GridEmpty, "cross_validate_xi: candidate grid is empty");
  for (double xi : grid)
    if (!(xi >= 0.0)) fail(Errc::InvalidArgument, "cross_validate_xi: xi candidates must be >= 0");
  const std::size_t n_docs = y.cols();
  if (z.n_docs() != n_docs || z.values.rows() != n_docs) {
    fail(Errc::DimensionMismatch, "cross_validate_xi: corpus has " + std::to_string(n_docs) +
                                      " documents, covariates have " +
                                      std::to_string(z.n_docs()));
  }
  const std::size_t k_folds = options.folds;
  if (k_folds < 2 || k_folds > n_docs) {
    fail(Errc::InvalidArgument, "cross_validate_xi: need 2 <= K <= D, got K = " +
                                    std::to_string(k_folds) + ", D = " + std::to_string(n_docs));
  }

  CvResult result;
  result.grid = grid;
  result.fold_of = assign_folds(n_docs, k_folds, options.seed);

  std::vector<std::vector<std::size_t>> train(k_folds), test(k_folds);
  for (std::size_t f = 0; f < k_folds; ++f) {
    for (std::size_t d = 0; d < n_docs; ++d) {
      const bool in_fold = result.fold_of[d] == f;
      (in_fold != options.paper_literal_folds ? test[f] : train[f]).push_back(d);
    }
    if (train[f].size() < 2 || train[f].size() < n_topics || test[f].empty()) {
      fail(Errc::FoldTooSmall, "cross_validate_xi: fold " + std::to_string(f) + " trains on " +
                                   std::to_string(train[f].size()) + " documents and tests on " +
                                   std::to_string(test[f].size()));
    }
  }

  result.fold_errors = Matrix(grid.size(), k_folds);
  parallel_for(grid.size() * k_folds, options.jobs, [&](std::size_t cell) {
    const std::size_t c = cell / k_folds;
    const std::size_t f = cell % k_folds;
    const Matrix y_train = y.select_cols(train[f]);
    const Matrix y_test = y.select_cols(test[f]);
    NmfOptions nmf = options.nmf;
    nmf.seed = derive_seed(options.seed, {name_tag("cv-nmf"), f});
    const Factorization fit = nmf_fit(y_train, n_topics, grid[c], nmf);
    const TopicRegressor reg =
        fit_regressors(fit.b, select_docs(z, train[f]), options.spline, options.ridge);
    const Matrix b_test = predict_topics(reg, select_docs(z, test[f]));
    result.fold_errors(c, f) = frobenius_dist_sq(y_test, matmul(fit.x, b_test));
  });

  result.mean_errors.resize(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    double s = 0.0;
    for (double e : result.fold_errors.row(c)) s += e;
    result.mean_errors[c] = s / static_cast<double>(k_folds);
  }
  result.chosen_index = static_cast<std::size_t>(
      std::min_element(result.mean_errors.begin(), result.mean_errors.end()) -
      result.mean_errors.begin());
  result.chosen_xi = grid[result.chosen_index];
  return result;
}

}  // namespace semipartm
