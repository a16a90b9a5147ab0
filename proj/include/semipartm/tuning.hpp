#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "semipartm/corpus.hpp"
#include "semipartm/matrix.hpp"
#include "semipartm/nmf.hpp"
#include "semipartm/splinereg.hpp"

namespace semipartm {

inline const std::vector<double> kDefaultXiGrid = {0.0, 0.5, 1.0, 3.0, 10.0};

struct CvOptions {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  // Train on the single fold k and test on the other K - 1 folds instead of
  // the usual orientation.
  bool paper_literal_folds = false;
  NmfOptions nmf;
  SplineBasisSpec spline;
  double ridge = 1e-6;
  unsigned jobs = 1;
};

struct CvResult {
  std::vector<double> grid;
  Matrix fold_errors;  // candidates x folds, E = ||Y_test - X_train B_test||^2
  std::vector<double> mean_errors;
  std::size_t chosen_index = 0;
  double chosen_xi = 0.0;
  std::vector<std::size_t> fold_of;  // fold index per document
};

// Seeded random partition of n_docs documents into `folds` folds whose sizes
// differ by at most one.
std::vector<std::size_t> assign_folds(std::size_t n_docs, std::size_t folds, std::uint64_t seed);

// Chooses the penalty xi from `grid` by K-fold cross-validation of the full
// two-stage pipeline: factorize the training documents, regress their topic
// scores on the training covariates, predict the held-out documents' topic
// scores from their covariates, and score the reconstruction against the
// held-out counts. Ties go to the earliest candidate.
//
// Throws Errc::GridEmpty for an empty grid, Errc::InvalidArgument unless
// 2 <= K <= D, and Errc::FoldTooSmall when a training split has fewer than
// two documents or fewer documents than topics.
CvResult cross_validate_xi(const Matrix& y, const AuxiliaryTable& z, std::size_t n_topics,
                           const std::vector<double>& grid, const CvOptions& options = {});

}  // namespace semipartm
