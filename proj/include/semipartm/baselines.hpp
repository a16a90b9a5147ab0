#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "semipartm/matrix.hpp"

namespace semipartm {

// ---------------------------------------------------------------------------
// Latent semantic analysis: Y ~ X diag(S) B by truncated SVD.

struct LsaModel {
  Matrix x;               // W x T, orthonormal columns
  std::vector<double> s;  // T singular values, nonincreasing
  Matrix b;               // T x D, orthonormal rows
};

LsaModel lsa_fit(const Matrix& y, std::size_t n_topics);

// Fold-in B_new = diag(S)^-1 X^T Y_new. Throws Errc::SingularValueZero if any
// retained singular value is zero.
Matrix lsa_transform(const Matrix& y_new, const LsaModel& model);

// ---------------------------------------------------------------------------
// Probabilistic LSA (aspect model) fitted by EM. Scores are treated as soft
// counts, so non-integer Y is accepted.

struct PlsaOptions {
  int max_iters = 500;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;
  // Independent seeded restarts; the highest final log-likelihood wins.
  int restarts = 1;
};

struct PlsaModel {
  Matrix p_w_given_t;  // W x T, columns sum to 1
  Matrix p_t_given_d;  // T x D, columns sum to 1
  std::vector<double> log_likelihood_trace;
};

// Log-likelihood sum_{w,d} Y_wd log(P(d) sum_t P(w|t) P(t|d)), P(d) the
// document's share of the total mass.
double plsa_log_likelihood(const Matrix& y, const Matrix& p_w_given_t,
                           const Matrix& p_t_given_d);

// Throws Errc::EmptyCorpus if Y has no mass.
PlsaModel plsa_fit(const Matrix& y, std::size_t n_topics, const PlsaOptions& options = {});

// Fold-in EM with P(w|t) frozen. A document without mass gets the uniform
// mixture.
Matrix plsa_transform(const Matrix& y_new, const PlsaModel& model,
                      const PlsaOptions& options = {});

// ---------------------------------------------------------------------------
// Latent Dirichlet allocation by collapsed Gibbs sampling.

struct LdaOptions {
  // Symmetric Dirichlet priors; alpha <= 0 means 50 / T.
  double alpha = -1.0;
  double beta = 0.01;
  int sweeps = 1000;
  int burn_in = 500;
  // Post-burn-in sweeps between averaged samples.
  int sample_lag = 10;
  std::uint64_t seed = 0;
  // Independent chains; the one with the highest final collapsed
  // log-likelihood is kept.
  int restarts = 1;
};

struct LdaModel {
  Matrix phi;    // T x W, rows sum to 1
  Matrix theta;  // D x T, rows sum to 1
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  double log_likelihood = 0.0;
};

// Throws Errc::NonIntegerCounts unless every entry of Y is a nonnegative
// integer (within 1e-9).
LdaModel lda_fit(const Matrix& y, std::size_t n_topics, const LdaOptions& options = {});

// D' x T document-topic proportions for new documents with phi frozen. An
// empty document gets the prior mean (uniform).
Matrix lda_transform(const Matrix& y_new, const LdaModel& model,
                     const LdaOptions& options = {});

}  // namespace semipartm
