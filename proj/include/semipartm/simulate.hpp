#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "semipartm/corpus.hpp"
#include "semipartm/matrix.hpp"

namespace semipartm {

inline constexpr std::size_t kSimTopics = 10;
inline constexpr std::size_t kSimCovariates = 5;

// One cell of the simulation grid plus replicate identity.
struct ScenarioConfig {
  std::size_t n_docs = 150;
  std::size_t n_words = 500;
  double sparsity = 0.70;
  double misspec = 1.0;
  std::size_t n_topics = kSimTopics;
  double holdout_fraction = 0.25;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
};

// Throws Errc::InvalidArgument for out-of-range fields (n_topics must be 10).
void validate(const ScenarioConfig& config);

// Number of holdout documents: ceil(holdout_fraction * n_docs).
std::size_t holdout_size(const ScenarioConfig& config);

// Seed of one generator component for (config.seed, config.replicate).
std::uint64_t component_seed(const ScenarioConfig& config, std::string_view component);

// D x 5 covariates: Poisson(1), Normal(20, 7), Bernoulli(0.8), Beta(6, 2),
// Beta(10, 2).
Matrix gen_auxiliary(std::size_t n_docs, std::uint64_t seed);

// Hidden topic scores b_0k for one covariate row given per-topic noise terms
// (already multiplied by m). Topics 8-10 use the computed b_03, b_07, b_01.
std::array<double, kSimTopics> topic_means(std::span<const double> z_row,
                                           const std::array<double, kSimTopics>& noise);

struct TopicScores {
  Matrix scores;     // 10 x D, after sparsification and clamping at zero
  Matrix unclamped;  // 10 x D, after sparsification only
  double clamp_rate = 0.0;  // fraction of cells set to zero by the clamp
};

// Per document: b_0k with m * N(0, 1) noise, each cell zeroed independently
// with probability s, negatives clamped to zero.
TopicScores gen_topic_scores(const Matrix& z, double sparsity, double misspec,
                             std::uint64_t seed);

// W x 10 zero-inflated Poisson dictionary: each cell is 0 with probability s,
// otherwise Poisson(100) / 90.
Matrix gen_dictionary(std::size_t n_words, double sparsity, std::uint64_t seed);

// Y_ij ~ Poisson((XB)_ij) independently.
Matrix gen_corpus(const Matrix& x_true, const Matrix& b_true, std::uint64_t seed);

struct SyntheticDataset {
  ScenarioConfig config;
  AuxiliaryTable z_train;
  AuxiliaryTable z_holdout;
  Matrix b_true_train;    // 10 x D
  Matrix b_true_holdout;  // 10 x D_holdout
  Matrix x_true;          // W x 10
  CorpusMatrix y_train;
  CorpusMatrix y_holdout;
  double clamp_rate = 0.0;
};

// Generates D + holdout_size documents from one dictionary and splits them,
// training documents first.
SyntheticDataset run_scenario(const ScenarioConfig& config);

}  // namespace semipartm
