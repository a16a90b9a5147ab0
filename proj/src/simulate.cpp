#include "semipartm/simulate.hpp"

#include <cmath>
#include <random>
#include <string>

#include "semipartm/error.hpp"
#include "semipartm/random.hpp"

namespace semipartm {

namespace {

double draw_beta(double a, double b, Rng& rng) {
  const double x = std::gamma_distribution<double>(a, 1.0)(rng);
  const double y = std::gamma_distribution<double>(b, 1.0)(rng);
  return x / (x + y);
}

double draw_poisson(double mean, Rng& rng) {
  if (!(mean > 0.0)) return 0.0;
  return static_cast<double>(std::poisson_distribution<long long>(mean)(rng));
}

std::vector<std::string> numbered(std::string_view prefix, std::size_t from, std::size_t count) {
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(std::string(prefix) + std::to_string(from + i));
  return out;
}

}  // namespace

void validate(const ScenarioConfig& c) {
  if (c.n_docs < 1) fail(Errc::InvalidArgument, "scenario: n_docs must be >= 1");
  if (c.n_words < 1) fail(Errc::InvalidArgument, "scenario: n_words must be >= 1");
  if (!(c.sparsity >= 0.0 && c.sparsity <= 1.0))
    fail(Errc::InvalidArgument, "scenario: sparsity must lie in [0, 1]");
  if (!(c.misspec >= 0.0) || !std::isfinite(c.misspec))
    fail(Errc::InvalidArgument, "scenario: misspecification multiplier must be >= 0");
  if (c.n_topics != kSimTopics)
    fail(Errc::InvalidArgument, "scenario: the generator defines exactly 10 topics");
  if (!(c.holdout_fraction >= 0.0) || !std::isfinite(c.holdout_fraction))
    fail(Errc::InvalidArgument, "scenario: holdout_fraction must be >= 0");
}

std::size_t holdout_size(const ScenarioConfig& c) {
  return static_cast<std::size_t>(std::ceil(c.holdout_fraction * static_cast<double>(c.n_docs) - 1e-9));
}

std::uint64_t component_seed(const ScenarioConfig& c, std::string_view component) {
  return derive_seed(c.seed, {c.replicate, name_tag(component)});
}

Matrix gen_auxiliary(std::size_t n_docs, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> age(20.0, 7.0);
  std::bernoulli_distribution channels(0.8);
  Matrix z(n_docs, kSimCovariates);
  for (std::size_t d = 0; d < n_docs; ++d) {
    z(d, 0) = draw_poisson(1.0, rng);
    z(d, 1) = age(rng);
    z(d, 2) = channels(rng) ? 1.0 : 0.0;
    z(d, 3) = draw_beta(6.0, 2.0, rng);
    z(d, 4) = draw_beta(10.0, 2.0, rng);
  }
  return z;
}

std::array<double, kSimTopics> topic_means(std::span<const double> z,
                                           const std::array<double, kSimTopics>& e) {
  if (z.size() != kSimCovariates) {
    fail(Errc::DimensionMismatch, "topic_means: expected 5 covariates, got " + std::to_string(z.size()));
  }
  const double z1 = z[0], z2 = z[1], z3 = z[2], z4 = z[3], z5 = z[4];
  std::array<double, kSimTopics> b{};
  b[0] = -1.0 + z1 + 0.2 * z2 + z3 - 0.9 * z4 - 2.0 * z5 + e[0];
  b[1] = 3.0 + 1.5 * z1 + 0.15 * z2 - 5.0 * z3 - 5.0 * z5 + e[1];
  b[2] = 2.0 + 0.2 * z2 - 1.4 * z1 + e[2];
  b[3] = 1.6 * z1 + 8.0 * z3 - 9.0 * z4 + e[3];
  b[4] = z1 * z1 / (5.0 * z5) + e[4];
  b[5] = 6.0 * std::sin(z5 * z1) + e[5];
  b[6] = 2.0 + 3.0 * z1 * z4 - 2.0 * z3 + e[6];
  b[7] = 1.0 + 10.0 * z4 - 2.0 * b[2] + e[7];
  b[8] = 0.2 * z2 + 0.2 * b[6] + e[8];
  b[9] = -5.0 + 0.9 * b[0] - 1.2 * b[6] + e[9];
  return b;
}

TopicScores gen_topic_scores(const Matrix& z, double sparsity, double misspec,
                             std::uint64_t seed) {
  if (z.cols() != kSimCovariates) {
    fail(Errc::DimensionMismatch, "gen_topic_scores: expected 5 covariate columns");
  }
  if (!(sparsity >= 0.0 && sparsity <= 1.0))
    fail(Errc::InvalidArgument, "gen_topic_scores: sparsity must lie in [0, 1]");
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TopicScores out;
  out.unclamped = Matrix(kSimTopics, z.rows());
  out.scores = Matrix(kSimTopics, z.rows());
  std::size_t clamped = 0;
  for (std::size_t d = 0; d < z.rows(); ++d) {
    std::array<double, kSimTopics> e{};
    for (double& v : e) v = misspec * noise(rng);
    const auto means = topic_means(z.row(d), e);
    for (std::size_t k = 0; k < kSimTopics; ++k) {
      const bool zeroed = unit(rng) < sparsity;
      const double v = zeroed ? 0.0 : means[k];
      out.unclamped(k, d) = v;
      if (v < 0.0) ++clamped;
      out.scores(k, d) = v < 0.0 ? 0.0 : v;
    }
  }
  if (z.rows() > 0) {
    out.clamp_rate = static_cast<double>(clamped) / static_cast<double>(kSimTopics * z.rows());
  }
  return out;
}

Matrix gen_dictionary(std::size_t n_words, double sparsity, std::uint64_t seed) {
  if (!(sparsity >= 0.0 && sparsity <= 1.0))
    fail(Errc::InvalidArgument, "gen_dictionary: sparsity must lie in [0, 1]");
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::poisson_distribution<long long> count(100.0);
  Matrix x(n_words, kSimTopics);
  for (double& v : x.values()) {
    if (unit(rng) < sparsity) continue;
    v = static_cast<double>(count(rng)) / 90.0;
  }
  return x;
}

Matrix gen_corpus(const Matrix& x_true, const Matrix& b_true, std::uint64_t seed) {
  for (double v : x_true.values())
    if (v < 0.0) fail(Errc::NonNegativityViolated, "gen_corpus: negative dictionary entry");
  for (double v : b_true.values())
    if (v < 0.0) fail(Errc::NonNegativityViolated, "gen_corpus: negative topic score");
  const Matrix rate = matmul(x_true, b_true);
  Rng rng(seed);
  Matrix y(rate.rows(), rate.cols());
  auto src = rate.values();
  auto dst = y.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = draw_poisson(src[i], rng);
  return y;
}

SyntheticDataset run_scenario(const ScenarioConfig& config) {
  validate(config);
  const std::size_t n_train = config.n_docs;
  const std::size_t n_hold = holdout_size(config);
  const std::size_t n_total = n_train + n_hold;

  const Matrix z = gen_auxiliary(n_total, component_seed(config, "auxiliary"));
  TopicScores scores =
      gen_topic_scores(z, config.sparsity, config.misspec, component_seed(config, "topics"));
  Matrix x = gen_dictionary(config.n_words, config.sparsity, component_seed(config, "dictionary"));
  const Matrix y = gen_corpus(x, scores.scores, component_seed(config, "corpus"));

  std::vector<std::size_t> train_idx(n_train), hold_idx(n_hold);
  for (std::size_t i = 0; i < n_train; ++i) train_idx[i] = i;
  for (std::size_t i = 0; i < n_hold; ++i) hold_idx[i] = n_train + i;

  SyntheticDataset ds;
  ds.config = config;
  ds.clamp_rate = scores.clamp_rate;
  const auto train_ids = numbered("d", 0, n_train);
  const auto hold_ids = numbered("h", 0, n_hold);
  const auto columns = numbered("z", 1, kSimCovariates);
  const auto vocab = numbered("w", 0, config.n_words);

  AuxiliaryTable all_z{{}, columns, z};
  all_z.doc_ids = train_ids;
  all_z.doc_ids.insert(all_z.doc_ids.end(), hold_ids.begin(), hold_ids.end());
  ds.z_train = select_docs(all_z, train_idx);
  ds.z_holdout = select_docs(all_z, hold_idx);

  ds.b_true_train = scores.scores.select_cols(train_idx);
  ds.b_true_holdout = scores.scores.select_cols(hold_idx);
  ds.x_true = std::move(x);
  ds.y_train = CorpusMatrix{vocab, train_ids, y.select_cols(train_idx)};
  ds.y_holdout = CorpusMatrix{vocab, hold_ids, y.select_cols(hold_idx)};
  return ds;
}

}  // namespace semipartm
