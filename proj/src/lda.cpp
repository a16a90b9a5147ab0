#include <cmath>
#include <string>

#include "semipartm/baselines.hpp"
#include "semipartm/error.hpp"
#include "semipartm/random.hpp"

namespace semipartm {

namespace {

// Token streams expanded from integer counts: tokens of document d are
// words[offsets[d] .. offsets[d + 1]).
struct Tokens {
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> words;
};

Tokens expand_counts(const Matrix& y, const char* op) {
  require_finite(y, op);
  for (double v : y.values()) {
    if (v < 0.0 || std::abs(v - std::round(v)) > 1e-9) {
      fail(Errc::NonIntegerCounts, std::string(op) + ": Y must hold nonnegative integer counts");
    }
  }
  Tokens tk;
  tk.offsets.push_back(0);
  for (std::size_t d = 0; d < y.cols(); ++d) {
    for (std::size_t w = 0; w < y.rows(); ++w) {
      const auto c = static_cast<std::size_t>(std::llround(y(w, d)));
      tk.words.insert(tk.words.end(), c, static_cast<std::uint32_t>(w));
    }
    tk.offsets.push_back(tk.words.size());
  }
  return tk;
}

void validate(const LdaOptions& o) {
  if (!(o.beta > 0.0)) fail(Errc::InvalidArgument, "lda: beta must be > 0");
  if (o.sweeps < 1 || o.burn_in < 0 || o.burn_in >= o.sweeps || o.sample_lag < 1) {
    fail(Errc::InvalidArgument, "lda: need sweeps >= 1, 0 <= burn_in < sweeps, sample_lag >= 1");
  }
  if (o.restarts < 1) fail(Errc::InvalidArgument, "lda: restarts must be >= 1");
}

double resolve_alpha(const LdaOptions& o, std::size_t n_topics) {
  return o.alpha > 0.0 ? o.alpha : 50.0 / static_cast<double>(n_topics);
}

std::size_t draw(std::vector<double>& weights, double total, Rng& rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * total;
  const std::size_t last = weights.size() - 1;
  for (std::size_t t = 0; t < last; ++t) {
    u -= weights[t];
    if (u < 0.0) return t;
  }
  return last;
}

void normalize_rows(Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    double s = 0.0;
    for (double v : r) s += v;
    for (double& v : r) v /= s;
  }
}

struct Chain {
  Matrix phi;
  Matrix theta;
  double log_likelihood;
};

Chain run_chain(const Tokens& tk, std::size_t n_words, std::size_t n_topics, double alpha,
                const LdaOptions& o, std::uint64_t seed) {
  const std::size_t n_docs = tk.offsets.size() - 1;
  const double beta = o.beta;
  const double w_beta = static_cast<double>(n_words) * beta;
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n_topics - 1);

  std::vector<std::uint32_t> z(tk.words.size());
  Matrix word_topic(n_words, n_topics);  // n_wt
  Matrix doc_topic(n_docs, n_topics);    // n_dt
  std::vector<double> topic_total(n_topics, 0.0);
  for (std::size_t d = 0; d < n_docs; ++d) {
    for (std::size_t i = tk.offsets[d]; i < tk.offsets[d + 1]; ++i) {
      const auto t = pick(rng);
      z[i] = static_cast<std::uint32_t>(t);
      word_topic(tk.words[i], t) += 1.0;
      doc_topic(d, t) += 1.0;
      topic_total[t] += 1.0;
    }
  }

  Matrix phi_sum(n_topics, n_words);
  Matrix theta_sum(n_docs, n_topics);
  std::vector<double> weights(n_topics);
  std::vector<double> inv_total(n_topics);
  for (int sweep = 0; sweep < o.sweeps; ++sweep) {
    for (std::size_t t = 0; t < n_topics; ++t) inv_total[t] = 1.0 / (topic_total[t] + w_beta);
    for (std::size_t d = 0; d < n_docs; ++d) {
      auto nd = doc_topic.row(d);
      for (std::size_t i = tk.offsets[d]; i < tk.offsets[d + 1]; ++i) {
        const std::size_t w = tk.words[i];
        auto nw = word_topic.row(w);
        std::size_t t = z[i];
        nw[t] -= 1.0;
        nd[t] -= 1.0;
        topic_total[t] -= 1.0;
        inv_total[t] = 1.0 / (topic_total[t] + w_beta);
        double total = 0.0;
        for (std::size_t k = 0; k < n_topics; ++k)
          total += (weights[k] = (nd[k] + alpha) * (nw[k] + beta) * inv_total[k]);
        t = draw(weights, total, rng);
        z[i] = static_cast<std::uint32_t>(t);
        nw[t] += 1.0;
        nd[t] += 1.0;
        topic_total[t] += 1.0;
        inv_total[t] = 1.0 / (topic_total[t] + w_beta);
      }
    }
    if (sweep >= o.burn_in && (sweep - o.burn_in) % o.sample_lag == 0) {
      for (std::size_t t = 0; t < n_topics; ++t) {
        const double inv = 1.0 / (topic_total[t] + w_beta);
        auto out = phi_sum.row(t);
        for (std::size_t w = 0; w < n_words; ++w) out[w] += (word_topic(w, t) + beta) * inv;
      }
      for (std::size_t d = 0; d < n_docs; ++d) {
        const double len = static_cast<double>(tk.offsets[d + 1] - tk.offsets[d]);
        const double inv = 1.0 / (len + static_cast<double>(n_topics) * alpha);
        auto out = theta_sum.row(d);
        for (std::size_t t = 0; t < n_topics; ++t) out[t] += (doc_topic(d, t) + alpha) * inv;
      }
    }
  }
  normalize_rows(phi_sum);
  normalize_rows(theta_sum);

  // Collapsed joint log p(w, z) of the final state.
  const double T = static_cast<double>(n_topics);
  const double W = static_cast<double>(n_words);
  double ll = T * (std::lgamma(w_beta) - W * std::lgamma(beta)) +
              static_cast<double>(n_docs) * (std::lgamma(T * alpha) - T * std::lgamma(alpha));
  for (std::size_t t = 0; t < n_topics; ++t) {
    for (std::size_t w = 0; w < n_words; ++w) ll += std::lgamma(word_topic(w, t) + beta);
    ll -= std::lgamma(topic_total[t] + w_beta);
  }
  for (std::size_t d = 0; d < n_docs; ++d) {
    const double len = static_cast<double>(tk.offsets[d + 1] - tk.offsets[d]);
    for (std::size_t t = 0; t < n_topics; ++t) ll += std::lgamma(doc_topic(d, t) + alpha);
    ll -= std::lgamma(len + T * alpha);
  }
  return Chain{std::move(phi_sum), std::move(theta_sum), ll};
}

}  // namespace

LdaModel lda_fit(const Matrix& y, std::size_t n_topics, const LdaOptions& options) {
  validate(options);
  if (n_topics < 1) fail(Errc::InvalidArgument, "lda_fit: topic count must be >= 1");
  if (y.rows() == 0) fail(Errc::EmptyCorpus, "lda_fit: empty vocabulary");
  const Tokens tk = expand_counts(y, "lda_fit");
  const double alpha = resolve_alpha(options, n_topics);

  LdaModel best;
  bool have_best = false;
  for (int r = 0; r < options.restarts; ++r) {
    Chain chain = run_chain(tk, y.rows(), n_topics, alpha, options,
                            derive_seed(options.seed, {static_cast<std::uint64_t>(r)}));
    if (!have_best || chain.log_likelihood > best.log_likelihood) {
      best.phi = std::move(chain.phi);
      best.theta = std::move(chain.theta);
      best.log_likelihood = chain.log_likelihood;
      have_best = true;
    }
  }
  best.alpha = alpha;
  best.beta = options.beta;
  best.seed = options.seed;
  return best;
}

Matrix lda_transform(const Matrix& y_new, const LdaModel& model, const LdaOptions& options) {
  validate(options);
  if (y_new.rows() != model.phi.cols()) {
    fail(Errc::DimensionMismatch, "lda_transform: Y has " + std::to_string(y_new.rows()) +
                                      " rows, model vocabulary has " +
                                      std::to_string(model.phi.cols()));
  }
  const Tokens tk = expand_counts(y_new, "lda_transform");
  const std::size_t n_topics = model.phi.rows();
  const std::size_t n_docs = y_new.cols();
  const double alpha = model.alpha;
  Rng rng(derive_seed(options.seed, {name_tag("lda_transform")}));
  std::uniform_int_distribution<std::size_t> pick(0, n_topics - 1);

  std::vector<std::uint32_t> z(tk.words.size());
  Matrix doc_topic(n_docs, n_topics);
  for (std::size_t d = 0; d < n_docs; ++d) {
    for (std::size_t i = tk.offsets[d]; i < tk.offsets[d + 1]; ++i) {
      const auto t = pick(rng);
      z[i] = static_cast<std::uint32_t>(t);
      doc_topic(d, t) += 1.0;
    }
  }
  Matrix theta_sum(n_docs, n_topics);
  std::vector<double> weights(n_topics);
  for (int sweep = 0; sweep < options.sweeps; ++sweep) {
    for (std::size_t d = 0; d < n_docs; ++d) {
      auto nd = doc_topic.row(d);
      for (std::size_t i = tk.offsets[d]; i < tk.offsets[d + 1]; ++i) {
        const std::size_t w = tk.words[i];
        std::size_t t = z[i];
        nd[t] -= 1.0;
        double total = 0.0;
        for (std::size_t k = 0; k < n_topics; ++k)
          total += (weights[k] = (nd[k] + alpha) * model.phi(k, w));
        t = draw(weights, total, rng);
        z[i] = static_cast<std::uint32_t>(t);
        nd[t] += 1.0;
      }
    }
    if (sweep >= options.burn_in && (sweep - options.burn_in) % options.sample_lag == 0) {
      for (std::size_t d = 0; d < n_docs; ++d) {
        const double len = static_cast<double>(tk.offsets[d + 1] - tk.offsets[d]);
        const double inv = 1.0 / (len + static_cast<double>(n_topics) * alpha);
        auto out = theta_sum.row(d);
        for (std::size_t t = 0; t < n_topics; ++t) out[t] += (doc_topic(d, t) + alpha) * inv;
      }
    }
  }
  normalize_rows(theta_sum);
  return theta_sum;
}

}  // namespace semipartm
