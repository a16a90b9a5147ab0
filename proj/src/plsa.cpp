#include <algorithm>
#include <cmath>
#include <string>

#include "semipartm/baselines.hpp"
#include "semipartm/error.hpp"
#include "semipartm/random.hpp"

namespace semipartm {

namespace {

struct Entry {
  std::size_t word;
  double count;
};

// Nonzero entries of Y grouped by document.
std::vector<std::vector<Entry>> doc_entries(const Matrix& y) {
  std::vector<std::vector<Entry>> docs(y.cols());
  for (std::size_t w = 0; w < y.rows(); ++w) {
    auto row = y.row(w);
    for (std::size_t d = 0; d < row.size(); ++d)
      if (row[d] != 0.0) docs[d].push_back({w, row[d]});
  }
  return docs;
}

void validate_counts(const Matrix& y, const char* op) {
  require_finite(y, op);
  for (double v : y.values())
    if (v < 0.0) fail(Errc::NonNegativityViolated, std::string(op) + ": negative score");
}

void validate(const PlsaOptions& options) {
  if (options.max_iters < 1) fail(Errc::InvalidArgument, "plsa: max_iters must be >= 1");
  if (!(options.rel_tol > 0.0)) fail(Errc::InvalidArgument, "plsa: rel_tol must be > 0");
  if (options.restarts < 1) fail(Errc::InvalidArgument, "plsa: restarts must be >= 1");
}

// Random stochastic rows: each row of a rows x cols matrix sums to one.
Matrix random_stochastic_rows(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    auto r = m.row(i);
    double total = 0.0;
    for (double& v : r) total += (v = uniform_open_closed(rng));
    for (double& v : r) v /= total;
  }
  return m;
}

// EM state. Word-topic is kept W x T (P(w|t) by row w) and document-topic
// D x T so that the inner loops run over contiguous topic vectors.
struct PlsaState {
  Matrix word_topic;  // W x T: P(w|t)
  Matrix doc_topic;   // D x T: P(t|d)
};

// One EM iteration. Returns the log-likelihood of the parameters on entry
// (sans the P(d) term). Updates doc_topic always, word_topic when
// `update_words`.
double em_iteration(const std::vector<std::vector<Entry>>& docs, PlsaState& st,
                    bool update_words) {
  const std::size_t n_topics = st.word_topic.cols();
  Matrix word_acc(update_words ? st.word_topic.rows() : 0, n_topics);
  std::vector<double> post(n_topics);
  double ll = 0.0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    auto theta = st.doc_topic.row(d);
    std::vector<double> doc_acc(n_topics, 0.0);
    double doc_total = 0.0;
    for (const auto& e : docs[d]) {
      auto phi = st.word_topic.row(e.word);
      double denom = 0.0;
      for (std::size_t t = 0; t < n_topics; ++t) denom += (post[t] = phi[t] * theta[t]);
      if (denom <= 0.0) continue;
      ll += e.count * std::log(denom);
      const double scale = e.count / denom;
      for (std::size_t t = 0; t < n_topics; ++t) {
        const double r = post[t] * scale;
        doc_acc[t] += r;
        if (update_words) word_acc(e.word, t) += r;
      }
      doc_total += e.count;
    }
    if (doc_total > 0.0) {
      double s = 0.0;
      for (double v : doc_acc) s += v;
      for (std::size_t t = 0; t < n_topics; ++t) theta[t] = doc_acc[t] / s;
    } else {
      std::fill(theta.begin(), theta.end(), 1.0 / static_cast<double>(n_topics));
    }
  }
  if (update_words) {
    const std::size_t n_words = st.word_topic.rows();
    for (std::size_t t = 0; t < n_topics; ++t) {
      double s = 0.0;
      for (std::size_t w = 0; w < n_words; ++w) s += word_acc(w, t);
      for (std::size_t w = 0; w < n_words; ++w)
        st.word_topic(w, t) = s > 0.0 ? word_acc(w, t) / s : 1.0 / static_cast<double>(n_words);
    }
  }
  return ll;
}

double conditional_log_likelihood(const std::vector<std::vector<Entry>>& docs,
                                  const PlsaState& st) {
  const std::size_t n_topics = st.word_topic.cols();
  double ll = 0.0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    auto theta = st.doc_topic.row(d);
    for (const auto& e : docs[d]) {
      auto phi = st.word_topic.row(e.word);
      double p = 0.0;
      for (std::size_t t = 0; t < n_topics; ++t) p += phi[t] * theta[t];
      if (p > 0.0) ll += e.count * std::log(p);
    }
  }
  return ll;
}

// sum_d n_d log(n_d / N)
double document_term(const Matrix& y) {
  std::vector<double> mass(y.cols(), 0.0);
  double total = 0.0;
  for (std::size_t w = 0; w < y.rows(); ++w) {
    auto row = y.row(w);
    for (std::size_t d = 0; d < row.size(); ++d) mass[d] += row[d];
  }
  for (double m : mass) total += m;
  double out = 0.0;
  for (double m : mass)
    if (m > 0.0) out += m * std::log(m / total);
  return out;
}

std::vector<double> run_em(const std::vector<std::vector<Entry>>& docs, PlsaState& st,
                           bool update_words, const PlsaOptions& options, double offset) {
  std::vector<double> trace;
  for (int it = 0; it < options.max_iters; ++it) {
    trace.push_back(em_iteration(docs, st, update_words) + offset);
    if (trace.size() >= 2) {
      const double prev = trace[trace.size() - 2];
      const double cur = trace.back();
      if (std::abs(cur - prev) < options.rel_tol * std::abs(prev)) break;
    }
  }
  trace.push_back(conditional_log_likelihood(docs, st) + offset);
  return trace;
}

}  // namespace

double plsa_log_likelihood(const Matrix& y, const Matrix& p_w_given_t,
                           const Matrix& p_t_given_d) {
  if (p_w_given_t.rows() != y.rows() || p_t_given_d.cols() != y.cols() ||
      p_w_given_t.cols() != p_t_given_d.rows()) {
    fail(Errc::DimensionMismatch, "plsa_log_likelihood: shapes do not conform");
  }
  PlsaState st{p_w_given_t, transpose(p_t_given_d)};
  return conditional_log_likelihood(doc_entries(y), st) + document_term(y);
}

PlsaModel plsa_fit(const Matrix& y, std::size_t n_topics, const PlsaOptions& options) {
  validate(options);
  validate_counts(y, "plsa_fit");
  if (n_topics < 1) fail(Errc::InvalidArgument, "plsa_fit: topic count must be >= 1");
  double total = 0.0;
  for (double v : y.values()) total += v;
  if (!(total > 0.0)) fail(Errc::EmptyCorpus, "plsa_fit: corpus has no mass");

  const auto docs = doc_entries(y);
  const double offset = document_term(y);
  PlsaModel best;
  bool have_best = false;
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng(derive_seed(options.seed, {static_cast<std::uint64_t>(r)}));
    // P(w|t) columns are stochastic: draw T x W rows then transpose.
    PlsaState st{transpose(random_stochastic_rows(n_topics, y.rows(), rng)),
                 random_stochastic_rows(y.cols(), n_topics, rng)};
    auto trace = run_em(docs, st, true, options, offset);
    if (!have_best || trace.back() > best.log_likelihood_trace.back()) {
      best.p_w_given_t = std::move(st.word_topic);
      best.p_t_given_d = transpose(st.doc_topic);
      best.log_likelihood_trace = std::move(trace);
      have_best = true;
    }
  }
  return best;
}

Matrix plsa_transform(const Matrix& y_new, const PlsaModel& model, const PlsaOptions& options) {
  validate(options);
  validate_counts(y_new, "plsa_transform");
  if (y_new.rows() != model.p_w_given_t.rows()) {
    fail(Errc::DimensionMismatch, "plsa_transform: Y has " + std::to_string(y_new.rows()) +
                                      " rows, model has " +
                                      std::to_string(model.p_w_given_t.rows()));
  }
  const std::size_t n_topics = model.p_w_given_t.cols();
  Rng rng(derive_seed(options.seed, {name_tag("plsa_transform")}));
  PlsaState st{model.p_w_given_t, random_stochastic_rows(y_new.cols(), n_topics, rng)};
  if (y_new.cols() > 0) run_em(doc_entries(y_new), st, false, options, 0.0);
  return transpose(st.doc_topic);
}

}  // namespace semipartm
