#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semipartm/evaluate.hpp"
#include "support.hpp"

using namespace semipartm;
using support::errc_of;

namespace {

// Best total score by trying every permutation.
double brute_force_best(const Matrix& score) {
  std::vector<std::size_t> perm(score.rows());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = -1e300;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += score(i, perm[i]);
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

EvalRow make_row(std::string method, std::size_t docs, std::size_t words, double value) {
  EvalRow r;
  r.method = std::move(method);
  r.n_docs = docs;
  r.n_words = words;
  r.sparsity = 0.7;
  r.misspec = 1.0;
  r.topic_train = value;
  r.topic_holdout = value / 2;
  r.dictionary_train = value / 4;
  return r;
}

SyntheticDataset tiny(std::uint64_t seed) {
  ScenarioConfig c;
  c.n_docs = 40;
  c.n_words = 60;
  c.seed = seed;
  return run_scenario(c);
}

}  // namespace

TEST_CASE("cosine") {
  const double a[] = {1, 0}, b[] = {0, 1}, c[] = {1, 2, 2}, d[] = {2, 1, 2}, z[] = {0, 0};
  CHECK(cosine(a, a) == 1.0);
  CHECK(cosine(a, b) == 0.0);
  CHECK(cosine(c, d) == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  CHECK(cosine(a, z) == 0.0);
  CHECK(cosine(z, z) == 0.0);
  const double e[] = {1, 2};
  CHECK(errc_of([&] { cosine(c, e); }) == Errc::LengthMismatch);
}

TEST_CASE("cosine properties") {
  std::mt19937_64 rng(71);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t len = 1 + rng() % 20;
    std::vector<double> u(len), v(len);
    for (auto& x : u) x = n(rng);
    for (auto& x : v) x = n(rng);
    const double c = cosine(u, v);
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
    CHECK(c == cosine(v, u));
    CHECK(cosine(u, u) == 1.0);
    // Scaling by a power of two is exact.
    std::vector<double> scaled(u);
    for (auto& x : scaled) x *= 4.0;
    CHECK(cosine(scaled, v) == c);
    std::vector<double> neg(u);
    for (auto& x : neg) x = -x;
    CHECK(cosine(neg, v) == -c);
  }
}

TEST_CASE("topic similarities along both axes") {
  const Matrix t = Matrix::from_rows({{1, 0}, {0, 1}});
  CHECK(matrix_similarity(t, t, TopicAxis::Rows) == 1.0);
  const Matrix e = Matrix::from_rows({{1, 1}, {0, 1}});
  const auto rows = topic_similarities(t, e, TopicAxis::Rows);
  CHECK(rows[0] == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(rows[1] == 1.0);
  const auto cols = topic_similarities(t, e, TopicAxis::Columns);
  CHECK(cols[0] == 1.0);
  CHECK(cols[1] == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(errc_of([&] { matrix_similarity(t, Matrix(2, 3), TopicAxis::Rows); }) == Errc::ShapeMismatch);
}

TEST_CASE("hungarian_max matches exhaustive search") {
  std::mt19937_64 rng(72);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 4;
    Matrix s = support::random_matrix(n, n, rng, -1, 1);
    if (trial % 5 == 0)
      for (double& v : s.values()) v = std::round(v * 2);  // ties
    const auto perm = hungarian_max(s);
    std::vector<std::size_t> sorted(perm);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i) REQUIRE(sorted[i] == i);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += s(i, perm[i]);
    CHECK(total == doctest::Approx(brute_force_best(s)).epsilon(1e-12));
  }
}

TEST_CASE("alignment undoes a permutation") {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix truth = support::random_matrix(30, 5, rng);
    std::vector<std::size_t> shuffle(5);
    std::iota(shuffle.begin(), shuffle.end(), std::size_t{0});
    std::shuffle(shuffle.begin(), shuffle.end(), rng);
    // est column j is truth column shuffle[j].
    const Matrix est = truth.select_cols(shuffle);
    const auto perm = align_topics(truth, est, TopicAxis::Columns);
    for (std::size_t k = 0; k < 5; ++k) CHECK(shuffle[perm[k]] == k);
    CHECK(permute_topics(est, perm, TopicAxis::Columns) == truth);
    const Matrix rows = transpose(est);
    CHECK(permute_topics(rows, perm, TopicAxis::Rows) == transpose(truth));
  }
  // Identity is kept when it is already optimal.
  const Matrix same = support::random_matrix(8, 3, rng);
  CHECK(align_topics(same, same, TopicAxis::Columns) == std::vector<std::size_t>{0, 1, 2});
  CHECK(errc_of([&] { align_topics(same, Matrix(8, 2), TopicAxis::Columns); }) ==
        Errc::ShapeMismatch);
}

TEST_CASE("method names") {
  for (Method m : kAllMethods) CHECK(parse_method(method_name(m)) == m);
  CHECK(parse_method("semipartm1") == Method::SemiparTm1);
  CHECK(parse_method("SemiparTM_cv") == Method::SemiparTmCv);
  CHECK(parse_method("lsa") == Method::Lsa);
  CHECK_FALSE(parse_method("nmf"));
  CHECK(parse_group_key("misspec") == GroupKey::Misspec);
  CHECK(parse_group_key(group_key_name(GroupKey::Sparsity)) == GroupKey::Sparsity);
}

TEST_CASE("the true structures score one") {
  const SyntheticDataset ds = tiny(74);
  Estimates truth{ds.x_true, ds.b_true_train, ds.b_true_holdout, std::nullopt};
  const EvalRow r = score_estimates(ds, "oracle", truth);
  // All-zero topic rows compare as 0, so check against the nonzero share.
  auto nonzero_share = [](const Matrix& m) {
    double n = 0;
    for (std::size_t k = 0; k < m.rows(); ++k) {
      double s = 0;
      for (double v : m.row(k)) s += v * v;
      if (s > 0) ++n;
    }
    return n / static_cast<double>(m.rows());
  };
  CHECK(r.topic_train == doctest::Approx(nonzero_share(ds.b_true_train)));
  CHECK(r.topic_holdout == doctest::Approx(nonzero_share(ds.b_true_holdout)));
  CHECK(r.dictionary_train == doctest::Approx(nonzero_share(transpose(ds.x_true))));
  CHECK(r.permutation == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(r.n_docs == 40);
  CHECK(r.n_words == 60);
}

TEST_CASE("every method produces scores in range") {
  const SyntheticDataset ds = tiny(75);
  EvalOptions opt;
  opt.lda.sweeps = 60;
  opt.lda.burn_in = 30;
  opt.nmf.max_iters = 100;
  opt.cv_grid = {0.0, 1.0};
  opt.cv_folds = 2;
  for (Method m : kAllMethods) {
    CAPTURE(method_name(m));
    const Estimates est = fit_method(ds, m, opt);
    CHECK(est.x_hat.rows() == 60);
    CHECK(est.x_hat.cols() == 10);
    CHECK(est.b_train.cols() == 40);
    CHECK(est.b_holdout.cols() == 10);
    CHECK(est.xi.has_value() == (m == Method::SemiparTm1 || m == Method::SemiparTm3 ||
                                 m == Method::SemiparTmCv));
    const EvalRow r = evaluate_method(ds, m, opt);
    CHECK(r.method == method_name(m));
    for (double v : {r.topic_train, r.topic_holdout, r.dictionary_train}) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
    const EvalRow again = evaluate_method(ds, m, opt);
    CHECK(again.topic_train == r.topic_train);
    CHECK(again.topic_holdout == r.topic_holdout);
  }
  CHECK(method_seed(ds, Method::SemiparTm1) == method_seed(ds, Method::SemiparTmCv));
  CHECK(method_seed(ds, Method::Lsa) != method_seed(ds, Method::Lda));
}

TEST_CASE("aggregate_report") {
  const std::vector<EvalRow> rows = {make_row("LSA", 150, 500, 0.2), make_row("LSA", 150, 500, 0.4),
                                     make_row("LSA", 1000, 500, 0.6),
                                     make_row("SemiparTM-1", 150, 500, 0.8)};
  const Report rep = aggregate_report(rows);
  CHECK(rep.row_levels == std::vector<double>{150, 1000});
  CHECK(rep.col_levels == std::vector<double>{500});
  CHECK(rep.methods == std::vector<std::string>{"LSA", "SemiparTM-1"});
  const ReportCell* c = rep.find("LSA", 150, 500);
  REQUIRE(c);
  CHECK(c->count == 2);
  CHECK(c->topic_train == doctest::Approx(0.3));
  CHECK(c->topic_holdout == doctest::Approx(0.15));
  CHECK_FALSE(rep.find("SemiparTM-1", 1000, 500));

  const std::string text = render_report_text(rep);
  CHECK(text.find("0.300") != std::string::npos);
  CHECK(text.find("SemiparTM-1") != std::string::npos);
  const std::string tsv = render_report_tsv(rep);
  CHECK(tsv.find("LSA\t150\t500\t2\t") != std::string::npos);

  const Report by_m = aggregate_report(rows, GroupKey::Words, GroupKey::Misspec);
  CHECK(render_report_text(by_m).find("None") != std::string::npos);

  CHECK(errc_of([] { aggregate_report({}); }) == Errc::EmptyInput);
}

TEST_CASE("rows TSV round trip") {
  std::mt19937_64 rng(76);
  std::vector<EvalRow> rows;
  for (int i = 0; i < 20; ++i) {
    EvalRow r = make_row(i % 2 ? "LDA" : "SemiparTM-cv", 150, 500,
                         std::uniform_real_distribution<double>(-1, 1)(rng));
    r.replicate = static_cast<std::uint64_t>(i);
    r.clamp_rate = 0.125;
    if (i % 2 == 0) r.xi = 0.5 * i;
    r.permutation = {2, 0, 1};
    rows.push_back(r);
  }
  const auto back = rows_from_tsv(rows_to_tsv(rows));
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].method == rows[i].method);
    CHECK(back[i].topic_train == rows[i].topic_train);
    CHECK(back[i].xi == rows[i].xi);
    CHECK(back[i].permutation == rows[i].permutation);
    CHECK(back[i].replicate == rows[i].replicate);
  }
  CHECK(errc_of([] { rows_from_tsv("bad header\n"); }) == Errc::Parse);
}
