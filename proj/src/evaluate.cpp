#include "semipartm/evaluate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "semipartm/error.hpp"
#include "semipartm/io.hpp"
#include "semipartm/random.hpp"

namespace semipartm {

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    fail(Errc::LengthMismatch, "cosine: lengths " + std::to_string(u.size()) + " and " +
                                   std::to_string(v.size()));
  }
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  if (uv == 0.0) return 0.0;
  // A single sqrt of the product: sqrt(fl(a * a)) == a, so cos(u, u) is exactly 1.
  return std::clamp(uv / std::sqrt(uu * vv), -1.0, 1.0);
}

namespace {

std::size_t n_topics_of(const Matrix& m, TopicAxis axis) {
  return axis == TopicAxis::Rows ? m.rows() : m.cols();
}

std::vector<double> topic_vector(const Matrix& m, std::size_t k, TopicAxis axis) {
  if (axis == TopicAxis::Columns) return m.col(k);
  auto r = m.row(k);
  return {r.begin(), r.end()};
}

void require_same_shape(const Matrix& a, const Matrix& b, std::string_view what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(Errc::ShapeMismatch, std::string(what) + ": shapes " + std::to_string(a.rows()) + "x" +
                                  std::to_string(a.cols()) + " and " + std::to_string(b.rows()) +
                                  "x" + std::to_string(b.cols()));
  }
}

}  // namespace

std::vector<double> topic_similarities(const Matrix& truth, const Matrix& est, TopicAxis axis) {
  require_same_shape(truth, est, "matrix_similarity");
  const std::size_t t = n_topics_of(truth, axis);
  std::vector<double> out(t);
  for (std::size_t k = 0; k < t; ++k)
    out[k] = cosine(topic_vector(truth, k, axis), topic_vector(est, k, axis));
  return out;
}

double matrix_similarity(const Matrix& truth, const Matrix& est, TopicAxis axis) {
  const auto sims = topic_similarities(truth, est, axis);
  if (sims.empty()) return 0.0;
  double s = 0.0;
  for (double v : sims) s += v;
  return s / static_cast<double>(sims.size());
}

Matrix cosine_matrix(const Matrix& truth, const Matrix& est, TopicAxis axis) {
  const std::size_t t = n_topics_of(truth, axis);
  const std::size_t len_t = axis == TopicAxis::Rows ? truth.cols() : truth.rows();
  const std::size_t len_e = axis == TopicAxis::Rows ? est.cols() : est.rows();
  if (n_topics_of(est, axis) != t || len_t != len_e) {
    fail(Errc::ShapeMismatch, "align_topics: topic counts or vector lengths differ");
  }
  std::vector<std::vector<double>> tv(t), ev(t);
  for (std::size_t k = 0; k < t; ++k) {
    tv[k] = topic_vector(truth, k, axis);
    ev[k] = topic_vector(est, k, axis);
  }
  Matrix c(t, t);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = 0; j < t; ++j) c(i, j) = cosine(tv[i], ev[j]);
  return c;
}

std::vector<std::size_t> hungarian_max(const Matrix& score) {
  const std::size_t n = score.rows();
  if (score.cols() != n) fail(Errc::ShapeMismatch, "hungarian_max: score matrix must be square");
  if (n == 0) return {};
  // Shortest augmenting path version of the Hungarian method on cost = -score,
  // 1-based with a sentinel column 0.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -score(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 1; j <= n; ++j) perm[p[j] - 1] = j - 1;
  return perm;
}

std::vector<std::size_t> align_topics(const Matrix& truth, const Matrix& est, TopicAxis axis) {
  const Matrix c = cosine_matrix(truth, est, axis);
  auto perm = hungarian_max(c);
  // Keep the identity when it is already optimal, so exact ties resolve to the
  // lowest index.
  double total_perm = 0.0, total_id = 0.0;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    total_perm += c(k, perm[k]);
    total_id += c(k, k);
  }
  if (total_id >= total_perm) {
    for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
  }
  return perm;
}

Matrix permute_topics(const Matrix& est, const std::vector<std::size_t>& perm, TopicAxis axis) {
  const std::size_t t = n_topics_of(est, axis);
  if (perm.size() != t) fail(Errc::ShapeMismatch, "permute_topics: permutation length mismatch");
  Matrix out(est.rows(), est.cols());
  for (std::size_t k = 0; k < t; ++k) {
    if (perm[k] >= t) fail(Errc::InvalidArgument, "permute_topics: index out of range");
    if (axis == TopicAxis::Rows) {
      auto src = est.row(perm[k]);
      std::copy(src.begin(), src.end(), out.row(k).begin());
    } else {
      for (std::size_t i = 0; i < est.rows(); ++i) out(i, k) = est(i, perm[k]);
    }
  }
  return out;
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Lsa: return "LSA";
    case Method::Plsa: return "PLSA";
    case Method::Lda: return "LDA";
    case Method::SemiparTm1: return "SemiparTM-1";
    case Method::SemiparTm3: return "SemiparTM-3";
    case Method::SemiparTmCv: return "SemiparTM-cv";
  }
  return "?";
}

namespace {

std::string squash(std::string_view s) {
  std::string out;
  for (char c : s)
    if (c != '-' && c != '_') out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

}  // namespace

std::optional<Method> parse_method(std::string_view s) {
  const std::string key = squash(s);
  for (Method m : kAllMethods)
    if (squash(method_name(m)) == key) return m;
  return std::nullopt;
}

std::uint64_t method_seed(const SyntheticDataset& ds, Method m) {
  std::string_view family = method_name(m);
  if (m == Method::SemiparTm1 || m == Method::SemiparTm3 || m == Method::SemiparTmCv) {
    family = "SemiparTM";
  }
  return derive_seed(ds.config.seed, {ds.config.replicate, name_tag("method"), name_tag(family)});
}

namespace {

// Fold-in through the nonzero singular values only; components with a zero
// singular value carry no information about new documents.
Matrix lsa_fold_in(const Matrix& y_new, const LsaModel& model) {
  for (double s : model.s)
    if (s == 0.0) {
      Matrix b = matmul_tn(model.x, y_new);
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (double& v : b.row(k)) v = model.s[k] == 0.0 ? 0.0 : v / model.s[k];
      return b;
    }
  return lsa_transform(y_new, model);
}

Estimates fit_semipartm(const SyntheticDataset& ds, double xi, std::uint64_t seed,
                        const EvalOptions& options) {
  NmfOptions nmf = options.nmf;
  nmf.seed = seed;
  const std::size_t t = ds.config.n_topics;
  Factorization f = nmf_fit(ds.y_train.scores, t, xi, nmf);
  const TopicRegressor reg = fit_regressors(f.b, ds.z_train, options.spline, options.ridge);
  Estimates e;
  e.b_holdout = predict_topics(reg, ds.z_holdout);
  e.x_hat = std::move(f.x);
  e.b_train = std::move(f.b);
  e.xi = xi;
  return e;
}

}  // namespace

Estimates fit_method(const SyntheticDataset& ds, Method m, const EvalOptions& options) {
  const std::size_t t = ds.config.n_topics;
  const Matrix& y = ds.y_train.scores;
  const Matrix& yh = ds.y_holdout.scores;
  const std::uint64_t seed = method_seed(ds, m);
  switch (m) {
    case Method::Lsa: {
      LsaModel model = lsa_fit(y, t);
      Estimates e;
      e.b_holdout = lsa_fold_in(yh, model);
      e.x_hat = std::move(model.x);
      e.b_train = std::move(model.b);
      return e;
    }
    case Method::Plsa: {
      PlsaOptions opt = options.plsa;
      opt.seed = seed;
      PlsaModel model = plsa_fit(y, t, opt);
      Estimates e;
      e.b_holdout = plsa_transform(yh, model, opt);
      e.x_hat = std::move(model.p_w_given_t);
      e.b_train = std::move(model.p_t_given_d);
      return e;
    }
    case Method::Lda: {
      LdaOptions opt = options.lda;
      opt.seed = seed;
      LdaModel model = lda_fit(y, t, opt);
      Estimates e;
      e.b_holdout = transpose(lda_transform(yh, model, opt));
      e.x_hat = transpose(model.phi);
      e.b_train = transpose(model.theta);
      return e;
    }
    case Method::SemiparTm1: return fit_semipartm(ds, 1.0, seed, options);
    case Method::SemiparTm3: return fit_semipartm(ds, 3.0, seed, options);
    case Method::SemiparTmCv: {
      CvOptions cv;
      cv.folds = options.cv_folds;
      cv.seed = derive_seed(seed, {name_tag("cv")});
      cv.paper_literal_folds = options.paper_literal_folds;
      cv.nmf = options.nmf;
      cv.spline = options.spline;
      cv.ridge = options.ridge;
      cv.jobs = options.jobs;
      const CvResult r = cross_validate_xi(y, ds.z_train, t, options.cv_grid, cv);
      return fit_semipartm(ds, r.chosen_xi, seed, options);
    }
  }
  fail(Errc::InvalidArgument, "fit_method: unknown method");
}

EvalRow score_estimates(const SyntheticDataset& ds, std::string_view method, const Estimates& est,
                        bool align) {
  EvalRow row;
  row.method = std::string(method);
  row.n_docs = ds.config.n_docs;
  row.n_words = ds.config.n_words;
  row.sparsity = ds.config.sparsity;
  row.misspec = ds.config.misspec;
  row.replicate = ds.config.replicate;
  row.xi = est.xi;
  row.clamp_rate = ds.clamp_rate;

  const std::size_t t = n_topics_of(ds.x_true, TopicAxis::Columns);
  if (align) {
    row.permutation = align_topics(ds.x_true, est.x_hat, TopicAxis::Columns);
  } else {
    row.permutation.resize(t);
    for (std::size_t k = 0; k < t; ++k) row.permutation[k] = k;
  }
  const auto& perm = row.permutation;
  row.dictionary_train = matrix_similarity(
      ds.x_true, permute_topics(est.x_hat, perm, TopicAxis::Columns), TopicAxis::Columns);
  row.topic_train = matrix_similarity(
      ds.b_true_train, permute_topics(est.b_train, perm, TopicAxis::Rows), TopicAxis::Rows);
  row.topic_holdout = matrix_similarity(
      ds.b_true_holdout, permute_topics(est.b_holdout, perm, TopicAxis::Rows), TopicAxis::Rows);
  return row;
}

EvalRow evaluate_method(const SyntheticDataset& ds, Method m, const EvalOptions& options) {
  return score_estimates(ds, method_name(m), fit_method(ds, m, options), options.align);
}

std::string_view group_key_name(GroupKey k) {
  switch (k) {
    case GroupKey::Docs: return "docs";
    case GroupKey::Words: return "words";
    case GroupKey::Sparsity: return "sparsity";
    case GroupKey::Misspec: return "m";
  }
  return "?";
}

std::optional<GroupKey> parse_group_key(std::string_view s) {
  for (GroupKey k : {GroupKey::Docs, GroupKey::Words, GroupKey::Sparsity, GroupKey::Misspec})
    if (group_key_name(k) == s) return k;
  if (s == "misspec") return GroupKey::Misspec;
  return std::nullopt;
}

namespace {

double key_value(const EvalRow& r, GroupKey k) {
  switch (k) {
    case GroupKey::Docs: return static_cast<double>(r.n_docs);
    case GroupKey::Words: return static_cast<double>(r.n_words);
    case GroupKey::Sparsity: return r.sparsity;
    case GroupKey::Misspec: return r.misspec;
  }
  return 0.0;
}

std::size_t method_rank(const std::vector<std::string>& order, std::string_view m) {
  return static_cast<std::size_t>(std::find(order.begin(), order.end(), m) - order.begin());
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string pad_left(std::string s, std::size_t w) {
  if (s.size() < w) s.insert(0, w - s.size(), ' ');
  return s;
}

std::string pad_right(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

std::string level_label(GroupKey k, double v) {
  if (k == GroupKey::Misspec) {
    if (v == 1.0) return "None";
    if (v == 2.0) return "Present";
  }
  return format_double(v);
}

std::string key_title(GroupKey k) {
  switch (k) {
    case GroupKey::Docs: return "# Docs";
    case GroupKey::Words: return "# Words";
    case GroupKey::Sparsity: return "Sparsity";
    case GroupKey::Misspec: return "Misspec.";
  }
  return "?";
}

}  // namespace

const ReportCell* Report::find(std::string_view method, double row_level, double col_level) const {
  for (const auto& c : cells)
    if (c.method == method && c.row_level == row_level && c.col_level == col_level) return &c;
  return nullptr;
}

Report aggregate_report(const std::vector<EvalRow>& rows, GroupKey row_key, GroupKey col_key) {
  if (rows.empty()) fail(Errc::EmptyInput, "aggregate_report: no rows");
  Report rep;
  rep.row_key = row_key;
  rep.col_key = col_key;
  for (Method m : kAllMethods) {
    const std::string name(method_name(m));
    for (const auto& r : rows)
      if (r.method == name) {
        rep.methods.push_back(name);
        break;
      }
  }
  for (const auto& r : rows)
    if (method_rank(rep.methods, r.method) == rep.methods.size()) rep.methods.push_back(r.method);

  struct Acc {
    std::size_t n = 0;
    double tt = 0.0, th = 0.0, dt = 0.0;
  };
  std::map<std::tuple<std::size_t, double, double>, Acc> acc;
  for (const auto& r : rows) {
    const double rl = key_value(r, row_key), cl = key_value(r, col_key);
    auto& a = acc[{method_rank(rep.methods, r.method), rl, cl}];
    ++a.n;
    a.tt += r.topic_train;
    a.th += r.topic_holdout;
    a.dt += r.dictionary_train;
    rep.row_levels.push_back(rl);
    rep.col_levels.push_back(cl);
  }
  for (auto* levels : {&rep.row_levels, &rep.col_levels}) {
    std::sort(levels->begin(), levels->end());
    levels->erase(std::unique(levels->begin(), levels->end()), levels->end());
  }
  for (const auto& [key, a] : acc) {
    const double n = static_cast<double>(a.n);
    rep.cells.push_back(ReportCell{rep.methods[std::get<0>(key)], std::get<1>(key),
                                   std::get<2>(key), a.n, a.tt / n, a.th / n, a.dt / n});
  }
  return rep;
}

std::string render_report_text(const Report& rep) {
  const std::size_t w_method = 14, w_row = 10, w_val = 8;
  const std::size_t nc = rep.col_levels.size();
  const std::size_t block = nc * w_val;
  const std::string lead(w_method + w_row, ' ');
  std::ostringstream os;

  os << lead << pad_right("Topic distribution matrix", 2 * block + 2) << "  "
     << "Dictionary matrix\n";
  os << lead << pad_right("Training", block) << "  " << pad_right("Holdout", block) << "  "
     << "Training\n";
  const std::string col_title = key_title(rep.col_key);
  os << lead;
  for (int b = 0; b < 3; ++b) os << (b ? "  " : "") << pad_right(col_title, block);
  os << "\n";
  os << pad_right("Method", w_method) << pad_right(key_title(rep.row_key), w_row);
  for (int b = 0; b < 3; ++b) {
    if (b) os << "  ";
    for (double c : rep.col_levels) os << pad_left(level_label(rep.col_key, c), w_val);
  }
  os << "\n";
  os << std::string(w_method + w_row + 3 * block + 4, '-') << "\n";

  for (std::size_t mi = 0; mi < rep.methods.size(); ++mi) {
    const auto& m = rep.methods[mi];
    bool first = true;
    for (double rl : rep.row_levels) {
      os << pad_right(first ? m : "", w_method) << pad_right(level_label(rep.row_key, rl), w_row);
      first = false;
      for (int b = 0; b < 3; ++b) {
        if (b) os << "  ";
        for (double cl : rep.col_levels) {
          const ReportCell* c = rep.find(m, rl, cl);
          std::string v = "-";
          if (c) v = fixed3(b == 0 ? c->topic_train : b == 1 ? c->topic_holdout : c->dictionary_train);
          os << pad_left(v, w_val);
        }
      }
      os << "\n";
    }
    if (mi + 1 < rep.methods.size()) os << "\n";
  }
  return os.str();
}

std::string render_report_tsv(const Report& rep) {
  std::ostringstream os;
  os << "method\t" << group_key_name(rep.row_key) << '\t' << group_key_name(rep.col_key)
     << "\tn\ttopic_train\ttopic_holdout\tdictionary_train\n";
  for (const auto& c : rep.cells) {
    os << c.method << '\t' << format_double(c.row_level) << '\t' << format_double(c.col_level)
       << '\t' << c.count << '\t' << format_double(c.topic_train) << '\t'
       << format_double(c.topic_holdout) << '\t' << format_double(c.dictionary_train) << '\n';
  }
  return os.str();
}

namespace {

constexpr std::string_view kRowHeader =
    "method\tdocs\twords\tsparsity\tm\treplicate\txi\ttopic_train\ttopic_holdout\t"
    "dictionary_train\tclamp_rate\tpermutation";

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

double field_double(std::string_view s, std::size_t line) {
  auto v = parse_double(s);
  if (!v) fail(Errc::Parse, "rows: line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  return *v;
}

std::size_t field_size(std::string_view s, std::size_t line) {
  const double v = field_double(s, line);
  if (v < 0 || v != std::floor(v))
    fail(Errc::Parse, "rows: line " + std::to_string(line) + ": expected a count");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::string rows_to_tsv(const std::vector<EvalRow>& rows) {
  std::ostringstream os;
  os << kRowHeader << '\n';
  for (const auto& r : rows) {
    os << r.method << '\t' << r.n_docs << '\t' << r.n_words << '\t' << format_double(r.sparsity)
       << '\t' << format_double(r.misspec) << '\t' << r.replicate << '\t'
       << (r.xi ? format_double(*r.xi) : "NA") << '\t' << format_double(r.topic_train) << '\t'
       << format_double(r.topic_holdout) << '\t' << format_double(r.dictionary_train) << '\t'
       << format_double(r.clamp_rate) << '\t';
    for (std::size_t k = 0; k < r.permutation.size(); ++k)
      os << (k ? "," : "") << r.permutation[k];
    os << '\n';
  }
  return os.str();
}

std::vector<EvalRow> rows_from_tsv(std::string_view text) {
  auto lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines[0] != kRowHeader) fail(Errc::Parse, "rows: missing or unexpected header");
  std::vector<EvalRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], '\t');
    if (f.size() != 12) {
      fail(Errc::Parse, "rows: line " + std::to_string(i + 1) + " has " + std::to_string(f.size()) +
                            " fields, expected 12");
    }
    EvalRow r;
    r.method = std::string(f[0]);
    r.n_docs = field_size(f[1], i + 1);
    r.n_words = field_size(f[2], i + 1);
    r.sparsity = field_double(f[3], i + 1);
    r.misspec = field_double(f[4], i + 1);
    r.replicate = field_size(f[5], i + 1);
    if (f[6] != "NA") r.xi = field_double(f[6], i + 1);
    r.topic_train = field_double(f[7], i + 1);
    r.topic_holdout = field_double(f[8], i + 1);
    r.dictionary_train = field_double(f[9], i + 1);
    r.clamp_rate = field_double(f[10], i + 1);
    if (!f[11].empty())
      for (auto p : split(f[11], ',')) r.permutation.push_back(field_size(p, i + 1));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace semipartm
