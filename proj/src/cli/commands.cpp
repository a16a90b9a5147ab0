#include "semipartm/cli/commands.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <unordered_map>

#include <CLI11.hpp>

#include "semipartm/baselines.hpp"
#include "semipartm/corpus.hpp"
#include "semipartm/error.hpp"
#include "semipartm/io.hpp"
#include "semipartm/nmf.hpp"
#include "semipartm/parallel.hpp"
#include "semipartm/random.hpp"
#include "semipartm/simulate.hpp"
#include "semipartm/splinereg.hpp"
#include "semipartm/tuning.hpp"

namespace semipartm::cli {

namespace fs = std::filesystem;

int exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::Usage: return kExitUsage;
    case ErrorClass::Data: return kExitData;
    case ErrorClass::Numerical: return kExitNumerical;
  }
  return kExitData;
}

namespace {

std::string_view class_name(ErrorClass c) {
  switch (c) {
    case ErrorClass::Usage: return "usage";
    case ErrorClass::Data: return "data";
    case ErrorClass::Numerical: return "numerical";
  }
  return "data";
}

Json error_record(std::string_view command, std::string_view code, ErrorClass cls,
                  std::string_view message) {
  Json j;
  j["error"] = code;
  j["class"] = class_name(cls);
  j["exit_code"] = exit_code(cls);
  j["command"] = command;
  j["message"] = message;
  return j;
}

int emit_error(std::string_view command, std::string_view code, ErrorClass cls,
               std::string_view message) {
  std::cerr << error_record(command, code, cls, message).dump() << '\n';
  return exit_code(cls);
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string lower(std::string_view s) {
  std::string out;
  for (char c : s)
    if (c != '-' && c != '_') out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

bool is_flag(const CLI::Option* opt) { return opt->get_expected_max() == 0; }

// Values of every option of a subcommand after parsing, defaults included.
// The output directory is left out: it is where the manifest lives, not part
// of what was computed.
Json resolved_config(const CLI::App& sub) {
  Json j = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config" || name == "out") continue;
    if (is_flag(opt)) {
      j[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      j[name] = join(opt->results(), ',');
    } else {
      std::string d = opt->get_default_str();
      if (d.size() >= 2 && d.front() == '[' && d.back() == ']') d = d.substr(1, d.size() - 2);
      j[name] = d;
    }
  }
  return j;
}

// Splices `key = value` lines from --config into the argument list, after the
// subcommand name. Keys already given on the command line are skipped, so
// flags win.
std::vector<std::string> expand_config(CLI::App& app, const std::vector<std::string>& args) {
  if (args.empty() || args[0].empty() || args[0][0] == '-') return args;
  CLI::App* sub = app.get_subcommand_no_throw(args[0]);
  if (!sub) return args;
  std::optional<std::string> path;
  std::set<std::string> given;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const std::size_t eq = a.find('=');
    const std::string name = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.insert(name);
    if (name == "config") {
      if (eq != std::string::npos) path = a.substr(eq + 1);
      else if (i + 1 < args.size()) path = args[i + 1];
    }
  }
  if (!path) return args;

  const std::string text = read_text_file(*path);
  std::vector<std::string> extra;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = trim(std::string_view(text).substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(Errc::InvalidArgument,
           *path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt || key == "config" || key == "help") {
      fail(Errc::InvalidArgument, *path + ":" + std::to_string(line_no) + ": unknown key '" + key +
                                      "' for '" + args[0] + "'");
    }
    if (given.count(key)) continue;
    if (is_flag(opt)) {
      const std::string v = lower(value);
      if (v == "true" || v == "1" || v == "yes" || v == "on") {
        extra.push_back("--" + key);
      } else if (!(v == "false" || v == "0" || v == "no" || v == "off")) {
        fail(Errc::InvalidArgument, *path + ":" + std::to_string(line_no) + ": '" + key +
                                        "' expects true or false");
      }
    } else {
      extra.push_back("--" + key);
      extra.push_back(value);
    }
  }
  std::vector<std::string> out{args[0]};
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

// ---------------------------------------------------------------------------
// Shared helpers

AuxiliaryTable read_aux_for(const std::vector<std::string>& doc_ids, const std::string& path) {
  return attach_auxiliary(doc_ids, read_covariate_table(path));
}

double parse_number(const std::string& s, std::string_view what) {
  const auto v = parse_double(s);
  if (!v) fail(Errc::InvalidArgument, std::string(what) + ": not a number: '" + s + "'");
  return *v;
}

std::vector<std::string> numbered(std::string_view prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::string(prefix) + std::to_string(i + 1));
  return out;
}

Json manifest_header(std::string_view command, const CLI::App& sub) {
  Json m;
  m["command"] = command;
  m["config"] = resolved_config(sub);
  return m;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestArgs {
  std::string input;
  std::string covariates;
  std::string vocab;
  std::string stopwords;
  bool stem = false;
  bool keep_case = false;
  std::string out;
};

void add_ingest(CLI::App& app, IngestArgs& a) {
  auto* s = app.add_subcommand("ingest", "Tokenize a JSONL document file into a word-by-document count matrix");
  s->add_option("--input", a.input, "JSONL file, one {\"id\", \"text\", optional \"covariates\"} per line")->required();
  s->add_option("--covariates", a.covariates, "Covariate table (CSV or TSV, first column 'id')");
  s->add_option("--vocab", a.vocab, "Frozen vocabulary, one word per line; other tokens are dropped");
  s->add_option("--stopwords", a.stopwords, "Stop-word list, one word per line");
  s->add_flag("--stem", a.stem, "Apply the Porter stemmer");
  s->add_flag("--keep-case", a.keep_case, "Do not lowercase tokens");
  s->add_option("--out", a.out, "Output directory")->required();
  s->add_option("--config", "key = value file; command-line flags win");
}

std::vector<std::string> read_word_list(const std::string& path) {
  const std::string text = read_text_file(path);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string w = trim(std::string_view(text).substr(start, end - start));
    if (!w.empty() && w[0] != '#') out.push_back(std::move(w));
    start = end + 1;
  }
  return out;
}

int cmd_ingest(const IngestArgs& a, const CLI::App& sub) {
  const auto docs = read_documents_jsonl(a.input);
  TokenizeOptions tok;
  tok.lowercase = !a.keep_case;
  tok.stem = a.stem;
  if (!a.stopwords.empty())
    for (auto& w : read_word_list(a.stopwords)) tok.stop_words.insert(w);

  CorpusMatrix corpus;
  std::size_t dropped = 0;
  if (!a.vocab.empty()) {
    auto vocab = read_word_list(a.vocab);
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
    VectorizeResult r = vectorize(docs, vocab, tok);
    corpus = std::move(r.corpus);
    dropped = r.dropped_tokens;
  } else {
    corpus = build_corpus(docs, tok);
  }
  const fs::path out = a.out;
  write_corpus_tsv(out / "corpus.tsv", corpus);

  Json m = manifest_header("ingest", sub);
  m["n_docs"] = corpus.n_docs();
  m["n_words"] = corpus.n_words();
  m["dropped_tokens"] = dropped;
  m["sparsity"] = corpus_sparsity(corpus.scores);

  const bool embedded = std::any_of(docs.begin(), docs.end(),
                                    [](const Document& d) { return d.covariates.has_value(); });
  std::optional<AuxiliaryTable> aux;
  if (!a.covariates.empty()) {
    aux = read_aux_for(corpus.doc_ids, a.covariates);
  } else if (embedded) {
    aux = attach_auxiliary(corpus, covariates_from_documents(docs));
  }
  if (aux) {
    write_auxiliary_tsv(out / "aux.tsv", *aux);
    m["covariates"] = aux->columns;
  }
  write_json(out / "manifest.json", m);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string corpus;
  std::string aux;
  std::string method = "semipartm";
  std::size_t topics = 0;
  std::string xi = "1";
  std::vector<double> grid = kDefaultXiGrid;
  std::size_t folds = 5;
  bool paper_literal_folds = false;
  std::uint64_t seed = 0;
  int max_iters = 500;
  double rel_tol = 1e-6;
  int restarts = 1;
  double alpha = -1.0;
  double beta = 0.01;
  int sweeps = 1000;
  int burn_in = 500;
  int lag = 10;
  int degree = 3;
  int knots = 5;
  double ridge = 1e-6;
  unsigned jobs = 1;
  std::string out;
};

void add_model_options(CLI::App* s, FitArgs& a) {
  s->add_option("--seed", a.seed, "Random seed");
  s->add_option("--max-iters", a.max_iters, "Iteration cap for NMF and PLSA");
  s->add_option("--rel-tol", a.rel_tol, "Relative objective change that stops NMF and PLSA");
  s->add_option("--degree", a.degree, "Spline degree");
  s->add_option("--knots", a.knots, "Interior knots per spline covariate");
  s->add_option("--ridge", a.ridge, "Ridge added to the regression normal equations");
  s->add_option("--jobs", a.jobs, "Worker threads for cross-validation");
}

void add_fit(CLI::App& app, FitArgs& a) {
  auto* s = app.add_subcommand("fit", "Fit SemiparTM or a baseline topic model");
  s->add_option("--corpus", a.corpus, "Corpus TSV (words x documents)")->required();
  s->add_option("--aux", a.aux, "Covariate table; required for SemiparTM");
  s->add_option("--method", a.method,
                "semipartm (uses --xi), semipartm1, semipartm3, semipartmcv, lsa, plsa or lda");
  s->add_option("--topics", a.topics, "Number of topics")->required();
  s->add_option("--xi", a.xi, "L1 penalty, or 'cv' to choose it from --grid");
  s->add_option("--grid", a.grid, "Candidate penalties for cross-validation")
      ->delimiter(',')
      ->default_str("0,0.5,1,3,10");
  s->add_option("--folds", a.folds, "Cross-validation folds");
  s->add_flag("--paper-literal-folds", a.paper_literal_folds,
              "Train on one fold and test on the rest during cross-validation");
  add_model_options(s, a);
  s->add_option("--restarts", a.restarts, "PLSA or LDA restarts");
  s->add_option("--alpha", a.alpha, "LDA document-topic prior (<= 0 means 50 / T)");
  s->add_option("--beta", a.beta, "LDA topic-word prior");
  s->add_option("--sweeps", a.sweeps, "LDA Gibbs sweeps");
  s->add_option("--burn-in", a.burn_in, "LDA burn-in sweeps");
  s->add_option("--lag", a.lag, "LDA sweeps between averaged samples");
  s->add_option("--out", a.out, "Model directory")->required();
  s->add_option("--config", "key = value file; command-line flags win");
}

struct MethodChoice {
  std::string family;  // semipartm, lsa, plsa, lda
  std::optional<double> xi;
  bool cv = false;
};

MethodChoice resolve_method(const std::string& method, const std::string& xi) {
  const std::string m = lower(method);
  MethodChoice c;
  if (m == "lsa" || m == "plsa" || m == "lda") {
    c.family = m;
    return c;
  }
  c.family = "semipartm";
  if (m == "semipartm1") {
    c.xi = 1.0;
  } else if (m == "semipartm3") {
    c.xi = 3.0;
  } else if (m == "semipartmcv") {
    c.cv = true;
  } else if (m == "semipartm") {
    if (lower(xi) == "cv") c.cv = true;
    else c.xi = parse_number(xi, "--xi");
  } else {
    fail(Errc::InvalidArgument, "unknown method '" + method + "'");
  }
  if (c.xi && !(*c.xi >= 0.0)) fail(Errc::InvalidArgument, "--xi must be >= 0");
  return c;
}

CvOptions cv_options(const FitArgs& a) {
  CvOptions cv;
  cv.folds = a.folds;
  cv.seed = derive_seed(a.seed, {name_tag("cv")});
  cv.paper_literal_folds = a.paper_literal_folds;
  cv.nmf = NmfOptions{a.max_iters, a.rel_tol, a.seed, 1e-12};
  cv.spline = SplineBasisSpec{a.degree, a.knots, 3};
  cv.ridge = a.ridge;
  cv.jobs = a.jobs;
  return cv;
}

Json cv_json(const CvResult& r, const CvOptions& cv) {
  Json j;
  j["grid"] = r.grid;
  j["folds"] = cv.folds;
  j["paper_literal_folds"] = cv.paper_literal_folds;
  j["seed"] = cv.seed;
  j["mean_errors"] = r.mean_errors;
  j["chosen_xi"] = r.chosen_xi;
  return j;
}

void write_cv_errors(const fs::path& path, const CvResult& r) {
  std::vector<std::string> rows;
  for (double xi : r.grid) rows.push_back(format_double(xi));
  write_matrix_tsv(path, labeled(r.fold_errors, rows, numbered("fold", r.fold_errors.cols()), "xi"));
}

int cmd_fit(const FitArgs& a, const CLI::App& sub) {
  const MethodChoice choice = resolve_method(a.method, a.xi);
  if (a.topics < 1) fail(Errc::InvalidArgument, "--topics must be at least 1");
  const CorpusMatrix corpus = read_corpus_tsv(a.corpus);
  const Matrix& y = corpus.scores;
  const auto topics = topic_labels(a.topics);
  const fs::path out = a.out;

  Json m = manifest_header("fit", sub);
  m["method"] = choice.family;
  m["n_topics"] = a.topics;
  m["n_words"] = corpus.n_words();
  m["n_docs"] = corpus.n_docs();

  if (choice.family == "semipartm") {
    if (a.aux.empty()) fail(Errc::MissingCovariates, "SemiparTM needs --aux covariates");
    const AuxiliaryTable z = read_aux_for(corpus.doc_ids, a.aux);
    const NmfOptions nmf{a.max_iters, a.rel_tol, a.seed, 1e-12};
    const SplineBasisSpec spec{a.degree, a.knots, 3};
    double xi = choice.xi.value_or(0.0);
    Json cvj;
    if (choice.cv) {
      const CvOptions cv = cv_options(a);
      const CvResult r = cross_validate_xi(y, z, a.topics, a.grid, cv);
      xi = r.chosen_xi;
      write_cv_errors(out / "cv_errors.tsv", r);
      cvj = cv_json(r, cv);
    }
    const Factorization f = nmf_fit(y, a.topics, xi, nmf);
    const TopicRegressor reg = fit_regressors(f.b, z, spec, a.ridge);
    write_matrix_tsv(out / "X.tsv", labeled(f.x, corpus.vocabulary, topics, "word"));
    write_matrix_tsv(out / "B.tsv", labeled(f.b, topics, corpus.doc_ids, "topic"));
    write_matrix_tsv(out / "B_fitted.tsv",
                     labeled(predict_topics(reg, z), topics, corpus.doc_ids, "topic"));
    save_regressor(out, reg);
    m["xi"] = xi;
    m["xi_source"] = choice.cv ? "cv" : "fixed";
    if (choice.cv) m["cv"] = cvj;
    m["nmf"] = {{"seed", nmf.seed},
                {"max_iters", nmf.max_iters},
                {"rel_tol", nmf.rel_tol},
                {"iterations", f.iterations_run},
                {"converged", f.converged},
                {"objective", f.objective_trace.empty() ? 0.0 : f.objective_trace.back()}};
    m["covariates"] = z.columns;
  } else if (choice.family == "lsa") {
    const LsaModel model = lsa_fit(y, a.topics);
    write_matrix_tsv(out / "X.tsv", labeled(model.x, corpus.vocabulary, topics, "word"));
    Matrix s(model.s.size(), 1);
    for (std::size_t k = 0; k < model.s.size(); ++k) s(k, 0) = model.s[k];
    write_matrix_tsv(out / "S.tsv", labeled(s, topics, {"singular_value"}, "topic"));
    write_matrix_tsv(out / "B.tsv", labeled(model.b, topics, corpus.doc_ids, "topic"));
  } else if (choice.family == "plsa") {
    const PlsaOptions opt{a.max_iters, a.rel_tol, a.seed, a.restarts};
    const PlsaModel model = plsa_fit(y, a.topics, opt);
    write_matrix_tsv(out / "p_w_given_t.tsv",
                     labeled(model.p_w_given_t, corpus.vocabulary, topics, "word"));
    write_matrix_tsv(out / "p_t_given_d.tsv",
                     labeled(model.p_t_given_d, topics, corpus.doc_ids, "topic"));
    m["plsa"] = {{"seed", opt.seed},
                 {"max_iters", opt.max_iters},
                 {"rel_tol", opt.rel_tol},
                 {"restarts", opt.restarts},
                 {"iterations", model.log_likelihood_trace.empty()
                                    ? 0
                                    : model.log_likelihood_trace.size() - 1},
                 {"log_likelihood", model.log_likelihood_trace.empty()
                                        ? 0.0
                                        : model.log_likelihood_trace.back()}};
  } else {
    LdaOptions opt;
    opt.alpha = a.alpha;
    opt.beta = a.beta;
    opt.sweeps = a.sweeps;
    opt.burn_in = a.burn_in;
    opt.sample_lag = a.lag;
    opt.seed = a.seed;
    opt.restarts = a.restarts;
    const LdaModel model = lda_fit(y, a.topics, opt);
    write_matrix_tsv(out / "phi.tsv", labeled(model.phi, topics, corpus.vocabulary, "topic"));
    write_matrix_tsv(out / "theta.tsv", labeled(model.theta, corpus.doc_ids, topics, "doc"));
    m["lda"] = {{"seed", opt.seed},
                {"alpha", model.alpha},
                {"beta", model.beta},
                {"sweeps", opt.sweeps},
                {"burn_in", opt.burn_in},
                {"sample_lag", opt.sample_lag},
                {"restarts", opt.restarts},
                {"chain_seed", model.seed},
                {"log_likelihood", model.log_likelihood}};
  }
  write_json(out / "manifest.json", m);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
  std::string model;
  std::string aux;
  std::string corpus;
  std::uint64_t seed = 0;
  std::string out;
};

void add_predict(CLI::App& app, PredictArgs& a) {
  auto* s = app.add_subcommand("predict", "Topic scores for new documents under a fitted model");
  s->add_option("--model", a.model, "Model directory written by 'fit'")->required();
  s->add_option("--aux", a.aux, "Covariate table (SemiparTM)");
  s->add_option("--corpus", a.corpus, "Corpus TSV (LSA, PLSA, LDA)");
  s->add_option("--seed", a.seed, "Fold-in seed for PLSA and LDA (default: the model's seed)");
  s->add_option("--out", a.out, "Output directory")->required();
  s->add_option("--config", "key = value file; command-line flags win");
}

// Rows of `corpus` re-indexed to `vocab`; words outside it are dropped and
// their total count returned through `dropped`.
Matrix align_vocabulary(const CorpusMatrix& corpus, const std::vector<std::string>& vocab,
                        double& dropped) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < vocab.size(); ++i) index.emplace(vocab[i], i);
  Matrix y(vocab.size(), corpus.n_docs());
  dropped = 0.0;
  for (std::size_t w = 0; w < corpus.n_words(); ++w) {
    const auto src = corpus.scores.row(w);
    const auto it = index.find(corpus.vocabulary[w]);
    if (it == index.end()) {
      for (double v : src) dropped += v;
      continue;
    }
    auto dst = y.row(it->second);
    for (std::size_t d = 0; d < src.size(); ++d) dst[d] += src[d];
  }
  return y;
}

int cmd_predict(const PredictArgs& a, const CLI::App& sub) {
  const fs::path dir = a.model;
  const Json model = read_json(dir / "manifest.json");
  if (!model.contains("method") || !model["method"].is_string())
    fail(Errc::Parse, (dir / "manifest.json").string() + ": no method recorded");
  const std::string method = model["method"].get<std::string>();
  const bool seed_given = sub.count("--seed") > 0;

  Json m = manifest_header("predict", sub);
  m["method"] = method;
  Matrix b;
  std::vector<std::string> doc_ids;

  if (method == "semipartm") {
    if (a.aux.empty() || !a.corpus.empty()) {
      fail(Errc::ModelInputMismatch,
           "SemiparTM predicts topic scores from covariates: pass --aux and no --corpus");
    }
    const TopicRegressor reg = load_regressor(dir);
    const CovariateTable table = read_covariate_table(a.aux);
    std::vector<std::string> expected;
    for (const auto& t : reg.terms) expected.push_back(t.name);
    if (table.columns != expected) {
      fail(Errc::ModelInputMismatch, "model expects covariates [" + join(expected, ',') +
                                         "], got [" + join(table.columns, ',') + "]");
    }
    const AuxiliaryTable z = attach_auxiliary(table.ids, table);
    b = predict_topics(reg, z);
    doc_ids = z.doc_ids;
  } else if (method == "lsa" || method == "plsa" || method == "lda") {
    if (a.corpus.empty() || !a.aux.empty()) {
      fail(Errc::ModelInputMismatch,
           method + " folds in word counts: pass --corpus and no --aux");
    }
    const CorpusMatrix corpus = read_corpus_tsv(a.corpus);
    doc_ids = corpus.doc_ids;
    double dropped = 0.0;
    if (method == "lsa") {
      LabeledMatrix x = read_matrix_tsv(dir / "X.tsv");
      const Matrix s = read_matrix_tsv(dir / "S.tsv").values;
      LsaModel lsa{std::move(x.values), s.col(0), Matrix()};
      b = lsa_transform(align_vocabulary(corpus, x.row_labels, dropped), lsa);
    } else if (method == "plsa") {
      LabeledMatrix pwt = read_matrix_tsv(dir / "p_w_given_t.tsv");
      const Json& p = model.at("plsa");
      PlsaOptions opt{p.at("max_iters").get<int>(), p.at("rel_tol").get<double>(),
                      seed_given ? a.seed : p.at("seed").get<std::uint64_t>(), 1};
      PlsaModel plsa{std::move(pwt.values), Matrix(), {}};
      b = plsa_transform(align_vocabulary(corpus, pwt.row_labels, dropped), plsa, opt);
      m["seed"] = opt.seed;
    } else {
      LabeledMatrix phi = read_matrix_tsv(dir / "phi.tsv");
      const Json& p = model.at("lda");
      LdaOptions opt;
      opt.alpha = p.at("alpha").get<double>();
      opt.beta = p.at("beta").get<double>();
      opt.sweeps = p.at("sweeps").get<int>();
      opt.burn_in = p.at("burn_in").get<int>();
      opt.sample_lag = p.at("sample_lag").get<int>();
      opt.seed = seed_given ? a.seed : p.at("seed").get<std::uint64_t>();
      LdaModel lda;
      lda.phi = std::move(phi.values);
      lda.alpha = opt.alpha;
      lda.beta = opt.beta;
      lda.seed = opt.seed;
      b = transpose(lda_transform(align_vocabulary(corpus, phi.col_labels, dropped), lda, opt));
      m["seed"] = opt.seed;
    }
    m["dropped_tokens"] = dropped;
  } else {
    fail(Errc::Parse, "unknown model method '" + method + "'");
  }
  const fs::path out = a.out;
  write_matrix_tsv(out / "topics.tsv", labeled(b, topic_labels(b.rows()), doc_ids, "topic"));
  m["n_docs"] = doc_ids.size();
  write_json(out / "manifest.json", m);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// cv

void add_cv(CLI::App& app, FitArgs& a) {
  auto* s = app.add_subcommand("cv", "Choose the SemiparTM penalty by K-fold cross-validation");
  s->add_option("--corpus", a.corpus, "Corpus TSV (words x documents)")->required();
  s->add_option("--aux", a.aux, "Covariate table")->required();
  s->add_option("--topics", a.topics, "Number of topics")->required();
  s->add_option("--grid", a.grid, "Candidate penalties")->delimiter(',')->default_str("0,0.5,1,3,10");
  s->add_option("--folds", a.folds, "Number of folds");
  s->add_flag("--paper-literal-folds", a.paper_literal_folds,
              "Train on one fold and test on the rest");
  add_model_options(s, a);
  s->add_option("--out", a.out, "Output directory")->required();
  s->add_option("--config", "key = value file; command-line flags win");
}

int cmd_cv(const FitArgs& a, const CLI::App& sub) {
  if (a.topics < 1) fail(Errc::InvalidArgument, "--topics must be at least 1");
  const CorpusMatrix corpus = read_corpus_tsv(a.corpus);
  const AuxiliaryTable z = read_aux_for(corpus.doc_ids, a.aux);
  const CvOptions cv = cv_options(a);
  const CvResult r = cross_validate_xi(corpus.scores, z, a.topics, a.grid, cv);
  const fs::path out = a.out;
  write_cv_errors(out / "cv_errors.tsv", r);
  Matrix folds(r.fold_of.size(), 1);
  for (std::size_t d = 0; d < r.fold_of.size(); ++d) folds(d, 0) = static_cast<double>(r.fold_of[d] + 1);
  write_matrix_tsv(out / "folds.tsv", labeled(folds, corpus.doc_ids, {"fold"}, "id"));
  Json m = manifest_header("cv", sub);
  m["n_topics"] = a.topics;
  m["cv"] = cv_json(r, cv);
  m["chosen_xi"] = r.chosen_xi;
  write_json(out / "manifest.json", m);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::size_t docs = 150;
  std::size_t words = 500;
  double sparsity = 0.70;
  double m = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  double holdout_fraction = 0.25;
  std::string out;
};

void add_simulate(CLI::App& app, SimulateArgs& a) {
  auto* s = app.add_subcommand("simulate", "Generate one synthetic corpus with known topics");
  s->add_option("--docs", a.docs, "Training documents");
  s->add_option("--words", a.words, "Vocabulary size");
  s->add_option("--sparsity", a.sparsity, "Probability of zeroing a topic score or dictionary cell");
  s->add_option("--m", a.m, "Noise multiplier (1 = no misspecification, 2 = present)");
  s->add_option("--seed", a.seed, "Base seed");
  s->add_option("--replicate", a.replicate, "Replicate index");
  s->add_option("--holdout-fraction", a.holdout_fraction, "Holdout documents per training document");
  s->add_option("--out", a.out, "Output directory")->required();
  s->add_option("--config", "key = value file; command-line flags win");
}

Json seeds_json(const ScenarioConfig& c) {
  Json j;
  for (const char* name : {"auxiliary", "topics", "dictionary", "corpus"}) j[name] = component_seed(c, name);
  return j;
}

int cmd_simulate(const SimulateArgs& a, const CLI::App& sub) {
  ScenarioConfig c;
  c.n_docs = a.docs;
  c.n_words = a.words;
  c.sparsity = a.sparsity;
  c.misspec = a.m;
  c.seed = a.seed;
  c.replicate = a.replicate;
  c.holdout_fraction = a.holdout_fraction;
  const SyntheticDataset ds = run_scenario(c);
  const fs::path out = a.out;
  const auto topics = topic_labels(kSimTopics);
  write_corpus_tsv(out / "y_train.tsv", ds.y_train);
  write_corpus_tsv(out / "y_holdout.tsv", ds.y_holdout);
  write_auxiliary_tsv(out / "z_train.tsv", ds.z_train);
  write_auxiliary_tsv(out / "z_holdout.tsv", ds.z_holdout);
  write_matrix_tsv(out / "x_true.tsv", labeled(ds.x_true, ds.y_train.vocabulary, topics, "word"));
  write_matrix_tsv(out / "b_true_train.tsv",
                   labeled(ds.b_true_train, topics, ds.y_train.doc_ids, "topic"));
  write_matrix_tsv(out / "b_true_holdout.tsv",
                   labeled(ds.b_true_holdout, topics, ds.y_holdout.doc_ids, "topic"));
  Json m = manifest_header("simulate", sub);
  m["seeds"] = seeds_json(c);
  m["holdout_docs"] = ds.y_holdout.n_docs();
  m["clamp_rate"] = ds.clamp_rate;
  write_json(out / "manifest.json", m);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::vector<std::size_t> docs{150};
  std::vector<std::size_t> words{500};
  std::vector<double> sparsity{0.70};
  std::vector<double> m{1.0};
  bool full_grid = false;
  std::size_t reps = 10;
  std::vector<std::string> methods{"lsa", "plsa", "lda", "semipartm1", "semipartm3", "semipartmcv"};
  std::uint64_t seed = 0;
  double holdout_fraction = 0.25;
  unsigned jobs = 1;
  bool plan_only = false;
  bool no_align = false;
  bool paper_literal_folds = false;
  std::vector<double> grid = kDefaultXiGrid;
  std::size_t folds = 5;
  int max_iters = 500;
  int plsa_restarts = 1;
  int lda_sweeps = 1000;
  int lda_burn_in = 500;
  int lda_lag = 10;
  std::string out;
};

void add_evaluate(CLI::App& app, EvaluateArgs& a) {
  auto* s = app.add_subcommand(
      "evaluate", "Simulate a grid of scenarios, fit the requested methods and score them against the truth");
  s->add_option("--docs", a.docs, "Training-document levels")->delimiter(',')->default_str("150");
  s->add_option("--words", a.words, "Vocabulary-size levels")->delimiter(',')->default_str("500");
  s->add_option("--sparsity", a.sparsity, "Sparsity levels")->delimiter(',')->default_str("0.7");
  s->add_option("--m", a.m, "Noise-multiplier levels")->delimiter(',')->default_str("1");
  s->add_flag("--full-grid", a.full_grid,
              "All 54 cells: docs 150,1000,3000; words 500,1500,3500; sparsity 0.7,0.9,0.99; m 1,2");
  s->add_option("--reps", a.reps, "Replicates per cell");
  s->add_option("--methods", a.methods, "Methods to run")
      ->delimiter(',')
      ->default_str("lsa,plsa,lda,semipartm1,semipartm3,semipartmcv");
  s->add_option("--seed", a.seed, "Base seed");
  s->add_option("--holdout-fraction", a.holdout_fraction, "Holdout documents per training document");
  s->add_option("--jobs", a.jobs, "Concurrent (cell, replicate) jobs");
  s->add_flag("--plan-only", a.plan_only, "Write the manifest of planned cells and stop");
  s->add_flag("--no-align", a.no_align, "Score topics in index order instead of aligning them");
  s->add_flag("--paper-literal-folds", a.paper_literal_folds,
              "Cross-validation trains on one fold and tests on the rest");
  s->add_option("--grid", a.grid, "Penalty candidates for SemiparTM-cv")
      ->delimiter(',')
      ->default_str("0,0.5,1,3,10");
  s->add_option("--folds", a.folds, "Cross-validation folds");
  s->add_option("--max-iters", a.max_iters, "Iteration cap for NMF and PLSA");
  s->add_option("--plsa-restarts", a.plsa_restarts, "PLSA restarts");
  s->add_option("--lda-sweeps", a.lda_sweeps, "LDA Gibbs sweeps");
  s->add_option("--lda-burn-in", a.lda_burn_in, "LDA burn-in sweeps");
  s->add_option("--lda-lag", a.lda_lag, "LDA sweeps between averaged samples");
  s->add_option("--out", a.out, "Output directory")->required();
  s->add_option("--config", "key = value file; command-line flags win");
}

int cmd_evaluate(const EvaluateArgs& a, const CLI::App& sub) {
  SimEvalSpec spec;
  spec.docs = a.docs;
  spec.words = a.words;
  spec.sparsity = a.sparsity;
  spec.misspec = a.m;
  if (a.full_grid) {
    spec.docs = {150, 1000, 3000};
    spec.words = {500, 1500, 3500};
    spec.sparsity = {0.70, 0.90, 0.99};
    spec.misspec = {1.0, 2.0};
  }
  spec.methods.clear();
  for (const auto& name : a.methods) {
    const auto mth = parse_method(name);
    if (!mth) fail(Errc::InvalidArgument, "unknown method '" + name + "'");
    spec.methods.push_back(*mth);
  }
  spec.reps = a.reps;
  spec.seed = a.seed;
  spec.holdout_fraction = a.holdout_fraction;
  spec.jobs = a.jobs;
  spec.plan_only = a.plan_only;
  spec.eval.align = !a.no_align;
  spec.eval.paper_literal_folds = a.paper_literal_folds;
  spec.eval.cv_grid = a.grid;
  spec.eval.cv_folds = a.folds;
  spec.eval.nmf.max_iters = a.max_iters;
  spec.eval.plsa.max_iters = a.max_iters;
  spec.eval.plsa.restarts = a.plsa_restarts;
  spec.eval.lda.sweeps = a.lda_sweeps;
  spec.eval.lda.burn_in = a.lda_burn_in;
  spec.eval.lda.sample_lag = a.lda_lag;
  spec.out = a.out;

  const SimEvalOutcome outcome = cmd_simulate_eval(spec, resolved_config(sub));
  if (!outcome.failures.empty()) {
    const Json& first = outcome.failures.front();
    const std::string code = first.at("error").get<std::string>();
    ErrorClass cls = ErrorClass::Data;
    if (first.at("class") == "numerical") cls = ErrorClass::Numerical;
    if (first.at("class") == "usage") cls = ErrorClass::Usage;
    return emit_error("evaluate", code, cls,
                      std::to_string(outcome.failures.size()) +
                          " job(s) failed; partial results and failures.json written; first: " +
                          first.at("message").get<std::string>());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::string rows;
  std::string row_key = "docs";
  std::string col_key = "words";
  std::string out;
};

void add_report(CLI::App& app, ReportArgs& a) {
  auto* s = app.add_subcommand("report", "Aggregate per-replicate rows into a comparison table");
  s->add_option("--rows", a.rows, "rows.tsv written by 'evaluate'")->required();
  s->add_option("--row-key", a.row_key, "docs, words, sparsity or m");
  s->add_option("--col-key", a.col_key, "docs, words, sparsity or m");
  s->add_option("--out", a.out, "Output directory")->required();
  s->add_option("--config", "key = value file; command-line flags win");
}

GroupKey group_key_arg(const std::string& s) {
  const auto k = parse_group_key(s);
  if (!k) fail(Errc::InvalidArgument, "unknown grouping key '" + s + "'");
  return *k;
}

int cmd_report(const ReportArgs& a, const CLI::App&) {
  const auto rows = rows_from_tsv(read_text_file(a.rows));
  const Report rep = aggregate_report(rows, group_key_arg(a.row_key), group_key_arg(a.col_key));
  const fs::path out = a.out;
  write_text_file(out / "report.txt", render_report_text(rep));
  write_text_file(out / "report.tsv", render_report_tsv(rep));
  return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<ScenarioCell> enumerate_cells(const SimEvalSpec& spec) {
  std::vector<ScenarioCell> cells;
  for (auto d : spec.docs)
    for (auto w : spec.words)
      for (auto s : spec.sparsity)
        for (auto m : spec.misspec) cells.push_back(ScenarioCell{d, w, s, m});
  return cells;
}

SimEvalOutcome cmd_simulate_eval(const SimEvalSpec& spec, const Json& config) {
  if (spec.reps == 0) fail(Errc::EmptyInput, "evaluate: at least one replicate is required");
  if (spec.methods.empty()) fail(Errc::EmptyInput, "evaluate: no methods requested");
  const auto cells = enumerate_cells(spec);
  if (cells.empty()) fail(Errc::EmptyInput, "evaluate: the scenario grid is empty");
  if (spec.out.empty()) fail(Errc::InvalidArgument, "evaluate: no output directory");

  auto scenario = [&](const ScenarioCell& c, std::size_t r) {
    ScenarioConfig sc;
    sc.n_docs = c.docs;
    sc.n_words = c.words;
    sc.sparsity = c.sparsity;
    sc.misspec = c.misspec;
    sc.holdout_fraction = spec.holdout_fraction;
    sc.seed = spec.seed;
    sc.replicate = r;
    return sc;
  };

  Json manifest;
  manifest["command"] = "evaluate";
  manifest["config"] = config;
  manifest["seed"] = spec.seed;
  manifest["replicates"] = spec.reps;
  Json methods = Json::array();
  for (Method m : spec.methods) methods.push_back(method_name(m));
  manifest["methods"] = methods;
  Json cell_list = Json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    validate(scenario(c, 0));
    Json reps = Json::array();
    for (std::size_t r = 0; r < spec.reps; ++r) {
      reps.push_back({{"replicate", r}, {"seeds", seeds_json(scenario(c, r))}});
    }
    cell_list.push_back({{"index", i},
                         {"docs", c.docs},
                         {"words", c.words},
                         {"sparsity", c.sparsity},
                         {"m", c.misspec},
                         {"replicates", std::move(reps)}});
  }
  manifest["n_cells"] = cells.size();
  manifest["cells"] = std::move(cell_list);

  SimEvalOutcome outcome;
  outcome.n_cells = cells.size();
  if (spec.plan_only) {
    manifest["status"] = "planned";
    write_json(spec.out / "manifest.json", manifest);
    return outcome;
  }

  const std::size_t n_methods = spec.methods.size();
  const std::size_t n_jobs = cells.size() * spec.reps;
  std::vector<std::vector<std::optional<EvalRow>>> results(n_jobs);
  std::vector<std::vector<Json>> failures(n_jobs);
  EvalOptions eval = spec.eval;
  eval.jobs = 1;

  parallel_for(n_jobs, spec.jobs, [&](std::size_t job) {
    const std::size_t ci = job / spec.reps;
    const std::size_t r = job % spec.reps;
    const ScenarioCell& c = cells[ci];
    results[job].resize(n_methods);
    auto record = [&](std::string_view method, std::string_view code, ErrorClass cls,
                      std::string_view message) {
      Json f = error_record("evaluate", code, cls, message);
      f["cell"] = ci;
      f["replicate"] = r;
      f["method"] = method;
      failures[job].push_back(std::move(f));
    };
    std::optional<SyntheticDataset> ds;
    try {
      ds = run_scenario(scenario(c, r));
    } catch (const Error& e) {
      for (Method m : spec.methods)
        record(method_name(m), errc_name(e.code()), error_class(e.code()), e.what());
      return;
    }
    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      const Method m = spec.methods[mi];
      try {
        results[job][mi] = evaluate_method(*ds, m, eval);
      } catch (const Error& e) {
        record(method_name(m), errc_name(e.code()), error_class(e.code()), e.what());
      } catch (const std::exception& e) {
        record(method_name(m), "Internal", ErrorClass::Data, e.what());
      }
    }
  });

  for (std::size_t job = 0; job < n_jobs; ++job) {
    for (auto& row : results[job])
      if (row) outcome.rows.push_back(std::move(*row));
    for (auto& f : failures[job]) outcome.failures.push_back(std::move(f));
  }

  write_text_file(spec.out / "rows.tsv", rows_to_tsv(outcome.rows));
  Json reports = Json::array();
  if (!outcome.rows.empty()) {
    const std::pair<GroupKey, GroupKey> layouts[] = {{GroupKey::Docs, GroupKey::Words},
                                                      {GroupKey::Docs, GroupKey::Sparsity},
                                                      {GroupKey::Docs, GroupKey::Misspec},
                                                      {GroupKey::Words, GroupKey::Misspec},
                                                      {GroupKey::Sparsity, GroupKey::Misspec}};
    for (const auto& [rk, ck] : layouts) {
      const Report rep = aggregate_report(outcome.rows, rk, ck);
      const std::string stem =
          "report_" + std::string(group_key_name(rk)) + "_" + std::string(group_key_name(ck));
      write_text_file(spec.out / (stem + ".txt"), render_report_text(rep));
      write_text_file(spec.out / (stem + ".tsv"), render_report_tsv(rep));
      reports.push_back(stem);
    }
  }
  manifest["reports"] = reports;
  manifest["rows"] = outcome.rows.size();
  manifest["status"] = outcome.failures.empty() ? "ok" : "partial";
  manifest["failures"] = outcome.failures;
  if (!outcome.failures.empty()) write_json(spec.out / "failures.json", outcome.failures);
  write_json(spec.out / "manifest.json", manifest);
  return outcome;
}

int run(const std::vector<std::string>& raw) {
  CLI::App app{"Semiparametric topic modeling: sparse NMF with spline regression on document "
               "covariates, LSA/PLSA/LDA baselines, and a simulation study",
               "semipartm"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  IngestArgs ingest;
  FitArgs fit;
  FitArgs cv;
  PredictArgs predict;
  SimulateArgs simulate;
  EvaluateArgs evaluate;
  ReportArgs report;
  add_ingest(app, ingest);
  add_fit(app, fit);
  add_predict(app, predict);
  add_cv(app, cv);
  add_simulate(app, simulate);
  add_evaluate(app, evaluate);
  add_report(app, report);

  const std::string command = raw.empty() ? std::string() : raw[0];
  try {
    auto args = expand_config(app, raw);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return kExitOk;
    }
    app.exit(e);
    return emit_error(command, "Usage", ErrorClass::Usage, e.what());
  } catch (const Error& e) {
    return emit_error(command, errc_name(e.code()), error_class(e.code()), e.what());
  } catch (const std::exception& e) {
    return emit_error(command, "Io", ErrorClass::Data, e.what());
  }

  const std::map<std::string, std::function<int(const CLI::App&)>> handlers = {
      {"ingest", [&](const CLI::App& s) { return cmd_ingest(ingest, s); }},
      {"fit", [&](const CLI::App& s) { return cmd_fit(fit, s); }},
      {"predict", [&](const CLI::App& s) { return cmd_predict(predict, s); }},
      {"cv", [&](const CLI::App& s) { return cmd_cv(cv, s); }},
      {"simulate", [&](const CLI::App& s) { return cmd_simulate(simulate, s); }},
      {"evaluate", [&](const CLI::App& s) { return cmd_evaluate(evaluate, s); }},
      {"report", [&](const CLI::App& s) { return cmd_report(report, s); }},
  };
  const CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    return handlers.at(name)(*sub);
  } catch (const Error& e) {
    return emit_error(name, errc_name(e.code()), error_class(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return emit_error(name, "Parse", ErrorClass::Data, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return emit_error(name, "Io", ErrorClass::Data, e.what());
  } catch (const std::exception& e) {
    return emit_error(name, "Internal", ErrorClass::Data, e.what());
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace semipartm::cli
