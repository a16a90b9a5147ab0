#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semipartm/baselines.hpp"
#include "semipartm/matrix.hpp"
#include "semipartm/nmf.hpp"
#include "semipartm/simulate.hpp"
#include "semipartm/splinereg.hpp"
#include "semipartm/tuning.hpp"

namespace semipartm {

// u.v / (|u| |v|), or 0 when either norm is 0. Throws Errc::LengthMismatch.
double cosine(std::span<const double> u, std::span<const double> v);

// Which axis of a matrix indexes topics: rows for topic matrices (T x D),
// columns for dictionaries (W x T).
enum class TopicAxis { Rows, Columns };

// Per-topic cosines between paired topic vectors. Throws Errc::ShapeMismatch.
std::vector<double> topic_similarities(const Matrix& truth, const Matrix& est, TopicAxis axis);

// Mean of topic_similarities.
double matrix_similarity(const Matrix& truth, const Matrix& est, TopicAxis axis);

// T x T matrix of cosines, entry (i, j) = cos(true topic i, estimated topic j).
Matrix cosine_matrix(const Matrix& truth, const Matrix& est, TopicAxis axis);

// Maximum-weight perfect matching on a square score matrix. Returns perm with
// perm[i] = column assigned to row i.
std::vector<std::size_t> hungarian_max(const Matrix& score);

// perm[k] = estimated topic paired with true topic k, maximizing the total
// cosine. Throws Errc::ShapeMismatch when the topic counts differ.
std::vector<std::size_t> align_topics(const Matrix& truth, const Matrix& est, TopicAxis axis);

// Reorders the topics of `est` so that topic k of the result is perm[k].
Matrix permute_topics(const Matrix& est, const std::vector<std::size_t>& perm, TopicAxis axis);

enum class Method { Lsa, Plsa, Lda, SemiparTm1, SemiparTm3, SemiparTmCv };

inline constexpr Method kAllMethods[] = {Method::Lsa,        Method::Plsa,       Method::Lda,
                                         Method::SemiparTm1, Method::SemiparTm3, Method::SemiparTmCv};

std::string_view method_name(Method m);  // "LSA", ..., "SemiparTM-cv"
// Accepts display names and short forms such as "lsa" or "semipartm1".
std::optional<Method> parse_method(std::string_view s);

struct EvalOptions {
  bool align = true;  // false scores topics in index order
  NmfOptions nmf;
  SplineBasisSpec spline;
  double ridge = 1e-6;
  std::vector<double> cv_grid = kDefaultXiGrid;
  std::size_t cv_folds = 5;
  bool paper_literal_folds = false;
  PlsaOptions plsa;
  LdaOptions lda;
  unsigned jobs = 1;  // threads inside cross-validation
};

// Estimated structures in ground-truth orientation: x_hat is W x T, the topic
// matrices are T x D.
struct Estimates {
  Matrix x_hat;
  Matrix b_train;
  Matrix b_holdout;
  std::optional<double> xi;  // SemiparTM only
};

struct EvalRow {
  std::string method;
  std::size_t n_docs = 0;
  std::size_t n_words = 0;
  double sparsity = 0.0;
  double misspec = 0.0;
  std::uint64_t replicate = 0;
  std::optional<double> xi;
  double topic_train = 0.0;
  double topic_holdout = 0.0;
  double dictionary_train = 0.0;
  double clamp_rate = 0.0;
  std::vector<std::size_t> permutation;
};

// Seed of one method family for a dataset. SemiparTM variants share a seed so
// that they start from the same factorization.
std::uint64_t method_seed(const SyntheticDataset& ds, Method m);

Estimates fit_method(const SyntheticDataset& ds, Method m, const EvalOptions& options = {});

// Scores estimates against the dataset's ground truth. Alignment is computed
// once on the dictionary and reused for both topic matrices.
EvalRow score_estimates(const SyntheticDataset& ds, std::string_view method,
                        const Estimates& est, bool align = true);

EvalRow evaluate_method(const SyntheticDataset& ds, Method m, const EvalOptions& options = {});

enum class GroupKey { Docs, Words, Sparsity, Misspec };
std::string_view group_key_name(GroupKey k);  // "docs", "words", "sparsity", "m"
std::optional<GroupKey> parse_group_key(std::string_view s);

struct ReportCell {
  std::string method;
  double row_level = 0.0;
  double col_level = 0.0;
  std::size_t count = 0;
  double topic_train = 0.0;
  double topic_holdout = 0.0;
  double dictionary_train = 0.0;
};

struct Report {
  GroupKey row_key = GroupKey::Docs;
  GroupKey col_key = GroupKey::Words;
  std::vector<std::string> methods;  // known methods in canonical order first
  std::vector<double> row_levels;    // ascending
  std::vector<double> col_levels;    // ascending
  std::vector<ReportCell> cells;     // sorted by (method, row, col); absent cells omitted
  const ReportCell* find(std::string_view method, double row_level, double col_level) const;
};

// Mean of each similarity over all rows falling into a (method, row level,
// column level) cell. Throws Errc::EmptyInput for no rows.
Report aggregate_report(const std::vector<EvalRow>& rows, GroupKey row_key = GroupKey::Docs,
                        GroupKey col_key = GroupKey::Words);

// Plain-text table with one row per (method, row level) and column blocks for
// training topics, holdout topics and training dictionary.
std::string render_report_text(const Report& report);
// Long-format TSV of the report cells.
std::string render_report_tsv(const Report& report);

std::string rows_to_tsv(const std::vector<EvalRow>& rows);
std::vector<EvalRow> rows_from_tsv(std::string_view text);

}  // namespace semipartm
