#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "semipartm/matrix.hpp"

namespace semipartm {

struct Document {
  std::string id;
  std::string text;
  std::optional<std::vector<double>> covariates;
};

// Preprocessing pipeline. Tokens are maximal runs of ASCII letters and digits;
// everything else separates tokens. Stop words are matched after lowercasing
// and before stemming.
struct TokenizeOptions {
  bool lowercase = true;
  bool stem = false;
  std::unordered_set<std::string> stop_words;
};

std::vector<std::string> tokenize(std::string_view text, const TokenizeOptions& options);

// Porter (1980) suffix stripping. Input is expected to be lowercase ASCII;
// words of length <= 2 are returned unchanged.
std::string porter_stem(std::string_view word);

// W x D raw term-count matrix. Row i is vocabulary[i], column j is doc_ids[j].
struct CorpusMatrix {
  std::vector<std::string> vocabulary;
  std::vector<std::string> doc_ids;
  Matrix scores;

  std::size_t n_words() const { return vocabulary.size(); }
  std::size_t n_docs() const { return doc_ids.size(); }
};

// Vocabulary is the lexicographically sorted set of all tokens. Throws
// Errc::AllDocumentsEmpty if nothing survives preprocessing and
// Errc::DuplicateId on repeated document ids.
CorpusMatrix build_corpus(const std::vector<Document>& docs, const TokenizeOptions& options);

struct VectorizeResult {
  CorpusMatrix corpus;
  std::size_t dropped_tokens = 0;
};

// Counts documents against a frozen vocabulary; out-of-vocabulary tokens are
// dropped and counted.
VectorizeResult vectorize(const std::vector<Document>& docs,
                          const std::vector<std::string>& vocabulary,
                          const TokenizeOptions& options);

// Fraction of exactly-zero cells.
double corpus_sparsity(const Matrix& scores);

// D x p covariate matrix aligned with a corpus' document order.
struct AuxiliaryTable {
  std::vector<std::string> doc_ids;
  std::vector<std::string> columns;
  Matrix values;

  std::size_t n_docs() const { return doc_ids.size(); }
  std::size_t n_covariates() const { return columns.size(); }
};

// Raw covariate records as read from a delimited file: cells are unparsed.
struct CovariateTable {
  std::vector<std::string> columns;
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> cells;
};

// Collects per-document covariates into a table. Every document must carry
// covariates of the same length, which must equal `column_names.size()` when
// names are given (names default to z1..zp).
CovariateTable covariates_from_documents(const std::vector<Document>& docs,
                                         std::vector<std::string> column_names = {});

// Reorders records to follow corpus.doc_ids. Throws Errc::MissingCovariates
// naming the first absent id and Errc::NonNumericValue with (row, column) for
// unparseable or empty cells.
AuxiliaryTable attach_auxiliary(const std::vector<std::string>& doc_ids,
                                const CovariateTable& records);
inline AuxiliaryTable attach_auxiliary(const CorpusMatrix& corpus,
                                       const CovariateTable& records) {
  return attach_auxiliary(corpus.doc_ids, records);
}

// Subset of documents (columns of a corpus, rows of an auxiliary table).
CorpusMatrix select_docs(const CorpusMatrix& corpus, const std::vector<std::size_t>& docs);
AuxiliaryTable select_docs(const AuxiliaryTable& table, const std::vector<std::size_t>& docs);

}  // namespace semipartm
