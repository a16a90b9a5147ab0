#include "semipartm/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "semipartm/error.hpp"
#include "semipartm/io.hpp"

namespace semipartm {

namespace {

bool is_token_char(unsigned char c) { return c < 0x80 && std::isalnum(c); }

void require_unique_ids(const std::vector<Document>& docs) {
  std::set<std::string_view> seen;
  for (const auto& d : docs) {
    if (!seen.insert(d.id).second) fail(Errc::DuplicateId, "duplicate document id '" + d.id + "'");
  }
}

CorpusMatrix count_into(const std::vector<Document>& docs,
                        const std::vector<std::string>& vocabulary,
                        const TokenizeOptions& options, std::size_t& dropped) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(vocabulary.size());
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    if (!index.emplace(vocabulary[i], i).second) {
      fail(Errc::DuplicateId, "duplicate vocabulary entry '" + vocabulary[i] + "'");
    }
  }
  CorpusMatrix out;
  out.vocabulary = vocabulary;
  out.scores = Matrix(vocabulary.size(), docs.size());
  out.doc_ids.reserve(docs.size());
  dropped = 0;
  for (std::size_t j = 0; j < docs.size(); ++j) {
    out.doc_ids.push_back(docs[j].id);
    for (const auto& tok : tokenize(docs[j].text, options)) {
      auto it = index.find(tok);
      if (it == index.end()) {
        ++dropped;
        continue;
      }
      out.scores(it->second, j) += 1.0;
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const TokenizeOptions& options) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_token_char(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && is_token_char(static_cast<unsigned char>(text[i]))) ++i;
    if (start == i) continue;
    std::string tok(text.substr(start, i - start));
    if (options.lowercase) {
      for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (options.stop_words.contains(tok)) continue;
    if (options.stem) tok = porter_stem(tok);
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

CorpusMatrix build_corpus(const std::vector<Document>& docs, const TokenizeOptions& options) {
  require_unique_ids(docs);
  std::set<std::string> vocab;
  for (const auto& d : docs) {
    for (auto& tok : tokenize(d.text, options)) vocab.insert(std::move(tok));
  }
  if (vocab.empty()) fail(Errc::AllDocumentsEmpty, "build_corpus: every document is empty");
  std::size_t dropped = 0;
  return count_into(docs, std::vector<std::string>(vocab.begin(), vocab.end()), options,
                    dropped);
}

VectorizeResult vectorize(const std::vector<Document>& docs,
                          const std::vector<std::string>& vocabulary,
                          const TokenizeOptions& options) {
  require_unique_ids(docs);
  VectorizeResult out;
  out.corpus = count_into(docs, vocabulary, options, out.dropped_tokens);
  return out;
}

double corpus_sparsity(const Matrix& scores) {
  if (scores.size() == 0) fail(Errc::EmptyInput, "corpus_sparsity: empty matrix");
  auto v = scores.values();
  auto zeros = std::count(v.begin(), v.end(), 0.0);
  return static_cast<double>(zeros) / static_cast<double>(v.size());
}

CovariateTable covariates_from_documents(const std::vector<Document>& docs,
                                         std::vector<std::string> column_names) {
  CovariateTable table;
  std::size_t p = column_names.size();
  bool have_p = !column_names.empty();
  for (const auto& d : docs) {
    if (!d.covariates) fail(Errc::MissingCovariates, "document '" + d.id + "' has no covariates");
    if (!have_p) {
      p = d.covariates->size();
      have_p = true;
    }
    if (d.covariates->size() != p) {
      fail(Errc::LengthMismatch, "document '" + d.id + "' has " +
                                     std::to_string(d.covariates->size()) +
                                     " covariates, expected " + std::to_string(p));
    }
    table.ids.push_back(d.id);
    std::vector<std::string> row;
    row.reserve(p);
    for (double v : *d.covariates) row.push_back(format_double(v));
    table.cells.push_back(std::move(row));
  }
  if (column_names.empty()) {
    for (std::size_t l = 0; l < p; ++l) column_names.push_back("z" + std::to_string(l + 1));
  }
  table.columns = std::move(column_names);
  return table;
}

AuxiliaryTable attach_auxiliary(const std::vector<std::string>& doc_ids,
                                const CovariateTable& records) {
  std::unordered_map<std::string_view, std::size_t> row_of;
  for (std::size_t r = 0; r < records.ids.size(); ++r) {
    if (!row_of.emplace(records.ids[r], r).second) {
      fail(Errc::DuplicateId, "duplicate covariate record '" + records.ids[r] + "'");
    }
  }
  const std::size_t p = records.columns.size();
  AuxiliaryTable out;
  out.doc_ids = doc_ids;
  out.columns = records.columns;
  out.values = Matrix(doc_ids.size(), p);
  for (std::size_t j = 0; j < doc_ids.size(); ++j) {
    auto it = row_of.find(doc_ids[j]);
    if (it == row_of.end()) {
      fail(Errc::MissingCovariates, "MissingCovariates(" + doc_ids[j] + ")");
    }
    const std::size_t r = it->second;
    const auto& cells = records.cells[r];
    if (cells.size() != p) {
      fail(Errc::LengthMismatch, "covariate record '" + records.ids[r] + "' has " +
                                     std::to_string(cells.size()) + " values, expected " +
                                     std::to_string(p));
    }
    for (std::size_t l = 0; l < p; ++l) {
      auto parsed = parse_double(cells[l]);
      if (!parsed || !std::isfinite(*parsed)) {
        fail(Errc::NonNumericValue, "NonNumericValue(" + std::to_string(r) + ", " +
                                        records.columns[l] + "): '" + cells[l] + "'");
      }
      out.values(j, l) = *parsed;
    }
  }
  return out;
}

CorpusMatrix select_docs(const CorpusMatrix& corpus, const std::vector<std::size_t>& docs) {
  CorpusMatrix out;
  out.vocabulary = corpus.vocabulary;
  out.scores = corpus.scores.select_cols(docs);
  for (std::size_t j : docs) out.doc_ids.push_back(corpus.doc_ids[j]);
  return out;
}

AuxiliaryTable select_docs(const AuxiliaryTable& table, const std::vector<std::size_t>& docs) {
  AuxiliaryTable out;
  out.columns = table.columns;
  out.values = Matrix(docs.size(), table.n_covariates());
  for (std::size_t r = 0; r < docs.size(); ++r) {
    out.doc_ids.push_back(table.doc_ids[docs[r]]);
    auto src = table.values.row(docs[r]);
    std::copy(src.begin(), src.end(), out.values.row(r).begin());
  }
  return out;
}

}  // namespace semipartm
