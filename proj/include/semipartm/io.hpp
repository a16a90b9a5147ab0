#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semipartm/corpus.hpp"
#include "semipartm/matrix.hpp"

namespace semipartm {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
// Strict full-string parse (surrounding whitespace allowed).
std::optional<double> parse_double(std::string_view s);

// Matrix with row and column labels. On disk: tab-separated, header row holds
// `corner` followed by the column labels, each following line holds a row
// label and the row's values.
struct LabeledMatrix {
  std::string corner = "id";
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  Matrix values;
};

// Labels default to "<prefix><index>" when empty.
LabeledMatrix label_matrix(Matrix m, std::string_view row_prefix, std::string_view col_prefix,
                           std::string corner = "id");

void write_matrix_tsv(const std::filesystem::path& path, const LabeledMatrix& m);
LabeledMatrix read_matrix_tsv(const std::filesystem::path& path);

// Corpus files use words as row labels and document ids as column labels.
void write_corpus_tsv(const std::filesystem::path& path, const CorpusMatrix& corpus);
CorpusMatrix read_corpus_tsv(const std::filesystem::path& path);

// Auxiliary tables are stored one document per row, first column `id`.
void write_auxiliary_tsv(const std::filesystem::path& path, const AuxiliaryTable& table);

// JSON Lines: one object per line with `id`, `text` and optional `covariates`.
std::vector<Document> read_documents_jsonl(const std::filesystem::path& path);

// Delimited table with a header whose first column is `id`. The delimiter is
// a tab if the header contains one, otherwise a comma.
CovariateTable read_covariate_table(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace semipartm
