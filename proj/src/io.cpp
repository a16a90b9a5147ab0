#include "semipartm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "semipartm/error.hpp"

namespace semipartm {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::Io, "cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) fail(Errc::Io, "format_double: conversion failed");
  return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

LabeledMatrix label_matrix(Matrix m, std::string_view row_prefix, std::string_view col_prefix,
                           std::string corner) {
  LabeledMatrix out;
  out.corner = std::move(corner);
  for (std::size_t i = 0; i < m.rows(); ++i)
    out.row_labels.push_back(std::string(row_prefix) + std::to_string(i));
  for (std::size_t j = 0; j < m.cols(); ++j)
    out.col_labels.push_back(std::string(col_prefix) + std::to_string(j));
  out.values = std::move(m);
  return out;
}

void write_matrix_tsv(const fs::path& path, const LabeledMatrix& m) {
  if (m.row_labels.size() != m.values.rows() || m.col_labels.size() != m.values.cols()) {
    fail(Errc::DimensionMismatch, "write_matrix_tsv: labels do not match matrix shape");
  }
  std::string out = m.corner;
  for (const auto& c : m.col_labels) {
    out += '\t';
    out += c;
  }
  out += '\n';
  for (std::size_t i = 0; i < m.values.rows(); ++i) {
    out += m.row_labels[i];
    for (double v : m.values.row(i)) {
      out += '\t';
      out += format_double(v);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

LabeledMatrix read_matrix_tsv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) fail(Errc::Parse, "'" + path.string() + "': missing header");
  auto header = split(strip_cr(line), '\t');
  LabeledMatrix out;
  out.corner = header.front();
  out.col_labels.assign(header.begin() + 1, header.end());
  const std::size_t cols = out.col_labels.size();
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = strip_cr(line);
    if (body.empty()) continue;
    auto fields = split(body, '\t');
    if (fields.size() != cols + 1) {
      fail(Errc::Parse, "'" + path.string() + "' line " + std::to_string(line_no) + ": expected " +
                            std::to_string(cols + 1) + " fields, got " +
                            std::to_string(fields.size()));
    }
    out.row_labels.push_back(fields.front());
    for (std::size_t k = 1; k < fields.size(); ++k) {
      auto v = parse_double(fields[k]);
      if (!v || !std::isfinite(*v)) {
        fail(Errc::NonNumericValue, "'" + path.string() + "' line " + std::to_string(line_no) +
                                        " column " + std::to_string(k) + ": '" + fields[k] + "'");
      }
      values.push_back(*v);
    }
  }
  out.values = Matrix(out.row_labels.size(), cols);
  std::copy(values.begin(), values.end(), out.values.values().begin());
  return out;
}

void write_corpus_tsv(const fs::path& path, const CorpusMatrix& corpus) {
  LabeledMatrix m;
  m.corner = "word";
  m.row_labels = corpus.vocabulary;
  m.col_labels = corpus.doc_ids;
  m.values = corpus.scores;
  write_matrix_tsv(path, m);
}

CorpusMatrix read_corpus_tsv(const fs::path& path) {
  auto m = read_matrix_tsv(path);
  CorpusMatrix out;
  out.vocabulary = std::move(m.row_labels);
  out.doc_ids = std::move(m.col_labels);
  out.scores = std::move(m.values);
  return out;
}

void write_auxiliary_tsv(const fs::path& path, const AuxiliaryTable& table) {
  LabeledMatrix m;
  m.corner = "id";
  m.row_labels = table.doc_ids;
  m.col_labels = table.columns;
  m.values = table.values;
  write_matrix_tsv(path, m);
}

std::vector<Document> read_documents_jsonl(const fs::path& path) {
  auto in = open_in(path);
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = strip_cr(line);
    if (body.find_first_not_of(" \t") == std::string_view::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      fail(Errc::Parse, "'" + path.string() + "' line " + std::to_string(line_no) + ": " + e.what());
    }
    const auto where = "'" + path.string() + "' line " + std::to_string(line_no);
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("text"))
      fail(Errc::Parse, where + ": expected object with 'id' and 'text'");
    Document d;
    d.id = obj["id"].is_string() ? obj["id"].get<std::string>() : obj["id"].dump();
    if (!obj["text"].is_string()) fail(Errc::Parse, where + ": 'text' must be a string");
    d.text = obj["text"].get<std::string>();
    if (obj.contains("covariates") && !obj["covariates"].is_null()) {
      const auto& cov = obj["covariates"];
      if (!cov.is_array()) fail(Errc::Parse, where + ": 'covariates' must be an array");
      std::vector<double> values;
      for (std::size_t l = 0; l < cov.size(); ++l) {
        if (!cov[l].is_number()) {
          fail(Errc::NonNumericValue, "NonNumericValue(" + std::to_string(docs.size()) + ", " +
                                          std::to_string(l) + "): " + cov[l].dump());
        }
        values.push_back(cov[l].get<double>());
      }
      d.covariates = std::move(values);
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

CovariateTable read_covariate_table(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) fail(Errc::Parse, "'" + path.string() + "': missing header");
  auto head = strip_cr(line);
  const char delim = head.find('\t') != std::string_view::npos ? '\t' : ',';
  auto header = split(head, delim);
  if (header.front() != "id") {
    fail(Errc::Parse, "'" + path.string() + "': first header column must be 'id'");
  }
  CovariateTable table;
  table.columns.assign(header.begin() + 1, header.end());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = strip_cr(line);
    if (body.empty()) continue;
    auto fields = split(body, delim);
    if (fields.size() != header.size()) {
      fail(Errc::Parse, "'" + path.string() + "' line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields");
    }
    table.ids.push_back(fields.front());
    table.cells.emplace_back(fields.begin() + 1, fields.end());
  }
  return table;
}

void write_text_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::Io, "cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(Errc::Io, "write to '" + path.string() + "' failed");
}

std::string read_text_file(const fs::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace semipartm
