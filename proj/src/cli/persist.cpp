#include "semipartm/cli/persist.hpp"

#include "semipartm/error.hpp"

namespace semipartm::cli {

void write_json(const std::filesystem::path& path, const Json& value) {
  write_text_file(path, value.dump(2) + "\n");
}

Json read_json(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::Parse, path.string() + ": " + e.what());
  }
}

std::vector<std::string> topic_labels(std::size_t n_topics) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < n_topics; ++k) out.push_back("t" + std::to_string(k + 1));
  return out;
}

LabeledMatrix labeled(Matrix m, std::vector<std::string> rows, std::vector<std::string> cols,
                      std::string corner) {
  if (rows.size() != m.rows() || cols.size() != m.cols())
    fail(Errc::DimensionMismatch, "labeled: label counts do not match the matrix shape");
  return LabeledMatrix{std::move(corner), std::move(rows), std::move(cols), std::move(m)};
}

namespace {

std::string kind_name(TermKind k) {
  switch (k) {
    case TermKind::Constant: return "constant";
    case TermKind::Linear: return "linear";
    case TermKind::Spline: return "spline";
  }
  return "?";
}

TermKind parse_kind(const std::string& s) {
  if (s == "constant") return TermKind::Constant;
  if (s == "linear") return TermKind::Linear;
  if (s == "spline") return TermKind::Spline;
  fail(Errc::Parse, "regressor.json: unknown term kind '" + s + "'");
}

}  // namespace

void save_regressor(const std::filesystem::path& dir, const TopicRegressor& reg) {
  Json j;
  j["degree"] = reg.spec.degree;
  j["interior_knots"] = reg.spec.interior_knots;
  j["linear_max_distinct"] = reg.spec.linear_max_distinct;
  j["ridge"] = reg.ridge;
  Json terms = Json::array();
  for (const auto& t : reg.terms) {
    Json tj;
    tj["name"] = t.name;
    tj["kind"] = kind_name(t.kind);
    tj["lo"] = t.lo;
    tj["hi"] = t.hi;
    tj["knots"] = t.knots;
    terms.push_back(std::move(tj));
  }
  j["terms"] = std::move(terms);
  write_json(dir / "regressor.json", j);

  std::vector<std::string> cols{"intercept"};
  for (const auto& t : reg.terms) {
    const std::size_t w = t.width(reg.spec.degree);
    for (std::size_t i = 0; i < w; ++i) cols.push_back(t.name + "_" + std::to_string(i + 1));
  }
  write_matrix_tsv(dir / "coefficients.tsv",
                   labeled(reg.coefficients, topic_labels(reg.n_topics()), cols, "topic"));
}

TopicRegressor load_regressor(const std::filesystem::path& dir) {
  const Json j = read_json(dir / "regressor.json");
  TopicRegressor reg;
  try {
    reg.spec.degree = j.at("degree").get<int>();
    reg.spec.interior_knots = j.at("interior_knots").get<int>();
    reg.spec.linear_max_distinct = j.at("linear_max_distinct").get<int>();
    reg.ridge = j.at("ridge").get<double>();
    for (const auto& tj : j.at("terms")) {
      CovariateTerm t;
      t.name = tj.at("name").get<std::string>();
      t.kind = parse_kind(tj.at("kind").get<std::string>());
      t.lo = tj.at("lo").get<double>();
      t.hi = tj.at("hi").get<double>();
      t.knots = tj.at("knots").get<std::vector<double>>();
      reg.terms.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::Parse, (dir / "regressor.json").string() + ": " + e.what());
  }
  reg.coefficients = read_matrix_tsv(dir / "coefficients.tsv").values;
  std::size_t width = 1;
  for (const auto& t : reg.terms) width += t.width(reg.spec.degree);
  if (reg.coefficients.cols() != width)
    fail(Errc::DimensionMismatch, "coefficients.tsv: column count does not match the terms");
  return reg;
}

}  // namespace semipartm::cli
