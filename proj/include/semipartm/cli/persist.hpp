#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "semipartm/io.hpp"
#include "semipartm/splinereg.hpp"

namespace semipartm::cli {

using Json = nlohmann::ordered_json;

// Pretty-printed with a trailing newline; key order is insertion order.
void write_json(const std::filesystem::path& path, const Json& value);
Json read_json(const std::filesystem::path& path);

std::vector<std::string> topic_labels(std::size_t n_topics);  // t1, t2, ...

// Wraps a matrix with explicit labels, checking the label counts.
LabeledMatrix labeled(Matrix m, std::vector<std::string> rows, std::vector<std::string> cols,
                      std::string corner);

// regressor.json (basis spec, ridge, terms) plus coefficients.tsv.
void save_regressor(const std::filesystem::path& dir, const TopicRegressor& reg);
TopicRegressor load_regressor(const std::filesystem::path& dir);

}  // namespace semipartm::cli
