#pragma once

// File formats.
//
//   matrix CSV     one row per x, comma-separated decimals, no header
//   dataset CSV    one observation per line, "x_index,y_index" (1-based)
//   features JSON  {"F": n, "values": [[[...]]]} with values[f][x][y]
//   morphism JSON  {"R": {"entries": [[...]], "blocks": [[...]]},
//                   "Q": [{"entries": ..., "blocks": ...}, ...]}
//                  entries are decimal strings (or "p/q"), blocks 1-based.

#include "cig/core.hpp"
#include "cig/fitting.hpp"
#include "cig/morphism.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace cig::io {

using Json = nlohmann::json;

Matrix read_matrix_csv(std::istream& in);
Matrix read_matrix_csv_file(const std::string& path);
// Accepts a single row or a single column.
Vector read_vector_csv_file(const std::string& path);
void write_matrix_csv(std::ostream& out, const Matrix& m);

// Shortest text that parses back to exactly the same double.
std::string format_double(double v);

std::vector<Observation> read_observations_csv(std::istream& in);
Dataset read_dataset_csv_file(const std::string& path, Index k, Index m);

FeatureSet features_from_json(const Json& j);
Json features_to_json(const FeatureSet& features);

MarkovMorphism<double> morphism_from_json(const Json& j);
MarkovMorphism<Rational> exact_morphism_from_json(const Json& j);
Json morphism_to_json(const MarkovMorphism<double>& f);
Json morphism_to_json(const MarkovMorphism<Rational>& f);

Json read_json_file(const std::string& path);

}  // namespace cig::io
