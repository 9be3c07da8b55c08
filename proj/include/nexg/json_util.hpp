#pragma once

// Path-tracking accessors over nlohmann::json. Every failure is reported as a
// ParseError naming the offending field, e.g. "layers[2].weights[0][3]".

#include "nexg/box.hpp"
#include "nexg/errors.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace nexg::json_util {

using json = nlohmann::json;

const json& field(const json& obj, const std::string& key, const std::string& path);
const json* optional_field(const json& obj, const std::string& key);

double get_number(const json& j, const std::string& path);
int get_int(const json& j, const std::string& path);
std::string get_string(const json& j, const std::string& path);
Vector get_vector(const json& j, const std::string& path);
/// Row-major 2-D array. `rows`/`cols` of an empty matrix may be given.
Matrix get_matrix(const json& j, const std::string& path);

json to_json(const Vector& v);
json to_json(const Matrix& m);
json to_json(const Box& b);
Box get_box(const json& j, const std::string& path);

json read_file(const std::string& file_path);
void write_file(const json& j, const std::string& file_path);

}  // namespace nexg::json_util
