#include "nexg/json_util.hpp"

#include <fstream>
#include <sstream>

namespace nexg::json_util {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

}  // namespace

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(join(path, key), "missing field");
  return *it;
}

const json* optional_field(const json& obj, const std::string& key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError(path, "expected an integer");
  return j.get<int>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError(path, "expected a string");
  return j.get<std::string>();
}

Vector get_vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = get_number(j[i], index(path, i));
  return v;
}

Matrix get_matrix(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected a 2-D array");
  if (j.empty()) return Matrix(0, 0);
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row_path = index(path, r);
    if (!j[r].is_array()) throw ParseError(row_path, "expected an array");
    if (j[r].size() != cols) throw ParseError(row_path, "ragged row");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = get_number(j[r][c], index(row_path, c));
    }
  }
  return m;
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

json to_json(const Box& b) { return json{{"lo", to_json(b.lo)}, {"hi", to_json(b.hi)}}; }

Box get_box(const json& j, const std::string& path) {
  Box b(get_vector(field(j, "lo", path), join(path, "lo")), get_vector(field(j, "hi", path), join(path, "hi")));
  if (b.lo.size() != b.hi.size()) throw ParseError(path, "lo and hi differ in length");
  for (int i = 0; i < b.dim(); ++i) {
    if (b.lo[i] > b.hi[i]) throw ParseError(path, "empty box (lo > hi)");
  }
  return b;
}

json read_file(const std::string& file_path) {
  std::ifstream in(file_path);
  if (!in) throw ParseError(file_path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(file_path, std::string("malformed JSON: ") + e.what());
  }
}

void write_file(const json& j, const std::string& file_path) {
  std::ofstream out(file_path);
  if (!out) throw InputError("cannot write " + file_path);
  out << j.dump(2) << '\n';
}

}  // namespace nexg::json_util
