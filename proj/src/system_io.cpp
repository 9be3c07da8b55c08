#include "nexg/system_io.hpp"

#include "nexg/json_util.hpp"

#include <filesystem>

namespace nexg {

using namespace json_util;

NeuralController controller_from_json(const json& j, const std::string& path) {
  const json& layers_j = j.is_array() ? j : field(j, "layers", path);
  const std::string lpath = j.is_array() ? path : (path.empty() ? "layers" : path + ".layers");
  if (!layers_j.is_array() || layers_j.empty()) throw ParseError(lpath, "expected a non-empty layer list");
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i < layers_j.size(); ++i) {
    const std::string p = lpath + "[" + std::to_string(i) + "]";
    DenseLayer l;
    l.weights = get_matrix(field(layers_j[i], "weights", p), p + ".weights");
    l.bias = get_vector(field(layers_j[i], "bias", p), p + ".bias");
    try {
      l.activation = parse_activation(get_string(field(layers_j[i], "activation", p), p + ".activation"));
    } catch (const InputError& e) {
      throw ParseError(p + ".activation", e.what());
    }
    layers.push_back(std::move(l));
  }
  try {
    return NeuralController(std::move(layers));
  } catch (const InputError& e) {
    throw ParseError(lpath, e.what());
  }
}

NeuralController load_controller(const std::string& file_path) {
  return controller_from_json(read_file(file_path), "");
}

json controller_to_json(const NeuralController& c) {
  json layers = json::array();
  for (const auto& l : c.layers()) {
    layers.push_back(
        {{"weights", to_json(l.weights)}, {"bias", to_json(l.bias)}, {"activation", to_string(l.activation)}});
  }
  return json{{"layers", layers}};
}

namespace {

Plant plant_from_json(const json& j, int n) {
  const std::string kind = get_string(field(j, "kind", "plant"), "plant.kind");
  if (kind == "builtin") {
    BuiltinPlant p;
    p.name = get_string(field(j, "name", "plant"), "plant.name");
    if (const json* params = optional_field(j, "params")) {
      Vector v = get_vector(*params, "plant.params");
      p.params.assign(v.data(), v.data() + v.size());
    }
    return p;
  }
  if (kind == "linear") {
    LinearPlant p;
    p.A = get_matrix(field(j, "A", "plant"), "plant.A");
    if (const json* b = optional_field(j, "B")) {
      p.B = get_matrix(*b, "plant.B");
    } else {
      p.B = Matrix(n, 0);
    }
    if (p.B.size() == 0) p.B = Matrix(n, 0);
    return p;
  }
  if (kind == "polynomial") {
    PolynomialPlant p;
    if (const json* m = optional_field(j, "control_dim")) p.control_dim = get_int(*m, "plant.control_dim");
    const json& rows = field(j, "terms", "plant");
    if (!rows.is_array()) throw ParseError("plant.terms", "expected one term list per state");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string rp = "plant.terms[" + std::to_string(i) + "]";
      if (!rows[i].is_array()) throw ParseError(rp, "expected a term list");
      std::vector<PolynomialTerm> row;
      for (std::size_t k = 0; k < rows[i].size(); ++k) {
        const std::string tp = rp + "[" + std::to_string(k) + "]";
        const json& tj = rows[i][k];
        PolynomialTerm t;
        t.coeff = get_number(field(tj, "coeff", tp), tp + ".coeff");
        if (const json* xs = optional_field(tj, "x")) {
          for (std::size_t e = 0; e < xs->size(); ++e) t.x_powers.push_back(get_int((*xs)[e], tp + ".x"));
        }
        if (const json* us = optional_field(tj, "u")) {
          for (std::size_t e = 0; e < us->size(); ++e) t.u_powers.push_back(get_int((*us)[e], tp + ".u"));
        }
        for (int e : t.x_powers) {
          if (e < 0) throw ParseError(tp + ".x", "negative exponent");
        }
        for (int e : t.u_powers) {
          if (e < 0) throw ParseError(tp + ".u", "negative exponent");
        }
        row.push_back(std::move(t));
      }
      p.rows.push_back(std::move(row));
    }
    return p;
  }
  throw ParseError("plant.kind", "unknown plant kind '" + kind + "'");
}

json plant_to_json(const Plant& plant) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BuiltinPlant>) {
          return json{{"kind", "builtin"}, {"name", p.name}, {"params", p.params}};
        } else if constexpr (std::is_same_v<T, LinearPlant>) {
          json out{{"kind", "linear"}, {"A", to_json(p.A)}};
          if (p.B.cols() > 0) out["B"] = to_json(p.B);
          return out;
        } else if constexpr (std::is_same_v<T, PolynomialPlant>) {
          json rows = json::array();
          for (const auto& row : p.rows) {
            json r = json::array();
            for (const auto& t : row) r.push_back({{"coeff", t.coeff}, {"x", t.x_powers}, {"u", t.u_powers}});
            rows.push_back(std::move(r));
          }
          return json{{"kind", "polynomial"}, {"control_dim", p.control_dim}, {"terms", rows}};
        } else {
          throw InputError("custom plants cannot be serialized");
        }
      },
      plant);
}

}  // namespace

ClosedLoopSystem system_from_json(const json& j, const std::string& base_dir) {
  ClosedLoopSystem s;
  s.name = get_string(field(j, "name", ""), "name");
  s.dimension = get_int(field(j, "dimension", ""), "dimension");
  if (s.dimension <= 0) throw ParseError("dimension", "must be positive");
  s.plant = plant_from_json(field(j, "plant", ""), s.dimension);
  if (const json* cf = optional_field(j, "controller_file")) {
    std::filesystem::path p = get_string(*cf, "controller_file");
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    s.controller = load_controller(p.string());
  } else if (const json* c = optional_field(j, "controller")) {
    s.controller = controller_from_json(*c, "controller");
  }
  s.h = get_number(field(j, "h", ""), "h");
  s.max_steps = get_int(field(j, "T", ""), "T");
  if (const json* d = optional_field(j, "domain")) s.domain = get_box(*d, "domain");
  if (const json* th = optional_field(j, "initial_set")) s.initial_set = get_box(*th, "initial_set");
  try {
    validate_system(s);
  } catch (const InputError& e) {
    throw ParseError("", e.what());
  }
  return s;
}

ClosedLoopSystem load_system(const std::string& file_path) {
  const auto dir = std::filesystem::path(file_path).parent_path().string();
  return system_from_json(read_file(file_path), dir);
}

json system_to_json(const ClosedLoopSystem& s) {
  json out{{"name", s.name},
           {"dimension", s.dimension},
           {"plant", plant_to_json(s.plant)},
           {"h", s.h},
           {"T", s.max_steps}};
  if (s.controller) out["controller"] = controller_to_json(*s.controller);
  if (s.domain) out["domain"] = to_json(*s.domain);
  if (s.initial_set) out["initial_set"] = to_json(*s.initial_set);
  return out;
}

}  // namespace nexg
