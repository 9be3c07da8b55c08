#include "nexg/dataset.hpp"

#include "nexg/errors.hpp"
#include "nexg/json_util.hpp"
#include "nexg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace nexg {

namespace {

constexpr double kDegenerateNorm = 1e-12;

struct AnchorGroup {
  Trajectory anchor;
  std::vector<Trajectory> neighbors;
};

}  // namespace

SensitivityDataset generate_dataset(const ClosedLoopSystem& system, const Box& theta,
                                    const GenerationConfig& config, int threads) {
  validate_box(theta, "theta");
  if (theta.dim() != system.dimension) throw InputError("theta dimension mismatch");
  if (config.num_anchors < 1 || config.num_neighbors < 1) throw InputError("need at least one anchor and neighbor");
  if (!(config.neighbor_radius > 0.0)) throw InputError("neighbor radius must be positive");
  if (config.time_subsample < 1) throw InputError("time_subsample must be >= 1");

  const int n = system.dimension;
  const int T = system.max_steps;

  // All random draws happen up front in a fixed order; simulation can then
  // run in any order without affecting the result.
  std::mt19937_64 rng(config.seed);
  std::vector<Vector> anchors;
  std::vector<std::vector<Vector>> neighbor_starts;
  for (int a = 0; a < config.num_anchors; ++a) {
    anchors.push_back(theta.sample(rng));
    std::vector<Vector> nb;
    for (int j = 0; j < config.num_neighbors; ++j) {
      nb.push_back(anchors.back() + config.neighbor_radius * random_unit_vector(n, rng));
    }
    neighbor_starts.push_back(std::move(nb));
  }

  std::vector<AnchorGroup> groups(anchors.size());
  parallel_for(
      anchors.size(),
      [&](std::size_t a) {
        groups[a].anchor = simulate(system, anchors[a], T);
        for (const auto& x0 : neighbor_starts[a]) groups[a].neighbors.push_back(simulate(system, x0, T));
      },
      threads);

  SensitivityDataset ds;
  ds.system_name = system.name;
  ds.dimension = n;
  ds.h = system.h;
  ds.max_steps = T;
  ds.config = config;
  ds.theta = theta;
  ds.anchor_states = anchors;

  for (std::size_t a = 0; a < groups.size(); ++a) {
    const Trajectory& A = groups[a].anchor;
    for (std::size_t j = 0; j < groups[a].neighbors.size(); ++j) {
      const Trajectory& B = groups[a].neighbors[j];
      const Vector v0 = B[0] - A[0];
      for (int k = config.time_subsample; k <= T; k += config.time_subsample) {
        const Vector vk = B[k] - A[k];
        SampleTuple tup;
        tup.kind = config.kind;
        tup.t = k * system.h;
        tup.anchor = static_cast<int>(a);
        tup.neighbor = static_cast<int>(j);
        const Vector& input = config.kind == SensitivityKind::inverse ? vk : v0;
        const Vector& label = config.kind == SensitivityKind::inverse ? v0 : vk;
        const double in_norm = input.norm();
        const double label_norm = label.norm();
        if (in_norm < kDegenerateNorm || label_norm < kDegenerateNorm) {
          ++ds.skipped;
          continue;
        }
        tup.x_t = config.kind == SensitivityKind::inverse ? A[k] : A[0];
        tup.v_hat = input / in_norm;
        tup.d_hat = label / label_norm;
        tup.mag_v = in_norm;
        tup.mag_vminus = label_norm;
        ds.tuples.push_back(std::move(tup));
      }
    }
  }
  if (ds.tuples.empty()) throw GenerationError("every generated pair was degenerate");
  return ds;
}

std::pair<SensitivityDataset, SensitivityDataset> split_dataset(const SensitivityDataset& ds,
                                                                 double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InputError("train fraction must lie in (0, 1)");
  if (ds.tuples.size() < 2) throw InputError("need at least two tuples to split");
  std::vector<std::size_t> order(ds.tuples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(ds.tuples.size())));

  SensitivityDataset train = ds;
  SensitivityDataset test = ds;
  train.tuples.clear();
  test.tuples.clear();
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? train : test).tuples.push_back(ds.tuples[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

std::string dataset_sidecar_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

void save_dataset(const SensitivityDataset& ds, const std::string& csv_path) {
  using json_util::json;
  std::ofstream out(csv_path);
  if (!out) throw InputError("cannot write " + csv_path);
  const int n = ds.dimension;
  out << std::setprecision(17) << "kind,t";
  for (int i = 1; i <= n; ++i) out << ",x_t_" << i;
  for (int i = 1; i <= n; ++i) out << ",vhat_" << i;
  for (int i = 1; i <= n; ++i) out << ",dhat_" << i;
  out << ",mag_v,mag_vminus\n";
  for (const auto& tup : ds.tuples) {
    out << to_string(tup.kind) << ',' << tup.t;
    for (int i = 0; i < n; ++i) out << ',' << tup.x_t[i];
    for (int i = 0; i < n; ++i) out << ',' << tup.v_hat[i];
    for (int i = 0; i < n; ++i) out << ',' << tup.d_hat[i];
    out << ',' << tup.mag_v << ',' << tup.mag_vminus << '\n';
  }

  json anchors = json::array();
  for (const auto& a : ds.anchor_states) anchors.push_back(json_util::to_json(a));
  json side{{"system_name", ds.system_name},
            {"dimension", n},
            {"h", ds.h},
            {"T", ds.max_steps},
            {"num_tuples", ds.tuples.size()},
            {"skipped", ds.skipped},
            {"theta", json_util::to_json(ds.theta)},
            {"anchor_states", anchors},
            {"generation_config",
             {{"num_anchors", ds.config.num_anchors},
              {"num_neighbors", ds.config.num_neighbors},
              {"neighbor_radius", ds.config.neighbor_radius},
              {"time_subsample", ds.config.time_subsample},
              {"kind", to_string(ds.config.kind)},
              {"seed", ds.config.seed}}}};
  json_util::write_file(side, dataset_sidecar_path(csv_path));
}

SensitivityDataset load_dataset(const std::string& csv_path) {
  using namespace json_util;
  const json side = read_file(dataset_sidecar_path(csv_path));
  SensitivityDataset ds;
  ds.system_name = get_string(field(side, "system_name", ""), "system_name");
  ds.dimension = get_int(field(side, "dimension", ""), "dimension");
  ds.h = get_number(field(side, "h", ""), "h");
  ds.max_steps = get_int(field(side, "T", ""), "T");
  if (const json* s = optional_field(side, "skipped")) ds.skipped = get_int(*s, "skipped");
  if (const json* th = optional_field(side, "theta")) ds.theta = get_box(*th, "theta");
  if (const json* an = optional_field(side, "anchor_states")) {
    for (std::size_t i = 0; i < an->size(); ++i) {
      ds.anchor_states.push_back(get_vector((*an)[i], "anchor_states[" + std::to_string(i) + "]"));
    }
  }
  const json& gc = field(side, "generation_config", "");
  ds.config.num_anchors = get_int(field(gc, "num_anchors", "generation_config"), "generation_config.num_anchors");
  ds.config.num_neighbors =
      get_int(field(gc, "num_neighbors", "generation_config"), "generation_config.num_neighbors");
  ds.config.neighbor_radius =
      get_number(field(gc, "neighbor_radius", "generation_config"), "generation_config.neighbor_radius");
  ds.config.time_subsample =
      get_int(field(gc, "time_subsample", "generation_config"), "generation_config.time_subsample");
  ds.config.kind = parse_kind(get_string(field(gc, "kind", "generation_config"), "generation_config.kind"));
  ds.config.seed = field(gc, "seed", "generation_config").get<std::uint64_t>();

  const int n = ds.dimension;
  std::ifstream in(csv_path);
  if (!in) throw ParseError(csv_path, "cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(csv_path, "empty dataset file");
  const std::size_t expected_cols = 2 + 3 * static_cast<std::size_t>(n) + 2;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    const std::string where = csv_path + ":" + std::to_string(row);
    if (cells.size() != expected_cols) throw ParseError(where, "wrong number of columns");
    SampleTuple tup;
    try {
      tup.kind = parse_kind(cells[0]);
      std::size_t c = 1;
      tup.t = std::stod(cells[c++]);
      tup.x_t.resize(n);
      tup.v_hat.resize(n);
      tup.d_hat.resize(n);
      for (int i = 0; i < n; ++i) tup.x_t[i] = std::stod(cells[c++]);
      for (int i = 0; i < n; ++i) tup.v_hat[i] = std::stod(cells[c++]);
      for (int i = 0; i < n; ++i) tup.d_hat[i] = std::stod(cells[c++]);
      tup.mag_v = std::stod(cells[c++]);
      tup.mag_vminus = std::stod(cells[c++]);
    } catch (const std::exception& e) {
      throw ParseError(where, std::string("bad value: ") + e.what());
    }
    ds.tuples.push_back(std::move(tup));
  }
  return ds;
}

}  // namespace nexg
