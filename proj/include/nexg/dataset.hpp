#pragma once

#include "nexg/approximator.hpp"
#include "nexg/dynamics.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace nexg {

/// One training tuple. For the inverse kind, `x_t` is the anchor state at time
/// t, `v_hat`/`mag_v` describe the displacement at time t and
/// `d_hat`/`mag_vminus` the initial displacement. For the forward kind the
/// roles swap: `x_t` holds the anchor's initial state, `v_hat` the initial
/// displacement and `d_hat` the displacement at time t.
struct SampleTuple {
  SensitivityKind kind = SensitivityKind::inverse;
  double t = 0.0;
  Vector x_t;
  Vector v_hat;
  Vector d_hat;
  double mag_v = 0.0;
  double mag_vminus = 0.0;
  int anchor = -1;    // index into SensitivityDataset::anchor_states, -1 if unknown
  int neighbor = -1;
};

struct GenerationConfig {
  int num_anchors = 40;
  int num_neighbors = 10;
  double neighbor_radius = 0.01;
  int time_subsample = 5;
  SensitivityKind kind = SensitivityKind::inverse;
  std::uint64_t seed = 0;
};

struct SensitivityDataset {
  std::string system_name;
  int dimension = 0;
  double h = 0.0;
  int max_steps = 0;
  GenerationConfig config;
  Box theta;
  std::vector<Vector> anchor_states;
  std::vector<SampleTuple> tuples;
  int skipped = 0;  // degenerate pairs dropped during generation
};

/// Anchors uniform in theta, neighbors uniform on the sphere of
/// `neighbor_radius` around each anchor, T-step simulations, then one tuple
/// per (anchor, neighbor, k) with k in {s, 2s, ...} <= T. Prefixes of the same
/// simulations serve every time index. Tuples are ordered by
/// (anchor, neighbor, time). Deterministic in `config.seed`.
SensitivityDataset generate_dataset(const ClosedLoopSystem& system, const Box& theta,
                                    const GenerationConfig& config, int threads = 1);

/// Random partition; |train| = round(fraction * |ds|).
std::pair<SensitivityDataset, SensitivityDataset> split_dataset(const SensitivityDataset& ds,
                                                                 double train_fraction, std::uint64_t seed);

/// CSV "kind,t,x_t_1..x_t_n,vhat_1..vhat_n,dhat_1..dhat_n,mag_v,mag_vminus"
/// plus `<stem>.json` sidecar holding the generation config.
void save_dataset(const SensitivityDataset& ds, const std::string& csv_path);
SensitivityDataset load_dataset(const std::string& csv_path);

/// Sidecar path for a dataset CSV: same stem, .json extension.
std::string dataset_sidecar_path(const std::string& csv_path);

}  // namespace nexg
