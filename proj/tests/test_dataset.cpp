#include "oracles.hpp"

#include "nexg/catalog.hpp"
#include "nexg/dataset.hpp"
#include "nexg/errors.hpp"
#include "nexg/sensitivity.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <tuple>

using namespace nexg;

namespace {

GenerationConfig small_config(std::uint64_t seed = 1) {
  GenerationConfig c;
  c.num_anchors = 3;
  c.num_neighbors = 2;
  c.time_subsample = 10;
  c.seed = seed;
  return c;
}

ClosedLoopSystem short_horizon(const std::string& name, int steps) {
  ClosedLoopSystem sys = catalog::by_name(name);
  sys.max_steps = steps;
  return sys;
}

using Key = std::tuple<double, std::vector<double>, std::vector<double>>;
Key key_of(const SampleTuple& t) {
  return {t.t, std::vector<double>(t.x_t.data(), t.x_t.data() + t.x_t.size()),
          std::vector<double>(t.v_hat.data(), t.v_hat.data() + t.v_hat.size())};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("nexg_ds_" + name)).string();
}

}  // namespace

TEST_CASE("tuple count: anchors * neighbors * floor(T / subsample)") {
  for (const auto& name : catalog::names()) {
    CAPTURE(name);
    const auto sys = short_horizon(name, 50);
    const auto ds = generate_dataset(sys, *sys.initial_set, small_config());
    CHECK(ds.tuples.size() == 3u * 2u * 5u);
    CHECK(ds.skipped == 0);
  }
  const auto sys = short_horizon("vanderpol", 57);
  CHECK(generate_dataset(sys, *sys.initial_set, small_config()).tuples.size() == 3u * 2u * 5u);
}

TEST_CASE("default generation parameters") {
  const GenerationConfig c;
  CHECK(c.num_anchors == 40);
  CHECK(c.num_neighbors == 10);
  CHECK(c.neighbor_radius == 0.01);
  CHECK(catalog::damped_oscillator().h == 0.01);
}

TEST_CASE("constant field: labels equal inputs") {
  const auto sys = short_horizon("constant_field", 40);
  const auto ds = generate_dataset(sys, *sys.initial_set, small_config());
  for (const auto& t : ds.tuples) {
    CHECK((t.d_hat - t.v_hat).norm() < 1e-12);
    CHECK(t.mag_vminus == doctest::Approx(t.mag_v).epsilon(1e-12));
  }
}

TEST_CASE("label consistency, unit norms and time grid") {
  const auto sys = short_horizon("vanderpol", 100);
  GenerationConfig c = small_config(4);
  c.time_subsample = 7;
  const auto ds = generate_dataset(sys, *sys.initial_set, c);
  for (const auto& t : ds.tuples) {
    CHECK(std::abs(t.v_hat.norm() - 1.0) <= 1e-9);
    CHECK(std::abs(t.d_hat.norm() - 1.0) <= 1e-9);
    const int k = step_index(t.t, sys.h);
    CHECK(k % 7 == 0);
    CHECK(std::abs(t.t - k * sys.h) < 1e-15);
    const Vector& anchor0 = ds.anchor_states[static_cast<std::size_t>(t.anchor)];
    const Vector reached = simulate(sys, anchor0 + t.mag_vminus * t.d_hat, k).final_state();
    CHECK((reached - (t.x_t + t.mag_v * t.v_hat)).norm() <= 1e-9);
    CHECK(t.mag_vminus == doctest::Approx(c.neighbor_radius).epsilon(1e-12));
  }
}

TEST_CASE("prefix reuse: one initial displacement per pair across all times") {
  const auto sys = short_horizon("poly3d", 60);
  const auto ds = generate_dataset(sys, *sys.initial_set, small_config(8));
  for (std::size_t i = 1; i < ds.tuples.size(); ++i) {
    const auto& a = ds.tuples[i - 1];
    const auto& b = ds.tuples[i];
    if (a.anchor != b.anchor || a.neighbor != b.neighbor) continue;
    CHECK(b.t > a.t);
    CHECK((a.mag_vminus * a.d_hat - b.mag_vminus * b.d_hat).norm() <= 1e-17);
  }
}

TEST_CASE("forward kind stores the forward displacement") {
  const auto sys = short_horizon("damped_oscillator", 50);
  GenerationConfig c = small_config(2);
  c.kind = SensitivityKind::forward;
  const auto ds = generate_dataset(sys, *sys.initial_set, c);
  for (const auto& t : ds.tuples) {
    CHECK(t.kind == SensitivityKind::forward);
    CHECK((t.x_t - ds.anchor_states[static_cast<std::size_t>(t.anchor)]).norm() == 0.0);
    const Vector phi = sensitivity_exact(sys, t.x_t, t.mag_v * t.v_hat, t.t);
    CHECK((phi - t.mag_vminus * t.d_hat).norm() <= 1e-12);
  }
}

TEST_CASE("generation is deterministic and thread independent") {
  const auto sys = short_horizon("vanderpol", 80);
  const auto a = generate_dataset(sys, *sys.initial_set, small_config(3), 1);
  const auto b = generate_dataset(sys, *sys.initial_set, small_config(3), 4);
  REQUIRE(a.tuples.size() == b.tuples.size());
  for (std::size_t i = 0; i < a.tuples.size(); ++i) {
    CHECK(key_of(a.tuples[i]) == key_of(b.tuples[i]));
    CHECK((a.tuples[i].d_hat - b.tuples[i].d_hat).norm() == 0.0);
  }
  const auto c = generate_dataset(sys, *sys.initial_set, small_config(99), 1);
  CHECK(key_of(a.tuples[0]) != key_of(c.tuples[0]));
}

TEST_CASE("generation errors") {
  const auto sys = short_horizon("constant_field", 20);
  GenerationConfig c = small_config();
  c.neighbor_radius = 0.0;
  CHECK_THROWS_AS(generate_dataset(sys, *sys.initial_set, c), InputError);
  c = small_config();
  c.time_subsample = 0;
  CHECK_THROWS_AS(generate_dataset(sys, *sys.initial_set, c), InputError);
  CHECK_THROWS_AS(generate_dataset(sys, Box(Vector::Zero(3), Vector::Ones(3)), small_config()), InputError);
}

TEST_CASE("all-degenerate generation fails") {
  // Neighbors closer than the degeneracy threshold are all skipped.
  const auto sys = short_horizon("constant_field", 20);
  GenerationConfig c = small_config();
  c.neighbor_radius = 1e-13;
  CHECK_THROWS_AS(generate_dataset(sys, *sys.initial_set, c), GenerationError);
}

TEST_CASE("split_dataset") {
  const auto sys = short_horizon("vanderpol", 50);
  const auto ds = generate_dataset(sys, *sys.initial_set, small_config());
  const auto [train, test] = split_dataset(ds, 0.9, 5);
  CHECK(train.tuples.size() == 27);
  CHECK(test.tuples.size() == 3);
  CHECK(train.config.seed == ds.config.seed);
  std::multiset<Key> all, parts;
  for (const auto& t : ds.tuples) all.insert(key_of(t));
  for (const auto& t : train.tuples) parts.insert(key_of(t));
  for (const auto& t : test.tuples) parts.insert(key_of(t));
  CHECK(all == parts);

  SensitivityDataset tiny = ds;
  tiny.tuples.resize(1);
  CHECK_THROWS_AS(split_dataset(tiny, 0.9, 1), InputError);
  CHECK_THROWS_AS(split_dataset(ds, 1.0, 1), InputError);
  CHECK_THROWS_AS(split_dataset(ds, 0.0, 1), InputError);
}

TEST_CASE("split_dataset: seeds") {
  const auto sys = short_horizon("damped_oscillator", 250);
  GenerationConfig c = small_config();
  c.num_anchors = 10;
  c.num_neighbors = 4;
  c.time_subsample = 10;
  const auto ds = generate_dataset(sys, *sys.initial_set, c);
  REQUIRE(ds.tuples.size() == 1000);
  auto order = [](const SensitivityDataset& d) {
    std::vector<Key> keys;
    for (const auto& t : d.tuples) keys.push_back(key_of(t));
    return keys;
  };
  CHECK(order(split_dataset(ds, 0.9, 1).first) == order(split_dataset(ds, 0.9, 1).first));
  CHECK(order(split_dataset(ds, 0.9, 1).first) != order(split_dataset(ds, 0.9, 2).first));
}

TEST_CASE("save and load round trip") {
  const auto sys = short_horizon("poly3d", 30);
  GenerationConfig c = small_config(12);
  c.kind = SensitivityKind::forward;
  const auto ds = generate_dataset(sys, *sys.initial_set, c);
  const std::string path = temp_path("rt.csv");
  save_dataset(ds, path);
  CHECK(dataset_sidecar_path(path) == temp_path("rt.json"));
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "kind,t,x_t_1,x_t_2,x_t_3,vhat_1,vhat_2,vhat_3,dhat_1,dhat_2,dhat_3,mag_v,mag_vminus");

  const auto back = load_dataset(path);
  CHECK(back.system_name == "poly3d");
  CHECK(back.dimension == 3);
  CHECK(back.max_steps == 30);
  CHECK(back.config.kind == SensitivityKind::forward);
  CHECK(back.config.seed == 12);
  CHECK(back.config.time_subsample == 10);
  CHECK(back.anchor_states.size() == 3);
  REQUIRE(back.tuples.size() == ds.tuples.size());
  for (std::size_t i = 0; i < ds.tuples.size(); ++i) {
    CHECK(key_of(back.tuples[i]) == key_of(ds.tuples[i]));
    CHECK((back.tuples[i].d_hat - ds.tuples[i].d_hat).norm() == 0.0);
    CHECK(back.tuples[i].mag_vminus == ds.tuples[i].mag_vminus);
  }
}

TEST_CASE("load errors") {
  const auto sys = short_horizon("vanderpol", 20);
  const auto ds = generate_dataset(sys, *sys.initial_set, small_config());
  const std::string path = temp_path("bad.csv");
  save_dataset(ds, path);
  {
    std::ofstream out(path, std::ios::app);
    out << "inverse,0.1,1,2\n";
  }
  CHECK_THROWS_AS(load_dataset(path), ParseError);
  CHECK_THROWS_AS(load_dataset(temp_path("missing.csv")), ParseError);
}
