#include "cli.hpp"

#include "nexg/approximator.hpp"
#include "nexg/catalog.hpp"
#include "nexg/dataset.hpp"
#include "nexg/errors.hpp"
#include "nexg/explorer.hpp"
#include "nexg/falsification.hpp"
#include "nexg/json_util.hpp"
#include "nexg/mlp.hpp"
#include "nexg/parallel.hpp"
#include "nexg/sensitivity.hpp"
#include "nexg/system_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <random>

namespace nexg::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using json_util::to_json;

namespace {

struct Options {
  std::string system;
  std::string theta_lo;
  std::string theta_hi;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  int threads = 0;

  // simulate
  std::string x0;
  int steps = -1;
  bool backward = false;

  // gen-data
  int anchors = 40;
  int neighbors = 10;
  double radius = 0.01;
  int subsample = 5;
  std::string kind = "inverse";

  // train / eval / predict
  std::string dataset;
  std::string model;
  int epochs = 40;
  double lr = 1e-3;
  std::string optimizer = "adam";
  int batch = 64;
  int width = 512;
  double train_fraction = 0.9;
  bool error_curve = false;
  int curve_samples = 200;
  std::string x0_new;

  // reach / coverage / falsify
  bool oracle = false;
  std::string target;
  double time = 0.0;
  double s = 0.5;
  int p = 2;
  double delta = 0.004;
  int bound = 30;
  std::string policy = "straight";
  int targets = 200;
  std::string spec;
  std::string method = "rd";
  int budget = 50;
  double beta = 50.0;

  // bounds
  double d_init = 1.0;
  double gamma = 1.0;
  double r_eps = 0.0;
  int max_k = 50;
};

ClosedLoopSystem resolve_system(const std::string& arg) {
  if (arg.empty()) throw InputError("--system is required");
  if (fs::exists(arg)) return load_system(arg);
  for (const auto& name : catalog::names()) {
    if (name == arg) return catalog::by_name(name);
  }
  throw InputError("no system file or catalog entry named '" + arg + "'");
}

Box resolve_theta(const Options& o, const ClosedLoopSystem& system) {
  if (!o.theta_lo.empty() || !o.theta_hi.empty()) {
    if (o.theta_lo.empty() || o.theta_hi.empty()) throw InputError("--theta-lo and --theta-hi go together");
    Box b{parse_vector(o.theta_lo), parse_vector(o.theta_hi)};
    validate_box(b, "theta");
    if (b.dim() != system.dimension) throw InputError("theta dimension does not match the system");
    return b;
  }
  if (!system.initial_set) throw InputError("system has no initial_set; pass --theta-lo/--theta-hi");
  return *system.initial_set;
}

Vector parse_state(const std::string& text, int dim, const std::string& what) {
  Vector v = parse_vector(text);
  if (v.size() != dim) throw InputError(what + " must have " + std::to_string(dim) + " components");
  return v;
}

int threads_of(const Options& o) { return o.threads > 0 ? o.threads : default_thread_count(); }

fs::path out_path(const Options& o, const std::string& name) {
  fs::create_directories(o.out_dir);
  return fs::path(o.out_dir) / name;
}

void emit(const json& j, const fs::path& path) {
  json_util::write_file(j, path.string());
  std::cout << j.dump(2) << "\n";
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

void write_vector_cells(std::ostream& out, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ',' << v[i];
}

std::string coordinate_header(const std::string& prefix, int n) {
  std::string h;
  for (int i = 1; i <= n; ++i) h += "," + prefix + std::to_string(i);
  return h;
}

void write_points_csv(const fs::path& path, const std::vector<Vector>& points, int dim) {
  auto out = open_csv(path);
  out << "index" << coordinate_header("x", dim) << "\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    out << i;
    write_vector_cells(out, points[i]);
    out << "\n";
  }
}

std::unique_ptr<DirectionalApproximator> make_approximator(const Options& o, const ClosedLoopSystem& system,
                                                           SensitivityKind want) {
  if (o.oracle == !o.model.empty()) throw InputError("pass exactly one of --model and --oracle");
  if (o.oracle) {
    if (want == SensitivityKind::forward) return std::make_unique<ExactForwardOracle>(system);
    return std::make_unique<ExactInverseOracle>(system);
  }
  auto model = std::make_unique<MLPModel>(load_model(o.model));
  if (model->kind != want) {
    throw InputError("model is of kind " + to_string(model->kind) + ", expected " + to_string(want));
  }
  if (model->state_dim() != system.dimension) throw InputError("model dimension does not match the system");
  if (model->system_name != system.name) {
    std::cerr << "warning: model was trained on '" << model->system_name << "', system is '" << system.name
              << "'\n";
  }
  return model;
}

RDParams rd_params(const Options& o) {
  RDParams params;
  params.s = o.s;
  params.p = o.p;
  params.delta = o.delta;
  params.bound = o.bound;
  params.policy = parse_policy(o.policy);
  validate_params(params);
  return params;
}

Vector anchor_start(const Options& o, const ClosedLoopSystem& system, const Box& theta, std::mt19937_64& rng) {
  if (!o.x0.empty()) return parse_state(o.x0, system.dimension, "--x0");
  return theta.sample(rng);
}

// ---- subcommands ----

int cmd_simulate(const Options& o) {
  const ClosedLoopSystem system = resolve_system(o.system);
  const int steps = o.steps < 0 ? system.max_steps : o.steps;
  Vector x0;
  if (!o.x0.empty()) {
    x0 = parse_state(o.x0, system.dimension, "--x0");
  } else {
    x0 = resolve_theta(o, system).center();
  }
  const Trajectory traj = o.backward ? simulate_backward(system, x0, steps) : simulate(system, x0, steps);
  const fs::path path = out_path(o, "trajectory.csv");
  write_trajectory_csv(traj, path.string());
  std::cout << path.string() << "\n";
  return kOk;
}

int cmd_gen_data(const Options& o) {
  const ClosedLoopSystem system = resolve_system(o.system);
  GenerationConfig config;
  config.num_anchors = o.anchors;
  config.num_neighbors = o.neighbors;
  config.neighbor_radius = o.radius;
  config.time_subsample = o.subsample;
  config.kind = parse_kind(o.kind);
  config.seed = o.seed;
  const SensitivityDataset ds = generate_dataset(system, resolve_theta(o, system), config, threads_of(o));
  const fs::path path = out_path(o, "dataset.csv");
  save_dataset(ds, path.string());
  std::cout << path.string() << " (" << ds.tuples.size() << " tuples, " << ds.skipped << " skipped)\n";
  return kOk;
}

json report_json(const TrainingReport& r) {
  return {{"mse", r.mse},
          {"mre_percent", r.mre_percent},
          {"train_mse", r.train_mse},
          {"train_loss", r.train_loss},
          {"epochs_run", r.epochs_run}};
}

int cmd_train(const Options& o) {
  if (o.dataset.empty()) throw InputError("--dataset is required");
  const SensitivityDataset ds = load_dataset(o.dataset);
  TrainingConfig config;
  if (o.optimizer == "adam") {
    config.optimizer = Optimizer::adam;
  } else if (o.optimizer == "sgd") {
    config.optimizer = Optimizer::sgd;
  } else {
    throw InputError("unknown optimizer '" + o.optimizer + "'");
  }
  config.learning_rate = o.lr;
  config.epochs = o.epochs;
  config.batch_size = o.batch;
  config.hidden_width = o.width;
  config.train_fraction = o.train_fraction;
  config.seed = o.seed;
  const auto [model, report] = train(ds, config);
  save_model(model, out_path(o, "model.json").string());
  // Wall time lives in its own file so the report stays reproducible.
  json_util::write_file({{"wall_time_s", report.wall_time_s}}, out_path(o, "training_timing.json").string());
  emit(report_json(report), out_path(o, "training_report.json"));
  return kOk;
}

int cmd_eval(const Options& o) {
  if (o.dataset.empty()) throw InputError("--dataset is required");
  const SensitivityDataset ds = load_dataset(o.dataset);
  const SensitivityKind kind = ds.config.kind;
  EvalMetrics metrics;
  std::unique_ptr<DirectionalApproximator> approx;
  std::optional<ClosedLoopSystem> system;
  if (!o.system.empty()) system = resolve_system(o.system);
  if (o.oracle) {
    if (!system) throw InputError("--oracle needs --system");
    approx = make_approximator(o, *system, kind);
    metrics = evaluate(*approx, ds.tuples);
  } else {
    if (o.model.empty()) throw InputError("pass exactly one of --model and --oracle");
    auto model = std::make_unique<MLPModel>(load_model(o.model));
    if (model->kind != kind) throw InputError("model kind does not match the dataset");
    metrics = evaluate(*model, ds.tuples);
    approx = std::move(model);
  }
  json j = {{"mse", metrics.mse}, {"mre_percent", metrics.mre_percent}, {"count", metrics.count}};
  if (o.error_curve) {
    if (!system) throw InputError("--error-curve needs --system");
    if (kind != SensitivityKind::inverse) throw InputError("--error-curve needs an inverse-kind model");
    const Box theta = o.theta_lo.empty() && o.theta_hi.empty() ? ds.theta : resolve_theta(o, *system);
    const ErrorCurve curve =
        abs_error_curve(*approx, *system, theta, default_error_radii(), o.curve_samples, o.seed, threads_of(o));
    write_error_curve_csv(curve, out_path(o, "error_curve.csv").string());
    j["error_curve"] = {{"radii", curve.radii}, {"eps_abs", curve.eps_abs}};
  }
  emit(j, out_path(o, "eval.json"));
  return kOk;
}

int cmd_reach(const Options& o) {
  const ClosedLoopSystem system = resolve_system(o.system);
  const Box theta = resolve_theta(o, system);
  const RDParams params = rd_params(o);
  const auto approx = make_approximator(o, system, SensitivityKind::inverse);
  if (o.target.empty()) throw InputError("--target is required");
  const Vector z = parse_state(o.target, system.dimension, "--target");
  std::mt19937_64 rng(o.seed);
  const int index = step_index(o.time, system.h);
  const Trajectory anchor = simulate(system, anchor_start(o, system, theta, rng), index);
  const RDResult r = reach_destination(system, *approx, anchor, z, o.time, theta, params);

  auto csv = open_csv(out_path(o, "reach_iterations.csv"));
  csv << "k,d_a" << coordinate_header("x0_", system.dimension) << coordinate_header("xt_", system.dimension)
      << "\n";
  for (std::size_t k = 0; k < r.log.size(); ++k) {
    csv << k << ',' << r.log[k].d_a;
    write_vector_cells(csv, r.log[k].x0);
    write_vector_cells(csv, r.log[k].x_t);
    csv << "\n";
  }
  write_trajectory_csv(r.final_trajectory, out_path(o, "reach_trajectory.csv").string());

  const json j = {{"status", to_string(r.status)},
                  {"k", r.k},
                  {"simulations", r.simulations},
                  {"d_init", r.d_init},
                  {"d_a", r.d_a},
                  {"d_r", r.d_r},
                  {"best_index", r.best_index},
                  {"target", to_json(z)},
                  {"t", index * system.h},
                  {"initial_state", to_json(r.final_trajectory.initial_state())},
                  {"final_state", to_json(r.final_trajectory[index])},
                  {"oracle", o.oracle}};
  emit(j, out_path(o, "reach.json"));
  return r.status == RDStatus::reached ? kOk : kBudgetExhausted;
}

int cmd_coverage(const Options& o) {
  const ClosedLoopSystem system = resolve_system(o.system);
  const Box theta = resolve_theta(o, system);
  const RDParams params = rd_params(o);
  const auto approx = make_approximator(o, system, SensitivityKind::inverse);
  if (o.targets < 1) throw InputError("--targets must be >= 1");
  const CoverageReport r = coverage(system, *approx, theta, o.time, o.targets, params, o.seed, threads_of(o));
  const int n = system.dimension;

  auto targets_csv = open_csv(out_path(o, "coverage_targets.csv"));
  targets_csv << "index" << coordinate_header("z", n) << coordinate_header("x0_", n) << ",reached,final_distance\n";
  for (std::size_t i = 0; i < r.sampled_targets.size(); ++i) {
    targets_csv << i;
    write_vector_cells(targets_csv, r.sampled_targets[i]);
    write_vector_cells(targets_csv, r.best_initial_points[i]);
    targets_csv << ',' << (r.reached[i] ? 1 : 0) << ',' << r.final_distances[i] << "\n";
  }
  write_points_csv(out_path(o, "coverage_polygon.csv"), r.polygon_vertices, n);
  write_trajectory_csv(r.anchor, out_path(o, "coverage_anchor.csv").string());

  json templates = json::array();
  for (std::size_t i = 0; i < r.template_directions.size(); ++i) {
    templates.push_back({{"direction", to_json(r.template_directions[i])}, {"support", r.support_values[i]}});
  }
  json vertices = json::array();
  for (const auto& v : r.polygon_vertices) vertices.push_back(to_json(v));
  std::size_t reached = 0;
  for (bool b : r.reached) reached += b ? 1 : 0;
  const json j = {{"t", r.t},
                  {"anchor_initial_state", to_json(r.anchor.initial_state())},
                  {"templates", templates},
                  {"polygon_vertices", vertices},
                  {"num_targets", r.sampled_targets.size()},
                  {"num_reached", reached},
                  {"coverage_fraction", r.coverage_fraction},
                  {"oracle", o.oracle}};
  emit(j, out_path(o, "coverage.json"));
  return kOk;
}

int cmd_falsify(const Options& o) {
  const ClosedLoopSystem system = resolve_system(o.system);
  const Box theta = resolve_theta(o, system);
  if (o.spec.empty()) throw InputError("--spec is required");
  const SafetySpec spec = load_spec(o.spec);
  if (spec.unsafe.dim() != system.dimension) throw InputError("unsafe box dimension does not match the system");

  FalsificationResult r;
  if (o.method == "rd") {
    RDParams params = rd_params(o);
    params.bound = o.budget;
    const auto approx = make_approximator(o, system, SensitivityKind::inverse);
    r = falsify_rd(system, *approx, theta, spec, params, o.seed);
  } else if (o.method == "baseline") {
    r = falsify_baseline(system, theta, spec, o.budget, o.beta, o.seed);
  } else {
    throw InputError("unknown method '" + o.method + "'");
  }

  write_trajectory_csv(r.trajectory, out_path(o, "falsify_trajectory.csv").string());
  write_points_csv(out_path(o, "unsafe_box.csv"), spec.unsafe.corners(), system.dimension);
  json j = {{"method", o.method},
            {"falsified", r.falsified},
            {"k", r.k},
            {"rho", r.rho},
            {"per_iteration_rho", r.per_iteration_rho},
            {"initial_state", to_json(r.trajectory.initial_state())}};
  if (o.method == "rd") {
    j["target"] = {{"z", to_json(r.target.z)}, {"t", r.target.t}};
    j["params"] = {{"s", o.s}, {"p", o.p}, {"budget", o.budget}, {"oracle", o.oracle}};
  } else {
    j["params"] = {{"budget", o.budget}, {"beta", o.beta}};
  }
  emit(j, out_path(o, "falsify.json"));
  return r.falsified ? kOk : kBudgetExhausted;
}

int cmd_predict(const Options& o) {
  const ClosedLoopSystem system = resolve_system(o.system);
  if (o.model.empty() && !o.oracle) throw InputError("pass exactly one of --model and --oracle");
  const auto approx = make_approximator(o, system, SensitivityKind::forward);
  if (o.x0_new.empty()) throw InputError("--x0-new is required");
  const Vector x0 = o.x0.empty() ? resolve_theta(o, system).center() : parse_state(o.x0, system.dimension, "--x0");
  const Vector x0_new = parse_state(o.x0_new, system.dimension, "--x0-new");
  const int steps = o.steps < 0 ? system.max_steps : o.steps;
  MagnitudeModel magnitude;
  double training_radius = o.radius;
  if (!o.dataset.empty()) {
    const SensitivityDataset ds = load_dataset(o.dataset);
    if (ds.config.kind != SensitivityKind::forward) throw InputError("--dataset must be forward kind");
    magnitude = MagnitudeModel::fit(ds);
    training_radius = ds.config.neighbor_radius;
  }
  const Trajectory anchor = simulate(system, x0, steps);
  const Trajectory predicted = predict_trajectory(*approx, anchor, x0_new, magnitude, training_radius);
  const fs::path path = out_path(o, "predicted.csv");
  write_trajectory_csv(predicted, path.string());
  write_trajectory_csv(anchor, out_path(o, "predict_anchor.csv").string());
  std::cout << path.string() << "\n";
  return kOk;
}

int cmd_bounds(const Options& o) {
  if (!(o.d_init > 0.0)) throw InputError("--d-init must be positive");
  if (!(o.s > 0.0) || o.s > 1.0 || o.p < 1) throw InputError("need s in (0, 1] and p >= 1");
  if (!(o.delta > 0.0)) throw InputError("--delta must be positive");
  if (o.max_k < 0) throw InputError("--k must be >= 0");
  const ConvergenceParams cp = ConvergenceParams::from_rates(o.gamma, o.r_eps);
  const double rate = 1.0 - o.s * o.p;

  json contraction = json::array();
  json bound = json::array();
  for (int k = 0; k <= o.max_k; ++k) {
    contraction.push_back(std::pow(std::abs(rate), k) * o.d_init);
  }
  const double guaranteed_rate = o.s * o.p * cp.gamma;
  const bool has_bound = guaranteed_rate > 0.0 && guaranteed_rate < 1.0;
  for (int k = 0; has_bound && k <= o.max_k; ++k) bound.push_back(convergence_bound(o.d_init, o.s, o.p, cp, k));
  json j = {{"d_init", o.d_init}, {"s", o.s},         {"p", o.p},
            {"gamma", o.gamma},   {"r_eps", o.r_eps}, {"delta", o.delta},
            {"exact_contraction", contraction},       {"error_bound", bound}};
  const double r = std::abs(rate);
  if (o.d_init <= o.delta) {
    j["k_exact"] = 0;
  } else if (r == 0.0) {
    j["k_exact"] = 1;
  } else if (r < 1.0) {
    j["k_exact"] = static_cast<int>(std::ceil(std::log(o.d_init / o.delta) / -std::log(r)));
  } else {
    j["k_exact"] = nullptr;
  }
  if (!has_bound) {
    j["error_bound"] = nullptr;
    j["k_star"] = nullptr;
    j["no_guarantee"] = "s * p * gamma must lie in (0, 1)";
  } else {
    try {
      j["k_star"] = k_star(o.d_init, o.delta, o.s, o.p, cp);
    } catch (const NoGuaranteeError& e) {
      j["k_star"] = nullptr;
      j["no_guarantee"] = e.what();
    }
  }
  emit(j, out_path(o, "bounds.json"));
  return kOk;
}

void add_common(CLI::App* sub, Options& o, bool needs_system = true) {
  auto* opt = sub->add_option("--system", o.system, "System JSON file or catalog name");
  if (needs_system) opt->required();
  sub->add_option("--theta-lo", o.theta_lo, "Initial-set lower corner, comma separated");
  sub->add_option("--theta-hi", o.theta_hi, "Initial-set upper corner, comma separated");
  sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  sub->add_option("--out", o.out_dir, "Output directory")->capture_default_str();
  sub->add_option("--threads", o.threads, "Worker threads (default NEXG_THREADS or core count)");
}

void add_rd(CLI::App* sub, Options& o) {
  sub->add_option("--model", o.model, "Trained model JSON");
  sub->add_flag("--oracle", o.oracle, "Use the exact backward-integration oracle");
  sub->add_option("--s", o.s, "Scaling factor")->capture_default_str();
  sub->add_option("--p", o.p, "Correction period")->capture_default_str();
  sub->add_option("--delta", o.delta, "Termination threshold")->capture_default_str();
  sub->add_option("--bound", o.bound, "Maximum course corrections")->capture_default_str();
  sub->add_option("--policy", o.policy, "straight | axis")->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Neural-sensitivity reachability explorer and falsifier", "nexg"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "Simulate one trajectory to CSV");
  add_common(sim, o);
  sim->add_option("--x0", o.x0, "Initial state (default: centre of theta)");
  sim->add_option("--steps", o.steps, "Number of steps (default: system horizon)");
  sim->add_flag("--backward", o.backward, "Integrate backwards in time");

  auto* gen = app.add_subcommand("gen-data", "Generate a sensitivity dataset");
  add_common(gen, o);
  gen->add_option("--anchors", o.anchors)->capture_default_str();
  gen->add_option("--neighbors", o.neighbors)->capture_default_str();
  gen->add_option("--radius", o.radius)->capture_default_str();
  gen->add_option("--subsample", o.subsample)->capture_default_str();
  gen->add_option("--kind", o.kind, "inverse | forward")->capture_default_str();

  auto* tr = app.add_subcommand("train", "Train a directional approximator");
  add_common(tr, o, false);
  tr->add_option("--dataset", o.dataset)->required();
  tr->add_option("--epochs", o.epochs)->capture_default_str();
  tr->add_option("--lr", o.lr)->capture_default_str();
  tr->add_option("--optimizer", o.optimizer, "adam | sgd")->capture_default_str();
  tr->add_option("--batch", o.batch)->capture_default_str();
  tr->add_option("--width", o.width, "Hidden width")->capture_default_str();
  tr->add_option("--train-fraction", o.train_fraction)->capture_default_str();

  auto* ev = app.add_subcommand("eval", "Evaluate a model on a dataset");
  add_common(ev, o, false);
  ev->add_option("--dataset", o.dataset)->required();
  ev->add_option("--model", o.model);
  ev->add_flag("--oracle", o.oracle);
  ev->add_flag("--error-curve", o.error_curve, "Also estimate eps_abs(r) (needs --system)");
  ev->add_option("--samples", o.curve_samples, "Samples per radius for --error-curve")->capture_default_str();

  auto* reach = app.add_subcommand("reach", "Search for an initial state reaching a target");
  add_common(reach, o);
  add_rd(reach, o);
  reach->add_option("--target", o.target, "Destination z")->required();
  reach->add_option("--time", o.time, "Time t")->required();
  reach->add_option("--x0", o.x0, "Anchor initial state (default: random in theta)");

  auto* cov = app.add_subcommand("coverage", "Estimate reachable-set coverage at time t");
  add_common(cov, o);
  add_rd(cov, o);
  cov->add_option("--time", o.time, "Time t")->required();
  cov->add_option("--targets", o.targets)->capture_default_str();

  auto* fal = app.add_subcommand("falsify", "Falsify a never-reach specification");
  add_common(fal, o);
  add_rd(fal, o);
  fal->add_option("--spec", o.spec, "Specification JSON")->required();
  fal->add_option("--method", o.method, "rd | baseline")->capture_default_str();
  fal->add_option("--budget", o.budget, "Simulation budget")->capture_default_str();
  fal->add_option("--beta", o.beta, "Baseline temperature")->capture_default_str();

  auto* pred = app.add_subcommand("predict", "Predict a neighbouring trajectory without simulating it");
  add_common(pred, o);
  pred->add_option("--model", o.model, "Forward-kind model JSON");
  pred->add_flag("--oracle", o.oracle);
  pred->add_option("--x0", o.x0, "Anchor initial state (default: centre of theta)");
  pred->add_option("--x0-new", o.x0_new, "New initial state")->required();
  pred->add_option("--steps", o.steps);
  pred->add_option("--dataset", o.dataset, "Forward dataset used to fit the magnitude model");
  pred->add_option("--radius", o.radius, "Training radius")->capture_default_str();

  auto* bnd = app.add_subcommand("bounds", "Evaluate the convergence formulas");
  bnd->add_option("--d-init", o.d_init)->capture_default_str();
  bnd->add_option("--s", o.s)->capture_default_str();
  bnd->add_option("--p", o.p)->capture_default_str();
  bnd->add_option("--gamma", o.gamma)->capture_default_str();
  bnd->add_option("--r-eps", o.r_eps)->capture_default_str();
  bnd->add_option("--delta", o.delta)->capture_default_str();
  bnd->add_option("--k", o.max_k, "Largest k tabulated")->capture_default_str();
  bnd->add_option("--out", o.out_dir)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*gen) return cmd_gen_data(o);
    if (*tr) return cmd_train(o);
    if (*ev) return cmd_eval(o);
    if (*reach) return cmd_reach(o);
    if (*cov) return cmd_coverage(o);
    if (*fal) return cmd_falsify(o);
    if (*pred) return cmd_predict(o);
    if (*bnd) return cmd_bounds(o);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDivergence;
  } catch (const TrainingDivergedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDivergence;
  } catch (const DegeneratePredictionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDivergence;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  std::cerr << app.help();
  return kUsage;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("nexg");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace nexg::cli
