// Command-line front end: solve, sweep-eps, gaussian-oracle, emd,
// dist-matrix, color-transfer and sample. Every run writes manifest.json next
// to its outputs; `ocd --replay manifest.json --out DIR` repeats it.

#include "ocd/applications.hpp"
#include "ocd/diagnostics.hpp"
#include "ocd/dynamics.hpp"
#include "ocd/epsilon_tuning.hpp"
#include "ocd/error.hpp"
#include "ocd/exact_ot.hpp"
#include "ocd/gaussian_analytic.hpp"
#include "ocd/io.hpp"
#include "ocd/samplers.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// "1,0;0,4" -> 2x2. Rows split on ';', entries on ','.
ocd::SquareMatrix parse_matrix_arg(const std::string& text, const char* what) {
  std::vector<std::vector<double>> rows;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t semi = text.find(';', start);
    const std::string line = text.substr(start, semi == std::string::npos ? semi : semi - start);
    std::vector<double> values;
    std::size_t p = 0;
    while (p <= line.size()) {
      const std::size_t comma = line.find(',', p);
      const std::string token = line.substr(p, comma == std::string::npos ? comma : comma - p);
      try {
        std::size_t used = 0;
        values.push_back(std::stod(token, &used));
        if (used != token.size() && token.find_first_not_of(' ', used) != std::string::npos) {
          throw std::invalid_argument(token);
        }
      } catch (const std::exception&) {
        throw ocd::Error(ocd::ErrorCode::InvalidConfig,
                         std::string(what) + ": cannot parse '" + token + "'");
      }
      if (comma == std::string::npos) break;
      p = comma + 1;
    }
    rows.push_back(std::move(values));
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  const auto n = static_cast<ocd::Index>(rows.size());
  ocd::SquareMatrix m(n, static_cast<ocd::Index>(rows.front().size()));
  for (ocd::Index r = 0; r < n; ++r) {
    if (static_cast<ocd::Index>(rows[static_cast<std::size_t>(r)].size()) != m.cols()) {
      throw ocd::Error(ocd::ErrorCode::InvalidConfig, std::string(what) + ": ragged matrix");
    }
    for (ocd::Index c = 0; c < m.cols(); ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return m;
}

struct EpsilonChoice {
  ocd::EpsilonMode mode = ocd::EpsilonMode::Auto;
  double value = 0.0;
};

EpsilonChoice parse_eps(const std::string& text) {
  if (text == "auto") return {ocd::EpsilonMode::Auto, 0.0};
  if (text == "rule") return {ocd::EpsilonMode::RuleOfThumb, 0.0};
  if (text == "crit") return {ocd::EpsilonMode::Crit, 0.0};
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && v > 0.0 && std::isfinite(v)) return {ocd::EpsilonMode::Fixed, v};
  } catch (const std::exception&) {
  }
  throw ocd::Error(ocd::ErrorCode::InvalidConfig,
                   "--eps must be a positive number, auto, rule or crit (got '" + text + "')");
}

// Solver flags shared by solve, sweep-eps, dist-matrix and color-transfer.
struct SolverFlags {
  std::string eps = "auto";
  double eps_hat = 0.0;
  double dt = 0.1;
  std::int64_t max_steps = 10000;
  double gamma_abs = 0.01;
  double gamma_rel = 1e-4;
  int window = 50;
  std::string estimator = "piecewise-linear";
  std::string stepper = "rk4";
  int leaf_size = 16;
  int cluster_every = 1;
  bool frozen_clusters = false;
  std::uint64_t seed = 0;

  void attach(CLI::App* app) {
    app->add_option("--eps", eps, "Neighbor radius: a number, auto, rule or crit")->capture_default_str();
    app->add_option("--eps-hat", eps_hat, "Ridge added to cluster covariances")->capture_default_str();
    app->add_option("--dt", dt, "Time step")->capture_default_str();
    app->add_option("--max-steps", max_steps)->capture_default_str();
    app->add_option("--gamma-abs", gamma_abs, "Stop once the mean cost falls to this value")
        ->capture_default_str();
    app->add_option("--gamma-rel", gamma_rel, "Relative cost change counted as stagnation")
        ->capture_default_str();
    app->add_option("--window", window, "Stagnation window in steps")->capture_default_str();
    app->add_option("--estimator", estimator)
        ->check(CLI::IsMember({"piecewise-linear", "piecewise-constant"}))
        ->capture_default_str();
    app->add_option("--stepper", stepper)->check(CLI::IsMember({"rk4", "euler"}))->capture_default_str();
    app->add_option("--leaf-size", leaf_size)->capture_default_str();
    app->add_option("--cluster-every", cluster_every, "Cluster counts every k steps (0: never)")
        ->capture_default_str();
    app->add_flag("--frozen-clusters", frozen_clusters, "Reuse step-start neighbor sets in RK stages");
    app->add_option("--seed", seed)->capture_default_str();
  }

  json to_json() const {
    return {{"eps", eps},       {"eps_hat", eps_hat},     {"dt", dt},
            {"max_steps", max_steps}, {"gamma_abs", gamma_abs}, {"gamma_rel", gamma_rel},
            {"window", window}, {"estimator", estimator}, {"stepper", stepper},
            {"leaf_size", leaf_size}, {"cluster_every", cluster_every},
            {"frozen_clusters", frozen_clusters}, {"seed", seed}};
  }

  static SolverFlags from_json(const json& j) {
    SolverFlags f;
    f.eps = j.at("eps").get<std::string>();
    f.eps_hat = j.at("eps_hat").get<double>();
    f.dt = j.at("dt").get<double>();
    f.max_steps = j.at("max_steps").get<std::int64_t>();
    f.gamma_abs = j.at("gamma_abs").get<double>();
    f.gamma_rel = j.at("gamma_rel").get<double>();
    f.window = j.at("window").get<int>();
    f.estimator = j.at("estimator").get<std::string>();
    f.stepper = j.at("stepper").get<std::string>();
    f.leaf_size = j.at("leaf_size").get<int>();
    f.cluster_every = j.at("cluster_every").get<int>();
    f.frozen_clusters = j.at("frozen_clusters").get<bool>();
    f.seed = j.at("seed").get<std::uint64_t>();
    return f;
  }

  // epsilon is left at its default; callers resolve it per input pair.
  ocd::SolverConfig config(int threads) const {
    ocd::SolverConfig c;
    c.epsilon_hat = eps_hat;
    c.dt = dt;
    c.max_steps = max_steps;
    c.gamma_abs = gamma_abs;
    c.gamma_rel = gamma_rel;
    c.stagnation_window = window;
    c.estimator = estimator == "piecewise-constant" ? ocd::Estimator::PiecewiseConstant
                                                    : ocd::Estimator::PiecewiseLinear;
    c.stepper = stepper == "euler" ? ocd::Stepper::Euler : ocd::Stepper::RK4;
    c.leaf_size = leaf_size;
    c.cluster_count_every = cluster_every;
    c.frozen_clusters = frozen_clusters;
    c.seed = seed;
    c.threads = threads;
    return c;
  }
};

struct RunContext {
  fs::path out;
  int threads = 1;
  bool deterministic = false;
};

void prepare_output(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ocd::Error(ocd::ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

void finish(const RunContext& ctx, const std::string& command, const ocd::SolverConfig& config,
            const std::map<std::string, std::string>& inputs, const json& options) {
  ocd::RunManifest m;
  m.command = command;
  m.config = config;
  m.inputs = inputs;
  m.output_dir = ctx.out.string();
  m.options = options;
  m.options["deterministic"] = ctx.deterministic;
  ocd::write_manifest(m, (ctx.out / "manifest.json").string());
}

// Random row permutation of y, so paired input files start from the
// product coupling.
ocd::Matrix maybe_shuffle(const ocd::Matrix& y, bool shuffle, std::uint64_t seed) {
  if (!shuffle) return y;
  ocd::Rng rng(seed);
  return ocd::shuffle_rows(y, rng);
}

// ---------------------------------------------------------------- solve

int cmd_solve(const json& opts, const RunContext& ctx) {
  const SolverFlags flags = SolverFlags::from_json(opts.at("solver"));
  const std::string x_path = opts.at("x").get<std::string>();
  const std::string y_path = opts.at("y").get<std::string>();
  const ocd::Matrix x = ocd::read_samples_csv(x_path);
  const ocd::Matrix y = maybe_shuffle(ocd::read_samples_csv(y_path), opts.at("shuffle_y").get<bool>(),
                                      flags.seed);
  prepare_output(ctx.out);

  ocd::SolverConfig config = flags.config(ctx.threads);
  const EpsilonChoice eps = parse_eps(flags.eps);
  config.epsilon = ocd::resolve_epsilon(eps.mode, eps.value, x, y);
  config.record_diagnostics = false;

  const std::string diag_path = (ctx.out / "diagnostics.jsonl").string();
  std::ofstream diag(diag_path, std::ios::binary | std::ios::trunc);
  if (!diag) throw ocd::Error(ocd::ErrorCode::IoError, "cannot create " + diag_path);
  const ocd::RunResult result =
      ocd::run(ocd::ParticleEnsemble(x, y), ocd::l2_cost_model(), config,
               [&](const ocd::StepDiagnostics& d) { ocd::write_diagnostics_line(diag, d); });
  diag.close();
  if (!diag) throw ocd::Error(ocd::ErrorCode::IoError, "cannot write " + diag_path);

  ocd::write_pairs_csv(result.final_ensemble.x(), result.final_ensemble.y(),
                       (ctx.out / "pairs.csv").string());
  finish(ctx, "solve", config, {{"x", x_path}, {"y", y_path}}, opts);
  std::cout << json{{"termination", std::string(ocd::to_string(result.termination))},
                    {"steps", result.final_ensemble.step_index()},
                    {"final_cost", result.final_cost},
                    {"epsilon", config.epsilon}}
                   .dump()
            << '\n';
  return 0;
}

// ---------------------------------------------------------------- sweep-eps

std::vector<double> parse_grid(const std::string& text, const ocd::Matrix& x, const ocd::Matrix& y) {
  std::vector<double> grid;
  if (text.empty()) {
    // 13 log-spaced values spanning 1.5 decades either side of the beta-rule radius.
    const double center = ocd::epsilon_auto(x, y);
    for (int k = -6; k <= 6; ++k) grid.push_back(center * std::pow(10.0, 0.25 * k));
    return grid;
  }
  const ocd::SquareMatrix m = parse_matrix_arg(text, "--grid");
  if (m.rows() != 1) throw ocd::Error(ocd::ErrorCode::InvalidConfig, "--grid takes one comma list");
  for (ocd::Index k = 0; k < m.cols(); ++k) grid.push_back(m(0, k));
  return grid;
}

int cmd_sweep(const json& opts, const RunContext& ctx) {
  const SolverFlags flags = SolverFlags::from_json(opts.at("solver"));
  const std::string x_path = opts.at("x").get<std::string>();
  const std::string y_path = opts.at("y").get<std::string>();
  const ocd::Matrix x = ocd::read_samples_csv(x_path);
  const ocd::Matrix y = maybe_shuffle(ocd::read_samples_csv(y_path), opts.at("shuffle_y").get<bool>(),
                                      flags.seed);
  prepare_output(ctx.out);

  const std::vector<double> grid = parse_grid(opts.at("grid").get<std::string>(), x, y);
  ocd::SolverConfig config = flags.config(ctx.threads);
  const auto rows = ocd::epsilon_sweep(x, y, ocd::l2_cost_model(), config, grid);

  std::string table = "epsilon,final_cost,emd_cost,joint_distance,n_clusters_x,n_clusters_y,steps,wall_time_ms\n";
  std::string failures;
  for (const auto& r : rows) {
    // Timings are the one nondeterministic column; deterministic runs zero it.
    const double wall = ctx.deterministic ? 0.0 : r.wall_time_ms;
    table += ocd::format_double(r.epsilon) + ',' + ocd::format_double(r.final_cost) + ',' +
             ocd::format_double(r.emd_cost) + ',' + ocd::format_double(r.joint_distance) + ',' +
             std::to_string(r.n_clusters_x) + ',' + std::to_string(r.n_clusters_y) + ',' +
             std::to_string(r.steps) + ',' + ocd::format_double(wall) + '\n';
    if (r.failed) failures += "epsilon " + ocd::format_double(r.epsilon) + ": " + r.error + '\n';
  }
  ocd::write_text_file((ctx.out / "sweep.csv").string(), table);
  ocd::write_text_file((ctx.out / "failures.log").string(), failures);

  std::vector<ocd::CurvePoint> curve;
  for (const auto& r : rows) {
    if (!r.failed) curve.push_back({r.epsilon, r.n_clusters_x});
  }
  json summary{{"best_epsilon", ocd::best_sweep_epsilon(rows)},
               {"epsilon_auto", ocd::epsilon_auto(x, y)},
               {"epsilon_rule", ocd::epsilon_rule_of_thumb(x.cols(), x.rows())},
               {"seed", flags.seed}};
  if (curve.size() >= 5) {
    const ocd::KneeResult knee = ocd::epsilon_crit(curve);
    summary["epsilon_crit"] = knee.epsilon;
    summary["epsilon_crit_low_confidence"] = knee.low_confidence;
  }
  ocd::write_text_file((ctx.out / "summary.json").string(), summary.dump(2) + "\n");
  finish(ctx, "sweep-eps", config, {{"x", x_path}, {"y", y_path}}, opts);
  std::cout << summary.dump() << '\n';
  return 0;
}

// ---------------------------------------------------------------- gaussian-oracle

int cmd_gaussian(const json& opts, const RunContext& ctx) {
  const ocd::GaussianPair pair(parse_matrix_arg(opts.at("sigma_mu").get<std::string>(), "--sigma-mu"),
                               parse_matrix_arg(opts.at("sigma_nu").get<std::string>(), "--sigma-nu"));
  const std::string j0_text = opts.at("j0").get<std::string>();
  const ocd::SquareMatrix j0 = j0_text.empty() ? ocd::SquareMatrix::Zero(pair.dim(), pair.dim())
                                               : parse_matrix_arg(j0_text, "--j0");
  const double dt = opts.at("dt").get<double>();
  const double t_final = opts.at("t_final").get<double>();
  prepare_output(ctx.out);

  const auto trajectory = ocd::integrate_riccati(pair, j0, dt, t_final);
  const ocd::Index n = pair.dim();
  const bool scalar = n == 1;
  const double s_mu = scalar ? std::sqrt(pair.sigma_mu()(0, 0)) : 0.0;
  const double s_nu = scalar ? std::sqrt(pair.sigma_nu()(0, 0)) : 0.0;

  std::string table = "t";
  for (ocd::Index a = 0; a < n; ++a) {
    for (ocd::Index b = 0; b < n; ++b) table += ",j" + std::to_string(a + 1) + std::to_string(b + 1);
  }
  if (scalar) table += ",kappa,kappa_closed_form";
  table += '\n';
  for (const auto& s : trajectory) {
    table += ocd::format_double(s.time);
    for (ocd::Index a = 0; a < n; ++a) {
      for (ocd::Index b = 0; b < n; ++b) table += ',' + ocd::format_double(s.j(a, b));
    }
    if (scalar) {
      table += ',' + ocd::format_double(s.j(0, 0) / (s_mu * s_nu)) + ',' +
               ocd::format_double(ocd::kappa_closed_form(s_mu, s_nu, s.time));
    }
    table += '\n';
  }
  ocd::write_text_file((ctx.out / "riccati.csv").string(), table);

  const ocd::GaussianOptimum opt = ocd::gaussian_ot_optimum(pair);
  json j_opt = json::array();
  for (ocd::Index a = 0; a < n; ++a) {
    json r = json::array();
    for (ocd::Index b = 0; b < n; ++b) r.push_back(opt.j_opt(a, b));
    j_opt.push_back(r);
  }
  json summary{{"d2", opt.d2}, {"j_opt", j_opt}, {"t_final", trajectory.back().time}};
  if (scalar) summary["kappa_closed_form"] = ocd::kappa_closed_form(s_mu, s_nu, trajectory.back().time);
  ocd::write_text_file((ctx.out / "summary.json").string(), summary.dump(2) + "\n");
  finish(ctx, "gaussian-oracle", ocd::SolverConfig{}, {}, opts);
  std::cout << summary.dump() << '\n';
  return 0;
}

// ---------------------------------------------------------------- emd

int cmd_emd(const json& opts, const RunContext& ctx) {
  const std::string x_path = opts.at("x").get<std::string>();
  const std::string y_path = opts.at("y").get<std::string>();
  const ocd::Matrix x = ocd::read_samples_csv(x_path);
  const ocd::Matrix y = ocd::read_samples_csv(y_path);
  prepare_output(ctx.out);

  const ocd::DiscreteCoupling coupling = ocd::emd(x, y, ocd::l2_cost_model());
  std::string table = "y_index\n";
  for (ocd::Index j : coupling.assignment) table += std::to_string(j) + '\n';
  ocd::write_text_file((ctx.out / "assignment.csv").string(), table);
  ocd::write_text_file((ctx.out / "summary.json").string(),
                       json{{"d2", coupling.total_cost}, {"n", x.rows()}}.dump(2) + "\n");
  finish(ctx, "emd", ocd::SolverConfig{}, {{"x", x_path}, {"y", y_path}}, opts);
  std::cout << "d2 = " << ocd::format_double(coupling.total_cost) << '\n';
  return 0;
}

// ---------------------------------------------------------------- dist-matrix

ocd::Matrix load_dataset(const std::string& path, ocd::Index n_samples, std::uint64_t seed) {
  const auto ext = fs::path(path).extension().string();
  if (ext == ".pgm") return ocd::image_to_point_samples(ocd::read_pgm(path), n_samples, seed);
  return ocd::read_samples_csv(path);
}

int cmd_dist_matrix(const json& opts, const RunContext& ctx) {
  const SolverFlags flags = SolverFlags::from_json(opts.at("solver"));
  const auto paths = opts.at("inputs").get<std::vector<std::string>>();
  const auto n_samples = opts.at("n_samples").get<ocd::Index>();
  std::vector<ocd::Matrix> datasets;
  std::map<std::string, std::string> inputs;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    datasets.push_back(load_dataset(paths[k], n_samples, flags.seed + k));
    inputs["input" + std::to_string(k + 1)] = paths[k];
  }
  prepare_output(ctx.out);

  ocd::SolverConfig config = flags.config(ctx.threads);
  const EpsilonChoice eps = parse_eps(flags.eps);
  if (eps.mode == ocd::EpsilonMode::Fixed) config.epsilon = eps.value;
  const auto result = ocd::distance_matrix(datasets, config, eps.mode);

  ocd::write_samples_csv(result.distances, (ctx.out / "distances.csv").string(), "d");
  std::string log;
  for (const auto& f : result.failures) log += f + '\n';
  ocd::write_text_file((ctx.out / "failures.log").string(), log);
  finish(ctx, "dist-matrix", config, inputs, opts);
  std::cout << json{{"datasets", datasets.size()}, {"failures", result.failures.size()}}.dump() << '\n';
  return 0;
}

// ---------------------------------------------------------------- color-transfer

int cmd_color(const json& opts, const RunContext& ctx) {
  const SolverFlags flags = SolverFlags::from_json(opts.at("solver"));
  const std::string source_path = opts.at("source").get<std::string>();
  const std::string target_path = opts.at("target").get<std::string>();
  const ocd::ImageSamples source = ocd::read_ppm(source_path);
  const ocd::ImageSamples target = ocd::read_ppm(target_path);
  prepare_output(ctx.out);

  ocd::SolverConfig config = flags.config(ctx.threads);
  const EpsilonChoice eps = parse_eps(flags.eps);
  if (eps.mode == ocd::EpsilonMode::Fixed) config.epsilon = eps.value;
  const auto n_train = std::min<ocd::Index>(opts.at("n_train").get<ocd::Index>(),
                                            std::min(source.pixels.rows(), target.pixels.rows()));
  const ocd::ImageSamples out =
      ocd::color_transfer(source, target, config, opts.at("alpha").get<double>(), n_train, eps.mode);
  ocd::write_ppm(out, (ctx.out / "output.ppm").string(), !opts.at("ascii").get<bool>());
  finish(ctx, "color-transfer", config, {{"source", source_path}, {"target", target_path}}, opts);
  std::cout << json{{"width", out.width}, {"height", out.height}, {"n_train", n_train}}.dump() << '\n';
  return 0;
}

// ---------------------------------------------------------------- sample

int cmd_sample(const json& opts, const RunContext& ctx) {
  const std::string dist = opts.at("dist").get<std::string>();
  const auto n = opts.at("n").get<ocd::Index>();
  if (n < 1) throw ocd::Error(ocd::ErrorCode::InvalidConfig, "--n must be >= 1");
  ocd::Rng rng(opts.at("seed").get<std::uint64_t>());
  json constants = json::object();
  ocd::Matrix samples;
  if (dist == "normal") {
    const auto dim = opts.at("dim").get<ocd::Index>();
    const std::string mean_text = opts.at("mean").get<std::string>();
    const std::string cov_text = opts.at("cov").get<std::string>();
    ocd::Vector mean = ocd::Vector::Zero(dim);
    if (!mean_text.empty()) {
      const ocd::SquareMatrix m = parse_matrix_arg(mean_text, "--mean");
      if (m.rows() != 1) throw ocd::Error(ocd::ErrorCode::InvalidConfig, "--mean takes one comma list");
      mean = m.row(0).transpose();
    }
    const ocd::SquareMatrix cov = cov_text.empty() ? ocd::SquareMatrix::Identity(mean.size(), mean.size())
                                                   : parse_matrix_arg(cov_text, "--cov");
    samples = ocd::sample_normal(n, mean, cov, rng);
  } else if (dist == "banana") {
    samples = ocd::sample_banana(n, rng);
    constants["curvature"] = ocd::kBananaCurvature;
  } else if (dist == "funnel") {
    samples = ocd::sample_funnel(n, rng);
    constants["v_scale"] = ocd::kFunnelScale;
  } else if (dist == "swiss-roll") {
    samples = ocd::sample_swiss_roll(n, rng);
    constants["noise"] = ocd::kSwissRollNoise;
    constants["t_range"] = {"1.5 pi", "4.5 pi"};
    constants["scale"] = 0.1;
  } else {
    samples = ocd::sample_softmax_pushforward(n, rng);
  }
  prepare_output(ctx.out);
  ocd::write_samples_csv(samples, (ctx.out / "samples.csv").string());
  json recorded = opts;
  recorded["constants"] = constants;
  finish(ctx, "sample", ocd::SolverConfig{}, {}, recorded);
  std::cout << json{{"dist", dist}, {"n", n}, {"dim", samples.cols()}}.dump() << '\n';
  return 0;
}

int dispatch(const std::string& command, const json& opts, const RunContext& ctx) {
  if (command == "solve") return cmd_solve(opts, ctx);
  if (command == "sweep-eps") return cmd_sweep(opts, ctx);
  if (command == "gaussian-oracle") return cmd_gaussian(opts, ctx);
  if (command == "emd") return cmd_emd(opts, ctx);
  if (command == "dist-matrix") return cmd_dist_matrix(opts, ctx);
  if (command == "color-transfer") return cmd_color(opts, ctx);
  if (command == "sample") return cmd_sample(opts, ctx);
  throw ocd::Error(ocd::ErrorCode::ParseError, "unknown command '" + command + "' in manifest");
}

void report(const ocd::Error& e) {
  std::cerr << json{{"error", std::string(ocd::to_string(e.code()))}, {"message", e.what()}}.dump()
            << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orthogonal coupling dynamics for optimal transport"};
  app.require_subcommand(0, 1);

  RunContext ctx;
  std::string out_dir;
  std::string replay;
  app.add_option("--threads", ctx.threads, "Worker threads")
      ->envname("OCD_THREADS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--deterministic", ctx.deterministic,
               "Fixed reduction order and no timing columns in primary outputs");
  app.add_option("--replay", replay, "Repeat the run described by a manifest.json");
  app.add_option("--out", out_dir, "Output directory (with --replay)");

  // solve
  SolverFlags solve_flags;
  std::string solve_x, solve_y;
  bool solve_shuffle = false;
  std::string solve_out;
  auto* solve = app.add_subcommand("solve", "Run OCD on two sample files");
  solve->add_option("--x", solve_x, "CSV samples of the first marginal")->required();
  solve->add_option("--y", solve_y, "CSV samples of the second marginal")->required();
  solve->add_option("--out", solve_out, "Output directory")->required();
  solve->add_flag("--shuffle-y", solve_shuffle, "Permute y rows (seeded) before pairing");
  solve_flags.attach(solve);

  // sweep-eps
  SolverFlags sweep_flags;
  sweep_flags.eps = "auto";
  std::string sweep_x, sweep_y, sweep_out, sweep_grid;
  bool sweep_shuffle = false;
  auto* sweep = app.add_subcommand("sweep-eps", "One OCD run per radius, compared with exact OT");
  sweep->add_option("--x", sweep_x)->required();
  sweep->add_option("--y", sweep_y)->required();
  sweep->add_option("--out", sweep_out)->required();
  sweep->add_option("--grid", sweep_grid, "Comma list of radii (default: around the auto radius)");
  sweep->add_flag("--shuffle-y", sweep_shuffle);
  sweep_flags.attach(sweep);

  // gaussian-oracle
  std::string g_mu = "1", g_nu = "1", g_j0, g_out;
  double g_dt = 1e-3, g_t = 2.0;
  auto* gauss = app.add_subcommand("gaussian-oracle", "Riccati trajectory and Gaussian OT optimum");
  gauss->add_option("--sigma-mu", g_mu, "Covariance, rows split by ';'")->capture_default_str();
  gauss->add_option("--sigma-nu", g_nu)->capture_default_str();
  gauss->add_option("--j0", g_j0, "Initial cross-covariance (default zero)");
  gauss->add_option("--dt", g_dt)->capture_default_str();
  gauss->add_option("--t-final", g_t)->capture_default_str();
  gauss->add_option("--out", g_out)->required();

  // emd
  std::string emd_x, emd_y, emd_out;
  auto* emd = app.add_subcommand("emd", "Exact assignment between two equal-size sample files");
  emd->add_option("--x", emd_x)->required();
  emd->add_option("--y", emd_y)->required();
  emd->add_option("--out", emd_out)->required();

  // dist-matrix
  SolverFlags dm_flags;
  std::vector<std::string> dm_inputs;
  std::string dm_out;
  ocd::Index dm_samples = 1000;
  auto* dm = app.add_subcommand("dist-matrix", "Pairwise OCD distances between datasets");
  dm->add_option("--inputs", dm_inputs, "CSV sample files or PGM images")->required()->expected(2, -1);
  dm->add_option("--n-samples", dm_samples, "Samples drawn from each PGM image")->capture_default_str();
  dm->add_option("--out", dm_out)->required();
  dm_flags.attach(dm);

  // color-transfer
  SolverFlags ct_flags;
  std::string ct_source, ct_target, ct_out;
  double ct_alpha = 1.0;
  ocd::Index ct_train = 2000;
  bool ct_ascii = false;
  auto* ct = app.add_subcommand("color-transfer", "Map the colors of one PPM image onto another");
  ct->add_option("--source", ct_source)->required();
  ct->add_option("--target", ct_target)->required();
  ct->add_option("--alpha", ct_alpha, "Blend between source (0) and mapped (1)")->capture_default_str();
  ct->add_option("--n-train", ct_train, "Pixels sampled from each image")->capture_default_str();
  ct->add_flag("--ascii", ct_ascii, "Write P3 instead of P6");
  ct->add_option("--out", ct_out)->required();
  ct_flags.attach(ct);

  // sample
  std::string s_dist = "normal", s_mean, s_cov, s_out;
  ocd::Index s_n = 1000, s_dim = 2;
  std::uint64_t s_seed = 0;
  auto* sample = app.add_subcommand("sample", "Draw samples from a built-in distribution");
  sample->add_option("--dist", s_dist)
      ->check(CLI::IsMember({"normal", "banana", "funnel", "swiss-roll", "softmax-pushforward"}))
      ->capture_default_str();
  sample->add_option("--n", s_n)->capture_default_str();
  sample->add_option("--seed", s_seed)->capture_default_str();
  sample->add_option("--dim", s_dim, "Dimension of the normal sampler")->capture_default_str();
  sample->add_option("--mean", s_mean, "Mean of the normal sampler, comma list");
  sample->add_option("--cov", s_cov, "Covariance of the normal sampler, rows split by ';'");
  sample->add_option("--out", s_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (!replay.empty()) {
      const ocd::RunManifest m = ocd::read_manifest(replay);
      ctx.out = out_dir.empty() ? fs::path(m.output_dir) : fs::path(out_dir);
      ctx.deterministic = ctx.deterministic || m.options.value("deterministic", false);
      return dispatch(m.command, m.options, ctx);
    }
    if (solve->parsed()) {
      ctx.out = solve_out;
      return cmd_solve({{"x", solve_x}, {"y", solve_y}, {"shuffle_y", solve_shuffle},
                        {"solver", solve_flags.to_json()}},
                       ctx);
    }
    if (sweep->parsed()) {
      ctx.out = sweep_out;
      return cmd_sweep({{"x", sweep_x}, {"y", sweep_y}, {"shuffle_y", sweep_shuffle},
                        {"grid", sweep_grid}, {"solver", sweep_flags.to_json()}},
                       ctx);
    }
    if (gauss->parsed()) {
      ctx.out = g_out;
      return cmd_gaussian(
          {{"sigma_mu", g_mu}, {"sigma_nu", g_nu}, {"j0", g_j0}, {"dt", g_dt}, {"t_final", g_t}}, ctx);
    }
    if (emd->parsed()) {
      ctx.out = emd_out;
      return cmd_emd({{"x", emd_x}, {"y", emd_y}}, ctx);
    }
    if (dm->parsed()) {
      ctx.out = dm_out;
      return cmd_dist_matrix(
          {{"inputs", dm_inputs}, {"n_samples", dm_samples}, {"solver", dm_flags.to_json()}}, ctx);
    }
    if (ct->parsed()) {
      ctx.out = ct_out;
      return cmd_color({{"source", ct_source}, {"target", ct_target}, {"alpha", ct_alpha},
                        {"n_train", ct_train}, {"ascii", ct_ascii}, {"solver", ct_flags.to_json()}},
                       ctx);
    }
    if (sample->parsed()) {
      ctx.out = s_out;
      return cmd_sample({{"dist", s_dist}, {"n", s_n}, {"seed", s_seed}, {"dim", s_dim},
                         {"mean", s_mean}, {"cov", s_cov}},
                        ctx);
    }
    std::cerr << app.help();
    return 2;
  } catch (const ocd::Error& e) {
    report(e);
    return e.is_io() ? 2 : 1;
  } catch (const nlohmann::json::exception& e) {
    report(ocd::Error(ocd::ErrorCode::ParseError, std::string("manifest: ") + e.what()));
    return 2;
  }
}
