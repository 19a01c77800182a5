// Batch front-end for geodesic random walks and their horizontal lifts:
// simulation, moment validation, generator/identity checks, convergence
// reports and the holonomy probe. Exit codes: 0 pass, 1 test failure,
// 2 error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "horizon/horizon.hpp"
#include "horizon/sampling.hpp"

namespace {

using horizon::RunConfig;

struct CliOverrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> manifold;
  std::optional<std::string> law;
  std::optional<std::string> mode;
  std::optional<double> alpha;
  std::optional<double> t;
  std::optional<std::uint64_t> replicas;
  std::optional<std::uint64_t> samples;
  std::optional<std::string> function;
  std::vector<double> alphas;
  std::vector<double> t_grid;
  std::vector<std::string> functions;
};

void add_common_options(CLI::App* sub, CliOverrides& o) {
  sub->add_option("--config", o.config_path, "config file (flat key = value)");
  sub->add_option_function<std::string>("--out", [&o](const std::string& v) { o.out = v; }, "output directory");
  sub->add_option_function<std::uint64_t>("--seed", [&o](std::uint64_t v) { o.seed = v; }, "master seed");
  sub->add_option_function<int>("--threads", [&o](int v) { o.threads = v; },
                                "worker threads (0 = auto; affects speed only, never results)");
  sub->add_option_function<std::string>("--manifold", [&o](const std::string& v) { o.manifold = v; },
                                        "euclidean|torus|sphere|hyperbolic");
  sub->add_option_function<std::string>("--law", [&o](const std::string& v) { o.law = v; },
                                        "gaussian|sphere_uniform|rademacher|two_point");
  sub->add_option_function<std::string>("--mode", [&o](const std::string& v) { o.mode = v; },
                                        "discrete_rescaled|exponential_clock");
  sub->add_option_function<double>("--alpha", [&o](double v) { o.alpha = v; }, "walk speed in (0, 1]");
  sub->add_option_function<double>("--t", [&o](double v) { o.t = v; }, "time horizon");
  sub->add_option_function<std::uint64_t>("--replicas", [&o](std::uint64_t v) { o.replicas = v; },
                                          "replica count");
  sub->add_option_function<std::uint64_t>("--samples", [&o](std::uint64_t v) { o.samples = v; },
                                          "sample count for moment/MC estimates");
  sub->add_option_function<std::string>("--function", [&o](const std::string& v) { o.function = v; },
                                        "single test function name");
  sub->add_option("--alphas", o.alphas, "alpha sweep (decreasing)");
  sub->add_option("--t-grid", o.t_grid, "evaluation times");
  sub->add_option("--functions", o.functions, "test function names");
}

RunConfig resolve_config(const CliOverrides& o) {
  RunConfig rc;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw horizon::IoError("cannot read config file '" + o.config_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    rc = horizon::parse_config(ss.str());
  }
  if (o.out) rc.out = *o.out;
  if (o.seed) rc.seed = *o.seed;
  if (o.threads) rc.threads = *o.threads;
  if (o.manifold) rc.manifold = *o.manifold;
  if (o.law) rc.law = *o.law;
  if (o.mode) rc.mode = *o.mode;
  if (o.alpha) rc.alpha = *o.alpha;
  if (o.t) rc.t = *o.t;
  if (o.replicas) rc.replicas = *o.replicas;
  if (o.samples) rc.samples = *o.samples;
  if (!o.alphas.empty()) rc.alphas = o.alphas;
  if (!o.t_grid.empty()) rc.t_grid = o.t_grid;
  if (!o.functions.empty()) rc.functions = o.functions;
  if (o.function) rc.functions = {*o.function};
  horizon::validate_config(rc);
  return rc;
}

std::vector<horizon::ScalarField> selected_fields(const RunConfig& rc) {
  if (rc.functions.empty()) return horizon::catalog_fields(rc.manifold);
  std::vector<horizon::ScalarField> out;
  for (const auto& name : rc.functions) out.push_back(horizon::catalog_field(rc.manifold, name));
  return out;
}

horizon::GeneratorEvalOptions generator_options(const RunConfig& rc) {
  horizon::GeneratorEvalOptions opts;
  opts.mode = rc.generator_mode == "monte_carlo" ? horizon::GeneratorEvalMode::monte_carlo
                                                 : horizon::GeneratorEvalMode::deterministic;
  opts.mc_samples = rc.samples;
  opts.seed = rc.seed;
  return opts;
}

void write_report(const RunConfig& rc, const std::string& command, const std::string& csv,
                  nlohmann::json& json) {
  std::filesystem::create_directories(rc.out);
  if (!csv.empty())
    horizon::atomic_write_file(std::filesystem::path(rc.out) / (command + ".csv"), csv);
  horizon::atomic_write_file(std::filesystem::path(rc.out) / (command + ".json"), json.dump(2) + "\n");
}

int cmd_walk(const RunConfig& rc, bool lifted) {
  const auto summary = horizon::batch_run(rc, lifted, lifted ? "lift" : "walk");
  std::cout << (lifted ? "lift" : "walk") << ": " << summary.replicas << " replicas, " << summary.excluded
            << " excluded (domain exit)\n"
            << "  " << summary.csv_path << "\n  " << summary.sidecar_path << "\n";
  return 0;
}

int cmd_validate_law(const RunConfig& rc) {
  const auto chart = horizon::chart_by_name(rc.manifold, rc.sphere_epsilon);
  const auto law = horizon::IncrementLaw::from_name(rc.law);
  const auto points = horizon::catalog_sample_points(chart);
  const auto reports = horizon::validate_law(law, chart, points, rc.samples, rc.seed);

  std::string csv =
      "manifold,law,point_index,x1,x2,n,mean1,mean2,cov11,cov21,cov12,cov22,third_abs,mean_ok,cov_ok,third_ok\n";
  bool all_pass = true;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    all_pass = all_pass && r.pass();
    csv += r.manifold + "," + r.law + "," + std::to_string(i);
    csv += "," + horizon::format_csv_double(r.point[0]) + "," + horizon::format_csv_double(r.point[1]);
    csv += "," + std::to_string(r.sample_count);
    csv += "," + horizon::format_csv_double(r.empirical_mean[0]) + "," +
           horizon::format_csv_double(r.empirical_mean[1]);
    for (int c = 0; c < 2; ++c)
      for (int rr = 0; rr < 2; ++rr) csv += "," + horizon::format_csv_double(r.empirical_covariance(rr, c));
    csv += "," + horizon::format_csv_double(r.empirical_third_abs_moment);
    csv += std::string(",") + (r.mean_ok ? "1" : "0") + "," + (r.covariance_ok ? "1" : "0") + "," +
           (r.third_ok ? "1" : "0") + "\n";

    nlohmann::json row;
    row["point_index"] = i;
    row["mean_ok"] = r.mean_ok;
    row["covariance_ok"] = r.covariance_ok;
    row["third_ok"] = r.third_ok;
    row["third_abs_moment"] = r.empirical_third_abs_moment;
    rows.push_back(row);
  }
  nlohmann::json j = horizon::sidecar_base("validate-law", rc);
  j["results"]["rows"] = rows;
  j["results"]["pass"] = all_pass;
  write_report(rc, "validate-law", csv, j);
  std::cout << "validate-law: " << (all_pass ? "PASS" : "FAIL") << " (" << reports.size() << " points, n="
            << rc.samples << ")\n";
  return all_pass ? 0 : 1;
}

int cmd_generator_check(const RunConfig& rc) {
  const auto chart = horizon::chart_by_name(rc.manifold, rc.sphere_epsilon);
  const auto law = horizon::IncrementLaw::from_name(rc.law);
  const auto u = horizon::make_frame_point(chart, horizon::default_initial_point(chart));
  const auto opts = generator_options(rc);

  std::string csv = "function,alpha,generator,stderr,half_horizontal_laplacian,abs_diff\n";
  nlohmann::json rows = nlohmann::json::array();
  double worst = 0.0;
  for (const auto& f : selected_fields(rc)) {
    const auto lifted = horizon::lift_through_projection(f);
    const auto g = horizon::apply_rescaled_generator(chart, lifted, u, rc.alpha, law, opts);
    const double half_h =
        0.5 * horizon::horizontal_laplacian(chart, lifted, u, rc.fd_step, {1e-3, 10.0, "rk4"}, rc.richardson);
    const double diff = std::abs(g.value - half_h);
    worst = std::max(worst, diff);
    csv += f.name + "," + horizon::format_csv_double(rc.alpha) + "," + horizon::format_csv_double(g.value) +
           "," + horizon::format_csv_double(g.stderr_) + "," + horizon::format_csv_double(half_h) + "," +
           horizon::format_csv_double(diff) + "\n";
    nlohmann::json row;
    row["function"] = f.name;
    row["generator"] = g.value;
    row["stderr"] = g.stderr_;
    row["half_horizontal_laplacian"] = half_h;
    row["abs_diff"] = diff;
    rows.push_back(row);
  }
  nlohmann::json j = horizon::sidecar_base("generator-check", rc);
  j["results"]["rows"] = rows;
  j["results"]["max_abs_diff"] = worst;
  write_report(rc, "generator-check", csv, j);
  std::cout << "generator-check: max |L_alpha f - (1/2) Delta_H f| = " << worst << " at alpha = " << rc.alpha
            << "\n";
  return 0;
}

int cmd_identity_check(const RunConfig& rc) {
  const auto chart = horizon::chart_by_name(rc.manifold, rc.sphere_epsilon);
  constexpr double kTol = 1e-4;
  constexpr int kBasePoints = 20;
  constexpr int kFramesPerBase = 5;

  horizon::RngStream rng = horizon::RngStream::for_replica(rc.seed, 0xF0A1);
  std::vector<horizon::FramePoint> frames;
  for (int b = 0; b < kBasePoints; ++b) {
    const auto p = horizon::random_experiment_point(chart, rng);
    for (int k = 0; k < kFramesPerBase; ++k) frames.push_back(horizon::random_frame_at(chart, p, rng));
  }

  std::string csv = "function,frame_index,lifted_laplacian,base_laplacian,abs_diff\n";
  nlohmann::json rows = nlohmann::json::array();
  bool pass = true;
  double worst = 0.0, worst_spread = 0.0;
  for (const auto& f : selected_fields(rc)) {
    const auto rep = horizon::check_identity(chart, f, frames, kTol, rc.fd_step);
    pass = pass && rep.pass;
    worst = std::max(worst, rep.worst_abs_diff);
    worst_spread = std::max(worst_spread, rep.worst_frame_spread);
    for (const auto& row : rep.rows)
      csv += row.function + "," + std::to_string(row.frame_index) + "," +
             horizon::format_csv_double(row.lifted_laplacian) + "," +
             horizon::format_csv_double(row.base_laplacian) + "," + horizon::format_csv_double(row.abs_diff) +
             "\n";
    nlohmann::json jr;
    jr["function"] = f.name;
    jr["worst_abs_diff"] = rep.worst_abs_diff;
    jr["worst_frame_spread"] = rep.worst_frame_spread;
    jr["pass"] = rep.pass;
    rows.push_back(jr);
  }
  nlohmann::json j = horizon::sidecar_base("identity-check", rc);
  j["results"]["rows"] = rows;
  j["results"]["tolerance"] = kTol;
  j["results"]["worst_abs_diff"] = worst;
  j["results"]["worst_frame_spread"] = worst_spread;
  j["results"]["pass"] = pass;
  write_report(rc, "identity-check", csv, j);
  std::cout << "identity-check (" << rc.manifold << "): worst |Delta_H(f@pi) - Delta_M f| = " << worst
            << ", frame spread " << worst_spread << " -> " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

int cmd_slope(const RunConfig& rc) {
  const auto chart = horizon::chart_by_name(rc.manifold, rc.sphere_epsilon);
  const auto law = horizon::IncrementLaw::from_name(rc.law);
  const auto fields = selected_fields(rc);
  const auto& f = fields.front();
  const auto lifted = horizon::lift_through_projection(f);
  const auto u = horizon::make_frame_point(chart, horizon::default_initial_point(chart));
  const auto rep = horizon::convergence_slope(chart, lifted, u, rc.alphas, law, generator_options(rc),
                                              rc.fd_step, rc.richardson);

  std::string csv = "alpha,error,stderr\n";
  for (const auto& row : rep.rows)
    csv += horizon::format_csv_double(row.alpha) + "," + horizon::format_csv_double(row.error) + "," +
           horizon::format_csv_double(row.stderr_) + "\n";

  bool nonincreasing = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (rep.rows[i].error > rep.rows[i - 1].error + 1e-12) nonincreasing = false;
  const bool pass = rep.already_converged || (nonincreasing && rep.slope >= 0.9);

  nlohmann::json j = horizon::sidecar_base("slope", rc);
  j["results"]["function"] = f.name;
  j["results"]["half_horizontal_laplacian"] = rep.half_horizontal_laplacian;
  j["results"]["already_converged"] = rep.already_converged;
  if (!rep.already_converged) {
    j["results"]["slope"] = rep.slope;
    j["results"]["slope_stderr"] = rep.slope_stderr;
    j["results"]["slope_ci95_halfwidth"] = rep.slope_ci95;
    j["results"]["intercept"] = rep.intercept;
  }
  j["results"]["nonincreasing"] = nonincreasing;
  j["results"]["message"] = rep.message;
  j["results"]["pass"] = pass;
  write_report(rc, "slope", csv, j);
  if (rep.already_converged)
    std::cout << "slope (" << f.name << "): already converged (errors at numerical floor)\n";
  else
    std::cout << "slope (" << f.name << "): fitted slope " << rep.slope << " +/- " << rep.slope_ci95
              << " -> " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

int cmd_converge(const RunConfig& rc) {
  const auto ref = horizon::default_heat_reference(rc.manifold);
  if (!ref)
    throw horizon::UnsupportedFunctionError("no heat-semigroup reference for manifold '" + rc.manifold + "'");
  const auto walk_cfg = horizon::make_walk_config(rc);

  std::string csv = "function,t,alpha,empirical,stderr,reference,zscore,excluded\n";
  nlohmann::json rows = nlohmann::json::array();
  bool pass = true;
  for (const auto& f : selected_fields(rc)) {
    for (double t : rc.t_grid) {
      horizon::WalkConfig cfg = walk_cfg;
      cfg.horizon_t = t;
      const auto rep = horizon::alpha_trend(cfg, f, t, rc.alphas, *ref);
      pass = pass && rep.final_alpha_ok && rep.trend_ok;
      for (const auto& row : rep.rows) {
        csv += row.function + "," + horizon::format_csv_double(row.t) + "," +
               horizon::format_csv_double(row.alpha) + "," + horizon::format_csv_double(row.empirical) + "," +
               horizon::format_csv_double(row.stderr_) + "," + horizon::format_csv_double(row.reference) +
               "," + horizon::format_csv_double(row.z_score) + "," + std::to_string(row.excluded) + "\n";
        nlohmann::json jr;
        jr["function"] = row.function;
        jr["t"] = row.t;
        jr["alpha"] = row.alpha;
        jr["empirical"] = row.empirical;
        jr["stderr"] = row.stderr_;
        jr["reference"] = row.reference;
        jr["zscore"] = row.z_score;
        rows.push_back(jr);
      }
    }
  }
  nlohmann::json j = horizon::sidecar_base("converge", rc);
  j["results"]["rows"] = rows;
  j["results"]["pass"] = pass;
  write_report(rc, "converge", csv, j);
  std::cout << "converge (" << rc.manifold << "): " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

int cmd_holonomy(const RunConfig& rc) {
  if (rc.manifold != "sphere")
    throw horizon::PreconditionError("holonomy probe is defined on the sphere (pass --manifold sphere)");
  const auto chart = horizon::chart_by_name(rc.manifold, rc.sphere_epsilon);
  horizon::GeodesicConfig geo;
  geo.step = rc.integrator_step > 0.0 ? rc.integrator_step : 1e-3;
  geo.max_arclength = rc.max_arclength;
  const auto res = horizon::spherical_octant_holonomy(chart, geo);
  const double err = std::abs(std::abs(res.angle) - res.expected);
  const bool pass = err <= 1e-4 && res.closure_error <= 1e-6;

  nlohmann::json j = horizon::sidecar_base("holonomy", rc);
  j["results"]["angle"] = res.angle;
  j["results"]["expected_area"] = res.expected;
  j["results"]["abs_error"] = err;
  j["results"]["closure_error"] = res.closure_error;
  j["results"]["max_frame_drift"] = res.max_drift;
  j["results"]["pass"] = pass;
  write_report(rc, "holonomy", "", j);
  std::cout << "holonomy: angle " << res.angle << " (octant area " << res.expected << ", error " << err
            << ") -> " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geodesic random walks and horizontal lifts on the frame bundle"};
  app.require_subcommand(1);

  CliOverrides o;
  CLI::App* walk = app.add_subcommand("walk", "simulate base walks, write CSV paths");
  CLI::App* lift = app.add_subcommand("lift", "simulate lifted walks on the frame bundle");
  CLI::App* vlaw = app.add_subcommand("validate-law", "empirical moment checks for the increment law");
  CLI::App* gen = app.add_subcommand("generator-check", "rescaled generator vs horizontal Laplacian");
  CLI::App* ident = app.add_subcommand("identity-check", "horizontal vs base Laplacian identity");
  CLI::App* slope = app.add_subcommand("slope", "generator convergence rate over an alpha sweep");
  CLI::App* conv = app.add_subcommand("converge", "empirical semigroup vs heat reference");
  CLI::App* hol = app.add_subcommand("holonomy", "spherical octant holonomy probe");
  for (CLI::App* sub : {walk, lift, vlaw, gen, ident, slope, conv, hol}) add_common_options(sub, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const RunConfig rc = resolve_config(o);
    if (app.got_subcommand(walk)) return cmd_walk(rc, false);
    if (app.got_subcommand(lift)) return cmd_walk(rc, true);
    if (app.got_subcommand(vlaw)) return cmd_validate_law(rc);
    if (app.got_subcommand(gen)) return cmd_generator_check(rc);
    if (app.got_subcommand(ident)) return cmd_identity_check(rc);
    if (app.got_subcommand(slope)) return cmd_slope(rc);
    if (app.got_subcommand(conv)) return cmd_converge(rc);
    if (app.got_subcommand(hol)) return cmd_holonomy(rc);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const horizon::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
