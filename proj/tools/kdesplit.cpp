// Command-line front end: single clustering runs, adaptive bandwidth search,
// synthetic samples and the experiment drivers.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "kdesplit/dataset.hpp"
#include "kdesplit/error.hpp"
#include "kdesplit/harness.hpp"
#include "kdesplit/level_family.hpp"
#include "kdesplit/schedule.hpp"
#include "kdesplit/splitter.hpp"
#include "kdesplit/synthetic.hpp"

using namespace kdesplit;
using nlohmann::json;

namespace {

constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 3;

struct DataOptions {
  std::string data;
  std::string instance;
  std::string params = "{}";
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

struct ScheduleFlags {
  std::optional<double> delta, sigma, eps, tau, rho0, cu, varsigma, gamma, cthick;
  std::string profile = "epanechnikov";
  std::string norm = "euclidean";
  std::string edge_rule = "sum";
  std::string tau_mode = "fixed";
};

void add_data_options(CLI::App* app, DataOptions& d) {
  app->add_option("--data", d.data, "CSV file with one point per row");
  app->add_option("--instance", d.instance, "synthetic instance to sample instead of --data");
  app->add_option("--params", d.params, "instance parameters as a JSON object");
  app->add_option("--n", d.n, "sample size for --instance");
  app->add_option("--seed", d.seed, "sampling seed for --instance");
}

void add_schedule_options(CLI::App* app, ScheduleFlags& s) {
  app->add_option("--delta", s.delta, "bandwidth");
  app->add_option("--sigma", s.sigma, "ball radius (default: sigma schedule)");
  app->add_option("--eps", s.eps, "level step (default: epsilon schedule)");
  app->add_option("--tau", s.tau, "connectivity gap (default: fixed tau)");
  app->add_option("--rho0", s.rho0, "start level (default: eps)");
  app->add_option("--cu", s.cu, "constant of the epsilon schedule");
  app->add_option("--varsigma", s.varsigma, "confidence parameter of the epsilon schedule");
  app->add_option("--gamma", s.gamma, "thickness exponent");
  app->add_option("--cthick", s.cthick, "thickness constant");
  app->add_option("--profile", s.profile, "kernel profile");
  app->add_option("--norm", s.norm, "euclidean or supremum");
  app->add_option("--edge-rule", s.edge_rule, "sum or geometric");
  app->add_option("--tau-mode", s.tau_mode, "fixed or adaptive (adaptive search only)");
}

json parse_json_arg(const std::string& text, const std::string& flag) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(flag + " is not valid JSON: " + e.what());
  }
}

Dataset load_data(const DataOptions& d, std::unique_ptr<GroundTruthDensity>* truth_out = nullptr) {
  if (!d.data.empty() && !d.instance.empty()) throw ConfigError("give either --data or --instance, not both");
  if (!d.data.empty()) return read_csv_file(d.data);
  if (d.instance.empty()) throw ConfigError("missing --data (or --instance with --n)");
  if (d.n == 0) throw ConfigError("missing --n for --instance");
  auto truth = make_instance(d.instance, parse_json_arg(d.params, "--params"));
  Dataset data = truth->sample(d.n, d.seed);
  if (truth_out) *truth_out = std::move(truth);
  return data;
}

ScheduleOverrides overrides_from(const ScheduleFlags& s) {
  ScheduleOverrides o;
  o.delta = s.delta;
  o.sigma = s.sigma;
  o.eps = s.eps;
  o.tau = s.tau;
  o.rho0 = s.rho0;
  o.c_u = s.cu;
  o.varsigma = s.varsigma;
  o.gamma = s.gamma;
  o.c_thick = s.cthick;
  o.edge_rule = parse_edge_rule(s.edge_rule);
  return o;
}

void emit(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

void emit_report(const ExperimentReport& rep, const std::string& out, const std::string& csv) {
  emit(rep.to_json(), out);
  if (!csv.empty()) {
    std::ofstream f(csv);
    if (!f) throw std::runtime_error("cannot write '" + csv + "'");
    rep.write_csv(f);
  }
}

ExperimentConfig config_for(const std::string& path, Mode mode, const std::optional<std::uint64_t>& seed) {
  ExperimentConfig c = load_config(path);
  c.mode = mode;
  if (seed) c.master_seed = *seed;
  return c;
}

int run_single_cluster(const DataOptions& d, const ScheduleFlags& s, const std::string& out) {
  std::unique_ptr<GroundTruthDensity> truth;
  const Dataset data = load_data(d, &truth);
  const Kernel kernel = Kernel::make(parse_profile(s.profile), static_cast<int>(data.dim()), parse_norm(s.norm));
  const ScheduleOverrides o = overrides_from(s);
  const ParameterSet p =
      resolve_parameters(o, static_cast<double>(data.size()), kernel, truth ? &truth->metadata() : nullptr);
  ConnectivityOptions conn;
  conn.rule = o.edge_rule;
  const auto family = SampleLevelFamily::from_kde(data, kernel, p.delta, p.sigma, conn);
  const ClusterOutput result = run_generic(family, {p.tau, p.eps, p.rho0, std::nullopt});
  const double gamma = o.gamma.value_or(truth ? truth->metadata().gamma : 1.0);
  const double c_thick = o.c_thick.value_or(truth ? truth->metadata().c_thick : 1.0);
  const auto warnings = parameter_warnings(p, gamma, c_thick, truth ? truth->metadata().delta_thick : 0.0);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  emit(result_json(result, p, warnings), out);
  return 0;
}

int run_single_adaptive(const DataOptions& d, const ScheduleFlags& s, const std::string& out) {
  std::unique_ptr<GroundTruthDensity> truth;
  const Dataset data = load_data(d, &truth);
  const Kernel kernel = Kernel::make(parse_profile(s.profile), static_cast<int>(data.dim()), parse_norm(s.norm));
  AdaptiveOptions opt;
  if (s.cu) opt.c_u = *s.cu;
  if (s.varsigma) opt.varsigma = *s.varsigma;
  opt.gamma = s.gamma.value_or(truth ? truth->metadata().gamma : 1.0);
  opt.c_thick = s.cthick.value_or(truth ? truth->metadata().c_thick : 1.0);
  if (s.tau_mode == "adaptive")
    opt.tau_mode = TauMode::adaptive;
  else if (s.tau_mode != "fixed")
    throw ConfigError("--tau-mode must be fixed or adaptive");
  opt.connectivity.rule = parse_edge_rule(s.edge_rule);
  const auto grid = bandwidth_grid(static_cast<double>(data.size()), static_cast<int>(data.dim()));
  const AdaptiveResult res = adaptive_select(data, kernel, grid.deltas, opt);

  json j;
  j["delta_star"] = res.delta_star;
  j["rho_star"] = res.rho_star;
  j["grid"] = {{"lower", grid.lower}, {"upper", grid.upper}, {"spacing", grid.spacing}, {"size", grid.deltas.size()}};
  j["result"] = result_json(res.selected_output(), res.per_delta[res.selected].params);
  json runs = json::array();
  for (const auto& r : res.per_delta) {
    json x{{"delta", r.params.delta}, {"sigma", r.params.sigma}, {"eps", r.params.eps}, {"tau", r.params.tau}};
    if (r.output) {
      x["split"] = r.output->split;
      x["rho_out"] = r.output->rho_out;
    } else {
      x["skipped"] = r.skipped;
    }
    runs.push_back(x);
  }
  j["per_delta"] = runs;
  emit(j, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Split-level estimation for density clusters"};
  app.require_subcommand(1);

  std::string out, csv, config;
  std::optional<std::uint64_t> master_seed;

  DataOptions cluster_data;
  ScheduleFlags cluster_flags;
  bool cluster_adaptive = false;
  auto* cluster = app.add_subcommand("cluster", "estimate the split level of one dataset");
  add_data_options(cluster, cluster_data);
  add_schedule_options(cluster, cluster_flags);
  cluster->add_flag("--adaptive", cluster_adaptive, "select the bandwidth adaptively");
  cluster->add_option("--config", config, "experiment config (runs the cluster experiment)");
  cluster->add_option("--out", out, "result JSON (default stdout)");
  cluster->add_option("--csv", csv, "per-run CSV for --config");
  cluster->add_option("--master-seed", master_seed, "master seed for --config");

  DataOptions adaptive_data;
  ScheduleFlags adaptive_flags;
  auto* adaptive = app.add_subcommand("adaptive", "adaptive bandwidth search");
  add_data_options(adaptive, adaptive_data);
  add_schedule_options(adaptive, adaptive_flags);
  adaptive->add_option("--config", config, "experiment config (runs the adaptive experiment)");
  adaptive->add_option("--out", out, "result JSON (default stdout)");
  adaptive->add_option("--csv", csv, "per-run CSV for --config");
  adaptive->add_option("--master-seed", master_seed, "master seed for --config");

  std::string synth_instance, synth_params = "{}";
  std::size_t synth_n = 0;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "sample a synthetic instance as CSV");
  synth->add_option("--instance", synth_instance, "instance name")->required();
  synth->add_option("--params", synth_params, "instance parameters as a JSON object");
  synth->add_option("--n", synth_n, "sample size")->required();
  synth->add_option("--seed", synth_seed, "sampling seed");
  synth->add_option("--out", out, "CSV file (default stdout)");
  auto* list = app.add_subcommand("instances", "list the synthetic instances");

  std::vector<std::pair<CLI::App*, Mode>> experiments;
  for (const auto& [name, mode, help] :
       {std::tuple{"rates", Mode::rates, "rate experiment over n"},
        {"uncertainty", Mode::uncertainty, "sup-norm deviation of the estimator"},
        {"sandwich", Mode::sandwich, "level-set inclusion check"}}) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "experiment config")->required();
    sub->add_option("--out", out, "report JSON (default stdout)");
    sub->add_option("--csv", csv, "per-run CSV");
    sub->add_option("--seed", master_seed, "master seed (overrides the config)");
    experiments.emplace_back(sub, mode);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  try {
    if (cluster->parsed()) {
      if (!config.empty()) {
        emit_report(run_experiment(config_for(config, cluster_adaptive ? Mode::adaptive : Mode::cluster, master_seed)),
                    out, csv);
        return 0;
      }
      return cluster_adaptive ? run_single_adaptive(cluster_data, cluster_flags, out)
                              : run_single_cluster(cluster_data, cluster_flags, out);
    }
    if (adaptive->parsed()) {
      if (!config.empty()) {
        emit_report(run_experiment(config_for(config, Mode::adaptive, master_seed)), out, csv);
        return 0;
      }
      return run_single_adaptive(adaptive_data, adaptive_flags, out);
    }
    if (synth->parsed()) {
      if (synth_n == 0) throw ConfigError("--n must be positive");
      const auto truth = make_instance(synth_instance, parse_json_arg(synth_params, "--params"));
      const Dataset data = truth->sample(synth_n, synth_seed);
      if (out.empty() || out == "-") {
        write_csv(std::cout, data);
      } else {
        std::ofstream f(out);
        if (!f) throw std::runtime_error("cannot write '" + out + "'");
        write_csv(f, data);
      }
      return 0;
    }
    if (list->parsed()) {
      for (const auto& n : instance_names()) std::cout << n << '\n';
      return 0;
    }
    for (const auto& [sub, mode] : experiments) {
      if (sub->parsed()) {
        emit_report(run_experiment(config_for(config, mode, master_seed)), out, csv);
        return 0;
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeExit;
  }
  return kConfigExit;
}
