#include "kdesplit/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "kdesplit/density.hpp"
#include "kdesplit/error.hpp"
#include "kdesplit/grid_set.hpp"
#include "kdesplit/level_family.hpp"
#include "kdesplit/rng.hpp"
#include "kdesplit/sandwich.hpp"
#include "kdesplit/stats.hpp"
#include "kdesplit/synthetic.hpp"

namespace kdesplit {

using nlohmann::json;

Mode parse_mode(const std::string& name) {
  if (name == "cluster") return Mode::cluster;
  if (name == "adaptive") return Mode::adaptive;
  if (name == "rates") return Mode::rates;
  if (name == "uncertainty") return Mode::uncertainty;
  if (name == "sandwich") return Mode::sandwich;
  throw ConfigError("unknown mode '" + name + "'");
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::cluster: return "cluster";
    case Mode::adaptive: return "adaptive";
    case Mode::rates: return "rates";
    case Mode::uncertainty: return "uncertainty";
    case Mode::sandwich: return "sandwich";
  }
  return "cluster";
}

// ---- config ----

namespace {

class Reader {
 public:
  Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError("field '" + (prefix_.empty() ? "<root>" : prefix_) + "' must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }
  const json& raw(const std::string& key) {
    if (!has(key)) throw ConfigError("missing config field '" + path(key) + "'");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError("config field '" + path(key) + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("config field '" + path(key) + "' must be finite");
    return x;
  }
  std::optional<double> opt_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }
  double number_or(const std::string& key, double fallback) { return opt_number(key).value_or(fallback); }
  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError("config field '" + path(key) + "' must be a string");
    return v.get<std::string>();
  }
  std::string string_or(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }
  bool boolean_or(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError("config field '" + path(key) + "' must be true or false");
    return v.get<bool>();
  }
  std::uint64_t unsigned_integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError("config field '" + path(key) + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError("config field '" + path(key) + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError("config field '" + path(key) + "' must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown config field '" + path(it.key()) + "'");
  }

 private:
  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void require_positive(const std::optional<double>& v, const std::string& field) {
  if (v && !(*v > 0.0)) throw ConfigError("config field '" + field + "' must be positive");
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Reader r(j, "");
  if (r.has("mode")) c.mode = parse_mode(r.string("mode"));

  const json& inst = r.raw("instance");
  if (inst.is_string()) {
    c.instance = inst.get<std::string>();
  } else if (inst.is_object()) {
    Reader ri(inst, "instance");
    c.instance = ri.string("name");
    if (ri.has("params")) c.instance_params = inst.at("params");
    ri.finish();
  } else {
    throw ConfigError("config field 'instance' must be a name or an object with 'name' and 'params'");
  }
  if (r.has("instance_params")) c.instance_params = j.at("instance_params");

  for (double v : r.numbers("n_list")) {
    if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("config field 'n_list' must hold positive integers");
    c.n_list.push_back(static_cast<std::size_t>(v));
  }
  if (c.n_list.empty()) throw ConfigError("config field 'n_list' must not be empty");

  const json& seeds = r.raw("seeds");
  if (seeds.is_number_integer()) {
    const long long k = seeds.get<long long>();
    if (k < 1) throw ConfigError("config field 'seeds' must be a positive count or a list");
    for (long long s = 0; s < k; ++s) c.seeds.push_back(static_cast<std::uint64_t>(s));
  } else if (seeds.is_array()) {
    for (const auto& e : seeds) {
      if (!e.is_number_integer() || e.get<long long>() < 0)
        throw ConfigError("config field 'seeds' must hold nonnegative integers");
      c.seeds.push_back(e.get<std::uint64_t>());
    }
  } else {
    throw ConfigError("config field 'seeds' must be a positive count or a list");
  }
  if (c.seeds.empty()) throw ConfigError("config field 'seeds' must not be empty");
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size())
    throw ConfigError("config field 'seeds' must hold distinct values");

  if (r.has("master_seed")) c.master_seed = r.unsigned_integer("master_seed");

  if (r.has("kernel")) {
    Reader rk(j.at("kernel"), "kernel");
    c.profile = parse_profile(rk.string_or("profile", "epanechnikov"));
    c.norm = parse_norm(rk.string_or("norm", "euclidean"));
    rk.finish();
  }

  if (r.has("schedule")) {
    Reader rs(j.at("schedule"), "schedule");
    auto& o = c.schedule;
    o.delta = rs.opt_number("delta");
    o.sigma = rs.opt_number("sigma");
    o.eps = rs.opt_number("eps");
    o.tau = rs.opt_number("tau");
    o.rho0 = rs.opt_number("rho0");
    o.varsigma = rs.opt_number("varsigma");
    o.c_u = rs.opt_number("c_u");
    o.gamma = rs.opt_number("gamma");
    o.c_thick = rs.opt_number("c_thick");
    o.tau_margin = rs.number_or("tau_margin", o.tau_margin);
    if (rs.has("edge_rule")) o.edge_rule = parse_edge_rule(rs.string("edge_rule"));
    rs.finish();
    for (const auto& [v, name] : {std::pair{o.delta, "schedule.delta"}, {o.sigma, "schedule.sigma"},
                                  {o.eps, "schedule.eps"}, {o.tau, "schedule.tau"}, {o.c_u, "schedule.c_u"},
                                  {o.gamma, "schedule.gamma"}, {o.c_thick, "schedule.c_thick"}})
      require_positive(v, name);
    if (o.rho0 && !(*o.rho0 >= 0.0)) throw ConfigError("config field 'schedule.rho0' must be nonnegative");
    if (o.varsigma && !(*o.varsigma >= 1.0)) throw ConfigError("config field 'schedule.varsigma' must be at least 1");
  }

  if (r.has("delta_list")) {
    c.delta_list = r.numbers("delta_list");
    for (double d : c.delta_list)
      if (!(d > 0.0)) throw ConfigError("config field 'delta_list' must hold positive bandwidths");
  }
  if (r.has("rho_fractions")) c.rho_fractions = r.numbers("rho_fractions");

  if (r.has("rates")) {
    Reader rr(j.at("rates"), "rates");
    const std::string s = rr.string_or("schedule", "finite");
    if (s == "finite")
      c.rate_schedule = RateSchedule::finite;
    else if (s == "infinite")
      c.rate_schedule = RateSchedule::infinite;
    else if (s == "symdiff")
      c.rate_schedule = RateSchedule::symdiff;
    else
      throw ConfigError("config field 'rates.schedule' must be finite, infinite or symdiff");
    c.rate_constants.c_eps = rr.number_or("c_eps", 1.0);
    c.rate_constants.c_delta = rr.number_or("c_delta", 1.0);
    c.rate_constants.c_sigma = rr.number_or("c_sigma", 1.0);
    c.rate_constants.c_tau = rr.number_or("c_tau", 1.0);
    rr.finish();
  }

  if (r.has("adaptive")) {
    Reader ra(j.at("adaptive"), "adaptive");
    c.adaptive.varsigma = ra.number_or("varsigma", 0.0);
    c.adaptive.c_u = ra.number_or("c_u", 1.0);
    c.adaptive.tau_multiplier = ra.number_or("tau_multiplier", c.adaptive.tau_multiplier);
    c.adaptive.tau_margin = ra.number_or("tau_margin", c.adaptive.tau_margin);
    const std::string tm = ra.string_or("tau_mode", "fixed");
    if (tm == "fixed")
      c.adaptive.tau_mode = TauMode::fixed;
    else if (tm == "adaptive")
      c.adaptive.tau_mode = TauMode::adaptive;
    else
      throw ConfigError("config field 'adaptive.tau_mode' must be fixed or adaptive");
    ra.finish();
  }

  c.symdiff = r.boolean_or("symdiff", c.symdiff);
  c.timing = r.boolean_or("timing", c.timing);
  c.output = r.string_or("output", "");
  r.finish();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

ParameterSet resolve_parameters(const ScheduleOverrides& o, double n, const Kernel& kernel,
                                const StructureMetadata* meta) {
  if (!o.delta) throw ConfigError("missing config field 'schedule.delta'");
  ParameterSet p;
  p.delta = *o.delta;
  p.varsigma = o.varsigma.value_or(1.0);
  p.c_u = o.c_u.value_or(1.0);
  const double gamma = o.gamma.value_or(meta ? meta->gamma : 1.0);
  const double c_thick = o.c_thick.value_or(meta ? meta->c_thick : 1.0);

  auto set = [&](double& field, const char* name, const std::optional<double>& v, auto fallback, const char* how) {
    if (v) {
      field = *v;
      p.provenance[name] = "override";
    } else {
      field = fallback();
      p.provenance[name] = how;
    }
  };
  p.provenance["delta"] = "override";
  set(p.sigma, "sigma", o.sigma, [&] { return sigma_schedule(p.delta, kernel); }, "sigma schedule");
  set(p.eps, "eps", o.eps, [&] { return epsilon_schedule(p.delta, n, p.varsigma, 1.0, p.c_u, kernel); },
      "epsilon schedule");
  set(p.tau, "tau", o.tau, [&] { return tau_fixed(p.sigma, gamma, c_thick, o.tau_margin); }, "fixed tau");
  set(p.rho0, "rho0", o.rho0, [&] { return p.eps; }, "eps");
  return p;
}

std::uint64_t run_seed(std::uint64_t master, std::size_t n, std::uint64_t seed) {
  return derive_seed(master, {static_cast<std::uint64_t>(n), seed});
}

// ---- metrics ----

double cluster_symdiff(const Dataset& data, const std::vector<std::vector<std::size_t>>& components, double sigma,
                       Norm norm, const GroundTruthDensity& truth) {
  if (components.size() < 2 || !truth.bimodal()) return kMissing;
  std::vector<std::size_t> order(components.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return components[a].size() > components[b].size(); });
  const GridSpec grid(truth.box_lower(), truth.box_upper(), sigma / 4.0, 2'000'000);
  const GridSet b1 = stamp_balls(data, components[order[0]], sigma, norm, grid);
  const GridSet b2 = stamp_balls(data, components[order[1]], sigma, norm, grid);
  const double level = truth.rho_star() + 1e-9 * truth.h_sup();
  const GridSet a1 = cluster_set(truth, 1, level, grid);
  const GridSet a2 = cluster_set(truth, 2, level, grid);
  return std::min(symdiff_measure(b1, a1) + symdiff_measure(b2, a2),
                  symdiff_measure(b1, a2) + symdiff_measure(b2, a1));
}

json result_json(const ClusterOutput& out, const ParameterSet& params, const std::vector<std::string>& warnings) {
  json r;
  r["split"] = out.split;
  r["rho_out"] = out.rho_out;
  json comps = json::array();
  if (out.split) {
    for (const auto& c : out.components) comps.push_back(c);
  } else {
    comps.push_back(out.base_set);
  }
  r["components"] = comps;
  json trace = json::array();
  for (const auto& t : out.trace) trace.push_back({t.rho, t.m});
  r["trace"] = trace;
  json p;
  p["delta"] = params.delta;
  p["sigma"] = params.sigma;
  p["eps"] = params.eps;
  p["tau"] = params.tau;
  p["rho0"] = params.rho0;
  p["varsigma"] = params.varsigma;
  p["c_u"] = params.c_u;
  p["provenance"] = params.provenance;
  r["params"] = p;
  if (!warnings.empty()) r["warnings"] = warnings;
  return r;
}

json grid_set_json(const GridSet& set) {
  const GridSpec& g = set.spec();
  return {{"lower", g.lower()},          {"counts", g.counts()},     {"spacing", g.spacing()},
          {"layout", "cell-centred, axis 0 fastest"}, {"encoding", "base64, 8 nodes per byte, lsb first"},
          {"count", set.count()},        {"mask", set.mask_base64()}};
}

// ---- report ----

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string csv_num(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

std::string csv_count(long v) { return v < 0 ? "" : std::to_string(v); }

json config_echo(const ExperimentConfig& c) {
  json j;
  j["mode"] = to_string(c.mode);
  j["instance"] = {{"name", c.instance}, {"params", c.instance_params}};
  j["n_list"] = c.n_list;
  j["seeds"] = c.seeds;
  j["master_seed"] = c.master_seed;
  j["kernel"] = {{"profile", std::string(to_string(c.profile))}, {"norm", std::string(to_string(c.norm))}};
  json s = json::object();
  const auto& o = c.schedule;
  for (const auto& [v, name] : {std::pair{o.delta, "delta"}, {o.sigma, "sigma"}, {o.eps, "eps"}, {o.tau, "tau"},
                                {o.rho0, "rho0"}, {o.varsigma, "varsigma"}, {o.c_u, "c_u"}, {o.gamma, "gamma"},
                                {o.c_thick, "c_thick"}})
    if (v) s[name] = *v;
  s["tau_margin"] = o.tau_margin;
  s["edge_rule"] = o.edge_rule == EdgeRule::sum ? "sum" : "geometric";
  j["schedule"] = s;
  if (!c.delta_list.empty()) j["delta_list"] = c.delta_list;
  return j;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
};

std::runtime_error with_context(const std::exception& e, std::size_t n, std::uint64_t seed) {
  return std::runtime_error("run n=" + std::to_string(n) + " seed=" + std::to_string(seed) + ": " + e.what());
}

void fill_params(RunRecord& r, const ParameterSet& p) {
  r.delta = p.delta;
  r.sigma = p.sigma;
  r.eps = p.eps;
  r.tau = p.tau;
  r.rho0 = p.rho0;
}

struct Setup {
  std::unique_ptr<GroundTruthDensity> truth;
  Kernel kernel;
};

Setup setup(const ExperimentConfig& c) {
  auto truth = make_instance(c.instance, c.instance_params);
  const Kernel kernel = Kernel::make(c.profile, truth->dim(), c.norm);
  return {std::move(truth), kernel};
}

// One clustering run with fixed parameters.
RunRecord cluster_run(const ExperimentConfig& c, const GroundTruthDensity& truth, const Kernel& kernel,
                      const ParameterSet& p, std::size_t n, std::uint64_t seed, bool symdiff) {
  RunRecord r;
  r.n = n;
  r.seed = seed;
  fill_params(r, p);
  const Timer timer;
  try {
    const Dataset data = truth.sample(n, run_seed(c.master_seed, n, seed));
    ConnectivityOptions conn;
    conn.rule = c.schedule.edge_rule;
    const auto family = SampleLevelFamily::from_kde(data, kernel, p.delta, p.sigma, conn);
    const ClusterOutput out = run_generic(family, {p.tau, p.eps, p.rho0, std::nullopt});
    r.split = out.split;
    r.rho_out = out.rho_out;
    if (truth.bimodal()) {
      r.rho_error = out.rho_out - truth.rho_star();
      if (symdiff && out.split) r.symdiff_total = cluster_symdiff(data, out.components, p.sigma, kernel.norm(), truth);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw with_context(e, n, seed);
  }
  if (c.timing) r.runtime_ms = timer.ms();
  return r;
}

std::vector<double> finite_values(const std::vector<RunRecord>& recs, double RunRecord::*field,
                                  bool split_only = false) {
  std::vector<double> v;
  for (const auto& r : recs) {
    if (split_only && !(r.split && *r.split)) continue;
    if (std::isfinite(r.*field)) v.push_back(r.*field);
  }
  return v;
}

json fit_json(const LinearFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2},
          {"slope_ci", {f.slope_lo, f.slope_hi}}, {"points", f.points}};
}

std::map<std::size_t, std::vector<RunRecord>> by_n(const std::vector<RunRecord>& recs) {
  std::map<std::size_t, std::vector<RunRecord>> m;
  for (const auto& r : recs) m[r.n].push_back(r);
  return m;
}

json cluster_aggregates(const std::vector<RunRecord>& recs) {
  json agg = json::object();
  for (const auto& [n, group] : by_n(recs)) {
    std::size_t splits = 0;
    for (const auto& r : group) splits += (r.split && *r.split) ? 1 : 0;
    json a;
    a["runs"] = group.size();
    a["split_fraction"] = static_cast<double>(splits) / static_cast<double>(group.size());
    const auto err = finite_values(group, &RunRecord::rho_error, true);
    a["median_rho_error"] = err.empty() ? json(nullptr) : json(median(err));
    const auto sd = finite_values(group, &RunRecord::symdiff_total, true);
    a["median_symdiff"] = sd.empty() ? json(nullptr) : json(median(sd));
    agg[std::to_string(n)] = a;
  }
  return agg;
}

}  // namespace

json ExperimentReport::to_json() const {
  json j;
  j["mode"] = to_string(config.mode);
  j["config"] = config_echo;
  json recs = json::array();
  for (const auto& r : records) {
    json x;
    x["n"] = r.n;
    x["seed"] = r.seed;
    x["delta"] = num(r.delta);
    x["sigma"] = num(r.sigma);
    x["eps"] = num(r.eps);
    x["tau"] = num(r.tau);
    x["rho0"] = num(r.rho0);
    x["split"] = r.split ? json(*r.split) : json(nullptr);
    x["rho_out"] = num(r.rho_out);
    x["rho_error"] = num(r.rho_error);
    x["symdiff_total"] = num(r.symdiff_total);
    if (config.mode == Mode::uncertainty) x["sup_distance"] = num(r.sup_distance);
    if (config.mode == Mode::sandwich) {
      x["sup_distance"] = num(r.sup_distance);
      x["rho"] = num(r.rho);
      x["lower_violations"] = r.lower_violations;
      x["upper_violations"] = r.upper_violations;
      x["lower_interior_violations"] = r.lower_interior;
      x["upper_interior_violations"] = r.upper_interior;
    }
    if (config.mode == Mode::adaptive) x["selected"] = r.selected;
    if (config.timing) x["runtime_ms"] = num(r.runtime_ms);
    if (!r.skipped.empty()) x["skipped"] = r.skipped;
    recs.push_back(x);
  }
  j["records"] = recs;
  j["aggregates"] = aggregates;
  j["regression"] = regression;
  return j;
}

void ExperimentReport::write_csv(std::ostream& out) const {
  out << "mode,instance,n,seed,delta,sigma,eps,tau,rho0,split,rho_out,rho_error,symdiff_total,sup_distance,rho,"
         "lower_violations,upper_violations,lower_interior_violations,upper_interior_violations,selected";
  if (config.timing) out << ",runtime_ms";
  out << ",skipped\n";
  const std::string mode = to_string(config.mode);
  for (const auto& r : records) {
    out << mode << ',' << config.instance << ',' << r.n << ',' << r.seed << ',' << csv_num(r.delta) << ','
        << csv_num(r.sigma) << ',' << csv_num(r.eps) << ',' << csv_num(r.tau) << ',' << csv_num(r.rho0) << ','
        << (r.split ? (*r.split ? "1" : "0") : "") << ',' << csv_num(r.rho_out) << ',' << csv_num(r.rho_error)
        << ',' << csv_num(r.symdiff_total) << ',' << csv_num(r.sup_distance) << ',' << csv_num(r.rho) << ','
        << csv_count(r.lower_violations) << ',' << csv_count(r.upper_violations) << ','
        << csv_count(r.lower_interior) << ',' << csv_count(r.upper_interior) << ',' << (r.selected ? 1 : 0);
    if (config.timing) out << ',' << csv_num(r.runtime_ms);
    std::string skipped = r.skipped;
    std::replace(skipped.begin(), skipped.end(), '"', '\'');
    out << ",\"" << skipped << "\"\n";
  }
}

// ---- runners ----

ExperimentReport run_cluster(const ExperimentConfig& c) {
  const auto [truth, kernel] = setup(c);
  ExperimentReport rep;
  rep.config = c;
  rep.config.mode = Mode::cluster;
  rep.config_echo = config_echo(rep.config);
  for (std::size_t n : c.n_list) {
    const ParameterSet p = resolve_parameters(c.schedule, static_cast<double>(n), kernel, &truth->metadata());
    for (std::uint64_t seed : c.seeds) rep.records.push_back(cluster_run(c, *truth, kernel, p, n, seed, c.symdiff));
  }
  rep.aggregates = cluster_aggregates(rep.records);
  return rep;
}

ExperimentReport run_adaptive(const ExperimentConfig& c) {
  const auto [truth, kernel] = setup(c);
  ExperimentReport rep;
  rep.config = c;
  rep.config.mode = Mode::adaptive;
  rep.config_echo = config_echo(rep.config);
  AdaptiveOptions opt = c.adaptive;
  opt.gamma = c.schedule.gamma.value_or(truth->metadata().gamma);
  opt.c_thick = c.schedule.c_thick.value_or(truth->metadata().c_thick);
  opt.connectivity.rule = c.schedule.edge_rule;
  const auto& meta = truth->metadata();

  json per_run = json::array();
  for (std::size_t n : c.n_list) {
    const std::vector<double> grid =
        c.delta_list.empty() ? bandwidth_grid(static_cast<double>(n), truth->dim()).deltas : c.delta_list;
    std::size_t within = 0, structural = 0;
    for (std::uint64_t seed : c.seeds) {
      const Timer timer;
      AdaptiveResult res;
      try {
        const Dataset data = truth->sample(n, run_seed(c.master_seed, n, seed));
        res = adaptive_select(data, kernel, grid, opt);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw with_context(e, n, seed);
      }
      double min_rho = std::numeric_limits<double>::infinity();
      double envelope = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < res.per_delta.size(); ++i) {
        const DeltaRun& run = res.per_delta[i];
        RunRecord r;
        r.n = n;
        r.seed = seed;
        fill_params(r, run.params);
        r.selected = i == res.selected;
        r.skipped = run.skipped;
        if (run.output) {
          r.split = run.output->split;
          r.rho_out = run.output->rho_out;
          min_rho = std::min(min_rho, r.rho_out);
          if (truth->bimodal()) r.rho_error = r.rho_out - truth->rho_star();
        }
        if (truth->bimodal() && run.skipped.empty() && meta.c_sep_lower > 0.0)
          envelope = std::min(envelope, pow_kappa(run.params.tau / meta.c_sep_lower, meta.kappa) + 6.0 * run.params.eps);
        rep.records.push_back(r);
      }
      if (c.timing) rep.records.back().runtime_ms = timer.ms();
      const bool exact = res.rho_star == min_rho;
      structural += exact ? 1 : 0;
      json x{{"n", n}, {"seed", seed}, {"delta_star", res.delta_star}, {"rho_star_D", res.rho_star},
             {"min_matches", exact}};
      if (truth->bimodal()) {
        const double err = res.rho_star - truth->rho_star();
        x["rho_error"] = err;
        x["envelope"] = num(envelope);
        const bool ok = err <= envelope;
        x["within_envelope"] = ok;
        within += ok ? 1 : 0;
      }
      per_run.push_back(x);
    }
    json a{{"runs", c.seeds.size()}, {"grid_size", grid.size()},
           {"structural_fraction", static_cast<double>(structural) / static_cast<double>(c.seeds.size())}};
    if (truth->bimodal()) a["within_envelope_fraction"] = static_cast<double>(within) / static_cast<double>(c.seeds.size());
    rep.aggregates[std::to_string(n)] = a;
  }
  rep.aggregates["selections"] = per_run;
  return rep;
}

ExperimentReport run_rates(const ExperimentConfig& c) {
  const auto [truth, kernel] = setup(c);
  if (!truth->bimodal()) throw ConfigError("rate experiments need a bimodal instance");
  if (c.n_list.size() < 3) throw ConfigError("config field 'n_list' needs at least three sizes for a rate fit");
  ExperimentReport rep;
  rep.config = c;
  rep.config.mode = Mode::rates;
  rep.config_echo = config_echo(rep.config);
  const auto& m = truth->metadata();
  const double gamma = c.schedule.gamma.value_or(m.gamma);

  std::vector<double> ns, med_err, med_sd, ns_sd;
  json agg = json::object();
  for (std::size_t n : c.n_list) {
    const double nn = static_cast<double>(n);
    ParameterSet p;
    switch (c.rate_schedule) {
      case RateSchedule::finite:
        p = rates_schedule_finite(nn, truth->dim(), gamma, m.kappa, c.rate_constants, kernel);
        break;
      case RateSchedule::infinite:
        p = rates_schedule_infinite(nn, truth->dim(), gamma, c.rate_constants, kernel);
        break;
      case RateSchedule::symdiff:
        p = rates_schedule_symdiff(nn, truth->dim(), gamma, m.kappa, m.alpha, m.vartheta, c.rate_constants, kernel);
        break;
    }
    std::vector<RunRecord> group;
    for (std::uint64_t seed : c.seeds) group.push_back(cluster_run(c, *truth, kernel, p, n, seed, c.symdiff));
    std::size_t splits = 0, lower_ok = 0;
    for (const auto& r : group) {
      if (r.split && *r.split) {
        ++splits;
        if (r.rho_error >= 2.0 * r.eps) ++lower_ok;
      }
    }
    json a{{"runs", group.size()}, {"split_fraction", static_cast<double>(splits) / static_cast<double>(group.size())},
           {"eps", p.eps}, {"delta", p.delta}, {"sigma", p.sigma}, {"tau", p.tau}};
    a["lower_bound_fraction"] = splits ? static_cast<double>(lower_ok) / static_cast<double>(splits) : 0.0;
    const auto err = finite_values(group, &RunRecord::rho_error, true);
    if (!err.empty()) {
      a["median_rho_error"] = median(err);
      if (median(err) > 0.0) {
        ns.push_back(nn);
        med_err.push_back(median(err));
      }
    }
    const auto sd = finite_values(group, &RunRecord::symdiff_total, true);
    if (!sd.empty()) {
      a["median_symdiff"] = median(sd);
      ns_sd.push_back(nn);
      med_sd.push_back(median(sd));
    }
    agg[std::to_string(n)] = a;
    rep.records.insert(rep.records.end(), group.begin(), group.end());
  }
  rep.aggregates = agg;
  if (ns.size() >= 3) rep.regression["rho_error"] = fit_json(fit_loglog(ns, med_err));
  if (ns_sd.size() >= 3 && *std::min_element(med_sd.begin(), med_sd.end()) > 0.0) {
    rep.regression["symdiff"] = fit_json(fit_loglog(ns_sd, med_sd));
    bool monotone = true;
    for (std::size_t i = 1; i < med_sd.size(); ++i) monotone = monotone && med_sd[i] <= med_sd[i - 1];
    rep.regression["symdiff_monotone"] = monotone;
  }
  return rep;
}

ExperimentReport run_uncertainty(const ExperimentConfig& c) {
  const auto [truth, kernel] = setup(c);
  if (c.delta_list.empty()) throw ConfigError("missing config field 'delta_list'");
  ExperimentReport rep;
  rep.config = c;
  rep.config.mode = Mode::uncertainty;
  rep.config_echo = config_echo(rep.config);
  std::map<std::pair<double, std::size_t>, double> med;
  for (double delta : c.delta_list) {
    const ProbeGrid grid = default_probe_grid(*truth, delta);
    const auto reference = smoothed_on_grid(*truth, kernel, delta, grid);
    for (std::size_t n : c.n_list) {
      std::vector<double> sups;
      for (std::uint64_t seed : c.seeds) {
        RunRecord r;
        r.n = n;
        r.seed = seed;
        r.delta = delta;
        const Timer timer;
        try {
          const Dataset data = truth->sample(n, run_seed(c.master_seed, n, seed));
          r.sup_distance = sup_distance(data, kernel, delta, grid, reference).value;
        } catch (const std::exception& e) {
          throw with_context(e, n, seed);
        }
        if (c.timing) r.runtime_ms = timer.ms();
        sups.push_back(r.sup_distance);
        rep.records.push_back(r);
      }
      med[{delta, n}] = median(sups);
    }
  }
  json per_delta = json::object();
  for (double delta : c.delta_list) {
    std::vector<double> ns, ys;
    for (std::size_t n : c.n_list) {
      ns.push_back(static_cast<double>(n));
      ys.push_back(med[{delta, n}]);
    }
    json d{{"medians", ys}};
    if (ns.size() >= 3) d["n_fit"] = fit_json(fit_loglog(ns, ys));
    std::ostringstream key;
    key.precision(17);
    key << delta;
    per_delta[key.str()] = d;
  }
  rep.regression["per_delta"] = per_delta;
  // error should grow as delta shrinks
  std::vector<double> sorted = c.delta_list;
  std::sort(sorted.begin(), sorted.end());
  std::size_t pairs = 0, ordered = 0;
  for (std::size_t n : c.n_list)
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      ++pairs;
      if (med[{sorted[i - 1], n}] >= med[{sorted[i], n}]) ++ordered;
    }
  rep.aggregates["delta_sign_pairs"] = pairs;
  rep.aggregates["delta_sign_ordered"] = ordered;
  return rep;
}

ExperimentReport run_sandwich(const ExperimentConfig& c) {
  const auto [truth, kernel] = setup(c);
  if (!c.schedule.delta) throw ConfigError("missing config field 'schedule.delta'");
  ExperimentReport rep;
  rep.config = c;
  rep.config.mode = Mode::sandwich;
  rep.config_echo = config_echo(rep.config);
  const double delta = *c.schedule.delta;
  const double sigma = c.schedule.sigma.value_or(sigma_schedule(delta, kernel));
  const GridSpec grid = sandwich_grid(*truth, delta, sigma);
  const ProbeGrid probes = default_probe_grid(*truth, delta);
  const bool measure = !c.schedule.eps.has_value();
  std::vector<double> reference;
  if (measure) reference = smoothed_on_grid(*truth, kernel, delta, probes);
  json agg = json::object();
  for (std::size_t n : c.n_list) {
    std::size_t clean = 0;
    for (std::uint64_t seed : c.seeds) {
      bool all_ok = true;
      try {
        const Dataset data = truth->sample(n, run_seed(c.master_seed, n, seed));
        const auto scores = kde_at_samples(data, kernel, delta);
        const double eps = measure ? sup_distance(data, kernel, delta, probes, reference).value : *c.schedule.eps;
        for (double f : c.rho_fractions) {
          const Timer timer;
          const double rho = f * truth->h_sup();
          const SandwichReport s = check_sandwich(data, scores, *truth, kernel, delta, sigma, rho, eps, grid);
          RunRecord r;
          r.n = n;
          r.seed = seed;
          r.delta = delta;
          r.sigma = sigma;
          r.eps = eps;
          r.sup_distance = measure ? eps : kMissing;
          r.rho = rho;
          r.lower_violations = static_cast<long>(s.lower_violations);
          r.upper_violations = static_cast<long>(s.upper_violations);
          r.lower_interior = static_cast<long>(s.lower_interior_violations);
          r.upper_interior = static_cast<long>(s.upper_interior_violations);
          if (c.timing) r.runtime_ms = timer.ms();
          all_ok = all_ok && s.interior_ok();
          rep.records.push_back(r);
        }
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw with_context(e, n, seed);
      }
      clean += all_ok ? 1 : 0;
    }
    agg[std::to_string(n)] = {{"runs", c.seeds.size()}, {"interior_clean_runs", clean}};
  }
  rep.aggregates = agg;
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& c) {
  switch (c.mode) {
    case Mode::cluster: return run_cluster(c);
    case Mode::adaptive: return run_adaptive(c);
    case Mode::rates: return run_rates(c);
    case Mode::uncertainty: return run_uncertainty(c);
    case Mode::sandwich: return run_sandwich(c);
  }
  return run_cluster(c);
}

}  // namespace kdesplit
