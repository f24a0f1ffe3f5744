#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "kdesplit/error.hpp"
#include "kdesplit/harness.hpp"
#include "kdesplit/synthetic.hpp"

using namespace kdesplit;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_config(const std::string& mode) {
  return {{"mode", mode},
          {"instance", "two_plateaus"},
          {"n_list", {256, 512, 1024}},
          {"seeds", 3},
          {"master_seed", 42},
          {"schedule", {{"delta", 0.05}}}};
}

std::string errmsg(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch() {
  const fs::path p = fs::temp_directory_path() / ("kdesplit_test_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(KDESPLIT_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config errors name the field") {
  json j = small_config("cluster");
  j.erase("n_list");
  CHECK(errmsg(j).find("'n_list'") != std::string::npos);
  j = small_config("cluster");
  j.erase("instance");
  CHECK(errmsg(j).find("'instance'") != std::string::npos);
  j = small_config("cluster");
  j["schedule"]["dleta"] = 1.0;
  CHECK(errmsg(j).find("'schedule.dleta'") != std::string::npos);
  j = small_config("cluster");
  j["seeds"] = {1, 2, 1};
  CHECK(errmsg(j).find("'seeds'") != std::string::npos);
  j = small_config("cluster");
  j["n_list"] = json::array();
  CHECK(errmsg(j).find("'n_list'") != std::string::npos);
  j = small_config("cluster");
  j["kernel"] = {{"profile", "cosine"}};
  CHECK_FALSE(errmsg(j).empty());
  j = small_config("cluster");
  j.erase("schedule");
  CHECK_THROWS_WITH_AS(run_experiment(parse_config(j)), doctest::Contains("schedule.delta"), ConfigError);
  CHECK(errmsg(small_config("cluster")).empty());
  const auto c = parse_config(small_config("cluster"));
  CHECK(c.seeds == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(c.n_list.size() == 3);
}

TEST_CASE("parameter resolution") {
  const Kernel k = make_kernel(Profile::epanechnikov, 1, Norm::euclidean);
  ScheduleOverrides o;
  CHECK_THROWS_AS(resolve_parameters(o, 1000, k), ConfigError);
  o.delta = 0.1;
  o.tau = 0.7;
  const ParameterSet p = resolve_parameters(o, 1e4, k);
  CHECK(p.sigma == 0.1);
  CHECK(p.eps == epsilon_schedule(0.1, 1e4, 1.0, 1.0, 1.0, k));
  CHECK(p.tau == 0.7);
  CHECK(p.rho0 == p.eps);
  CHECK(p.provenance.at("tau") == "override");
  CHECK(p.provenance.at("sigma") == "sigma schedule");
}

TEST_CASE("reports are byte reproducible") {
  for (const std::string mode : {"cluster", "adaptive", "rates", "sandwich"}) {
    json j = small_config(mode);
    if (mode == "rates") {
      j.erase("schedule");
      j["rates"] = {{"schedule", "infinite"}};
    }
    if (mode == "sandwich") j["n_list"] = {512};
    CAPTURE(mode);
    const auto a = run_experiment(parse_config(j));
    const auto b = run_experiment(parse_config(j));
    CHECK(a.to_json().dump() == b.to_json().dump());
    std::ostringstream ca, cb;
    a.write_csv(ca);
    b.write_csv(cb);
    CHECK(ca.str() == cb.str());
    CHECK(ca.str().find("runtime_ms") == std::string::npos);
  }
  json u = small_config("uncertainty");
  u.erase("schedule");
  u["delta_list"] = {0.05, 0.1};
  const auto a = run_experiment(parse_config(u));
  CHECK(a.to_json().dump() == run_experiment(parse_config(u)).to_json().dump());
  CHECK(a.records.size() == 3 * 3 * 2);
}

TEST_CASE("cluster report contents") {
  const auto rep = run_cluster(parse_config(small_config("cluster")));
  CHECK(rep.records.size() == 9);
  const json j = rep.to_json();
  CHECK(j["records"].size() == 9);
  // aggregates recomputable from the records
  for (const auto& [key, agg] : j["aggregates"].items()) {
    const std::size_t n = std::stoul(key);
    std::size_t splits = 0, total = 0;
    for (const auto& r : rep.records)
      if (r.n == n) {
        ++total;
        splits += r.split.value_or(false) ? 1 : 0;
      }
    CHECK(agg["split_fraction"].get<double>() == doctest::Approx(double(splits) / double(total)));
  }
  for (const auto& r : rep.records) {
    CHECK(r.seed < 3);
    if (r.split.value_or(false)) CHECK(r.rho_error == doctest::Approx(r.rho_out));
  }
  CHECK(run_seed(42, 256, 0) != run_seed(42, 512, 0));
  CHECK(run_seed(42, 256, 0) != run_seed(43, 256, 0));
}

TEST_CASE("tiny sample with a huge step never splits") {
  json j = small_config("cluster");
  j["n_list"] = {10};
  j["schedule"] = {{"delta", 0.05}, {"eps", 1e6}};
  const auto rep = run_cluster(parse_config(j));
  for (const auto& r : rep.records) {
    CHECK_FALSE(r.split.value());
    CHECK(r.rho_out == 1e6);
  }
}

TEST_CASE("cluster matching takes the better ordering") {
  const auto t = make_two_plateaus();
  const Dataset data = t->sample(4000, 3);
  std::vector<std::size_t> left, right;
  for (std::size_t i = 0; i < data.size(); ++i) (data.point(i)[0] < 0.5 ? left : right).push_back(i);
  const double a = cluster_symdiff(data, {left, right}, 0.01, Norm::euclidean, *t);
  const double b = cluster_symdiff(data, {right, left}, 0.01, Norm::euclidean, *t);
  CHECK(a == b);
  CHECK(a < 0.05);
  CHECK(std::isnan(cluster_symdiff(data, {left}, 0.01, Norm::euclidean, *t)));
}

TEST_CASE("result json") {
  ClusterOutput out;
  out.split = false;
  out.rho_out = 0.5;
  out.base_set = {0, 1, 2};
  out.trace = {{0.5, 1}, {1.0, 0}};
  ParameterSet p;
  p.delta = 0.1;
  const json j = result_json(out, p, {"careful"});
  CHECK(j["split"] == false);
  CHECK(j["components"] == json::array({json::array({0, 1, 2})}));
  CHECK(j["trace"][1] == json::array({1.0, 0}));
  CHECK(j["params"]["delta"] == 0.1);
  CHECK(j["warnings"][0] == "careful");
}

TEST_CASE("command line") {
  const fs::path dir = scratch();
  const fs::path csv1 = dir / "a.csv", csv2 = dir / "b.csv";
  CHECK(run("synth --instance two_plateaus --n 1000 --seed 7 --out " + csv1.string()) == 0);
  CHECK(run("synth --instance two_plateaus --n 1000 --seed 7 --out " + csv2.string()) == 0);
  CHECK(slurp(csv1) == slurp(csv2));
  CHECK(slurp(csv1).size() > 1000);

  std::ofstream(dir / "pts.csv") << "x\n0.0\n0.05\n0.1\n0.9\n0.95\n1.0\n";
  const fs::path res = dir / "res.json";
  CHECK(run("cluster --data " + (dir / "pts.csv").string() +
            " --delta 0.1 --eps 0.05 --tau 0.3 --sigma 0.1 --out " + res.string()) == 0);
  const json j = json::parse(slurp(res));
  CHECK(j.contains("split"));
  CHECK(j["params"]["tau"] == 0.3);
  CHECK(j["split"] == true);
  CHECK(j["components"].size() == 2);

  std::ofstream(dir / "bad.json") << R"({"instance": "two_plateaus", "seeds": 2})";
  CHECK(run("rates --config " + (dir / "bad.json").string()) == 2);
  CHECK(run("cluster --data " + (dir / "missing.csv").string() + " --delta 0.1") == 2);
  CHECK(run("cluster --bogus") == 2);
  CHECK(run("--help") == 0);
  CHECK(run("cluster --data " + (dir / "pts.csv").string() + " --delta 0.1 --eps 0.05 --tau 0.3 --out /nonexistent/dir/x.json") == 3);

  std::ofstream(dir / "ok.json") << small_config("cluster").dump();
  const fs::path r1 = dir / "r1.json", r2 = dir / "r2.json", c1 = dir / "r1.csv";
  CHECK(run("cluster --config " + (dir / "ok.json").string() + " --out " + r1.string() + " --csv " + c1.string()) == 0);
  CHECK(run("cluster --config " + (dir / "ok.json").string() + " --out " + r2.string()) == 0);
  CHECK(slurp(r1) == slurp(r2));
  CHECK(slurp(c1).rfind("mode,instance,n,seed", 0) == 0);
  fs::remove_all(dir);
}
