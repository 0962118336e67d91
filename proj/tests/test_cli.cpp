#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "inlite/error.hpp"
#include "json.hpp"

using namespace inlite;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("inlite_cli_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "inlite");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string csv_text(const DataTable& t) {
  std::ostringstream s;
  write_csv(s, t);
  return s.str();
}

int line_count(const std::string& text) { return static_cast<int>(std::count(text.begin(), text.end(), '\n')); }

const char* kFormula = "y ~ 1 + w + f(idx, model=iid)";

}  // namespace

TEST_CASE("simulate produces the worked example shape") {
  cli::SimulateConfig c;
  c.seed = 7;
  const DataTable t = cli::simulate_poisson(c);
  CHECK(t.rows() == 50);
  CHECK(t.names() == std::vector<std::string>{"y", "w", "idx"});
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const double y = t.column("y")[i];
    const double idx = t.column("idx")[i];
    CHECK(y >= 0);
    CHECK(y == std::floor(y));
    CHECK(idx >= 1);
    CHECK(idx <= 10);
  }
  CHECK(csv_text(t) == csv_text(cli::simulate_poisson(c)));
  cli::SimulateConfig other = c;
  other.seed = 8;
  CHECK(csv_text(t) != csv_text(cli::simulate_poisson(other)));
  c.n = 0;
  CHECK_THROWS_AS(cli::simulate_poisson(c), std::invalid_argument);
}

TEST_CASE("simulate subcommand writes byte-identical files") {
  TempDir dir("simulate");
  CHECK(invoke({"simulate", "--seed", "3", "--out", dir / "a.csv"}).code == 0);
  CHECK(invoke({"simulate", "--seed", "3", "--out", dir / "b.csv"}).code == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(line_count(slurp(dir / "a.csv")) == 51);
  CHECK(invoke({"simulate", "--seed", "3", "--n", "0"}).code == 2);
  CHECK(invoke({"simulate"}).code == 2);
}

TEST_CASE("file stems") {
  CHECK(cli::file_stem("idx[2]") == "idx_2");
  CHECK(cli::file_stem("prec.idx") == "prec.idx");
  CHECK(cli::file_stem("a b/c") == "a_b_c");
}

TEST_CASE("run configuration validation") {
  cli::RunConfig c;
  c.data = "d.csv";
  c.formula = kFormula;
  CHECK_NOTHROW(cli::validate(c));
  auto bad = [&](auto mutate) {
    cli::RunConfig b = c;
    mutate(b);
    CHECK_THROWS_AS(cli::validate(b), std::invalid_argument);
  };
  bad([](cli::RunConfig& b) { b.dz = 0; });
  bad([](cli::RunConfig& b) { b.diff_logdens = -1; });
  bad([](cli::RunConfig& b) { b.f_ccd = 1.0; });
  bad([](cli::RunConfig& b) { b.strategy = "exact"; });
  bad([](cli::RunConfig& b) { b.int_strategy = "mcmc"; });
  bad([](cli::RunConfig& b) { b.family = "weibull"; });
  bad([](cli::RunConfig& b) { b.model = "m.txt"; });
  bad([](cli::RunConfig& b) { b.formula.clear(); });
  bad([](cli::RunConfig& b) { b.threads = 0; });
}

TEST_CASE("run writes every artifact") {
  TempDir dir("run");
  const std::string data = dir / "d.csv";
  REQUIRE(invoke({"simulate", "--seed", "11", "--out", data}).code == 0);
  const std::string out = dir / "out";
  const Invocation r = invoke({"run", "--data", data, "--family", "poisson", "--formula", kFormula, "--out", out});
  CHECK(r.err == "");
  REQUIRE(r.code == 0);
  // 12 latent summaries (intercept, w, idx[1..10]) and one hyperparameter.
  const std::string summary = slurp(out + "/summary.csv");
  CHECK(line_count(summary) == 14);
  CHECK(summary.rfind("name,mean,sd,0.025quant,0.5quant,0.975quant\n", 0) == 0);
  CHECK(fs::exists(out + "/marginals/idx_10.csv"));
  CHECK(fs::exists(out + "/marginals/prec.idx.csv"));
  CHECK(slurp(out + "/marginals/w.csv").rfind("x,density\n", 0) == 0);
  CHECK(std::isfinite(std::stod(slurp(out + "/evidence.txt"))));
  CHECK(slurp(out + "/plot.gp").find("marginals/idx_1.csv") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(out + "/run.json"));
  CHECK(j["convergence"]["all"] == true);
  CHECK(j["config"]["strategy"] == "simplified-laplace");
  CHECK(j["config"]["int_strategy"] == "auto");
  CHECK(j["config"]["dz"] == 0.75);
  CHECK(j["timings"].contains("total"));

  // Same configuration, same bytes.
  const std::string again = dir / "again";
  REQUIRE(invoke({"run", "--data", data, "--family", "poisson", "--formula", kFormula, "--out", again}).code == 0);
  CHECK(slurp(out + "/summary.csv") == slurp(again + "/summary.csv"));
  CHECK(slurp(out + "/marginals/idx_3.csv") == slurp(again + "/marginals/idx_3.csv"));

  // eb with the gaussian strategy has no evidence.
  const std::string eb = dir / "eb";
  REQUIRE(invoke({"run", "--data", data, "--family", "poisson", "--formula", kFormula, "--strategy", "gaussian",
                  "--int-strategy", "eb", "--out", eb})
              .code == 0);
  CHECK(slurp(eb + "/evidence.txt") == "NA\n");
  CHECK(nlohmann::json::parse(slurp(eb + "/run.json"))["log_evidence"].is_null());
}

TEST_CASE("config file with flag overrides") {
  TempDir dir("config");
  const std::string data = dir / "d.csv";
  REQUIRE(invoke({"simulate", "--seed", "5", "--out", data}).code == 0);
  {
    std::ofstream f(dir / "model.txt");
    f << "y ~ 1 + w +\n  f(idx, model=iid, hyper.prec.prior=pc.prec, hyper.prec.param=c(1, 0.01))\n";
    std::ofstream g(dir / "run.cfg");
    g << "# settings\n"
      << "data = " << data << "\n"
      << "model = " << (dir / "model.txt") << "\n"
      << "family = poisson\n"
      << "strategy = laplace\n"
      << "int_strategy = grid\n"
      << "dz = 0.5\n"
      << "out = " << (dir / "from_file") << "\n";
  }
  const std::string out = dir / "from_flag";
  const Invocation r = invoke({"run", "--config", dir / "run.cfg", "--strategy", "gaussian", "--out", out});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(out + "/run.json"));
  CHECK(j["config"]["strategy"] == "gaussian");
  CHECK(j["config"]["int_strategy"] == "grid");
  CHECK(j["config"]["dz"] == 0.5);
  CHECK(j["config"]["formula"].get<std::string>().find("pc.prec") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "from_file"));

  std::ofstream(dir / "bad.cfg") << "colour = blue\n";
  CHECK(invoke({"run", "--config", dir / "bad.cfg"}).code == 2);
  std::ofstream(dir / "bad2.cfg") << "dz = wide\n";
  CHECK(invoke({"run", "--config", dir / "bad2.cfg"}).code == 2);
}

TEST_CASE("exit codes") {
  TempDir dir("codes");
  const std::string data = dir / "d.csv";
  REQUIRE(invoke({"simulate", "--seed", "5", "--out", data}).code == 0);
  const std::string out = dir / "o";
  const Invocation parse = invoke({"run", "--data", data, "--formula", "y ~ 1 + f(idx, model=spline)", "--out", out});
  CHECK(parse.code == 2);
  CHECK(parse.err.find("line 1") != std::string::npos);
  CHECK(line_count(parse.err) == 1);
  CHECK(invoke({"run", "--data", dir / "missing.csv", "--formula", kFormula, "--out", out}).code == 3);
  CHECK(invoke({"run", "--data", data, "--formula", "y ~ 1 + height", "--out", out}).code == 3);
  CHECK(invoke({"run", "--data", data, "--formula", kFormula, "--dz", "-1", "--out", out}).code == 2);
  CHECK(invoke({"nonsense"}).code == 2);
  const Invocation num = invoke({"toy", "--rho", "0.5", "--c", "1e9"});
  CHECK(num.code == 4);
  CHECK(line_count(num.err) == 1);
  CHECK(invoke({"toy", "--rho", "1.5"}).code == 2);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("toy curves") {
  std::istringstream zero(invoke({"toy", "--rho", "0", "--c", "10"}).out);
  const DataTable t0 = read_csv(zero);
  CHECK(t0.rows() == 2001);
  for (std::size_t i = 0; i < t0.rows(); ++i) {
    CHECK(std::abs(t0.column("true")[i] - t0.column("laplace")[i]) < 1e-6);
  }
  const DataTable t = cli::toy_curves(0.5, 10.0);
  double tv_lap = 0.0, tv_gauss = 0.0;
  const double dx = t.column("x")[1] - t.column("x")[0];
  for (std::size_t i = 0; i < t.rows(); ++i) {
    tv_lap += 0.5 * dx * std::abs(t.column("laplace")[i] - t.column("true")[i]);
    tv_gauss += 0.5 * dx * std::abs(t.column("gaussian")[i] - t.column("true")[i]);
  }
  CHECK(tv_lap < tv_gauss);
}
