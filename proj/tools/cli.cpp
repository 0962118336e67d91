#include "cli.hpp"

#include <algorithm>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "inlite/error.hpp"
#include "inlite/oracle.hpp"
#include "json.hpp"

namespace inlite::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  return f;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read model file " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

DataTable density_table(const MarginalDensity& d) {
  DataTable t;
  t.add_column("x", d.x());
  t.add_column("density", d.density());
  return t;
}

void write_table(const fs::path& path, const DataTable& t) {
  auto f = open_out(path);
  write_csv(f, t);
}

std::string number(double v) {
  if (!std::isfinite(v)) return "NA";
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

AssembledModel build_model(const RunConfig& c) {
  const std::string text = c.model.empty() ? c.formula : read_text(c.model);
  ModelOptions mo;
  mo.family = *family_from_name(c.family);
  BindOptions bo;
  bo.ntrials_column = c.ntrials;
  return make_model(text, read_csv_file(c.data), mo, bo);
}

InferenceOptions inference_options(const RunConfig& c) {
  InferenceOptions o;
  o.strategy = *latent_strategy_from_name(c.strategy);
  o.int_strategy = *int_strategy_from_name(c.int_strategy);
  o.explore.dz = c.dz;
  o.explore.diff_logdens = c.diff_logdens;
  o.explore.f_ccd = c.f_ccd;
  o.threads = c.threads;
  return o;
}

ordered_json config_json(const RunConfig& c, const AssembledModel& model, const InferenceOptions& o,
                         const InferenceResult& r) {
  ordered_json j;
  j["data"] = c.data;
  j["model"] = c.model;
  j["formula"] = to_string(model.spec());
  j["family"] = c.family;
  j["ntrials"] = c.ntrials;
  j["strategy"] = c.strategy;
  j["int_strategy"] = c.int_strategy;
  j["int_strategy_used"] = int_strategy_name(r.integration.strategy);
  j["dz"] = c.dz;
  j["diff_logdens"] = c.diff_logdens;
  j["f_ccd"] = c.f_ccd;
  j["out"] = c.out;
  j["threads"] = c.threads;
  j["seed"] = c.seed;
  j["grid_cap"] = o.explore.grid_cap;
  j["laplace_max_dim"] = o.laplace_max_dim;
  j["min_weight"] = o.min_weight;
  j["mode"] = {{"fd_step", o.mode.fd_step},
               {"hessian_step", o.mode.hessian_step},
               {"grad_tol", o.mode.grad_tol},
               {"max_iter", o.mode.max_iter}};
  j["newton"] = {{"max_iter", o.newton.max_iter},
                 {"grad_tol", o.newton.grad_tol},
                 {"step_tol", o.newton.step_tol},
                 {"max_halvings", o.newton.max_halvings}};
  j["tau_eps"] = model.options().tau_eps;
  j["intercept_precision"] = model.options().intercept_precision;
  j["fixed_precision"] = model.options().fixed_precision;
  return j;
}

std::string plot_script(const std::vector<std::pair<std::string, std::string>>& panels) {
  std::ostringstream s;
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(panels.size()))));
  const int rows = cols == 0 ? 0 : (static_cast<int>(panels.size()) + cols - 1) / cols;
  s << "# gnuplot script; run from this directory: gnuplot -p plot.gp\n";
  s << "set datafile separator \",\"\n";
  s << "set key off\n";
  s << "set multiplot layout " << std::max(rows, 1) << "," << std::max(cols, 1) << "\n";
  for (const auto& [title, file] : panels) {
    s << "set title \"" << title << "\"\n";
    s << "plot \"" << file << "\" skip 1 using 1:2 with lines\n";
  }
  s << "unset multiplot\n";
  return s.str();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Flat key=value lines; '#' starts a comment line. Values keep their commas
// (formulas need them), so this does not go through the INI reader.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot read config file " + path);
  std::vector<std::pair<std::string, std::string>> items;
  std::string line;
  for (int no = 1; std::getline(f, line); ++no) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value in " + path, no, 1);
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    items.emplace_back(key, value);
  }
  return items;
}

// Config values fill options the command line left unset.
void apply_config(CLI::App& cmd, const std::string& path) {
  for (const auto& [key, value] : read_config(path)) {
    CLI::Option* opt = key == "config" ? nullptr : cmd.get_option_no_throw("--" + key);
    if (!opt) throw std::invalid_argument("unknown config key '" + key + "' in " + path);
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

std::string one_line(std::string msg) {
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  return msg;
}

}  // namespace

void validate(const RunConfig& c) {
  if (c.data.empty()) throw std::invalid_argument("--data is required");
  if (c.model.empty() == c.formula.empty()) throw std::invalid_argument("give exactly one of --model and --formula");
  if (!family_from_name(c.family)) throw std::invalid_argument("unknown family '" + c.family + "'");
  if (!latent_strategy_from_name(c.strategy)) throw std::invalid_argument("unknown strategy '" + c.strategy + "'");
  if (!int_strategy_from_name(c.int_strategy)) {
    throw std::invalid_argument("unknown integration strategy '" + c.int_strategy + "'");
  }
  if (!(c.dz > 0)) throw std::invalid_argument("dz must be positive");
  if (!(c.diff_logdens > 0)) throw std::invalid_argument("diff-logdens must be positive");
  if (!(c.f_ccd > 1)) throw std::invalid_argument("f-ccd must exceed 1");
  if (c.threads < 1) throw std::invalid_argument("threads must be at least 1");
  if (c.out.empty()) throw std::invalid_argument("--out is required");
}

std::string file_stem(const std::string& name) {
  std::string s;
  for (char ch : name) {
    if (ch == ']') continue;
    const bool keep = std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '_' || ch == '-';
    s += keep ? ch : '_';
  }
  return s.empty() ? "_" : s;
}

RunOutcome run(const RunConfig& config) {
  validate(config);
  const AssembledModel model = build_model(config);
  const InferenceOptions opts = inference_options(config);
  RunOutcome outcome;
  outcome.result = run_inference(model, opts);
  const InferenceResult& r = outcome.result;
  const auto& diag = r.diagnostics;
  outcome.converged = diag.mode_converged && diag.newton_converged;

  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out(config.out);
  fs::create_directories(out / "marginals");

  std::vector<std::pair<std::string, std::string>> panels;
  auto summary = open_out(out / "summary.csv");
  summary << "name,mean,sd,0.025quant,0.5quant,0.975quant\n";
  auto emit = [&](const std::string& name, const MarginalDensity& d, const Summary& s) {
    const std::string file = "marginals/" + file_stem(name) + ".csv";
    write_table(out / file, density_table(d));
    panels.emplace_back(name, file);
    summary << name << ',' << number(s.mean) << ',' << number(s.sd) << ',' << number(s.q025) << ','
            << number(s.q50) << ',' << number(s.q975) << '\n';
  };
  for (const auto& m : r.latent) emit(m.name, m.density, m.summary);
  for (const auto& h : r.hyper) emit(h.name, h.user, h.summary);

  {
    auto f = open_out(out / "evidence.txt");
    f << (r.log_evidence ? number(*r.log_evidence) : std::string("NA")) << '\n';
  }
  {
    auto f = open_out(out / "plot.gp");
    f << plot_script(panels);
  }

  ordered_json j;
  j["config"] = config_json(config, model, opts, r);
  ordered_json timings;
  for (const auto& [k, v] : diag.seconds) timings[k] = v;
  timings["write"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  j["timings"] = timings;
  j["convergence"] = {{"mode", diag.mode_converged}, {"newton", diag.newton_converged}, {"all", outcome.converged}};
  j["diagnostics"] = {{"theta_points", r.integration.points.size()},
                      {"mixed_points", diag.mixed_points},
                      {"failed_points", diag.failed_points},
                      {"skew_capped", diag.skew_capped},
                      {"max_fit_residual", diag.max_fit_residual}};
  if (r.log_evidence) {
    j["log_evidence"] = *r.log_evidence;
  } else {
    j["log_evidence"] = nullptr;
  }
  auto f = open_out(out / "run.json");
  f << j.dump(2) << '\n';
  return outcome;
}

DataTable simulate_poisson(const SimulateConfig& c) {
  if (c.n < 1) throw std::invalid_argument("n must be at least 1");
  if (c.m < 1) throw std::invalid_argument("m must be at least 1");
  if (!(c.sd_w >= 0) || !(c.sd_u >= 0)) throw std::invalid_argument("standard deviations must be non-negative");
  boost::random::mt19937 gen(static_cast<std::uint32_t>(c.seed ^ (c.seed >> 32)));
  boost::random::normal_distribution<double> std_normal(0.0, 1.0);
  std::vector<double> w(c.n), u(c.m), idx(c.n), y(c.n);
  for (auto& v : w) v = c.sd_w * std_normal(gen);
  for (auto& v : u) v = c.sd_u * std_normal(gen);
  boost::random::uniform_int_distribution<int> pick(1, c.m);
  for (auto& v : idx) v = pick(gen);
  for (int i = 0; i < c.n; ++i) {
    const double lambda = std::exp(c.intercept + c.beta * w[i] + u[static_cast<int>(idx[i]) - 1]);
    boost::random::poisson_distribution<int, double> pois(lambda);
    y[i] = pois(gen);
  }
  DataTable t;
  t.add_column("y", std::move(y));
  t.add_column("w", std::move(w));
  t.add_column("idx", std::move(idx));
  return t;
}

DataTable toy_curves(double rho, double c) {
  const std::vector<double> grid = toy_grid();
  const MarginalDensity truth = toy_true_marginal(rho, c, grid);
  const MarginalDensity gauss = toy_gaussian_approx(rho, c);
  const MarginalDensity lap = toy_laplace_marginal(rho, c, grid);
  std::vector<double> a, b, d;
  for (double x : grid) {
    a.push_back(truth(x));
    b.push_back(gauss(x));
    d.push_back(lap(x));
  }
  DataTable t;
  t.add_column("x", grid);
  t.add_column("true", std::move(a));
  t.add_column("gaussian", std::move(b));
  t.add_column("laplace", std::move(d));
  return t;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Approximate Bayesian inference for latent Gaussian models", "inlite"};
  app.require_subcommand(1);

  RunConfig rc;
  auto* run_cmd = app.add_subcommand("run", "Fit a model and write marginals, summaries and a plot script");
  std::string config_path;
  run_cmd->add_option("--config", config_path, "Flat key=value file mirroring the flags; flags win");
  run_cmd->add_option("--data", rc.data, "CSV data file");
  run_cmd->add_option("--model", rc.model, "File holding the model formula");
  run_cmd->add_option("--formula", rc.formula, "Inline model formula");
  run_cmd->add_option("--family", rc.family, "gaussian, poisson or binomial")->capture_default_str();
  run_cmd->add_option("--ntrials", rc.ntrials, "Binomial trials column");
  run_cmd->add_option("--strategy", rc.strategy, "gaussian, simplified-laplace or laplace")->capture_default_str();
  run_cmd->add_option("--int-strategy", rc.int_strategy, "eb, grid, ccd or auto")->capture_default_str();
  run_cmd->add_option("--dz", rc.dz, "Grid step in standardized theta")->capture_default_str();
  run_cmd->add_option("--diff-logdens", rc.diff_logdens, "Log-density drop that ends the grid")
      ->capture_default_str();
  run_cmd->add_option("--f-ccd", rc.f_ccd, "CCD scaling factor")->capture_default_str();
  run_cmd->add_option("--out", rc.out, "Output directory")->capture_default_str();
  run_cmd->add_option("--threads", rc.threads, "Worker threads")->capture_default_str();
  run_cmd->add_option("--seed", rc.seed, "Seed, recorded for reproducibility")->capture_default_str();

  SimulateConfig sc;
  std::string sim_out;
  auto* sim_cmd = app.add_subcommand("simulate", "Write a synthetic Poisson data set (columns y, w, idx)");
  sim_cmd->add_option("--n", sc.n, "Observations")->capture_default_str();
  sim_cmd->add_option("--m", sc.m, "Levels of idx")->capture_default_str();
  sim_cmd->add_option("--sd-w", sc.sd_w, "Covariate standard deviation")->capture_default_str();
  sim_cmd->add_option("--sd-u", sc.sd_u, "Random effect standard deviation")->capture_default_str();
  sim_cmd->add_option("--intercept", sc.intercept)->capture_default_str();
  sim_cmd->add_option("--beta", sc.beta)->capture_default_str();
  sim_cmd->add_option("--seed", sc.seed, "Random seed")->required();
  sim_cmd->add_option("--out", sim_out, "Output CSV (standard output when omitted)");

  double rho = 0.0;
  double c = 10.0;
  std::string toy_out;
  auto* toy_cmd = app.add_subcommand("toy", "Tabulate the bivariate logistic toy posterior");
  toy_cmd->add_option("--rho", rho, "Correlation")->capture_default_str();
  toy_cmd->add_option("--c", c, "Likelihood slope")->capture_default_str();
  toy_cmd->add_option("--out", toy_out, "Output CSV (standard output when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  auto write_or_print = [&](const std::string& path, const DataTable& t) {
    if (path.empty()) {
      write_csv(out, t);
    } else {
      std::ofstream f(path, std::ios::binary);
      if (!f) throw DataError("cannot write " + path);
      write_csv(f, t);
    }
  };

  try {
    if (*run_cmd) {
      if (!config_path.empty()) apply_config(*run_cmd, config_path);
      const RunOutcome o = run(rc);
      if (!o.converged) {
        err << "inlite: warning: optimization did not converge; see run.json\n";
        return 1;
      }
    } else if (*sim_cmd) {
      write_or_print(sim_out, simulate_poisson(sc));
    } else if (*toy_cmd) {
      write_or_print(toy_out, toy_curves(rho, c));
    }
    return 0;
  } catch (const ParseError& e) {
    err << "inlite: parse error: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const DataError& e) {
    err << "inlite: data error: " << one_line(e.what()) << '\n';
    return 3;
  } catch (const NumericalError& e) {
    err << "inlite: numerical failure: " << one_line(e.what()) << '\n';
    return 4;
  } catch (const std::invalid_argument& e) {
    err << "inlite: invalid configuration: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "inlite: i/o error: " << one_line(e.what()) << '\n';
    return 3;
  } catch (const CLI::Error& e) {
    err << "inlite: invalid configuration: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "inlite: error: " << one_line(e.what()) << '\n';
    return 1;
  }
}

}  // namespace inlite::cli
