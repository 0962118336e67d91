#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "inlite/inference.hpp"
#include "inlite/model.hpp"

namespace inlite::cli {

struct RunConfig {
  std::string data;
  std::string model;    // file holding the formula
  std::string formula;  // inline alternative to model
  std::string family = "gaussian";
  std::string ntrials;  // binomial trials column
  std::string strategy = "simplified-laplace";
  std::string int_strategy = "auto";
  double dz = 0.75;
  double diff_logdens = 6.0;
  double f_ccd = 1.1;
  std::string out = "inlite-out";
  int threads = 1;
  std::uint64_t seed = 0;
};

// Throws std::invalid_argument on out-of-range or inconsistent settings.
void validate(const RunConfig& config);

struct RunOutcome {
  InferenceResult result;
  bool converged = false;
};

// Reads the inputs, runs inference and writes every artifact under
// config.out. Library errors propagate (ParseError, DataError, ...).
RunOutcome run(const RunConfig& config);

// Poisson data shaped like the worked example: y ~ Poisson(exp(intercept +
// beta w + u[idx])), w ~ N(0, sd_w^2), u ~ N(0, sd_u^2), idx uniform on 1..m.
struct SimulateConfig {
  int n = 50;
  int m = 10;
  double sd_w = 1.0 / 3.0;
  double sd_u = 0.25;
  double intercept = 0.0;
  double beta = 1.0;
  std::uint64_t seed = 123456;
};

DataTable simulate_poisson(const SimulateConfig& config);

// Columns x, true, gaussian, laplace on the toy grid.
DataTable toy_curves(double rho, double c);

// "idx[2]" -> "idx_2"; anything outside [A-Za-z0-9._-] becomes '_'.
std::string file_stem(const std::string& name);

// Exit codes: 0 success, 1 finished without convergence, 2 usage or parse
// error, 3 data or I/O error, 4 numerical failure.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace inlite::cli
