#pragma once

// Brute-force references used to check the approximations: adaptive
// quadrature, the two-dimensional logistic toy posterior, the Laplace
// integral demonstrator and dense grid enumeration of tiny models.

#include <functional>
#include <span>
#include <vector>

#include "inlite/density.hpp"
#include "inlite/model.hpp"

namespace inlite {

struct QuadratureRule {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_depth = 20;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod (61 point) on [a, b]; b may be +infinity. Throws
// NumericalError when the error estimate stays above the tolerance.
QuadResult quad_1d(const std::function<double(double)>& f, double a, double b, const QuadratureRule& rule = {});
QuadResult quad_1d(const std::function<double(double)>& f, double a, double b, double tol);

// pi(x1, x2) proportional to N(x; 0, [[1, rho], [rho, 1]]) times
// logistic(c x1) logistic(c x2).
struct ToyPosterior {
  double rho = 0.0;
  double c = 1.0;

  // Throws std::invalid_argument unless 0 <= rho <= 0.999 and c > 0.
  void validate() const;
  double log_density(double x1, double x2) const;  // unnormalized
};

std::vector<double> toy_grid(int points = 2001, double lo = -5.0, double hi = 5.0);

MarginalDensity toy_true_marginal(double rho, double c, const std::vector<double>& grid = toy_grid());
MarginalDensity toy_gaussian_approx(double rho, double c);
MarginalDensity toy_laplace_marginal(double rho, double c, const std::vector<double>& grid = toy_grid());

// Laplace's method on integral_0^inf exp(n f(x)) dx.
enum class LaplaceDemoCase {
  kStirling,  // f(x) = log x - x, exact value Gamma(n+1) / n^(n+1)
  kGaussian,  // f(x) = -x^2/2 on the real line, exact value sqrt(2 pi / n)
};

struct LaplaceDemoRow {
  double n = 0.0;
  double log_exact = 0.0;
  double log_laplace = 0.0;
  double relative_error = 0.0;  // laplace / exact - 1
};

std::vector<LaplaceDemoRow> laplace_integral_demo(std::span<const double> n_values,
                                                  LaplaceDemoCase which = LaplaceDemoCase::kStirling);
// Least-squares slope of log |relative error| against log n.
double loglog_slope(std::span<const LaplaceDemoRow> rows);

// Normalized posterior on a tensor grid. Axes are theta first, then x.
struct Enumeration {
  std::vector<std::vector<double>> theta_axes;
  std::vector<std::vector<double>> x_axes;
  std::vector<MarginalDensity> theta_marginals;
  std::vector<MarginalDensity> x_marginals;
  double log_normalizer = 0.0;  // log of sum(exp(log joint)) times the cell volume
  std::vector<double> table;    // normalized cell probabilities, when kept
};

using LogJointFn = std::function<double(std::span<const double> theta, std::span<const double> x)>;

inline constexpr std::size_t kEnumerationCap = 10'000'000;

Enumeration dense_enumeration(const LogJointFn& log_joint, std::vector<std::vector<double>> theta_axes,
                              std::vector<std::vector<double>> x_axes, bool keep_table = false);

// Enumerates an assembled model over its effect coordinates (the predictor
// is set to its noise-free value). Models with constraints are rejected.
Enumeration dense_posterior_enumeration(const AssembledModel& model, std::vector<std::vector<double>> theta_axes,
                                        std::vector<std::vector<double>> x_axes, bool keep_table = false);

// Log joint density used by dense_posterior_enumeration.
LogJointFn enumeration_log_joint(const AssembledModel& model);

}  // namespace inlite
