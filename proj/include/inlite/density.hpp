#pragma once

// Tabulated univariate densities, skew-normal marginals and distances.

#include <functional>
#include <span>
#include <vector>

namespace inlite {

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q50 = 0.0;
  double q975 = 0.0;
};

class MarginalDensity {
 public:
  MarginalDensity() = default;
  // x strictly increasing, density >= 0. Normalized on construction.
  MarginalDensity(std::vector<double> x, std::vector<double> density);
  // Same from log-density values (a constant offset is irrelevant).
  static MarginalDensity from_log(std::vector<double> x, std::span<const double> log_density);
  // Tabulates pdf on a uniform grid.
  static MarginalDensity tabulate(const std::function<double(double)>& pdf, double lo, double hi,
                                  int points = 201);

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& density() const { return d_; }
  std::size_t size() const { return x_.size(); }
  bool empty() const { return x_.empty(); }
  double lower() const { return x_.front(); }
  double upper() const { return x_.back(); }

  double integral() const;
  double mean() const;
  double sd() const;
  double moment(int order) const;  // central moment
  double quantile(double p) const;
  double mode() const;
  Summary summary() const;

  // Interpolated density: piecewise cubic in the log density, 0 outside
  // the tabulated range.
  double operator()(double v) const;

 private:
  std::vector<double> x_;
  std::vector<double> d_;
};

std::vector<double> linspace(double lo, double hi, int points);

double normal_pdf(double x, double mean, double sd);

MarginalDensity gaussian_marginal(double mean, double sd, int points = 201, double half_width = 6.0);

// Weighted mixture evaluated on a uniform grid spanning the union of the
// supports, with the finest input spacing (capped at max_points).
MarginalDensity mix_densities(std::span<const double> weights, std::span<const MarginalDensity> parts,
                              int max_points = 4001);

// Total variation distance 0.5 * integral |p - q|, evaluated on a uniform
// grid over the union of supports.
double tv_distance(const MarginalDensity& p, const MarginalDensity& q, int points = 20001);
// Against a normalized reference pdf; mass of the reference outside the
// tabulated range of p counts fully.
double tv_distance(const MarginalDensity& p, const std::function<double(double)>& pdf,
                   int points = 20001);

// Standard skew-normal family: density 2/omega phi(u) Phi(alpha u),
// u = (x - xi)/omega.
struct SkewNormal {
  double xi = 0.0;
  double omega = 1.0;
  double alpha = 0.0;

  double pdf(double x) const;
  double log_pdf(double x) const;
  double mean() const;
  double variance() const;
  double skewness() const;

  // Matches mean, variance and standardized skewness; |skewness| is capped
  // at kMaxSkewness.
  static SkewNormal from_moments(double mean, double variance, double skewness,
                                 bool* capped = nullptr);

  // Wider than the gaussian default: the long tail of a strongly skewed
  // member still carries visible mass at 6 sd.
  MarginalDensity tabulate(int points = 321, double half_width = 8.0) const;
};

inline constexpr double kMaxSkewness = 0.988;
// Supremum of |skewness| over the skew-normal family.
inline constexpr double kSkewNormalBound = 0.99527174643;

}  // namespace inlite
