#include "inlite/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace inlite {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kPi = 3.14159265358979323846;

double trapezoid(const std::vector<double>& x, const std::function<double(std::size_t)>& f) {
  double s = 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) s += 0.5 * (x[k] - x[k - 1]) * (f(k) + f(k - 1));
  return s;
}

double log_normal_cdf(double z) {
  if (z > -30.0) return std::log(0.5 * std::erfc(-z / std::sqrt(2.0)));
  return -0.5 * z * z - std::log(-z) - kLogSqrt2Pi;
}

}  // namespace

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 2) throw std::invalid_argument("linspace needs at least two points");
  std::vector<double> x(static_cast<std::size_t>(points));
  const double h = (hi - lo) / (points - 1);
  for (int k = 0; k < points; ++k) x[k] = lo + k * h;
  x.back() = hi;
  return x;
}

double normal_pdf(double x, double mean, double sd) {
  const double u = (x - mean) / sd;
  return std::exp(-0.5 * u * u - kLogSqrt2Pi) / sd;
}

MarginalDensity::MarginalDensity(std::vector<double> x, std::vector<double> density)
    : x_(std::move(x)), d_(std::move(density)) {
  if (x_.size() < 2 || x_.size() != d_.size()) {
    throw std::invalid_argument("density needs matching grid and values with at least two points");
  }
  for (std::size_t k = 1; k < x_.size(); ++k) {
    if (!(x_[k] > x_[k - 1])) throw std::invalid_argument("density grid must be strictly increasing");
  }
  for (double v : d_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("density values must be finite and >= 0");
  }
  const double z = integral();
  if (!(z > 0.0)) throw std::invalid_argument("density has zero mass");
  for (double& v : d_) v /= z;
}

MarginalDensity MarginalDensity::from_log(std::vector<double> x, std::span<const double> log_density) {
  if (x.size() != log_density.size()) throw std::invalid_argument("grid and log-density differ in length");
  double top = -std::numeric_limits<double>::infinity();
  for (double v : log_density) {
    if (std::isnan(v)) throw std::invalid_argument("log-density is NaN");
    top = std::max(top, v);
  }
  if (!std::isfinite(top)) throw std::invalid_argument("log-density has no finite values");
  std::vector<double> d(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) d[k] = std::exp(log_density[k] - top);
  return MarginalDensity(std::move(x), std::move(d));
}

MarginalDensity MarginalDensity::tabulate(const std::function<double(double)>& pdf, double lo, double hi,
                                          int points) {
  std::vector<double> x = linspace(lo, hi, points);
  std::vector<double> d(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) d[k] = pdf(x[k]);
  return MarginalDensity(std::move(x), std::move(d));
}

double MarginalDensity::integral() const {
  return trapezoid(x_, [this](std::size_t k) { return d_[k]; });
}

double MarginalDensity::mean() const {
  return trapezoid(x_, [this](std::size_t k) { return x_[k] * d_[k]; });
}

double MarginalDensity::moment(int order) const {
  const double m = mean();
  return trapezoid(x_, [&](std::size_t k) { return std::pow(x_[k] - m, order) * d_[k]; });
}

double MarginalDensity::sd() const { return std::sqrt(std::max(moment(2), 0.0)); }

double MarginalDensity::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
  double acc = 0.0;
  for (std::size_t k = 1; k < x_.size(); ++k) {
    const double h = x_[k] - x_[k - 1];
    const double piece = 0.5 * h * (d_[k] + d_[k - 1]);
    if (acc + piece >= p && piece > 0.0) {
      // Density is linear on the panel, so the cumulative is quadratic.
      const double need = p - acc;
      const double slope = (d_[k] - d_[k - 1]) / h;
      double t;
      if (std::abs(slope) < 1e-14 * std::max(d_[k], d_[k - 1]) / h) {
        t = need / d_[k - 1];
      } else {
        const double disc = d_[k - 1] * d_[k - 1] + 2.0 * slope * need;
        t = (-d_[k - 1] + std::sqrt(std::max(disc, 0.0))) / slope;
      }
      return x_[k - 1] + std::clamp(t, 0.0, h);
    }
    acc += piece;
  }
  return x_.back();
}

double MarginalDensity::mode() const {
  const auto it = std::max_element(d_.begin(), d_.end());
  const std::size_t k = static_cast<std::size_t>(it - d_.begin());
  if (k == 0 || k + 1 == d_.size()) return x_[k];
  // Parabola through the three points around the maximum.
  const double x0 = x_[k - 1], x1 = x_[k], x2 = x_[k + 1];
  const double y0 = d_[k - 1], y1 = d_[k], y2 = d_[k + 1];
  const double den = (x0 - x1) * (x0 - x2) * (x1 - x2);
  const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den;
  const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den;
  if (!(a < 0.0)) return x1;
  return std::clamp(-b / (2.0 * a), x0, x2);
}

Summary MarginalDensity::summary() const {
  return {mean(), sd(), quantile(0.025), quantile(0.5), quantile(0.975)};
}

double MarginalDensity::operator()(double v) const {
  if (x_.empty() || v < x_.front() || v > x_.back()) return 0.0;
  const std::size_t n = x_.size();
  std::size_t k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), v) - x_.begin());
  if (k >= n) return d_.back();
  if (k == 0) return d_.front();
  if (v == x_[k - 1]) return d_[k - 1];
  if (n < 4) {
    const double t = (v - x_[k - 1]) / (x_[k] - x_[k - 1]);
    return (1 - t) * d_[k - 1] + t * d_[k];
  }
  // Four-point stencil around the panel [k-1, k].
  std::size_t j0 = k >= 2 ? k - 2 : 0;
  j0 = std::min(j0, n - 4);
  bool positive = true;
  for (std::size_t j = j0; j < j0 + 4; ++j) positive = positive && d_[j] > 0.0;
  if (!positive) {
    const double t = (v - x_[k - 1]) / (x_[k] - x_[k - 1]);
    return (1 - t) * d_[k - 1] + t * d_[k];
  }
  double acc = 0.0;
  for (std::size_t a = j0; a < j0 + 4; ++a) {
    double w = 1.0;
    for (std::size_t b = j0; b < j0 + 4; ++b) {
      if (b != a) w *= (v - x_[b]) / (x_[a] - x_[b]);
    }
    acc += w * std::log(d_[a]);
  }
  return std::exp(acc);
}

MarginalDensity gaussian_marginal(double mean, double sd, int points, double half_width) {
  if (!(sd > 0.0)) throw std::invalid_argument("gaussian marginal needs sd > 0");
  std::vector<double> x = linspace(mean - half_width * sd, mean + half_width * sd, points);
  std::vector<double> d(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) d[k] = normal_pdf(x[k], mean, sd);
  return MarginalDensity(std::move(x), std::move(d));
}

MarginalDensity mix_densities(std::span<const double> weights, std::span<const MarginalDensity> parts,
                              int max_points) {
  if (parts.empty()) throw std::invalid_argument("mixture of zero densities");
  if (weights.size() != parts.size()) throw std::invalid_argument("mixture weights and parts differ in length");
  if (parts.size() == 1) return parts[0];
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    lo = std::min(lo, parts[k].lower());
    hi = std::max(hi, parts[k].upper());
    h = std::min(h, (parts[k].upper() - parts[k].lower()) / (parts[k].size() - 1));
  }
  if (!std::isfinite(lo)) throw std::invalid_argument("mixture weights are all zero");
  const double span = hi - lo;
  const int points = static_cast<int>(std::clamp(std::ceil(span / h) + 1.0, 201.0, double(max_points)));
  std::vector<double> x = linspace(lo, hi, points);
  std::vector<double> d(x.size(), 0.0);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    for (std::size_t j = 0; j < x.size(); ++j) d[j] += weights[k] * parts[k](x[j]);
  }
  return MarginalDensity(std::move(x), std::move(d));
}

double tv_distance(const MarginalDensity& p, const MarginalDensity& q, int points) {
  const double lo = std::min(p.lower(), q.lower());
  const double hi = std::max(p.upper(), q.upper());
  const std::vector<double> x = linspace(lo, hi, points);
  return 0.5 * trapezoid(x, [&](std::size_t k) { return std::abs(p(x[k]) - q(x[k])); });
}

double tv_distance(const MarginalDensity& p, const std::function<double(double)>& pdf, int points) {
  const std::vector<double> x = linspace(p.lower(), p.upper(), points);
  std::vector<double> ref(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) ref[k] = pdf(x[k]);
  const double inside = trapezoid(x, [&](std::size_t k) { return ref[k]; });
  const double diff = trapezoid(x, [&](std::size_t k) { return std::abs(p(x[k]) - ref[k]); });
  return 0.5 * (diff + std::max(0.0, 1.0 - inside));
}

// ---------------------------------------------------------------------------
// Skew-normal

double SkewNormal::log_pdf(double x) const {
  const double u = (x - xi) / omega;
  return std::log(2.0) - std::log(omega) - 0.5 * u * u - kLogSqrt2Pi + log_normal_cdf(alpha * u);
}

double SkewNormal::pdf(double x) const { return std::exp(log_pdf(x)); }

double SkewNormal::mean() const {
  const double delta = alpha / std::sqrt(1.0 + alpha * alpha);
  return xi + omega * delta * std::sqrt(2.0 / kPi);
}

double SkewNormal::variance() const {
  const double delta = alpha / std::sqrt(1.0 + alpha * alpha);
  return omega * omega * (1.0 - 2.0 * delta * delta / kPi);
}

double SkewNormal::skewness() const {
  const double delta = alpha / std::sqrt(1.0 + alpha * alpha);
  const double m = delta * std::sqrt(2.0 / kPi);
  return 0.5 * (4.0 - kPi) * m * m * m / std::pow(1.0 - m * m, 1.5);
}

SkewNormal SkewNormal::from_moments(double mean, double variance, double skewness, bool* capped) {
  if (!(variance > 0.0)) throw std::invalid_argument("skew-normal matching needs variance > 0");
  if (capped) *capped = false;
  double g = skewness;
  if (std::abs(g) > kMaxSkewness) {
    g = std::copysign(kMaxSkewness, g);
    if (capped) *capped = true;
  }
  // Invert skewness(delta): with m = delta sqrt(2/pi) and
  // r = (2|g|/(4-pi))^(1/3), m^2 / (1 - m^2) = r^2.
  const double r = std::cbrt(2.0 * std::abs(g) / (4.0 - kPi));
  const double m = r / std::sqrt(1.0 + r * r);
  const double delta = std::copysign(std::min(m * std::sqrt(kPi / 2.0), 1.0 - 1e-12), g);
  SkewNormal sn;
  sn.alpha = delta / std::sqrt(1.0 - delta * delta);
  sn.omega = std::sqrt(variance / (1.0 - 2.0 * delta * delta / kPi));
  sn.xi = mean - sn.omega * delta * std::sqrt(2.0 / kPi);
  return sn;
}

MarginalDensity SkewNormal::tabulate(int points, double half_width) const {
  const double m = mean();
  const double s = std::sqrt(variance());
  std::vector<double> x = linspace(m - half_width * s, m + half_width * s, points);
  std::vector<double> ld(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) ld[k] = log_pdf(x[k]);
  return MarginalDensity::from_log(std::move(x), ld);
}

}  // namespace inlite
