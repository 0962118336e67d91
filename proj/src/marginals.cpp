#include <algorithm>
#include <cmath>
#include <limits>

#include "inlite/error.hpp"
#include "inlite/inference.hpp"

namespace inlite {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

MarginalDensity latent_marginal_gaussian(const GaussianApprox& ga, int i) {
  const DenseVector col = ga.covariance_column(i);
  return gaussian_marginal(ga.mode[i], std::sqrt(col[i]));
}

LaplaceProfile::LaplaceProfile(const LatentProblem& problem, const GaussianApprox& ga, int i,
                               const NewtonOptions& options)
    : problem_(&problem), ga_(&ga), i_(i), options_(options) {
  column_ = ga.covariance_column(i);
  mean_ = ga.mode[i];
  if (!(column_[i] > 0.0)) throw NumericalError("latent coordinate has no posterior variance");
  sd_ = std::sqrt(column_[i]);
}

double LaplaceProfile::operator()(double v) const {
  const int n = problem_->dim();
  const Eigen::Index nc = problem_->constraints.rows();
  LinearConstraints cons;
  cons.a.resize(nc + 1, n);
  cons.a.topRows(nc) = problem_->constraints;
  cons.a.row(nc).setZero();
  cons.a(nc, i_) = 1.0;
  cons.e = DenseVector::Zero(nc + 1);
  cons.e[nc] = v;
  // Start from the conditional mean of the gaussian approximation.
  const DenseVector start = ga_->mode + column_ * ((v - mean_) / column_[i_]);
  const GaussianApprox cond = constrained_approximation(*problem_, cons, options_, &start);
  return cond.objective - 0.5 * cond.log_det_constrained();
}

double latent_marginal_full_laplace(const AssembledModel& model, std::span<const double> theta, int i,
                                    double x_value) {
  const LatentProblem p = latent_problem(model, theta);
  const GaussianApprox ga = gaussian_approximation(p);
  return LaplaceProfile(p, ga, i)(x_value);
}

MarginalDensity latent_marginal_laplace(const LatentProblem& problem, const GaussianApprox& ga, int i,
                                        const NewtonOptions& options, int abscissae, double half_width,
                                        int points) {
  const LaplaceProfile prof(problem, ga, i, options);
  std::vector<double> x = linspace(prof.mean() - half_width * prof.sd(), prof.mean() + half_width * prof.sd(),
                                   abscissae);
  std::vector<double> lp(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    try {
      lp[k] = prof(x[k]);
    } catch (const NumericalError&) {
      lp[k] = kNegInf;
    }
  }
  const MarginalDensity coarse = MarginalDensity::from_log(x, lp);
  return MarginalDensity::tabulate(coarse, x.front(), x.back(), points);
}

SkewNormal skew_normal_from_cubic(double b, double c, bool* capped) {
  if (c == 0.0) {
    // Exactly gaussian; skip the quadrature, whose truncation would leave a
    // spurious skewness of rounding size.
    if (capped) *capped = false;
    return SkewNormal{b, 1.0, 0.0};
  }
  // The cubic turns back up beyond its antimode, so integrate only over the
  // mode's basin within |s| <= 6. Without stationary points there is no mode
  // to speak of; keep the shifted gaussian and flag it.
  const double disc = 1.0 - 2.0 * b * c;
  if (disc <= 0.0) {
    if (capped) *capped = true;
    return SkewNormal{b, 1.0, 0.0};
  }
  const double anti = (1.0 + std::sqrt(disc)) / c;
  const double lo = c < 0.0 ? std::max(-6.0, anti) : -6.0;
  const double hi = c > 0.0 ? std::min(6.0, anti) : 6.0;
  const std::vector<double> s = linspace(lo, hi, 2401);
  std::vector<double> ld(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) ld[k] = -0.5 * s[k] * s[k] + b * s[k] + c * s[k] * s[k] * s[k] / 6.0;
  const MarginalDensity d = MarginalDensity::from_log(s, ld);
  const double var = d.moment(2);
  const double skew = d.moment(3) / std::pow(var, 1.5);
  return SkewNormal::from_moments(d.mean(), var, skew, capped);
}

SimplifiedLaplace simplified_laplace(const LatentProblem& problem, const GaussianApprox& ga, int i,
                                     const NewtonOptions& options) {
  const LaplaceProfile prof(problem, ga, i, options);
  SimplifiedLaplace out;
  // Fit L(s) + s^2/2 = a + b s + c s^3 / 6 at s = -2..2.
  Eigen::MatrixXd design(5, 3);
  Eigen::VectorXd r(5);
  bool ok = true;
  for (int k = 0; k < 5; ++k) {
    const double s = k - 2.0;
    design(k, 0) = 1.0;
    design(k, 1) = s;
    design(k, 2) = s * s * s / 6.0;
    try {
      r[k] = prof(prof.mean() + s * prof.sd()) + 0.5 * s * s;
    } catch (const NumericalError&) {
      ok = false;
    }
  }
  if (ok && r.allFinite()) {
    const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(r);
    out.b = coef[1];
    out.c = coef[2];
    out.residual = std::sqrt((design * coef - r).squaredNorm() / 5.0);
  } else {
    out.residual = std::numeric_limits<double>::infinity();
  }
  const SkewNormal z = skew_normal_from_cubic(out.b, out.c, &out.capped);
  out.density = SkewNormal{prof.mean() + prof.sd() * z.xi, prof.sd() * z.omega, z.alpha};
  return out;
}

MarginalDensity latent_marginal_simplified_laplace(const LatentProblem& problem, const GaussianApprox& ga,
                                                   int i, const NewtonOptions& options) {
  return simplified_laplace(problem, ga, i, options).density.tabulate();
}

MarginalDensity mix_over_theta(std::span<const ThetaPoint> points, std::span<const MarginalDensity> per_point) {
  if (points.empty()) throw std::invalid_argument("mixture over an empty set of theta points");
  if (points.size() != per_point.size()) throw std::invalid_argument("theta points and densities differ in count");
  std::vector<double> w;
  for (const auto& p : points) w.push_back(p.weight);
  return mix_densities(w, per_point);
}

}  // namespace inlite
