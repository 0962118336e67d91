#include "inlite/oracle.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "inlite/error.hpp"

namespace inlite {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kPi = 3.14159265358979323846;

double log_logistic(double v) { return v >= 0 ? -std::log1p(std::exp(-v)) : v - std::log1p(std::exp(v)); }
double logistic(double v) { return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); }

MarginalDensity from_log_values(const std::vector<double>& grid, const std::vector<double>& lp) {
  return MarginalDensity::from_log(grid, lp);
}

}  // namespace

// ---------------------------------------------------------------------------
// Quadrature

QuadResult quad_1d(const std::function<double(double)>& f, double a, double b, const QuadratureRule& rule) {
  if (!(a <= b)) throw std::invalid_argument("quadrature interval is reversed");
  if (a == b) return {0.0, 0.0};
  double err = 0.0;
  double l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, a, b, static_cast<unsigned>(rule.max_depth), 0.1 * rule.rel_tol, &err, &l1);
  if (!std::isfinite(v)) throw NumericalError("quadrature produced a non-finite value");
  // The error estimate cannot drop below rounding in the summed L1 mass.
  const double floor = 64 * std::numeric_limits<double>::epsilon() * l1;
  if (err > std::max({rule.abs_tol, rule.rel_tol * std::abs(v), floor})) {
    std::ostringstream msg;
    msg << "quadrature did not converge: error estimate " << err << " for value " << v;
    throw NumericalError(msg.str());
  }
  return {v, err};
}

QuadResult quad_1d(const std::function<double(double)>& f, double a, double b, double tol) {
  QuadratureRule rule;
  rule.abs_tol = tol;
  rule.rel_tol = tol;
  return quad_1d(f, a, b, rule);
}

// ---------------------------------------------------------------------------
// Toy posterior

void ToyPosterior::validate() const {
  if (!(rho >= 0.0 && rho <= 0.999)) throw std::invalid_argument("toy model needs 0 <= rho <= 0.999");
  if (!(c > 0.0)) throw std::invalid_argument("toy model needs c > 0");
}

double ToyPosterior::log_density(double x1, double x2) const {
  const double det = 1.0 - rho * rho;
  const double quad = (x1 * x1 - 2.0 * rho * x1 * x2 + x2 * x2) / det;
  return -0.5 * quad + log_logistic(c * x1) + log_logistic(c * x2);
}

std::vector<double> toy_grid(int points, double lo, double hi) { return linspace(lo, hi, points); }

MarginalDensity toy_true_marginal(double rho, double c, const std::vector<double>& grid) {
  const ToyPosterior toy{rho, c};
  toy.validate();
  // x2 | x1 under the gaussian part is N(rho x1, 1 - rho^2); integrate the
  // logistic factor against it over +-8 sd.
  const double sd = std::sqrt(1.0 - rho * rho);
  std::vector<double> lp(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x1 = grid[k];
    const double m = rho * x1;
    auto inner = [&](double x2) {
      const double u = (x2 - m) / sd;
      return std::exp(-0.5 * u * u) * logistic(c * x2);
    };
    const double q = quad_1d(inner, m - 8.0 * sd, m + 8.0 * sd, 1e-11).value;
    lp[k] = -0.5 * x1 * x1 + log_logistic(c * x1) + std::log(q);
  }
  return from_log_values(grid, lp);
}

namespace {

// Newton for the 2-d mode of the toy log density.
Eigen::Vector2d toy_mode(const ToyPosterior& toy, Eigen::Matrix2d* neg_hess) {
  Eigen::Matrix2d sinv;
  sinv << 1.0, -toy.rho, -toy.rho, 1.0;
  sinv /= 1.0 - toy.rho * toy.rho;
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  for (int it = 0; it < 200; ++it) {
    Eigen::Vector2d g = -sinv * x;
    Eigen::Matrix2d h = sinv;
    for (int i = 0; i < 2; ++i) {
      const double p = logistic(toy.c * x[i]);
      g[i] += toy.c * (1.0 - p);
      h(i, i) += toy.c * toy.c * p * (1.0 - p);
    }
    const Eigen::Vector2d step = h.ldlt().solve(g);
    x += step;
    if (step.cwiseAbs().maxCoeff() < 1e-13) {
      if (neg_hess) {
        *neg_hess = sinv;
        for (int i = 0; i < 2; ++i) {
          const double p = logistic(toy.c * x[i]);
          (*neg_hess)(i, i) += toy.c * toy.c * p * (1.0 - p);
        }
      }
      return x;
    }
  }
  throw ConvergenceError("toy model mode search did not converge");
}

}  // namespace

MarginalDensity toy_gaussian_approx(double rho, double c) {
  const ToyPosterior toy{rho, c};
  toy.validate();
  Eigen::Matrix2d h;
  const Eigen::Vector2d mode = toy_mode(toy, &h);
  return gaussian_marginal(mode[0], std::sqrt(h.inverse()(0, 0)), 2001, 8.0);
}

MarginalDensity toy_laplace_marginal(double rho, double c, const std::vector<double>& grid) {
  const ToyPosterior toy{rho, c};
  toy.validate();
  const double det = 1.0 - rho * rho;
  std::vector<double> lp(grid.size());
  double x2 = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x1 = grid[k];
    // Maximize over x2 with x1 fixed (1-d Newton, concave objective).
    double h = 0.0;
    bool done = false;
    for (int it = 0; it < 200 && !done; ++it) {
      const double p = logistic(c * x2);
      const double g = -(x2 - rho * x1) / det + c * (1.0 - p);
      h = 1.0 / det + c * c * p * (1.0 - p);
      const double step = g / h;
      x2 += step;
      done = std::abs(step) < 1e-13 * (1.0 + std::abs(x2));
    }
    if (!done) throw ConvergenceError("toy model conditional mode did not converge");
    const double p = logistic(c * x2);
    h = 1.0 / det + c * c * p * (1.0 - p);
    lp[k] = toy.log_density(x1, x2) - 0.5 * std::log(h);
  }
  return from_log_values(grid, lp);
}

// ---------------------------------------------------------------------------
// Laplace integral demonstrator

std::vector<LaplaceDemoRow> laplace_integral_demo(std::span<const double> n_values, LaplaceDemoCase which) {
  std::vector<LaplaceDemoRow> rows;
  for (double n : n_values) {
    if (!(n > 0.0)) throw std::invalid_argument("Laplace demonstrator needs n > 0");
    LaplaceDemoRow r;
    r.n = n;
    if (which == LaplaceDemoCase::kStirling) {
      // Mode x = 1, f(1) = -1, f''(1) = -1.
      r.log_exact = std::lgamma(n + 1.0) - (n + 1.0) * std::log(n);
      r.log_laplace = -n + 0.5 * (std::log(2.0 * kPi) - std::log(n));
    } else {
      r.log_exact = 0.5 * (std::log(2.0 * kPi) - std::log(n));
      r.log_laplace = r.log_exact;
    }
    r.relative_error = std::expm1(r.log_laplace - r.log_exact);
    rows.push_back(r);
  }
  return rows;
}

double loglog_slope(std::span<const LaplaceDemoRow> rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double m = 0;
  for (const auto& r : rows) {
    if (r.relative_error == 0.0) continue;
    const double x = std::log(r.n), y = std::log(std::abs(r.relative_error));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    m += 1;
  }
  if (m < 2) throw std::invalid_argument("slope needs at least two nonzero errors");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// Enumeration

Enumeration dense_enumeration(const LogJointFn& log_joint, std::vector<std::vector<double>> theta_axes,
                              std::vector<std::vector<double>> x_axes, bool keep_table) {
  const std::size_t kt = theta_axes.size(), kx = x_axes.size();
  std::vector<std::vector<double>*> axes;
  for (auto& a : theta_axes) axes.push_back(&a);
  for (auto& a : x_axes) axes.push_back(&a);
  double cells = 1.0;
  double volume = 1.0;
  for (auto* a : axes) {
    if (a->size() < 2) throw std::invalid_argument("every enumeration axis needs at least two points");
    for (std::size_t k = 1; k < a->size(); ++k) {
      if (!((*a)[k] > (*a)[k - 1])) throw std::invalid_argument("enumeration axes must be increasing");
    }
    cells *= static_cast<double>(a->size());
    volume *= (a->back() - a->front()) / static_cast<double>(a->size() - 1);
  }
  if (cells > static_cast<double>(kEnumerationCap)) {
    std::ostringstream msg;
    msg << "enumeration grid has " << cells << " cells, above the cap of " << kEnumerationCap;
    throw std::invalid_argument(msg.str());
  }
  const std::size_t total = static_cast<std::size_t>(cells);
  const std::size_t d = axes.size();
  std::vector<double> lp(total);
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> th(kt), x(kx);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t cell = 0; cell < total; ++cell) {
    for (std::size_t j = 0; j < kt; ++j) th[j] = theta_axes[j][idx[j]];
    for (std::size_t j = 0; j < kx; ++j) x[j] = x_axes[j][idx[kt + j]];
    const double v = log_joint(th, x);
    lp[cell] = std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
    top = std::max(top, lp[cell]);
    // Last axis varies fastest.
    for (std::size_t j = d; j-- > 0;) {
      if (++idx[j] < axes[j]->size()) break;
      idx[j] = 0;
    }
  }
  if (!std::isfinite(top)) throw NumericalError("log joint is not finite anywhere on the enumeration grid");
  double sum = 0.0;
  for (double& v : lp) {
    v = std::exp(v - top);
    sum += v;
  }
  Enumeration out;
  out.log_normalizer = top + std::log(sum) + std::log(volume);
  std::vector<std::vector<double>> marg(d);
  for (std::size_t j = 0; j < d; ++j) marg[j].assign(axes[j]->size(), 0.0);
  std::fill(idx.begin(), idx.end(), 0);
  for (std::size_t cell = 0; cell < total; ++cell) {
    const double p = lp[cell] / sum;
    lp[cell] = p;
    for (std::size_t j = 0; j < d; ++j) marg[j][idx[j]] += p;
    for (std::size_t j = d; j-- > 0;) {
      if (++idx[j] < axes[j]->size()) break;
      idx[j] = 0;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    MarginalDensity m(*axes[j], marg[j]);
    (j < kt ? out.theta_marginals : out.x_marginals).push_back(std::move(m));
  }
  if (keep_table) out.table = std::move(lp);
  out.theta_axes = std::move(theta_axes);
  out.x_axes = std::move(x_axes);
  return out;
}

LogJointFn enumeration_log_joint(const AssembledModel& model) {
  if (model.constraint_count() > 0) {
    throw std::invalid_argument("dense enumeration does not support constrained components");
  }
  const int n = model.n();
  const int de = model.dim() - n;
  const LatentLayout& layout = model.layout();
  // Predictor map: eta = B x_effects, dense (tiny models only).
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, de);
  const int ncomp = static_cast<int>(layout.index.size());
  const int nfixed = static_cast<int>(layout.covariates.size());
  for (const LatentBlock& lb : layout.blocks) {
    if (lb.kind == ComponentKind::kIntercept) b.col(lb.offset - n).setOnes();
  }
  for (int f = 0; f < nfixed; ++f) {
    const int blk = static_cast<int>(layout.blocks.size()) - ncomp - nfixed + f;
    const int off = layout.blocks[blk].offset - n;
    for (int i = 0; i < n; ++i) b(i, off) = layout.covariates[f][i];
  }
  for (int k = 0; k < ncomp; ++k) {
    const int off = layout.blocks[layout.component_block(k)].offset - n;
    for (int i = 0; i < n; ++i) {
      if (layout.index[k][i] >= 0) b(i, off + layout.index[k][i]) += 1.0;
    }
  }

  struct Cache {
    std::vector<double> theta;
    Eigen::MatrixXd q;
    double log_norm = 0.0;
    double log_prior = 0.0;
    LikelihoodFamily fam;
    bool valid = false;
  };
  auto cache = std::make_shared<Cache>();
  return [&model, b, de, cache](std::span<const double> theta, std::span<const double> x) {
    Cache& c = *cache;
    if (!c.valid || !std::equal(theta.begin(), theta.end(), c.theta.begin(), c.theta.end())) {
      c.theta.assign(theta.begin(), theta.end());
      c.q = Eigen::MatrixXd::Zero(de, de);
      const auto& comps = model.components();
      const auto& layout_ = model.layout();
      std::vector<std::vector<double>> slices(comps.size());
      for (int j = 0; j < model.theta_dim(); ++j) {
        const int comp = model.theta()[j].component;
        if (comp >= 0) slices[comp].push_back(theta[j]);
      }
      for (std::size_t blk = 0; blk < comps.size(); ++blk) {
        const int off = layout_.blocks[blk].offset - model.n();
        const Eigen::MatrixXd qb = comps[blk].precision(slices[blk]).to_dense();
        c.q.block(off, off, qb.rows(), qb.cols()) = qb;
      }
      Eigen::LLT<Eigen::MatrixXd> llt(c.q);
      if (llt.info() != Eigen::Success) throw NumericalError("effect prior is not positive definite");
      c.log_norm = Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum() - 0.5 * de * kLog2Pi;
      c.log_prior = model.log_prior_theta(theta);
      c.fam = model.likelihood(theta);
      c.valid = true;
    }
    const Eigen::Map<const Eigen::VectorXd> xe(x.data(), de);
    const Eigen::VectorXd eta = b * xe;
    double lp = c.log_prior + c.log_norm - 0.5 * xe.dot(c.q * xe);
    const auto& layout_ = model.layout();
    for (int i : model.observed()) lp += loglik(c.fam, layout_.y[i], eta[i], layout_.ntrials[i]);
    return lp;
  };
}

Enumeration dense_posterior_enumeration(const AssembledModel& model, std::vector<std::vector<double>> theta_axes,
                                        std::vector<std::vector<double>> x_axes, bool keep_table) {
  if (static_cast<int>(theta_axes.size()) != model.theta_dim()) {
    throw std::invalid_argument("need one theta axis per hyperparameter");
  }
  if (static_cast<int>(x_axes.size()) != model.dim() - model.n()) {
    throw std::invalid_argument("need one x axis per effect coordinate");
  }
  return dense_enumeration(enumeration_log_joint(model), std::move(theta_axes), std::move(x_axes), keep_table);
}

}  // namespace inlite
