#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "inlite/error.hpp"
#include "inlite/inference.hpp"
#include "inlite/parallel.hpp"

namespace inlite {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> add(std::span<const double> x, const Eigen::VectorXd& d) {
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += d[static_cast<Eigen::Index>(j)];
  return out;
}

double eval(const LogDensityFn& f, std::span<const double> x) {
  const double v = f(x);
  return std::isnan(v) ? kNegInf : v;
}

std::vector<double> eval_many(const LogDensityFn& f, const std::vector<std::vector<double>>& xs, int threads) {
  std::vector<double> out(xs.size());
  parallel_for(xs.size(), threads, [&](std::size_t i) { out[i] = eval(f, xs[i]); });
  return out;
}

// Central differences; falls back to a one-sided difference next to a
// failed evaluation.
Eigen::VectorXd fd_gradient(const LogDensityFn& f, const std::vector<double>& x, double fx, double h,
                            int threads) {
  const int k = static_cast<int>(x.size());
  std::vector<std::vector<double>> pts;
  for (int j = 0; j < k; ++j) {
    for (double s : {h, -h}) {
      pts.push_back(x);
      pts.back()[j] += s;
    }
  }
  const std::vector<double> v = eval_many(f, pts, threads);
  Eigen::VectorXd g(k);
  for (int j = 0; j < k; ++j) {
    const double fp = v[2 * j], fm = v[2 * j + 1];
    if (std::isfinite(fp) && std::isfinite(fm)) {
      g[j] = (fp - fm) / (2 * h);
    } else if (std::isfinite(fp)) {
      g[j] = (fp - fx) / h;
    } else if (std::isfinite(fm)) {
      g[j] = (fx - fm) / h;
    } else {
      throw NumericalError("log posterior of theta cannot be evaluated around the current point");
    }
  }
  return g;
}

Eigen::MatrixXd fd_neg_hessian(const LogDensityFn& f, const std::vector<double>& x, double fx, double h,
                               int threads) {
  const int k = static_cast<int>(x.size());
  std::vector<std::vector<double>> pts;
  for (int j = 0; j < k; ++j) {
    for (double s : {h, -h}) {
      pts.push_back(x);
      pts.back()[j] += s;
    }
  }
  for (int j = 0; j < k; ++j) {
    for (int l = j + 1; l < k; ++l) {
      for (double sj : {h, -h}) {
        for (double sl : {h, -h}) {
          pts.push_back(x);
          pts.back()[j] += sj;
          pts.back()[l] += sl;
        }
      }
    }
  }
  const std::vector<double> v = eval_many(f, pts, threads);
  for (double e : v) {
    if (!std::isfinite(e)) throw NumericalError("log posterior of theta fails next to the mode");
  }
  Eigen::MatrixXd hess(k, k);
  for (int j = 0; j < k; ++j) hess(j, j) = -(v[2 * j] - 2 * fx + v[2 * j + 1]) / (h * h);
  std::size_t at = 2 * static_cast<std::size_t>(k);
  for (int j = 0; j < k; ++j) {
    for (int l = j + 1; l < k; ++l) {
      const double pp = v[at], pm = v[at + 1], mp = v[at + 2], mm = v[at + 3];
      at += 4;
      hess(j, l) = hess(l, j) = -(pp - pm - mp + mm) / (4 * h * h);
    }
  }
  return hess;
}

double log_sum_exp(const std::vector<double>& v) {
  double top = kNegInf;
  for (double e : v) top = std::max(top, e);
  if (!std::isfinite(top)) return kNegInf;
  double s = 0.0;
  for (double e : v) s += std::exp(e - top);
  return top + std::log(s);
}

}  // namespace

// ---------------------------------------------------------------------------
// Mode

std::vector<double> ThetaMode::to_theta(const Eigen::VectorXd& z) const {
  return add(theta, jacobian * z);
}

Eigen::VectorXd ThetaMode::to_z(std::span<const double> t) const {
  Eigen::VectorXd d(dim());
  for (int j = 0; j < dim(); ++j) d[j] = t[j] - theta[j];
  return jacobian.partialPivLu().solve(d);
}

ThetaMode standardize(std::vector<double> theta, double log_post, Eigen::MatrixXd neg_hessian) {
  const int k = static_cast<int>(theta.size());
  if (neg_hessian.rows() != k || neg_hessian.cols() != k) {
    throw std::invalid_argument("Hessian does not match the dimension of theta");
  }
  ThetaMode m;
  m.theta = std::move(theta);
  m.log_post = log_post;
  m.hessian = 0.5 * (neg_hessian + neg_hessian.transpose());
  if (k == 0) {
    m.jacobian.resize(0, 0);
    m.eigenvalues.resize(0);
    return m;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.hessian);
  m.eigenvalues = es.eigenvalues();
  if (!(m.eigenvalues.minCoeff() > 0.0)) {
    std::ostringstream msg;
    msg << "negative Hessian of the theta posterior is not positive definite; eigenvalues:";
    for (Eigen::Index j = 0; j < m.eigenvalues.size(); ++j) msg << ' ' << m.eigenvalues[j];
    throw NumericalError(msg.str());
  }
  m.jacobian = es.eigenvectors() * m.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal();
  m.log_det_jacobian = -0.5 * m.eigenvalues.array().log().sum();
  return m;
}

ThetaMode find_mode(const LogDensityFn& f, std::vector<double> x, const ModeOptions& opt) {
  const int k = static_cast<int>(x.size());
  double fx = eval(f, x);
  if (!std::isfinite(fx)) throw NumericalError("log posterior of theta is not finite at the initial value");
  if (k == 0) {
    ThetaMode m = standardize({}, fx, Eigen::MatrixXd(0, 0));
    m.converged = true;
    return m;
  }
  Eigen::VectorXd g = fd_gradient(f, x, fx, opt.fd_step, opt.threads);
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(k, k);
  bool fresh = true;
  int it = 0;
  bool converged = false;
  for (; it < opt.max_iter; ++it) {
    if (g.cwiseAbs().maxCoeff() < opt.grad_tol) {
      converged = true;
      break;
    }
    Eigen::VectorXd d = hinv * g;
    if (!(g.dot(d) > 0.0)) {
      hinv.setIdentity();
      fresh = true;
      d = g;
    }
    // Theta lives on log/logit scales; keep single moves moderate.
    const double longest = d.cwiseAbs().maxCoeff();
    if (longest > 2.0) d *= 2.0 / longest;
    double t = 1.0;
    std::vector<double> xn = add(x, d);
    double fn = eval(f, xn);
    while (!(fn >= fx + 1e-4 * t * g.dot(d)) && t > 1e-12) {
      t *= 0.5;
      xn = add(x, t * d);
      fn = eval(f, xn);
    }
    if (!(fn >= fx + 1e-4 * t * g.dot(d))) {
      if (fresh) break;
      hinv.setIdentity();
      fresh = true;
      continue;
    }
    const Eigen::VectorXd gn = fd_gradient(f, xn, fn, opt.fd_step, opt.threads);
    const Eigen::VectorXd s = t * d;
    const Eigen::VectorXd yv = g - gn;  // gradient change of -f
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (fresh) hinv *= sy / yv.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(k, k);
      hinv = (id - rho * s * yv.transpose()) * hinv * (id - rho * yv * s.transpose()) + rho * s * s.transpose();
      fresh = false;
    }
    x = std::move(xn);
    fx = fn;
    g = gn;
  }
  Eigen::MatrixXd h = fd_neg_hessian(f, x, fx, opt.hessian_step, opt.threads);
  if (!converged) {
    // One Newton polish step with the finite-difference Hessian.
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() == Eigen::Success) {
      const std::vector<double> xn = add(x, llt.solve(g));
      const double fn = eval(f, xn);
      if (fn > fx) {
        const Eigen::VectorXd gn = fd_gradient(f, xn, fn, opt.fd_step, opt.threads);
        if (gn.cwiseAbs().maxCoeff() < g.cwiseAbs().maxCoeff()) {
          x = xn;
          fx = fn;
          g = gn;
          converged = g.cwiseAbs().maxCoeff() < opt.grad_tol;
          h = fd_neg_hessian(f, x, fx, opt.hessian_step, opt.threads);
        }
      }
    }
  }
  ThetaMode m = standardize(std::move(x), fx, std::move(h));
  m.grad_norm = g.cwiseAbs().maxCoeff();
  m.iterations = it;
  m.converged = converged;
  return m;
}

ThetaMode find_theta_mode(const AssembledModel& model, const ModeOptions& options, const NewtonOptions& newton) {
  return find_mode(theta_log_posterior_fn(model, newton), model.initial_theta(), options);
}

// ---------------------------------------------------------------------------
// Exploration

std::string int_strategy_name(IntStrategy s) {
  switch (s) {
    case IntStrategy::kEb:
      return "eb";
    case IntStrategy::kGrid:
      return "grid";
    case IntStrategy::kCcd:
      return "ccd";
    case IntStrategy::kAuto:
      return "auto";
  }
  return "";
}

std::optional<IntStrategy> int_strategy_from_name(const std::string& name) {
  for (IntStrategy s : {IntStrategy::kEb, IntStrategy::kGrid, IntStrategy::kCcd, IntStrategy::kAuto}) {
    if (int_strategy_name(s) == name) return s;
  }
  return std::nullopt;
}

IntStrategy resolve_strategy(IntStrategy requested, int k) {
  if (requested != IntStrategy::kAuto) return requested;
  return k <= 2 ? IntStrategy::kGrid : IntStrategy::kCcd;
}

std::vector<std::vector<int>> factorial_design(int k) {
  if (k < 1) throw std::invalid_argument("factorial design needs at least one factor");
  // Each factor is a nonzero vector over GF(2)^m; the run with index r sets
  // factor j to -1 when popcount(r & v_j) is odd. No sum of four or fewer
  // factor vectors may vanish, which gives resolution V.
  std::vector<unsigned> cols;
  int m = 0;
  if (k <= 4) {
    m = k;
    for (int j = 0; j < k; ++j) cols.push_back(1u << j);
  } else {
    for (m = 1; m < 31; ++m) {
      cols.clear();
      for (int j = 0; j < m; ++j) cols.push_back(1u << j);
      std::vector<bool> blocked(1u << m, false);
      // blocked[v]: v equals a sum of at most three chosen vectors.
      auto refresh = [&] {
        std::fill(blocked.begin(), blocked.end(), false);
        blocked[0] = true;
        const std::size_t c = cols.size();
        for (std::size_t a = 0; a < c; ++a) {
          blocked[cols[a]] = true;
          for (std::size_t b = a + 1; b < c; ++b) {
            blocked[cols[a] ^ cols[b]] = true;
            for (std::size_t d = b + 1; d < c; ++d) blocked[cols[a] ^ cols[b] ^ cols[d]] = true;
          }
        }
      };
      refresh();
      for (unsigned v = 1; v < (1u << m) && static_cast<int>(cols.size()) < k; ++v) {
        if (!blocked[v]) {
          cols.push_back(v);
          refresh();
        }
      }
      if (static_cast<int>(cols.size()) >= k) break;
    }
  }
  std::vector<std::vector<int>> runs;
  for (unsigned r = 0; r < (1u << m); ++r) {
    std::vector<int> row(k);
    for (int j = 0; j < k; ++j) row[j] = (__builtin_popcount(r & cols[j]) % 2) ? -1 : 1;
    runs.push_back(std::move(row));
  }
  return runs;
}

std::vector<Eigen::VectorXd> ccd_design(int k, double f) {
  if (k < 1) throw std::invalid_argument("CCD needs at least one dimension");
  if (!(f > 1.0)) throw std::invalid_argument("CCD radius factor f must exceed 1");
  const double r = f * std::sqrt(static_cast<double>(k));
  std::vector<Eigen::VectorXd> pts;
  for (int j = 0; j < k; ++j) {
    for (double s : {1.0, -1.0}) {
      Eigen::VectorXd z = Eigen::VectorXd::Zero(k);
      z[j] = s * r;
      pts.push_back(z);
    }
  }
  for (const auto& row : factorial_design(k)) {
    Eigen::VectorXd z(k);
    for (int j = 0; j < k; ++j) z[j] = f * row[j];
    pts.push_back(z);
  }
  return pts;
}

ThetaIntegration explore_eb(const ThetaMode& mode) {
  ThetaIntegration out;
  out.strategy = IntStrategy::kEb;
  out.mode = mode;
  ThetaPoint p;
  p.theta = mode.theta;
  p.z = Eigen::VectorXd::Zero(mode.dim());
  p.log_post = mode.log_post;
  p.weight = 1.0;
  out.points.push_back(std::move(p));
  return out;
}

namespace {

void finish_weights(ThetaIntegration& out) {
  double top = kNegInf;
  std::vector<double> lw(out.points.size());
  for (std::size_t p = 0; p < out.points.size(); ++p) {
    const ThetaPoint& pt = out.points[p];
    double v = pt.log_post;
    if (out.strategy == IntStrategy::kCcd) v += 0.5 * pt.z.squaredNorm();
    lw[p] = pt.design_weight > 0.0 && std::isfinite(v) ? v + std::log(pt.design_weight) : kNegInf;
    if (!std::isfinite(pt.log_post)) ++out.failed_points;
    top = std::max(top, lw[p]);
  }
  if (!std::isfinite(top)) throw NumericalError("every integration point failed to evaluate");
  double sum = 0.0;
  for (std::size_t p = 0; p < lw.size(); ++p) {
    out.points[p].weight = std::exp(lw[p] - top);
    sum += out.points[p].weight;
  }
  for (auto& pt : out.points) pt.weight /= sum;
  out.log_sum = log_sum_exp(lw);
}

}  // namespace

ThetaIntegration explore_grid(const ThetaMode& mode, const LogDensityFn& f, double dz, double diff_logdens,
                              std::size_t cap, int threads) {
  if (!(dz > 0.0)) throw std::invalid_argument("grid step dz must be positive");
  if (!(diff_logdens >= 0.0)) throw std::invalid_argument("diff_logdens must be non-negative");
  const int k = mode.dim();
  if (k == 0) return explore_eb(mode);
  const double lp0 = mode.log_post;
  const double threshold = diff_logdens + 1e-9 * (1.0 + diff_logdens);

  // Walk each axis outwards until the drop exceeds the threshold.
  std::vector<int> lo(k, 0), hi(k, 0);
  for (int j = 0; j < k; ++j) {
    for (int dir : {1, -1}) {
      int steps = 0;
      for (;;) {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(k);
        z[j] = dir * (steps + 1) * dz;
        const double lp = eval(f, mode.to_theta(z));
        if (!(lp0 - lp <= threshold)) break;
        ++steps;
        if (static_cast<std::size_t>(steps) > cap) {
          throw NumericalError("grid walk along a theta axis exceeded the point cap");
        }
      }
      (dir > 0 ? hi[j] : lo[j]) = steps;
    }
  }
  double total = 1.0;
  for (int j = 0; j < k; ++j) total *= static_cast<double>(hi[j] + lo[j] + 1);
  if (total > static_cast<double>(cap)) {
    std::ostringstream msg;
    msg << "grid exploration needs " << total << " points, above the cap of " << cap;
    throw NumericalError(msg.str());
  }

  ThetaIntegration out;
  out.strategy = IntStrategy::kGrid;
  out.mode = mode;
  out.dz = dz;
  std::vector<int> idx(k);
  for (int j = 0; j < k; ++j) idx[j] = -lo[j];
  for (;;) {
    ThetaPoint p;
    p.z.resize(k);
    for (int j = 0; j < k; ++j) p.z[j] = idx[j] * dz;
    p.theta = mode.to_theta(p.z);
    out.points.push_back(std::move(p));
    int j = 0;
    while (j < k && ++idx[j] > hi[j]) {
      idx[j] = -lo[j];
      ++j;
    }
    if (j == k) break;
  }
  parallel_for(out.points.size(), threads, [&](std::size_t p) {
    ThetaPoint& pt = out.points[p];
    pt.log_post = pt.z.squaredNorm() == 0.0 ? lp0 : eval(f, pt.theta);
  });
  finish_weights(out);
  out.log_sum += k * std::log(dz);
  return out;
}

ThetaIntegration explore_ccd(const ThetaMode& mode, const LogDensityFn& f, double f_ccd, int threads) {
  const int k = mode.dim();
  if (k < 3) throw std::invalid_argument("CCD integration needs at least three hyperparameters");
  const std::vector<Eigen::VectorXd> design = ccd_design(k, f_ccd);
  const double ns = static_cast<double>(design.size());
  ThetaIntegration out;
  out.strategy = IntStrategy::kCcd;
  out.mode = mode;
  out.f_ccd = f_ccd;
  ThetaPoint center;
  center.theta = mode.theta;
  center.z = Eigen::VectorXd::Zero(k);
  center.log_post = mode.log_post;
  center.design_weight = 1.0 - 1.0 / (f_ccd * f_ccd);
  out.points.push_back(center);
  for (const auto& z : design) {
    ThetaPoint p;
    p.z = z;
    p.theta = mode.to_theta(z);
    p.design_weight = 1.0 / (ns * f_ccd * f_ccd);
    out.points.push_back(std::move(p));
  }
  parallel_for(out.points.size() - 1, threads, [&](std::size_t p) {
    ThetaPoint& pt = out.points[p + 1];
    pt.log_post = eval(f, pt.theta);
  });
  finish_weights(out);
  out.log_sum += 0.5 * k * kLog2Pi;
  return out;
}

ThetaIntegration select_strategy(const ThetaMode& mode, const LogDensityFn& f, IntStrategy requested,
                                 const ExploreOptions& options) {
  switch (resolve_strategy(requested, mode.dim())) {
    case IntStrategy::kEb:
      return explore_eb(mode);
    case IntStrategy::kGrid:
      return explore_grid(mode, f, options.dz, options.diff_logdens, options.grid_cap, options.threads);
    case IntStrategy::kCcd:
      return explore_ccd(mode, f, options.f_ccd, options.threads);
    case IntStrategy::kAuto:
      break;
  }
  throw std::logic_error("unresolved integration strategy");
}

double log_marginal_likelihood(const ThetaIntegration& integration) {
  if (integration.strategy == IntStrategy::kEb) {
    if (integration.mode.dim() == 0) return integration.points.front().log_post;
    throw std::invalid_argument("the marginal likelihood is not defined for the eb strategy");
  }
  return integration.log_sum + integration.mode.log_det_jacobian;
}

// ---------------------------------------------------------------------------
// Theta marginals

namespace {

MarginalDensity two_piece(double mode, double left, double right) {
  std::vector<double> x = linspace(mode - 6.0 * left, mode + 6.0 * right, 201);
  std::vector<double> d(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double u = x[k] < mode ? (x[k] - mode) / left : (x[k] - mode) / right;
    d[k] = std::exp(-0.5 * u * u);
  }
  return MarginalDensity(std::move(x), std::move(d));
}

}  // namespace

MarginalDensity theta_marginal(const ThetaIntegration& in, int j) {
  const ThetaMode& m = in.mode;
  const int k = m.dim();
  if (j < 0 || j >= k) throw std::out_of_range("hyperparameter index out of range");
  const double sd_eb = std::sqrt(m.jacobian.row(j).squaredNorm());

  if (in.strategy == IntStrategy::kEb || in.points.size() < 2) {
    return gaussian_marginal(m.theta[j], sd_eb);
  }

  if (in.strategy == IntStrategy::kCcd) {
    // Axial points come in (+r, -r) pairs per axis, right after the center.
    const double r = in.f_ccd * std::sqrt(static_cast<double>(k));
    const double lp0 = in.points.front().log_post;
    auto scale = [&](const ThetaPoint& p) {
      const double drop = lp0 - p.log_post;
      if (!std::isfinite(drop)) return 0.2;
      if (drop <= 0.0) return 5.0;
      return std::clamp(r / std::sqrt(2.0 * drop), 0.2, 5.0);
    };
    double right = 0.0, left = 0.0;
    for (int l = 0; l < k; ++l) {
      const double sp = scale(in.points[1 + 2 * l]);
      const double sm = scale(in.points[2 + 2 * l]);
      const double a = m.jacobian(j, l);
      right += std::pow(a * (a >= 0 ? sp : sm), 2);
      left += std::pow(a * (a >= 0 ? sm : sp), 2);
    }
    return two_piece(m.theta[j], std::sqrt(left), std::sqrt(right));
  }

  if (k == 1) {
    std::vector<std::pair<double, double>> tl;
    for (const auto& p : in.points) tl.emplace_back(p.theta[0], p.log_post);
    std::sort(tl.begin(), tl.end());
    std::vector<double> x, lp;
    for (const auto& [t, l] : tl) {
      x.push_back(t);
      lp.push_back(l);
    }
    const MarginalDensity coarse = MarginalDensity::from_log(x, lp);
    return MarginalDensity::tabulate(coarse, x.front(), x.back(), 201);
  }

  // Kernel smoothing of the weighted points projected on theta_j, with the
  // locations shrunk towards the mean so the variance is preserved.
  double mean = 0.0, var = 0.0;
  for (const auto& p : in.points) mean += p.weight * p.theta[j];
  for (const auto& p : in.points) var += p.weight * std::pow(p.theta[j] - mean, 2);
  if (!(var > 0.0)) return gaussian_marginal(m.theta[j], sd_eb);
  double h = 0.5 * in.dz * sd_eb;
  h = std::min(h, std::sqrt(0.5 * var));
  const double shrink = std::sqrt(1.0 - h * h / var);
  std::vector<std::pair<double, double>> loc;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : in.points) {
    if (p.weight < 1e-14) continue;
    const double t = mean + shrink * (p.theta[j] - mean);
    loc.emplace_back(t, p.weight);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  return MarginalDensity::tabulate(
      [&](double v) {
        double s = 0.0;
        for (const auto& [t, w] : loc) s += w * normal_pdf(v, t, h);
        return s;
      },
      lo - 5.0 * h, hi + 5.0 * h, 201);
}

MarginalDensity to_user_density(const MarginalDensity& internal, Transform t) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < internal.size(); ++k) {
    const double th = internal.x()[k];
    const double jac = std::abs(user_scale_jacobian(t, th));
    const double u = to_user_scale(t, th);
    if (!std::isfinite(u) || !(jac > 0.0) || !std::isfinite(jac)) continue;
    pts.emplace_back(u, internal.density()[k] / jac);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> x, d;
  for (const auto& [u, v] : pts) {
    if (!x.empty() && !(u > x.back())) continue;
    x.push_back(u);
    d.push_back(std::isfinite(v) ? v : 0.0);
  }
  return MarginalDensity(std::move(x), std::move(d));
}

Summary user_scale_summary(const MarginalDensity& p, Transform t) {
  const auto& x = p.x();
  const auto& d = p.density();
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) {
    const double h = 0.5 * (x[k] - x[k - 1]);
    const double g0 = to_user_scale(t, x[k - 1]), g1 = to_user_scale(t, x[k]);
    m1 += h * (g0 * d[k - 1] + g1 * d[k]);
    m2 += h * (g0 * g0 * d[k - 1] + g1 * g1 * d[k]);
  }
  Summary s;
  s.mean = m1;
  s.sd = std::sqrt(std::max(m2 - m1 * m1, 0.0));
  double q[3] = {to_user_scale(t, p.quantile(0.025)), to_user_scale(t, p.quantile(0.5)),
                 to_user_scale(t, p.quantile(0.975))};
  std::sort(q, q + 3);
  s.q025 = q[0];
  s.q50 = q[1];
  s.q975 = q[2];
  return s;
}

}  // namespace inlite
