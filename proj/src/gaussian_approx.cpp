#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "inlite/error.hpp"
#include "inlite/inference.hpp"

namespace inlite {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double objective(const LatentProblem& p, const DenseVector& x) {
  double s = -0.5 * p.q.quadratic_form(x);
  for (std::size_t k = 0; k < p.observed.size(); ++k) {
    s += loglik(p.family, p.y[k], x[p.observed[k]], p.ntrials[k]);
  }
  return s;
}

double safe_objective(const LatentProblem& p, const DenseVector& x) {
  try {
    const double v = objective(p, x);
    return std::isfinite(v) ? v : kNegInf;
  } catch (const NumericalError&) {
    return kNegInf;
  }
}

double max_abs(const DenseVector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

LatentProblem make_latent_problem(SparsePrecision q, LikelihoodFamily family, std::vector<int> observed,
                                  std::vector<double> y, std::vector<int> ntrials,
                                  Eigen::MatrixXd constraints) {
  if (observed.size() != y.size()) throw std::invalid_argument("observed indices and responses differ in length");
  if (ntrials.empty()) ntrials.assign(y.size(), 1);
  if (ntrials.size() != y.size()) throw std::invalid_argument("ntrials and responses differ in length");
  if (constraints.size() == 0) constraints.resize(0, q.dim());
  if (constraints.cols() != q.dim()) throw std::invalid_argument("constraint matrix has the wrong width");
  bool missing = false;
  for (int i = 0; i < q.dim(); ++i) missing = missing || q.find(i, i) < 0;
  if (missing) q = add_diag(q, DenseVector::Zero(q.dim()));
  for (std::size_t k = 0; k < observed.size(); ++k) {
    if (observed[k] < 0 || observed[k] >= q.dim()) throw std::out_of_range("observed index out of range");
    check_observation(family, y[k], ntrials[k]);
  }
  LatentProblem p;
  p.symbolic = SymbolicCholesky::analyze(q);
  p.q = std::move(q);
  p.family = family;
  p.observed = std::move(observed);
  p.y = std::move(y);
  p.ntrials = std::move(ntrials);
  p.constraints = std::move(constraints);
  return p;
}

LatentProblem latent_problem(const AssembledModel& model, std::span<const double> theta) {
  LatentProblem p;
  p.q = model.joint_precision(theta);
  p.symbolic = model.symbolic();
  p.family = model.likelihood(theta);
  p.observed = model.observed();
  for (int i : p.observed) {
    p.y.push_back(model.layout().y[i]);
    p.ntrials.push_back(model.layout().ntrials[i]);
  }
  p.constraints = model.constraints();
  if (p.constraints.size() == 0) p.constraints.resize(0, model.dim());
  return p;
}

DenseVector GaussianApprox::marginal_variances() const {
  DenseVector v = factor.marginal_variances(VarianceMethod::kSelectedInverse);
  if (w.cols() > 0) {
    const Eigen::MatrixXd z = s.llt().solve(w.transpose());  // S^{-1} W^T
    v -= (w.array() * z.transpose().array()).rowwise().sum().matrix();
  }
  return v;
}

DenseVector GaussianApprox::covariance_column(int i) const {
  if (i < 0 || i >= dim()) throw std::out_of_range("latent index out of range");
  DenseVector e = DenseVector::Zero(dim());
  e[i] = 1.0;
  DenseVector col = factor.solve(e);
  if (w.cols() > 0) col -= w * s.llt().solve(DenseVector(w.row(i).transpose()));
  return col;
}

double GaussianApprox::log_det_constrained() const {
  double v = factor.log_det();
  if (s.rows() > 0) v += 2.0 * Eigen::MatrixXd(s.llt().matrixL()).diagonal().array().log().sum();
  return v;
}

GaussianApprox constrained_approximation(const LatentProblem& p, const LinearConstraints& cons,
                                         const NewtonOptions& opt, const DenseVector* start) {
  const int n = p.dim();
  const Eigen::Index nc = cons.a.rows();
  if (nc > 0 && (cons.a.cols() != n || cons.e.size() != nc)) {
    throw std::invalid_argument("constraint system has the wrong shape");
  }
  std::vector<std::ptrdiff_t> dpos(p.observed.size());
  for (std::size_t k = 0; k < p.observed.size(); ++k) {
    dpos[k] = p.q.find(p.observed[k], p.observed[k]);
    if (dpos[k] < 0) throw std::invalid_argument("precision lacks a diagonal entry for an observed coordinate");
  }
  double max_diag = 0.0;
  for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(p.q(i, i)));

  Eigen::LLT<Eigen::MatrixXd> aat;
  if (nc > 0) {
    aat.compute(cons.a * cons.a.transpose());
    if (aat.info() != Eigen::Success) throw NumericalError("linear constraints are rank deficient");
  }
  auto project = [&](DenseVector& v) {
    if (nc > 0) v -= cons.a.transpose() * aat.solve(cons.a * v);
  };

  DenseVector x = start ? *start : DenseVector::Zero(n);
  if (x.size() != n) throw std::invalid_argument("start vector has the wrong length");
  if (nc > 0) x -= cons.a.transpose() * aat.solve(cons.a * x - cons.e);
  double fx = safe_objective(p, x);
  if (!std::isfinite(fx)) throw NumericalError("log-likelihood is not finite at the Newton start");

  const auto qv = p.q.values();
  DenseVector g = DenseVector::Zero(n);
  DenseVector c = DenseVector::Zero(n);
  double last_step = std::numeric_limits<double>::infinity();

  for (int it = 0;; ++it) {
    g.setZero();
    c.setZero();
    double gmax = 0.0;
    std::vector<double> pv(qv.begin(), qv.end());
    for (std::size_t k = 0; k < p.observed.size(); ++k) {
      const int i = p.observed[k];
      const LikDerivatives d = derivatives(p.family, p.y[k], x[i], p.ntrials[k]);
      g[i] += d.g;
      c[i] += -d.h;
      pv[dpos[k]] += -d.h;
      gmax = std::max(gmax, std::abs(d.g));
    }
    DenseVector grad = g - p.q.multiply(x);
    project(grad);
    const double gnorm = max_abs(grad);
    const double scale = 1.0 + gmax + 1e-5 * max_diag * max_abs(x);

    GaussianApprox ga;
    ga.precision = p.q.with_values(std::move(pv));
    try {
      ga.factor = CholeskyFactor::factorize(ga.precision, p.symbolic);
    } catch (const NotPositiveDefinite& e) {
      throw NumericalError(std::string("Q + diag(c) is not positive definite: ") + e.what());
    }
    if (nc > 0) {
      ga.w = ga.factor.solve(Eigen::MatrixXd(cons.a.transpose()));
      ga.s = cons.a * ga.w;
    } else {
      ga.w.resize(n, 0);
      ga.s.resize(0, 0);
    }

    const bool small_grad = gnorm < opt.grad_tol * scale;
    const bool small_step = it > 0 && last_step < opt.step_tol * (1.0 + max_abs(x));
    if (small_grad || small_step) {
      ga.mode = x;
      ga.c = c;
      ga.constraints = cons;
      ga.objective = fx;
      ga.grad_norm = gnorm;
      ga.iterations = it;
      ga.converged = true;
      return ga;
    }
    if (it >= opt.max_iter) {
      std::ostringstream msg;
      msg << "Newton iteration did not converge in " << opt.max_iter << " iterations (gradient "
          << gnorm << ")";
      throw ConvergenceError(msg.str());
    }

    DenseVector b = c.cwiseProduct(x) + g;
    DenseVector xn = ga.factor.solve(b);
    if (nc > 0) xn -= ga.w * ga.s.llt().solve(cons.a * xn - cons.e);
    const DenseVector step = xn - x;

    double t = 1.0;
    double fn = safe_objective(p, xn);
    const double slack = 1e-9 * (1.0 + std::abs(fx));
    int halvings = 0;
    while (!(fn >= fx - slack) && halvings < opt.max_halvings) {
      t *= 0.5;
      xn = x + t * step;
      fn = safe_objective(p, xn);
      ++halvings;
    }
    if (!(fn >= fx - slack)) {
      std::ostringstream msg;
      msg << "Newton step-halving failed to improve the objective (gradient " << gnorm << ")";
      throw ConvergenceError(msg.str());
    }
    last_step = t * max_abs(step);
    x = std::move(xn);
    fx = fn;
  }
}

GaussianApprox gaussian_approximation(const LatentProblem& problem, const NewtonOptions& options,
                                      const DenseVector* start) {
  LinearConstraints cons{problem.constraints, DenseVector::Zero(problem.constraints.rows())};
  return constrained_approximation(problem, cons, options, start);
}

GaussianApprox gaussian_approximation(const AssembledModel& model, std::span<const double> theta,
                                      const NewtonOptions& options) {
  return gaussian_approximation(latent_problem(model, theta), options);
}

double laplace_log_likelihood(const LatentProblem& p, const GaussianApprox& ga) {
  CholeskyFactor fq;
  try {
    fq = CholeskyFactor::factorize(p.q, p.symbolic);
  } catch (const NotPositiveDefinite& e) {
    throw NumericalError(std::string("prior precision is not positive definite: ") + e.what());
  }
  double v = ga.objective + 0.5 * (fq.log_det() - ga.factor.log_det());
  if (p.constraints.rows() > 0) {
    const Eigen::MatrixXd& cm = p.constraints;
    const Eigen::MatrixXd sq = cm * fq.solve(Eigen::MatrixXd(cm.transpose()));
    const Eigen::MatrixXd sp = cm * ga.factor.solve(Eigen::MatrixXd(cm.transpose()));
    v += 0.5 * (std::log(sq.determinant()) - std::log(sp.determinant()));
  }
  return v;
}

double log_posterior_theta(const AssembledModel& model, std::span<const double> theta,
                           const NewtonOptions& options) {
  const LatentProblem p = latent_problem(model, theta);
  const GaussianApprox ga = gaussian_approximation(p, options);
  return model.log_prior_theta(theta) + laplace_log_likelihood(p, ga);
}

LogDensityFn theta_log_posterior_fn(const AssembledModel& model, const NewtonOptions& options) {
  return [&model, options](std::span<const double> theta) {
    try {
      const double v = log_posterior_theta(model, theta, options);
      return std::isfinite(v) ? v : kNegInf;
    } catch (const NumericalError&) {
      return kNegInf;
    }
  };
}

}  // namespace inlite
