#include "inlite/components.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace inlite {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

// ---------------------------------------------------------------------------
// Priors

PriorSpec PriorSpec::gamma(double shape, double rate) {
  PriorSpec p{Family::kGamma, shape, rate};
  p.validate();
  return p;
}

PriorSpec PriorSpec::pc_prec(double u, double alpha) {
  PriorSpec p{Family::kPcPrec, u, alpha};
  p.validate();
  return p;
}

PriorSpec PriorSpec::gaussian(double mean, double precision) {
  PriorSpec p{Family::kGaussian, mean, precision};
  p.validate();
  return p;
}

void PriorSpec::validate() const {
  switch (family) {
    case Family::kGamma:
      require(first > 0.0 && second > 0.0, "gamma prior needs shape > 0 and rate > 0");
      break;
    case Family::kPcPrec:
      require(first > 0.0, "pc.prec prior needs u > 0");
      require(second > 0.0 && second < 1.0, "pc.prec prior needs 0 < alpha < 1");
      break;
    case Family::kGaussian:
      require(std::isfinite(first), "gaussian prior needs a finite mean");
      require(second > 0.0, "gaussian prior needs precision > 0");
      break;
  }
}

double PriorSpec::log_density(double theta) const {
  switch (family) {
    case Family::kGamma:
      return gamma_log_prior(theta, first, second);
    case Family::kPcPrec:
      return pc_prec_log_prior(theta, first, second);
    case Family::kGaussian:
      return gaussian_log_prior(theta, first, second);
  }
  return 0.0;
}

std::string PriorSpec::name() const {
  switch (family) {
    case Family::kGamma:
      return "gamma";
    case Family::kPcPrec:
      return "pc.prec";
    case Family::kGaussian:
      return "gaussian";
  }
  return "";
}

std::optional<PriorSpec::Family> prior_family_from_name(const std::string& name) {
  if (name == "gamma" || name == "loggamma") return PriorSpec::Family::kGamma;
  if (name == "pc.prec") return PriorSpec::Family::kPcPrec;
  if (name == "gaussian" || name == "normal") return PriorSpec::Family::kGaussian;
  return std::nullopt;
}

double gamma_log_prior(double theta, double a, double b) {
  const double tau = std::exp(theta);
  return a * std::log(b) - std::lgamma(a) + (a - 1.0) * theta - b * tau + theta;
}

double pc_prec_rate(double u, double alpha) {
  require(u > 0.0 && alpha > 0.0 && alpha < 1.0, "pc.prec needs u > 0 and 0 < alpha < 1");
  return -std::log(alpha) / u;
}

double pc_prec_log_prior(double theta, double u, double alpha) {
  const double lambda = pc_prec_rate(u, alpha);
  return std::log(lambda / 2.0) - lambda * std::exp(-theta / 2.0) - theta / 2.0;
}

double gaussian_log_prior(double theta, double mean, double precision) {
  const double d = theta - mean;
  return 0.5 * (std::log(precision) - kLog2Pi) - 0.5 * precision * d * d;
}

double gamma_distance_density(double d) {
  require(d > 0.0, "distance must be positive");
  return std::exp(-1.0 / (d * d)) / (d * d * d);
}

double iid_kld(double tau, double tau_base, int m) {
  require(tau > 0.0 && tau_base > 0.0 && m > 0, "iid_kld needs positive arguments");
  const double r = tau_base / tau;
  return 0.5 * m * (r - 1.0 - std::log(r));
}

double pc_distance(double tau) {
  require(tau > 0.0, "precision must be positive");
  return 1.0 / std::sqrt(tau);
}

// ---------------------------------------------------------------------------
// Transforms

double to_user_scale(Transform t, double theta) {
  if (t == Transform::kLogPrecision) return std::exp(theta);
  return 2.0 / (1.0 + std::exp(-theta)) - 1.0;
}

double to_internal_scale(Transform t, double value) {
  if (t == Transform::kLogPrecision) {
    require(value > 0.0, "precision must be positive");
    return std::log(value);
  }
  require(value > -1.0 && value < 1.0, "correlation must lie in (-1, 1)");
  return std::log((1.0 + value) / (1.0 - value));
}

double user_scale_jacobian(Transform t, double theta) {
  if (t == Transform::kLogPrecision) return std::exp(theta);
  const double phi = to_user_scale(t, theta);
  return 0.5 * (1.0 - phi * phi);
}

// ---------------------------------------------------------------------------
// Precision builders

SparsePrecision iid_precision(int m, double tau) {
  require(m >= 1, "iid component needs m >= 1");
  require(tau > 0.0 && std::isfinite(tau), "iid precision must be positive");
  return SparsePrecision::identity(m, tau);
}

SparsePrecision ar1_precision(int m, double phi, double tau_marg) {
  require(m >= 2, "ar1 component needs m >= 2");
  require(std::abs(phi) < 1.0, "ar1 correlation must satisfy |phi| < 1");
  require(tau_marg > 0.0 && std::isfinite(tau_marg), "ar1 marginal precision must be positive");
  const double s = tau_marg / (1.0 - phi * phi);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(2 * m - 1));
  for (int i = 0; i < m; ++i) {
    const bool end = (i == 0 || i == m - 1);
    t.push_back({i, i, s * (end ? 1.0 : 1.0 + phi * phi)});
    if (i + 1 < m) t.push_back({i, i + 1, -s * phi});
  }
  return SparsePrecision::from_triplets(m, t);
}

namespace {

std::vector<Triplet> rw2_triplets(int m, double scale) {
  // Each row of D is (1, -2, 1) at columns (r, r+1, r+2); accumulate D^T D.
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(6 * (m - 2)));
  const double d[3] = {1.0, -2.0, 1.0};
  for (int r = 0; r + 2 < m; ++r) {
    for (int a = 0; a < 3; ++a) {
      for (int b = a; b < 3; ++b) t.push_back({r + a, r + b, scale * d[a] * d[b]});
    }
  }
  return t;
}

}  // namespace

double rw2_scaling_constant(int m) {
  require(m >= 3, "rw2 component needs m >= 3");
  // R + N N^T is nonsingular when N is an orthonormal basis of the null
  // space, and its inverse is R^+ + N N^T.
  Eigen::MatrixXd r = SparsePrecision::from_triplets(m, rw2_triplets(m, 1.0)).to_dense();
  Eigen::MatrixXd n(m, 2);
  for (int i = 0; i < m; ++i) {
    n(i, 0) = 1.0;
    n(i, 1) = i - 0.5 * (m - 1);
  }
  n.col(0).normalize();
  n.col(1).normalize();
  const Eigen::MatrixXd nnt = n * n.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(r + nnt);
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m, m));
  double log_sum = 0.0;
  for (int i = 0; i < m; ++i) log_sum += std::log(inv(i, i) - nnt(i, i));
  return std::exp(log_sum / m);
}

SparsePrecision rw2_structure(int m, bool scale_model) {
  require(m >= 3, "rw2 component needs m >= 3");
  const double scale = scale_model ? rw2_scaling_constant(m) : 1.0;
  return SparsePrecision::from_triplets(m, rw2_triplets(m, scale));
}

// ---------------------------------------------------------------------------
// ModelComponent

std::string component_kind_name(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::kIid:
      return "iid";
    case ComponentKind::kAr1:
      return "ar1";
    case ComponentKind::kRw2:
      return "rw2";
    case ComponentKind::kLinear:
      return "linear";
    case ComponentKind::kIntercept:
      return "intercept";
  }
  return "";
}

std::optional<ComponentKind> component_kind_from_name(const std::string& name) {
  if (name == "iid") return ComponentKind::kIid;
  if (name == "ar1") return ComponentKind::kAr1;
  if (name == "rw2") return ComponentKind::kRw2;
  return std::nullopt;
}

ModelComponent ModelComponent::random_effect(ComponentKind kind, std::string name, int size,
                                             bool scale_model, bool constrained) {
  ModelComponent c;
  c.kind_ = kind;
  c.name_ = std::move(name);
  c.size_ = size;
  c.constrained_ = constrained;
  switch (kind) {
    case ComponentKind::kIid:
      require(size >= 1, "iid component '" + c.name_ + "' needs size >= 1");
      break;
    case ComponentKind::kAr1:
      require(size >= 2, "ar1 component '" + c.name_ + "' needs size >= 2");
      break;
    case ComponentKind::kRw2:
      require(size >= 3, "rw2 component '" + c.name_ + "' needs size >= 3");
      c.scale_model_ = scale_model;
      if (scale_model) c.rw2_scale_ = rw2_scaling_constant(size);
      break;
    default:
      throw std::invalid_argument("random_effect: not a random-effect kind");
  }
  c.hyper_.push_back({"prec", Transform::kLogPrecision, PriorSpec::gamma(1.0, 5e-5), 4.0});
  if (kind == ComponentKind::kAr1) {
    c.hyper_.push_back({"rho", Transform::kLogitCorrelation, PriorSpec::gaussian(0.0, 0.15), 2.0});
  }
  return c;
}

ModelComponent ModelComponent::fixed_effect(ComponentKind kind, std::string name,
                                            double prior_precision) {
  require(kind == ComponentKind::kLinear || kind == ComponentKind::kIntercept,
          "fixed_effect: not a fixed-effect kind");
  require(prior_precision > 0.0 && std::isfinite(prior_precision),
          "fixed effect '" + name + "' needs a positive prior precision");
  ModelComponent c;
  c.kind_ = kind;
  c.name_ = std::move(name);
  c.size_ = 1;
  c.prior_precision_ = prior_precision;
  return c;
}

void ModelComponent::set_prior(int j, const PriorSpec& prior) {
  require(j >= 0 && j < hyper_count(), "set_prior: hyperparameter index out of range");
  prior.validate();
  hyper_[static_cast<std::size_t>(j)].prior = prior;
}

SparsePrecision ModelComponent::precision(std::span<const double> theta) const {
  require(static_cast<int>(theta.size()) == hyper_count(),
          "component '" + name_ + "' expects " + std::to_string(hyper_count()) +
              " hyperparameters");
  switch (kind_) {
    case ComponentKind::kIid:
      return iid_precision(size_, std::exp(theta[0]));
    case ComponentKind::kAr1:
      return ar1_precision(size_, to_user_scale(Transform::kLogitCorrelation, theta[1]),
                           std::exp(theta[0]));
    case ComponentKind::kRw2: {
      auto t = rw2_triplets(size_, std::exp(theta[0]) * rw2_scale_);
      for (int i = 0; i < size_; ++i) t.push_back({i, i, kIntrinsicDiagonal});
      return SparsePrecision::from_triplets(size_, t);
    }
    case ComponentKind::kLinear:
    case ComponentKind::kIntercept:
      return SparsePrecision::identity(1, prior_precision_);
  }
  return {};
}

}  // namespace inlite
