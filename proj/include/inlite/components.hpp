#pragma once

// Latent model components and hyperparameter priors.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inlite/sparse.hpp"

namespace inlite {

// ---------------------------------------------------------------------------
// Priors on the internal (unbounded) scale of a hyperparameter.

struct PriorSpec {
  enum class Family { kGamma, kPcPrec, kGaussian };

  Family family = Family::kGamma;
  // gamma: (shape a, rate b); pc.prec: (u, alpha); gaussian: (mean, precision).
  double first = 1.0;
  double second = 5e-5;

  static PriorSpec gamma(double shape, double rate);
  static PriorSpec pc_prec(double u, double alpha);
  static PriorSpec gaussian(double mean, double precision);

  // Checks the parameter ranges; throws std::invalid_argument.
  void validate() const;
  double log_density(double theta) const;
  // Name used in the formula language: "gamma", "pc.prec", "gaussian".
  std::string name() const;

  friend bool operator==(const PriorSpec&, const PriorSpec&) = default;
};

std::optional<PriorSpec::Family> prior_family_from_name(const std::string& name);

// log pi(theta) for tau = exp(theta), tau ~ Gamma(a, b); includes the
// Jacobian of the log transform.
double gamma_log_prior(double theta, double a, double b);

// PC prior for a precision: sigma = exp(-theta/2) ~ Exponential(lambda)
// with lambda = -log(alpha)/u, so that P(sigma > u) = alpha.
double pc_prec_log_prior(double theta, double u, double alpha);
double pc_prec_rate(double u, double alpha);

double gaussian_log_prior(double theta, double mean, double precision);

// Density of the distance d = tau^{-1/2} implied by a Gamma(1,1) prior on
// tau, up to a constant: exp(-1/d^2)/d^3.
double gamma_distance_density(double d);

// Kullback-Leibler divergence of N(0, tau^{-1} I_m) from the base model
// N(0, tau_base^{-1} I_m).
double iid_kld(double tau, double tau_base, int m);
// Distance to the base model used by the PC prior: d = tau^{-1/2}.
double pc_distance(double tau);

// ---------------------------------------------------------------------------
// Hyperparameters

enum class Transform { kLogPrecision, kLogitCorrelation };

// Map from the internal scale to the user scale and back.
double to_user_scale(Transform t, double theta);
double to_internal_scale(Transform t, double value);
// d(user)/d(theta).
double user_scale_jacobian(Transform t, double theta);

struct HyperParameter {
  std::string name;
  Transform transform = Transform::kLogPrecision;
  PriorSpec prior;
  double initial = 4.0;

  friend bool operator==(const HyperParameter&, const HyperParameter&) = default;
};

// ---------------------------------------------------------------------------
// Component precisions

SparsePrecision iid_precision(int m, double tau);

// AR(1) in the marginal-precision parametrization; the inverse has entries
// phi^{|s-t|} / tau_marg.
SparsePrecision ar1_precision(int m, double phi, double tau_marg);

// Second-order random walk structure matrix D^T D. With scale_model the
// matrix is rescaled so that the geometric mean of the marginal variances
// of its generalized inverse is one.
SparsePrecision rw2_structure(int m, bool scale_model);

// Geometric mean of diag(R^+) for an rw2 structure of size m.
double rw2_scaling_constant(int m);

enum class ComponentKind { kIid, kAr1, kRw2, kLinear, kIntercept };

std::string component_kind_name(ComponentKind kind);
std::optional<ComponentKind> component_kind_from_name(const std::string& name);

// Added to the diagonal of intrinsic components (rw2) so the joint prior is
// proper; it does not scale with the precision hyperparameter.
inline constexpr double kIntrinsicDiagonal = 1e-4;

class ModelComponent {
 public:
  // Random-effect components: iid, ar1, rw2.
  static ModelComponent random_effect(ComponentKind kind, std::string name, int size,
                                      bool scale_model = false, bool constrained = false);
  // Fixed effects with a Gaussian prior of fixed precision.
  static ModelComponent fixed_effect(ComponentKind kind, std::string name, double prior_precision);

  ComponentKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  int size() const { return size_; }
  bool scale_model() const { return scale_model_; }
  bool constrained() const { return constrained_; }
  double prior_precision() const { return prior_precision_; }

  std::span<const HyperParameter> hyper() const { return hyper_; }
  int hyper_count() const { return static_cast<int>(hyper_.size()); }
  void set_prior(int j, const PriorSpec& prior);

  // Precision of the component at the given internal hyperparameters. The
  // sparsity pattern does not depend on theta.
  SparsePrecision precision(std::span<const double> theta) const;

 private:
  ComponentKind kind_ = ComponentKind::kIid;
  std::string name_;
  int size_ = 0;
  bool scale_model_ = false;
  bool constrained_ = false;
  double prior_precision_ = 0.0;
  double rw2_scale_ = 1.0;
  std::vector<HyperParameter> hyper_;
};

}  // namespace inlite
