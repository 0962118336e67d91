#pragma once

// Nested Laplace approximations for an assembled model.
//
//  * gaussian_approximation: Newton iteration for the mode of pi(x | y, theta)
//    and the precision P = Q + diag(c) there.
//  * log_posterior_theta: Laplace approximation of log pi(theta | y) up to a
//    constant shared by every theta.
//  * find_theta_mode / explore_*: mode, standardization and integration
//    points in theta.
//  * latent_marginal_*: pi(x_i | theta, y) by the gaussian, simplified
//    Laplace (skew-normal) or full Laplace approximation.
//  * run_inference: all of the above, mixed over theta.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "inlite/density.hpp"
#include "inlite/likelihood.hpp"
#include "inlite/model.hpp"
#include "inlite/sparse.hpp"

namespace inlite {

// ---------------------------------------------------------------------------
// Gaussian approximation

// Latent field x ~ N(0, Q^{-1}) restricted to Cx = 0, with one observation
// attached to each coordinate listed in `observed`.
struct LatentProblem {
  SparsePrecision q;
  std::shared_ptr<const SymbolicCholesky> symbolic;
  LikelihoodFamily family;
  std::vector<int> observed;
  std::vector<double> y;
  std::vector<int> ntrials;
  Eigen::MatrixXd constraints;  // nc x dim, may have zero rows

  int dim() const { return q.dim(); }
};

// Fills in the symbolic analysis (and any missing diagonal entries).
LatentProblem make_latent_problem(SparsePrecision q, LikelihoodFamily family, std::vector<int> observed,
                                  std::vector<double> y, std::vector<int> ntrials = {},
                                  Eigen::MatrixXd constraints = {});
LatentProblem latent_problem(const AssembledModel& model, std::span<const double> theta);

struct NewtonOptions {
  int max_iter = 100;
  double grad_tol = 1e-8;
  double step_tol = 1e-10;
  int max_halvings = 40;
};

// A x = e.
struct LinearConstraints {
  Eigen::MatrixXd a;
  DenseVector e;
};

struct GaussianApprox {
  DenseVector mode;
  DenseVector c;             // -h at the mode; 0 where nothing is observed
  SparsePrecision precision;  // P = Q + diag(c), same pattern as Q
  CholeskyFactor factor;
  LinearConstraints constraints;
  Eigen::MatrixXd w;  // P^{-1} A^T
  Eigen::MatrixXd s;  // A P^{-1} A^T
  double objective = 0.0;  // -x'Qx/2 + sum loglik at the mode
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;

  int dim() const { return static_cast<int>(mode.size()); }
  // Diagonal of the constrained covariance.
  DenseVector marginal_variances() const;
  // Column i of the constrained covariance.
  DenseVector covariance_column(int i) const;
  // log|P| + log|A P^{-1} A^T| (the second term only with constraints).
  double log_det_constrained() const;
};

// Throws ConvergenceError after max_iter iterations and NumericalError when
// P is not positive definite.
GaussianApprox gaussian_approximation(const LatentProblem& problem, const NewtonOptions& options = {},
                                      const DenseVector* start = nullptr);
// Same, under the given constraints instead of the problem's own.
GaussianApprox constrained_approximation(const LatentProblem& problem, const LinearConstraints& cons,
                                         const NewtonOptions& options = {},
                                         const DenseVector* start = nullptr);
GaussianApprox gaussian_approximation(const AssembledModel& model, std::span<const double> theta,
                                      const NewtonOptions& options = {});

// ---------------------------------------------------------------------------
// Hyperparameter posterior

// log pi(y | theta) by the Laplace approximation at the mode of ga.
double laplace_log_likelihood(const LatentProblem& problem, const GaussianApprox& ga);

double log_posterior_theta(const AssembledModel& model, std::span<const double> theta,
                           const NewtonOptions& options = {});

using LogDensityFn = std::function<double(std::span<const double>)>;

// Wraps log_posterior_theta; failed evaluations return -infinity.
LogDensityFn theta_log_posterior_fn(const AssembledModel& model, const NewtonOptions& options = {});

struct ModeOptions {
  double fd_step = 1e-4;
  double hessian_step = 1e-3;
  double grad_tol = 1e-5;
  int max_iter = 200;
  int threads = 1;
};

struct ThetaMode {
  std::vector<double> theta;
  double log_post = 0.0;
  Eigen::MatrixXd hessian;  // negative Hessian of log_post at the mode
  Eigen::VectorXd eigenvalues;  // of the negative Hessian
  Eigen::MatrixXd jacobian;  // theta = theta* + jacobian z
  double log_det_jacobian = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;

  int dim() const { return static_cast<int>(theta.size()); }
  std::vector<double> to_theta(const Eigen::VectorXd& z) const;
  Eigen::VectorXd to_z(std::span<const double> theta) const;
};

// Builds the standardization from a mode and a negative Hessian. Throws
// NumericalError (listing the eigenvalues) when it is not positive definite.
ThetaMode standardize(std::vector<double> theta, double log_post, Eigen::MatrixXd neg_hessian);

// Quasi-Newton maximization with central-difference gradients, then a
// symmetrized finite-difference Hessian at the result.
ThetaMode find_mode(const LogDensityFn& f, std::vector<double> theta0, const ModeOptions& options = {});
ThetaMode find_theta_mode(const AssembledModel& model, const ModeOptions& options = {},
                          const NewtonOptions& newton = {});

// ---------------------------------------------------------------------------
// Integration over theta

enum class IntStrategy { kEb, kGrid, kCcd, kAuto };
std::string int_strategy_name(IntStrategy s);
std::optional<IntStrategy> int_strategy_from_name(const std::string& name);
// auto: grid for k <= 2, ccd otherwise.
IntStrategy resolve_strategy(IntStrategy requested, int k);

struct ThetaPoint {
  std::vector<double> theta;
  Eigen::VectorXd z;
  double log_post = 0.0;
  double design_weight = 1.0;
  double weight = 0.0;
};

struct ThetaIntegration {
  IntStrategy strategy = IntStrategy::kEb;
  ThetaMode mode;
  std::vector<ThetaPoint> points;
  double dz = 0.0;
  double f_ccd = 0.0;
  // log of sum_d design_weight * exp(log_post + ...); see log_marginal_likelihood.
  double log_sum = 0.0;
  int failed_points = 0;
};

// Unit-vector directions of a two-level design on {-1, 1}^k: full factorial
// for k <= 4, resolution V fractional factorial above.
std::vector<std::vector<int>> factorial_design(int k);
// CCD points in z: axial points then factorial points, radius f sqrt(k).
std::vector<Eigen::VectorXd> ccd_design(int k, double f);

struct ExploreOptions {
  double dz = 0.75;
  double diff_logdens = 6.0;
  double f_ccd = 1.1;
  std::size_t grid_cap = 100000;
  int threads = 1;
};

ThetaIntegration explore_eb(const ThetaMode& mode);
ThetaIntegration explore_grid(const ThetaMode& mode, const LogDensityFn& f, double dz, double diff_logdens,
                              std::size_t cap = 100000, int threads = 1);
ThetaIntegration explore_ccd(const ThetaMode& mode, const LogDensityFn& f, double f_ccd, int threads = 1);
ThetaIntegration select_strategy(const ThetaMode& mode, const LogDensityFn& f, IntStrategy requested,
                                 const ExploreOptions& options = {});

// log integral of exp(log_post) over theta. Throws std::invalid_argument for
// eb integrations.
double log_marginal_likelihood(const ThetaIntegration& integration);

// Posterior marginal of theta_j (internal scale).
MarginalDensity theta_marginal(const ThetaIntegration& integration, int j);
// Same density pushed through the user-scale transform.
MarginalDensity to_user_density(const MarginalDensity& internal, Transform t);
Summary user_scale_summary(const MarginalDensity& internal, Transform t);

// ---------------------------------------------------------------------------
// Latent marginals

MarginalDensity latent_marginal_gaussian(const GaussianApprox& ga, int i);

// Unnormalized log pi(x_i = v | theta, y) by the Laplace approximation of
// the other coordinates.
class LaplaceProfile {
 public:
  LaplaceProfile(const LatentProblem& problem, const GaussianApprox& ga, int i,
                 const NewtonOptions& options = {});
  double operator()(double v) const;
  double mean() const { return mean_; }
  double sd() const { return sd_; }

 private:
  const LatentProblem* problem_;
  const GaussianApprox* ga_;
  int i_;
  NewtonOptions options_;
  DenseVector column_;
  double mean_ = 0.0;
  double sd_ = 0.0;
};

double latent_marginal_full_laplace(const AssembledModel& model, std::span<const double> theta, int i,
                                    double x_value);

MarginalDensity latent_marginal_laplace(const LatentProblem& problem, const GaussianApprox& ga, int i,
                                        const NewtonOptions& options = {}, int abscissae = 25,
                                        double half_width = 6.0, int points = 201);

struct SimplifiedLaplace {
  double b = 0.0;
  double c = 0.0;
  double residual = 0.0;  // rms of the cubic fit
  bool capped = false;    // skewness hit the cap
  SkewNormal density;     // on the scale of x_i
};

// Skew-normal matched to exp(-s^2/2 + b s + c s^3 / 6) on |s| <= 6.
SkewNormal skew_normal_from_cubic(double b, double c, bool* capped = nullptr);

SimplifiedLaplace simplified_laplace(const LatentProblem& problem, const GaussianApprox& ga, int i,
                                     const NewtonOptions& options = {});
MarginalDensity latent_marginal_simplified_laplace(const LatentProblem& problem, const GaussianApprox& ga,
                                                   int i, const NewtonOptions& options = {});

// Weighted mixture of per-point densities using the point weights.
MarginalDensity mix_over_theta(std::span<const ThetaPoint> points, std::span<const MarginalDensity> per_point);

// ---------------------------------------------------------------------------
// Pipeline

enum class LatentStrategy { kGaussian, kSimplifiedLaplace, kLaplace };
std::string latent_strategy_name(LatentStrategy s);
std::optional<LatentStrategy> latent_strategy_from_name(const std::string& name);

struct InferenceOptions {
  LatentStrategy strategy = LatentStrategy::kSimplifiedLaplace;
  IntStrategy int_strategy = IntStrategy::kAuto;
  ExploreOptions explore;
  ModeOptions mode;
  NewtonOptions newton;
  int threads = 1;
  // Laplace-type strategies refit a mode per evaluation; refuse beyond this
  // latent dimension.
  int laplace_max_dim = 2000;
  // Latent coordinates to summarize; default is every effect coordinate
  // (the predictor is skipped unless include_predictor is set).
  std::optional<std::vector<int>> latent_indices;
  bool include_predictor = false;
  // Points whose normalized weight falls below this are not mixed.
  double min_weight = 1e-12;
};

struct LatentMarginal {
  int index = 0;
  std::string name;
  MarginalDensity density;
  Summary summary;
};

struct HyperMarginal {
  std::string name;
  Transform transform = Transform::kLogPrecision;
  MarginalDensity internal;
  MarginalDensity user;
  Summary summary;  // user scale
};

struct InferenceDiagnostics {
  bool mode_converged = true;
  bool newton_converged = true;
  int failed_points = 0;
  int mixed_points = 0;
  int skew_capped = 0;
  double max_fit_residual = 0.0;
  std::map<std::string, double> seconds;
};

struct InferenceResult {
  ThetaIntegration integration;
  std::vector<LatentMarginal> latent;
  std::vector<HyperMarginal> hyper;
  std::optional<double> log_evidence;
  InferenceDiagnostics diagnostics;

  const LatentMarginal& latent_by_name(const std::string& name) const;
};

InferenceResult run_inference(const AssembledModel& model, const InferenceOptions& options = {});

}  // namespace inlite
