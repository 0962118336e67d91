#pragma once

// Formula language, data binding, latent-field layout and joint precision.
//
// The latent field is x = (eta, intercept, fixed effects, f_1, ..., f_K).
// Every effect enters eta through one mapping matrix B (n x effect dim):
// intercept column 1, covariate column z, component blocks A_k with a
// single unit entry per row (or none when the index is NA). With a tiny
// predictor noise tau_eps the joint precision is
//
//   [ tau_eps I          -tau_eps B                      ]
//   [ -tau_eps B^T        blockdiag(Q_k) + tau_eps B^T B ]

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inlite/components.hpp"
#include "inlite/likelihood.hpp"
#include "inlite/sparse.hpp"

namespace inlite {

// ---------------------------------------------------------------------------
// Formula

struct ComponentSpec {
  std::string covariate;  // index column; also the component name
  ComponentKind kind = ComponentKind::kIid;
  std::optional<int> size;
  bool scale_model = false;
  std::optional<bool> constr;
  std::optional<PriorSpec> prec_prior;
  std::optional<PriorSpec> rho_prior;

  bool constrained() const { return constr.value_or(kind == ComponentKind::kRw2); }
  friend bool operator==(const ComponentSpec&, const ComponentSpec&) = default;
};

struct ModelSpec {
  std::string response;
  bool intercept = true;
  std::vector<std::string> fixed;
  std::vector<ComponentSpec> components;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Throws ParseError with the 1-based line and column of the offending token.
ModelSpec parse_formula(std::string_view text);
// Canonical text that parses back to an equal spec.
std::string to_string(const ModelSpec& spec);

// ---------------------------------------------------------------------------
// Data

class DataTable {
 public:
  DataTable() = default;

  // Columns must all have the same length. NA is stored as NaN.
  void add_column(const std::string& name, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  bool has(const std::string& name) const { return columns_.count(name) > 0; }
  const std::vector<double>& column(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }

 private:
  std::size_t rows_ = 0;
  std::vector<std::string> order_;
  std::map<std::string, std::vector<double>> columns_;
};

// Comma-separated, header row, "NA" (or an empty field) for missing.
DataTable read_csv(std::istream& in);
DataTable read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const DataTable& table);

bool is_na(double v);

// ---------------------------------------------------------------------------
// Layout

struct LatentBlock {
  std::string name;
  ComponentKind kind;
  int offset;
  int size;
};

struct LatentLayout {
  int n = 0;
  int dim = 0;
  // Effect blocks in layout order (intercept, fixed effects, components);
  // the predictor occupies [0, n).
  std::vector<LatentBlock> blocks;
  // Per component (in ModelSpec order): 0-based index per row, -1 when NA.
  std::vector<std::vector<int>> index;
  // Per fixed effect (in ModelSpec order): covariate values, NA read as 0.
  std::vector<std::vector<double>> covariates;
  std::vector<double> y;  // NaN for prediction-only rows
  std::vector<int> ntrials;

  int component_block(int k) const;
  int observed_count() const;
};

struct BindOptions {
  std::string ntrials_column;  // binomial only; empty means 1 trial
};

LatentLayout bind_data(const ModelSpec& spec, const DataTable& table,
                       const BindOptions& options = {});

// ---------------------------------------------------------------------------
// Assembled model

struct ModelOptions {
  FamilyKind family = FamilyKind::kGaussian;
  // Fixes the gaussian observation precision; otherwise it is a
  // hyperparameter (log precision, last in theta).
  std::optional<double> gaussian_precision;
  std::optional<PriorSpec> gaussian_prec_prior;
  double tau_eps = 1e5;
  double intercept_precision = 0.001;
  double fixed_precision = 0.001;
};

struct ThetaEntry {
  std::string name;       // e.g. "prec.idx", "rho.t", "prec.obs"
  HyperParameter hyper;
  int component = -1;     // index into components(), -1 for the likelihood
};

class AssembledModel {
 public:
  static AssembledModel build(const ModelSpec& spec, LatentLayout layout,
                              const ModelOptions& options = {});

  const ModelSpec& spec() const { return spec_; }
  const LatentLayout& layout() const { return layout_; }
  const ModelOptions& options() const { return options_; }
  int n() const { return layout_.n; }
  int dim() const { return layout_.dim; }
  double tau_eps() const { return options_.tau_eps; }

  // Effects in layout order; components()[b] belongs to layout().blocks[b].
  const std::vector<ModelComponent>& components() const { return components_; }
  const std::vector<ThetaEntry>& theta() const { return theta_; }
  int theta_dim() const { return static_cast<int>(theta_.size()); }
  std::vector<double> initial_theta() const;
  double log_prior_theta(std::span<const double> theta) const;
  LikelihoodFamily likelihood(std::span<const double> theta) const;

  // Rows of observed responses (their predictors carry likelihood terms).
  const std::vector<int>& observed() const { return observed_; }

  // Sum-to-zero constraints, one row per constrained component.
  const Eigen::MatrixXd& constraints() const { return constraints_; }
  int constraint_count() const { return static_cast<int>(constraints_.rows()); }

  SparsePrecision joint_precision(std::span<const double> theta) const;
  const std::shared_ptr<const SymbolicCholesky>& symbolic() const { return symbolic_; }

  // Human-readable name of latent coordinate j ("eta[3]", "idx[2]", "w").
  std::string latent_name(int j) const;

  // Log-likelihood contributions summed over observed rows at predictor eta.
  double log_likelihood(std::span<const double> theta, const DenseVector& x) const;

 private:
  ModelSpec spec_;
  LatentLayout layout_;
  ModelOptions options_;
  std::vector<ModelComponent> components_;
  std::vector<ThetaEntry> theta_;
  std::vector<int> theta_offset_;  // per component
  std::vector<int> observed_;
  Eigen::MatrixXd constraints_;

  SparsePrecision base_;                 // tau_eps terms and fixed-effect priors
  std::vector<std::vector<int>> slots_;  // component value -> joint value position
  std::vector<std::uint64_t> component_hash_;
  std::shared_ptr<const SymbolicCholesky> symbolic_;
};

SparsePrecision assemble_joint_precision(const AssembledModel& model, std::span<const double> theta);

// log pi(x | theta); when the model has constraints this is the density of
// x given Cx = 0 on that subspace, in orthonormal coordinates (x is assumed
// to satisfy the constraints).
double latent_log_prior(const AssembledModel& model, std::span<const double> theta,
                        const DenseVector& x);

// Convenience: parse, read and bind in one go.
AssembledModel make_model(std::string_view formula, const DataTable& table,
                          const ModelOptions& options = {}, const BindOptions& bind = {});

}  // namespace inlite
