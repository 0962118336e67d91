#include <algorithm>
#include <cmath>

#include "inlite/error.hpp"
#include "inlite/model.hpp"

namespace inlite {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

}  // namespace

// ---------------------------------------------------------------------------
// Layout

int LatentLayout::component_block(int k) const {
  const int fixed_blocks = static_cast<int>(blocks.size()) - static_cast<int>(index.size());
  return fixed_blocks + k;
}

int LatentLayout::observed_count() const {
  return static_cast<int>(std::count_if(y.begin(), y.end(), [](double v) { return !is_na(v); }));
}

LatentLayout bind_data(const ModelSpec& spec, const DataTable& table, const BindOptions& options) {
  if (table.rows() == 0) throw DataError("data table is empty");
  LatentLayout layout;
  layout.n = static_cast<int>(table.rows());
  layout.y = table.column(spec.response);

  layout.ntrials.assign(static_cast<std::size_t>(layout.n), 1);
  if (!options.ntrials_column.empty()) {
    const auto& nt = table.column(options.ntrials_column);
    for (int i = 0; i < layout.n; ++i) {
      if (is_na(nt[i])) {
        if (!is_na(layout.y[i])) {
          throw DataError("row " + std::to_string(i + 1) + ": ntrials is NA for an observed response");
        }
        continue;
      }
      if (nt[i] < 1 || nt[i] != std::floor(nt[i])) {
        throw DataError("row " + std::to_string(i + 1) + ": ntrials must be a positive integer");
      }
      layout.ntrials[i] = static_cast<int>(nt[i]);
    }
  }

  int offset = layout.n;
  if (spec.intercept) {
    layout.blocks.push_back({"intercept", ComponentKind::kIntercept, offset, 1});
    ++offset;
  }
  for (const auto& name : spec.fixed) {
    auto z = table.column(name);
    for (double& v : z) {
      if (is_na(v)) v = 0.0;
    }
    layout.covariates.push_back(std::move(z));
    layout.blocks.push_back({name, ComponentKind::kLinear, offset, 1});
    ++offset;
  }
  for (const auto& c : spec.components) {
    const auto& col = table.column(c.covariate);
    std::vector<int> idx(static_cast<std::size_t>(layout.n), -1);
    int max_index = 0;
    for (int i = 0; i < layout.n; ++i) {
      const double v = col[i];
      if (is_na(v)) continue;
      if (v != std::floor(v) || v < 1.0) {
        throw DataError("column '" + c.covariate + "', row " + std::to_string(i + 1) +
                        ": index must be an integer >= 1, got " + std::to_string(v));
      }
      if (v > 1e9) throw DataError("column '" + c.covariate + "': index too large");
      idx[i] = static_cast<int>(v) - 1;
      max_index = std::max(max_index, static_cast<int>(v));
    }
    int size = max_index;
    if (c.size) {
      if (*c.size < max_index) {
        throw DataError("column '" + c.covariate + "': index " + std::to_string(max_index) +
                        " exceeds n=" + std::to_string(*c.size));
      }
      size = *c.size;
    }
    if (size == 0) throw DataError("column '" + c.covariate + "' has no non-missing index");
    layout.index.push_back(std::move(idx));
    layout.blocks.push_back({c.covariate, c.kind, offset, size});
    offset += size;
  }
  layout.dim = offset;
  return layout;
}

// ---------------------------------------------------------------------------
// Assembled model

AssembledModel AssembledModel::build(const ModelSpec& spec, LatentLayout layout,
                                     const ModelOptions& options) {
  if (!(options.tau_eps > 0.0)) throw std::invalid_argument("tau_eps must be positive");
  AssembledModel m;
  m.spec_ = spec;
  m.layout_ = std::move(layout);
  m.options_ = options;
  const LatentLayout& lay = m.layout_;
  const int n = lay.n;
  const int nfixed = static_cast<int>(lay.blocks.size() - lay.index.size());

  // Effects, in layout order.
  for (int b = 0; b < static_cast<int>(lay.blocks.size()); ++b) {
    const LatentBlock& blk = lay.blocks[b];
    if (b < nfixed) {
      const double prec = blk.kind == ComponentKind::kIntercept ? options.intercept_precision
                                                               : options.fixed_precision;
      m.components_.push_back(ModelComponent::fixed_effect(blk.kind, blk.name, prec));
      continue;
    }
    const ComponentSpec& cs = spec.components[static_cast<std::size_t>(b - nfixed)];
    ModelComponent comp;
    try {
      comp = ModelComponent::random_effect(cs.kind, cs.covariate, blk.size, cs.scale_model,
                                           cs.constrained());
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what());
    }
    if (cs.prec_prior) comp.set_prior(0, *cs.prec_prior);
    if (cs.rho_prior) comp.set_prior(1, *cs.rho_prior);
    m.components_.push_back(std::move(comp));
  }

  // Hyperparameters: components first, then the likelihood.
  for (int b = 0; b < static_cast<int>(m.components_.size()); ++b) {
    m.theta_offset_.push_back(static_cast<int>(m.theta_.size()));
    for (const auto& h : m.components_[b].hyper()) {
      m.theta_.push_back({h.name + "." + m.components_[b].name(), h, b});
    }
  }
  if (options.family == FamilyKind::kGaussian && !options.gaussian_precision) {
    HyperParameter h{"prec", Transform::kLogPrecision,
                     options.gaussian_prec_prior.value_or(PriorSpec::gamma(1.0, 5e-5)), 4.0};
    m.theta_.push_back({"prec.obs", h, -1});
  }
  if (options.gaussian_precision) LikelihoodFamily::gaussian(*options.gaussian_precision);

  for (int i = 0; i < n; ++i) {
    if (is_na(lay.y[i])) continue;
    check_observation(m.likelihood(m.initial_theta()), lay.y[i], lay.ntrials[i]);
    m.observed_.push_back(i);
  }
  if (m.observed_.empty()) throw DataError("no observed responses");

  int nc = 0;
  for (const auto& c : m.components_) nc += c.constrained() ? 1 : 0;
  m.constraints_ = Eigen::MatrixXd::Zero(nc, lay.dim);
  for (int b = 0, r = 0; b < static_cast<int>(m.components_.size()); ++b) {
    if (!m.components_[b].constrained()) continue;
    const LatentBlock& blk = lay.blocks[b];
    m.constraints_.row(r++).segment(blk.offset, blk.size).setOnes();
  }

  // Constant part of the joint precision plus the component patterns.
  const double te = options.tau_eps;
  std::vector<Triplet> t;
  std::vector<std::pair<int, double>> row;
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, te});
    row.clear();
    for (int b = 0; b < static_cast<int>(lay.blocks.size()); ++b) {
      const LatentBlock& blk = lay.blocks[b];
      if (b < nfixed) {
        const double z = blk.kind == ComponentKind::kIntercept
                             ? 1.0
                             : lay.covariates[static_cast<std::size_t>(b - (spec.intercept ? 1 : 0))][i];
        row.push_back({blk.offset, z});
      } else {
        const int j = lay.index[static_cast<std::size_t>(b - nfixed)][i];
        if (j >= 0) row.push_back({blk.offset + j, 1.0});
      }
    }
    for (std::size_t a = 0; a < row.size(); ++a) {
      t.push_back({i, row[a].first, -te * row[a].second});
      for (std::size_t c = a; c < row.size(); ++c) {
        t.push_back({row[a].first, row[c].first, te * row[a].second * row[c].second});
      }
    }
  }
  const std::vector<double> init = m.initial_theta();
  std::vector<SparsePrecision> ref;
  for (int b = 0; b < static_cast<int>(m.components_.size()); ++b) {
    const ModelComponent& comp = m.components_[b];
    const int off = lay.blocks[b].offset;
    if (b < nfixed) {
      t.push_back({off, off, comp.prior_precision()});
      ref.emplace_back();
      continue;
    }
    std::span<const double> th(init.data() + m.theta_offset_[b], comp.hyper_count());
    ref.push_back(comp.precision(th));
    for (const Triplet& e : ref.back().to_triplets()) t.push_back({off + e.row, off + e.col, 0.0});
  }
  m.base_ = SparsePrecision::from_triplets(lay.dim, t);

  m.slots_.resize(m.components_.size());
  m.component_hash_.resize(m.components_.size(), 0);
  for (int b = nfixed; b < static_cast<int>(m.components_.size()); ++b) {
    const int off = lay.blocks[b].offset;
    m.component_hash_[b] = ref[b].pattern_hash();
    for (const Triplet& e : ref[b].to_triplets()) {
      m.slots_[b].push_back(static_cast<int>(m.base_.find(off + e.row, off + e.col)));
    }
  }
  m.symbolic_ = SymbolicCholesky::analyze(m.base_);
  return m;
}

std::vector<double> AssembledModel::initial_theta() const {
  std::vector<double> out;
  for (const auto& e : theta_) out.push_back(e.hyper.initial);
  return out;
}

double AssembledModel::log_prior_theta(std::span<const double> theta) const {
  if (static_cast<int>(theta.size()) != theta_dim()) {
    throw std::invalid_argument("theta has length " + std::to_string(theta.size()) +
                                ", expected " + std::to_string(theta_dim()));
  }
  double lp = 0.0;
  for (int j = 0; j < theta_dim(); ++j) lp += theta_[j].hyper.prior.log_density(theta[j]);
  return lp;
}

LikelihoodFamily AssembledModel::likelihood(std::span<const double> theta) const {
  switch (options_.family) {
    case FamilyKind::kPoisson:
      return LikelihoodFamily::poisson();
    case FamilyKind::kBinomial:
      return LikelihoodFamily::binomial();
    case FamilyKind::kGaussian:
      if (options_.gaussian_precision) return LikelihoodFamily::gaussian(*options_.gaussian_precision);
      return {FamilyKind::kGaussian, std::exp(theta.back())};
  }
  return {};
}

double AssembledModel::log_likelihood(std::span<const double> theta, const DenseVector& x) const {
  const LikelihoodFamily fam = likelihood(theta);
  double s = 0.0;
  for (int i : observed_) s += loglik(fam, layout_.y[i], x[i], layout_.ntrials[i]);
  return s;
}

SparsePrecision AssembledModel::joint_precision(std::span<const double> theta) const {
  if (static_cast<int>(theta.size()) != theta_dim()) {
    throw std::invalid_argument("theta has length " + std::to_string(theta.size()) +
                                ", expected " + std::to_string(theta_dim()));
  }
  const auto bv = base_.values();
  std::vector<double> values(bv.begin(), bv.end());
  for (int b = 0; b < static_cast<int>(components_.size()); ++b) {
    if (slots_[b].empty()) continue;
    const ModelComponent& comp = components_[b];
    std::span<const double> th(theta.data() + theta_offset_[b], comp.hyper_count());
    SparsePrecision q;
    try {
      q = comp.precision(th);
    } catch (const std::invalid_argument& e) {
      throw NumericalError(std::string("component '") + comp.name() + "': " + e.what());
    }
    if (q.pattern_hash() != component_hash_[b]) {
      throw NumericalError("component '" + comp.name() + "' changed its sparsity pattern");
    }
    const auto qv = q.values();
    for (std::size_t p = 0; p < qv.size(); ++p) values[slots_[b][p]] += qv[p];
  }
  return base_.with_values(std::move(values));
}

std::string AssembledModel::latent_name(int j) const {
  if (j < 0 || j >= dim()) throw std::out_of_range("latent index out of range");
  if (j < n()) return "eta[" + std::to_string(j + 1) + "]";
  for (const auto& blk : layout_.blocks) {
    if (j >= blk.offset && j < blk.offset + blk.size) {
      if (blk.kind == ComponentKind::kIntercept || blk.kind == ComponentKind::kLinear) return blk.name;
      return blk.name + "[" + std::to_string(j - blk.offset + 1) + "]";
    }
  }
  return "";
}

SparsePrecision assemble_joint_precision(const AssembledModel& model, std::span<const double> theta) {
  return model.joint_precision(theta);
}

double latent_log_prior(const AssembledModel& model, std::span<const double> theta,
                        const DenseVector& x) {
  if (x.size() != model.dim()) {
    throw std::invalid_argument("latent vector has length " + std::to_string(x.size()) +
                                ", expected " + std::to_string(model.dim()));
  }
  const SparsePrecision q = model.joint_precision(theta);
  const CholeskyFactor f = CholeskyFactor::factorize(q, model.symbolic());
  double lp = -0.5 * q.quadratic_form(x) + 0.5 * f.log_det() - 0.5 * model.dim() * kLog2Pi;
  if (model.constraint_count() > 0) {
    const Eigen::MatrixXd& c = model.constraints();
    const Eigen::MatrixXd w = f.solve(Eigen::MatrixXd(c.transpose()));
    const Eigen::MatrixXd s = c * w;
    // Density on the constraint subspace in orthonormal coordinates.
    lp += 0.5 * model.constraint_count() * kLog2Pi + 0.5 * std::log(s.determinant()) -
          0.5 * std::log((c * c.transpose()).determinant());
  }
  return lp;
}

AssembledModel make_model(std::string_view formula, const DataTable& table,
                          const ModelOptions& options, const BindOptions& bind) {
  const ModelSpec spec = parse_formula(formula);
  return AssembledModel::build(spec, bind_data(spec, table, bind), options);
}

}  // namespace inlite
