#include <chrono>
#include <cmath>
#include <memory>
#include <mutex>

#include "inlite/error.hpp"
#include "inlite/inference.hpp"
#include "inlite/parallel.hpp"

namespace inlite {

std::string latent_strategy_name(LatentStrategy s) {
  switch (s) {
    case LatentStrategy::kGaussian:
      return "gaussian";
    case LatentStrategy::kSimplifiedLaplace:
      return "simplified-laplace";
    case LatentStrategy::kLaplace:
      return "laplace";
  }
  return "";
}

std::optional<LatentStrategy> latent_strategy_from_name(const std::string& name) {
  for (LatentStrategy s : {LatentStrategy::kGaussian, LatentStrategy::kSimplifiedLaplace, LatentStrategy::kLaplace}) {
    if (latent_strategy_name(s) == name) return s;
  }
  if (name == "simplified.laplace") return LatentStrategy::kSimplifiedLaplace;
  return std::nullopt;
}

const LatentMarginal& InferenceResult::latent_by_name(const std::string& name) const {
  for (const auto& m : latent) {
    if (m.name == name) return m;
  }
  throw std::out_of_range("no latent marginal named '" + name + "'");
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct PointState {
  LatentProblem problem;
  GaussianApprox ga;
  DenseVector variances;
};

}  // namespace

InferenceResult run_inference(const AssembledModel& model, const InferenceOptions& opt) {
  if (opt.strategy != LatentStrategy::kGaussian && model.dim() > opt.laplace_max_dim) {
    throw std::invalid_argument("latent dimension " + std::to_string(model.dim()) +
                                " exceeds the cap for Laplace-type marginals (" +
                                std::to_string(opt.laplace_max_dim) + "); use the gaussian strategy");
  }
  InferenceResult res;
  auto& diag = res.diagnostics;
  const auto t_start = Clock::now();

  ModeOptions mode_opt = opt.mode;
  mode_opt.threads = opt.threads;
  ExploreOptions explore = opt.explore;
  explore.threads = opt.threads;
  const LogDensityFn lp = theta_log_posterior_fn(model, opt.newton);

  auto t0 = Clock::now();
  const ThetaMode mode = find_mode(lp, model.initial_theta(), mode_opt);
  diag.mode_converged = mode.converged;
  diag.seconds["mode"] = since(t0);

  t0 = Clock::now();
  res.integration = mode.dim() == 0 ? explore_eb(mode) : select_strategy(mode, lp, opt.int_strategy, explore);
  diag.failed_points = res.integration.failed_points;
  if (res.integration.strategy != IntStrategy::kEb || mode.dim() == 0) {
    res.log_evidence = log_marginal_likelihood(res.integration);
  }
  diag.seconds["explore"] = since(t0);

  // Points that carry weight, renormalized.
  std::vector<ThetaPoint> kept;
  double top = 0.0;
  for (const auto& p : res.integration.points) top = std::max(top, p.weight);
  double total = 0.0;
  for (const auto& p : res.integration.points) {
    if (p.weight >= opt.min_weight * top && std::isfinite(p.log_post)) {
      kept.push_back(p);
      total += p.weight;
    }
  }
  for (auto& p : kept) p.weight /= total;
  diag.mixed_points = static_cast<int>(kept.size());

  t0 = Clock::now();
  std::vector<std::unique_ptr<PointState>> states(kept.size());
  parallel_for(kept.size(), opt.threads, [&](std::size_t p) {
    auto st = std::make_unique<PointState>();
    st->problem = latent_problem(model, kept[p].theta);
    st->ga = gaussian_approximation(st->problem, opt.newton);
    st->variances = st->ga.marginal_variances();
    states[p] = std::move(st);
  });
  diag.seconds["gaussian"] = since(t0);

  std::vector<int> indices;
  if (opt.latent_indices) {
    indices = *opt.latent_indices;
    for (int i : indices) {
      if (i < 0 || i >= model.dim()) throw std::out_of_range("requested latent index out of range");
    }
  } else {
    for (int i = opt.include_predictor ? 0 : model.n(); i < model.dim(); ++i) indices.push_back(i);
  }

  t0 = Clock::now();
  res.latent.resize(indices.size());
  std::mutex diag_mutex;
  parallel_for(indices.size(), opt.threads, [&](std::size_t q) {
    const int i = indices[q];
    std::vector<MarginalDensity> parts;
    int capped = 0;
    double resid = 0.0;
    for (const auto& st : states) {
      switch (opt.strategy) {
        case LatentStrategy::kGaussian:
          parts.push_back(gaussian_marginal(st->ga.mode[i], std::sqrt(st->variances[i])));
          break;
        case LatentStrategy::kSimplifiedLaplace: {
          const SimplifiedLaplace sl = simplified_laplace(st->problem, st->ga, i, opt.newton);
          capped += sl.capped ? 1 : 0;
          resid = std::max(resid, sl.residual);
          parts.push_back(sl.density.tabulate());
          break;
        }
        case LatentStrategy::kLaplace:
          parts.push_back(latent_marginal_laplace(st->problem, st->ga, i, opt.newton));
          break;
      }
    }
    LatentMarginal& out = res.latent[q];
    out.index = i;
    out.name = model.latent_name(i);
    out.density = mix_over_theta(kept, parts);
    out.summary = out.density.summary();
    std::lock_guard<std::mutex> lock(diag_mutex);
    diag.skew_capped += capped;
    diag.max_fit_residual = std::max(diag.max_fit_residual, resid);
  });
  diag.seconds["latent"] = since(t0);

  t0 = Clock::now();
  for (int j = 0; j < model.theta_dim(); ++j) {
    HyperMarginal h;
    h.name = model.theta()[j].name;
    h.transform = model.theta()[j].hyper.transform;
    h.internal = theta_marginal(res.integration, j);
    h.user = to_user_density(h.internal, h.transform);
    h.summary = user_scale_summary(h.internal, h.transform);
    res.hyper.push_back(std::move(h));
  }
  diag.seconds["hyper"] = since(t0);
  diag.seconds["total"] = since(t_start);
  return res;
}

}  // namespace inlite
