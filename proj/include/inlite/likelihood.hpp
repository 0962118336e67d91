#pragma once

// Observation models with a fixed link: identity (gaussian), log (poisson),
// logit (binomial). Derivatives are with respect to the linear predictor.

#include <optional>
#include <string>

namespace inlite {

enum class FamilyKind { kGaussian, kPoisson, kBinomial };

std::string family_name(FamilyKind kind);
std::optional<FamilyKind> family_from_name(const std::string& name);

struct LikelihoodFamily {
  FamilyKind kind = FamilyKind::kGaussian;
  double tau_obs = 1.0;  // gaussian only

  static LikelihoodFamily gaussian(double tau_obs);
  static LikelihoodFamily poisson() { return {FamilyKind::kPoisson, 1.0}; }
  static LikelihoodFamily binomial() { return {FamilyKind::kBinomial, 1.0}; }
};

struct LikDerivatives {
  double value = 0.0;
  double g = 0.0;
  double h = 0.0;
  double t = 0.0;
};

// Beyond this |eta| the exponential is treated as an overflow.
inline constexpr double kMaxAbsEta = 700.0;

// Throws DataError when y (or ntrials) is not valid for the family.
void check_observation(const LikelihoodFamily& fam, double y, int ntrials = 1);

double loglik(const LikelihoodFamily& fam, double y, double eta, int ntrials = 1);
LikDerivatives derivatives(const LikelihoodFamily& fam, double y, double eta, int ntrials = 1);

}  // namespace inlite
