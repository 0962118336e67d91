#include "inlite/likelihood.hpp"

#include <cmath>

#include "inlite/error.hpp"

namespace inlite {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v); }

void check_eta(const LikelihoodFamily& fam, double eta) {
  if (std::isnan(eta)) throw NumericalError("linear predictor is NaN");
  if (fam.kind != FamilyKind::kGaussian && std::abs(eta) > kMaxAbsEta) {
    throw NumericalError("linear predictor " + std::to_string(eta) +
                         " overflows the exponential (|eta| > 700)");
  }
}

// log(1 + exp(eta)) without overflow.
double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

}  // namespace

std::string family_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::kGaussian:
      return "gaussian";
    case FamilyKind::kPoisson:
      return "poisson";
    case FamilyKind::kBinomial:
      return "binomial";
  }
  return "";
}

std::optional<FamilyKind> family_from_name(const std::string& name) {
  if (name == "gaussian") return FamilyKind::kGaussian;
  if (name == "poisson") return FamilyKind::kPoisson;
  if (name == "binomial") return FamilyKind::kBinomial;
  return std::nullopt;
}

LikelihoodFamily LikelihoodFamily::gaussian(double tau_obs) {
  if (!(tau_obs > 0.0) || !std::isfinite(tau_obs)) {
    throw DataError("gaussian observation precision must be positive");
  }
  return {FamilyKind::kGaussian, tau_obs};
}

void check_observation(const LikelihoodFamily& fam, double y, int ntrials) {
  switch (fam.kind) {
    case FamilyKind::kGaussian:
      if (!std::isfinite(y)) throw DataError("gaussian observation is not finite");
      break;
    case FamilyKind::kPoisson:
      if (!is_integer(y) || y < 0.0) {
        throw DataError("poisson observation must be a non-negative integer, got " +
                        std::to_string(y));
      }
      break;
    case FamilyKind::kBinomial:
      if (ntrials < 1) throw DataError("binomial ntrials must be at least 1");
      if (!is_integer(y) || y < 0.0 || y > ntrials) {
        throw DataError("binomial observation must be an integer in [0, ntrials], got " +
                        std::to_string(y));
      }
      break;
  }
}

double loglik(const LikelihoodFamily& fam, double y, double eta, int ntrials) {
  check_observation(fam, y, ntrials);
  check_eta(fam, eta);
  switch (fam.kind) {
    case FamilyKind::kGaussian: {
      const double r = y - eta;
      return 0.5 * (std::log(fam.tau_obs) - kLog2Pi) - 0.5 * fam.tau_obs * r * r;
    }
    case FamilyKind::kPoisson:
      return y * eta - std::exp(eta) - std::lgamma(y + 1.0);
    case FamilyKind::kBinomial: {
      const double n = ntrials;
      const double lchoose = std::lgamma(n + 1.0) - std::lgamma(y + 1.0) - std::lgamma(n - y + 1.0);
      return lchoose + y * eta - n * softplus(eta);
    }
  }
  return 0.0;
}

LikDerivatives derivatives(const LikelihoodFamily& fam, double y, double eta, int ntrials) {
  LikDerivatives d;
  d.value = loglik(fam, y, eta, ntrials);
  switch (fam.kind) {
    case FamilyKind::kGaussian:
      d.g = fam.tau_obs * (y - eta);
      d.h = -fam.tau_obs;
      d.t = 0.0;
      break;
    case FamilyKind::kPoisson: {
      const double mu = std::exp(eta);
      d.g = y - mu;
      d.h = -mu;
      d.t = -mu;
      break;
    }
    case FamilyKind::kBinomial: {
      const double p = logistic(eta);
      const double v = p * (1.0 - p);
      d.g = y - ntrials * p;
      d.h = -ntrials * v;
      d.t = -ntrials * v * (1.0 - 2.0 * p);
      break;
    }
  }
  return d;
}

}  // namespace inlite
