#include <boost/math/distributions/skew_normal.hpp>
#include <cmath>

#include "doctest.h"
#include "inlite/density.hpp"

using namespace inlite;

TEST_CASE("gaussian marginal normalizes and recovers moments") {
  auto g = gaussian_marginal(1.5, 0.3);
  CHECK(g.size() == 201);
  CHECK(g.integral() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.mean() == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(g.sd() == doctest::Approx(0.3).epsilon(1e-4));
  CHECK(g.quantile(0.5) == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(g.quantile(0.975) == doctest::Approx(1.5 + 1.959964 * 0.3).epsilon(1e-4));
  CHECK(g.mode() == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("log-cubic interpolation is exact for gaussian log densities") {
  auto g = gaussian_marginal(0.0, 1.0, 41);
  for (double v : {-3.3, -1.01, 0.2, 2.71}) {
    CHECK(g(v) == doctest::Approx(normal_pdf(v, 0.0, 1.0)).epsilon(1e-8));
  }
  CHECK(g(-7.0) == 0.0);
  CHECK(g(7.0) == 0.0);
}

TEST_CASE("from_log ignores constant offsets") {
  std::vector<double> x = linspace(-5, 5, 101);
  std::vector<double> a(x.size()), b(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    a[k] = -0.5 * x[k] * x[k];
    b[k] = a[k] - 1234.5;
  }
  auto p = MarginalDensity::from_log(x, a);
  auto q = MarginalDensity::from_log(x, b);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(p.density()[k] == doctest::Approx(q.density()[k]));
}

TEST_CASE("invalid densities are rejected") {
  CHECK_THROWS_AS(MarginalDensity({0.0, 0.0}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(MarginalDensity({0.0, 1.0}, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(MarginalDensity({0.0, 1.0}, {-1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(MarginalDensity({0.0, 1.0, 2.0}, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("mixture of two unit gaussians at +-1") {
  std::vector<MarginalDensity> parts{gaussian_marginal(-1, 1), gaussian_marginal(1, 1)};
  std::vector<double> w{0.5, 0.5};
  auto m = mix_densities(w, parts);
  CHECK(m.integral() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m.mean() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(m.moment(2) == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("single-component mixture is the input") {
  std::vector<MarginalDensity> parts{gaussian_marginal(0.3, 2.0)};
  std::vector<double> w{1.0};
  auto m = mix_densities(w, parts);
  CHECK(m.x() == parts[0].x());
  CHECK(m.density() == parts[0].density());
  CHECK_THROWS(mix_densities(std::span<const double>{}, std::span<const MarginalDensity>{}));
}

TEST_CASE("total variation distance") {
  auto a = gaussian_marginal(0.0, 1.0);
  CHECK(tv_distance(a, a) == doctest::Approx(0.0));
  // TV between N(0,1) and N(d,1) is 2 Phi(d/2) - 1.
  const double d = 0.5;
  auto b = gaussian_marginal(d, 1.0);
  const double truth = std::erf(d / 2.0 / std::sqrt(2.0));
  CHECK(tv_distance(a, b) == doctest::Approx(truth).epsilon(1e-4));
  CHECK(tv_distance(a, [&](double v) { return normal_pdf(v, d, 1.0); }) ==
        doctest::Approx(truth).epsilon(1e-4));
}

TEST_CASE("skew-normal density against boost") {
  SkewNormal sn{0.4, 1.7, -3.0};
  boost::math::skew_normal_distribution<double> ref(0.4, 1.7, -3.0);
  for (double v : {-5.0, -1.0, 0.0, 0.4, 2.0}) {
    CHECK(sn.pdf(v) == doctest::Approx(boost::math::pdf(ref, v)).epsilon(1e-10));
  }
  CHECK(sn.mean() == doctest::Approx(boost::math::mean(ref)).epsilon(1e-12));
  CHECK(sn.variance() == doctest::Approx(boost::math::variance(ref)).epsilon(1e-12));
  CHECK(sn.skewness() == doctest::Approx(boost::math::skewness(ref)).epsilon(1e-10));
  CHECK(std::isfinite(sn.log_pdf(40.0)));
}

TEST_CASE("skew-normal moment matching round trip") {
  for (double g : {-0.9, -0.3, 0.0, 0.05, 0.5, 0.95}) {
    bool capped = true;
    auto sn = SkewNormal::from_moments(2.0, 0.25, g, &capped);
    CHECK_FALSE(capped);
    CHECK(sn.omega > 0.0);
    CHECK(sn.mean() == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(sn.variance() == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(sn.skewness() == doctest::Approx(g).epsilon(1e-8));
    auto tab = sn.tabulate();
    CHECK(tab.mean() == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(tab.sd() == doctest::Approx(0.5).epsilon(1e-4));
  }
  auto zero = SkewNormal::from_moments(0.0, 1.0, 0.0);
  CHECK(zero.alpha == 0.0);
}

TEST_CASE("skewness cap") {
  bool capped = false;
  auto sn = SkewNormal::from_moments(0.0, 1.0, 1.5, &capped);
  CHECK(capped);
  CHECK(sn.skewness() == doctest::Approx(kMaxSkewness).epsilon(1e-8));
  CHECK(std::abs(sn.skewness()) < kSkewNormalBound);
  auto neg = SkewNormal::from_moments(0.0, 1.0, -4.0, &capped);
  CHECK(neg.skewness() == doctest::Approx(-kMaxSkewness).epsilon(1e-8));
}
