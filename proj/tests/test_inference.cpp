#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/lambert_w.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <random>

#include "doctest.h"
#include "inlite/error.hpp"
#include "inlite/inference.hpp"

using namespace inlite;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

LatentProblem scalar_poisson(double y) {
  return make_latent_problem(SparsePrecision::identity(1), LikelihoodFamily::poisson(), {0}, {y});
}

double log_normal(double y, double var) { return -0.5 * (kLog2Pi + std::log(var) + y * y / var); }

DataTable iid_table(const std::vector<double>& y) {
  DataTable t;
  std::vector<double> idx;
  for (std::size_t i = 0; i < y.size(); ++i) idx.push_back(static_cast<double>(i + 1));
  t.add_column("y", y);
  t.add_column("idx", idx);
  return t;
}

std::vector<double> simulated_y(int n, double sd_u, double sd_obs, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> y;
  for (int i = 0; i < n; ++i) y.push_back(sd_u * z(rng) + sd_obs * z(rng));
  return y;
}

// y_i ~ N(0, 1/tau_u + 1/tau_eps + 1/tau_obs) for the iid-per-row model.
double conjugate_log_lik(const std::vector<double>& y, double theta, double tau_obs, double tau_eps) {
  const double v = std::exp(-theta) + 1.0 / tau_eps + 1.0 / tau_obs;
  double s = 0.0;
  for (double e : y) s += log_normal(e, v);
  return s;
}

AssembledModel conjugate_model(const std::vector<double>& y, double tau_obs) {
  ModelOptions mo;
  mo.family = FamilyKind::kGaussian;
  mo.gaussian_precision = tau_obs;
  return make_model("y ~ -1 + f(idx, model=iid, hyper.prec.param=c(1, 1))", iid_table(y), mo);
}

LogDensityFn quadratic_surface(const Eigen::VectorXd& t, const Eigen::MatrixXd& a) {
  return [t, a](std::span<const double> th) {
    Eigen::VectorXd d(t.size());
    for (Eigen::Index j = 0; j < t.size(); ++j) d[j] = th[j] - t[j];
    return -0.5 * d.dot(a * d);
  };
}

}  // namespace

TEST_CASE("scalar poisson, y = 1") {
  const LatentProblem p = scalar_poisson(1.0);
  const GaussianApprox ga = gaussian_approximation(p);
  CHECK(ga.converged);
  CHECK(std::abs(ga.mode[0]) < 1e-10);
  CHECK(ga.c[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::sqrt(ga.marginal_variances()[0]) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
  const MarginalDensity g = latent_marginal_gaussian(ga, 0);
  CHECK(g.integral() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(g.sd() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("scalar poisson, y = 0: mode is -W(1)") {
  const GaussianApprox ga = gaussian_approximation(scalar_poisson(0.0));
  const double w1 = boost::math::lambert_w0(1.0);
  CHECK(ga.mode[0] == doctest::Approx(-w1).epsilon(1e-10));
  CHECK(ga.mode[0] == doctest::Approx(-0.567143).epsilon(1e-6));
  CHECK(ga.c[0] == doctest::Approx(std::exp(-w1)).epsilon(1e-10));
}

TEST_CASE("gaussian likelihood converges in one step to the GLS solution") {
  const int n = 6;
  std::vector<Triplet> tr;
  for (int i = 0; i < n; ++i) tr.push_back({i, i, 2.5});
  for (int i = 0; i + 1 < n; ++i) tr.push_back({i, i + 1, -1.0});
  const SparsePrecision q = SparsePrecision::from_triplets(n, tr);
  const std::vector<int> obs{0, 2, 3, 5};
  const std::vector<double> y{1.0, -0.5, 2.0, 0.3};
  const double tau = 3.0;
  const LatentProblem p = make_latent_problem(q, LikelihoodFamily::gaussian(tau), obs, y);

  Eigen::MatrixXd prec = q.to_dense();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < obs.size(); ++k) {
    prec(obs[k], obs[k]) += tau;
    rhs[obs[k]] += tau * y[k];
  }
  const Eigen::VectorXd gls = prec.ldlt().solve(rhs);
  const Eigen::VectorXd var = prec.inverse().diagonal();

  for (double s : {0.0, 5.0, -40.0}) {
    const DenseVector start = DenseVector::Constant(n, s);
    const GaussianApprox ga = gaussian_approximation(p, {}, &start);
    CHECK(ga.iterations == 1);
    CHECK((ga.mode - gls).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((ga.marginal_variances() - var).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(ga.precision.same_pattern(q));
    for (int i : {1, 4}) CHECK(ga.c[i] == 0.0);
  }
}

TEST_CASE("constrained mode and covariance agree with dense kriging") {
  const int n = 5;
  std::vector<Triplet> tr;
  for (int i = 0; i < n; ++i) tr.push_back({i, i, 2.0 + 0.1 * i});
  for (int i = 0; i + 1 < n; ++i) tr.push_back({i, i + 1, -0.7});
  const SparsePrecision q = SparsePrecision::from_triplets(n, tr);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(1, n);
  c.row(0).setOnes();
  const LatentProblem p = make_latent_problem(q, LikelihoodFamily::poisson(), {0, 1, 2, 3, 4},
                                              {0, 3, 1, 0, 2}, {}, c);
  const GaussianApprox ga = gaussian_approximation(p);
  CHECK(std::abs(ga.mode.sum()) < 1e-10);
  // Stationarity on the constraint set: the gradient is a multiple of 1.
  Eigen::VectorXd grad = -q.to_dense() * ga.mode;
  for (int i = 0; i < n; ++i) grad[i] += p.y[i] - std::exp(ga.mode[i]);
  CHECK((grad.array() - grad.mean()).abs().maxCoeff() < 1e-8);

  const Eigen::MatrixXd pinv = ga.precision.to_dense().inverse();
  const Eigen::MatrixXd cov = pinv - pinv * c.transpose() * (c * pinv * c.transpose()).inverse() * c * pinv;
  CHECK((ga.marginal_variances() - cov.diagonal()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((ga.covariance_column(2) - cov.col(2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("newton reports failures") {
  NewtonOptions opt;
  opt.max_iter = 1;
  CHECK_THROWS_AS(gaussian_approximation(scalar_poisson(30.0), opt), ConvergenceError);
  const LatentProblem bad = make_latent_problem(SparsePrecision::identity(1, -1.0),
                                                LikelihoodFamily::gaussian(0.5), {0}, {0.0});
  CHECK_THROWS_AS(gaussian_approximation(bad), NumericalError);
}

TEST_CASE("laplace marginal likelihood is exact for the conjugate model") {
  for (double tau : {0.2, 1.0, 7.0}) {
    const LatentProblem p = make_latent_problem(SparsePrecision::identity(1), LikelihoodFamily::gaussian(tau),
                                                {0}, {1.3});
    const GaussianApprox ga = gaussian_approximation(p);
    CHECK(laplace_log_likelihood(p, ga) == doctest::Approx(log_normal(1.3, 1.0 + 1.0 / tau)).epsilon(1e-12));
  }
}

TEST_CASE("log_posterior_theta on the assembled conjugate model") {
  const std::vector<double> y = simulated_y(12, 1.0, 0.5, 3);
  const AssembledModel model = conjugate_model(y, 4.0);
  for (double th : {-1.0, 0.0, 2.5}) {
    const double got = log_posterior_theta(model, std::vector<double>{th});
    const double want = model.log_prior_theta(std::vector<double>{th}) + conjugate_log_lik(y, th, 4.0, 1e5);
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
  }
  // Shifting the data changes the profile, a rescaled prior only shifts it.
  std::vector<double> ys = y;
  for (double& v : ys) v += 5.0;
  const AssembledModel shifted = conjugate_model(ys, 4.0);
  const double a = log_posterior_theta(shifted, std::vector<double>{0.0}) -
                   log_posterior_theta(shifted, std::vector<double>{1.0});
  const double b = shifted.log_prior_theta(std::vector<double>{0.0}) + conjugate_log_lik(ys, 0.0, 4.0, 1e5) -
                   shifted.log_prior_theta(std::vector<double>{1.0}) - conjugate_log_lik(ys, 1.0, 4.0, 1e5);
  CHECK(a == doctest::Approx(b).epsilon(1e-9));
}

TEST_CASE("find_mode on quadratic surfaces") {
  Eigen::VectorXd t(3);
  t << 0.5, -1.0, 2.0;
  Eigen::MatrixXd a(3, 3);
  a << 4, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 2;
  const ThetaMode m = find_mode(quadratic_surface(t, a), {0.0, 0.0, 0.0});
  CHECK(m.converged);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(m.theta[j] - t[j]) < 1e-6);
  CHECK((m.hessian - a).cwiseAbs().maxCoeff() < 1e-6);
  // The standardized Hessian is the identity.
  const Eigen::MatrixXd hz = m.jacobian.transpose() * m.hessian * m.jacobian;
  CHECK((hz - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(m.log_det_jacobian == doctest::Approx(-0.5 * std::log(a.determinant())).epsilon(1e-9));
  Eigen::VectorXd z(3);
  z << 0.3, -1.2, 0.7;
  const Eigen::VectorXd back = m.to_z(m.to_theta(z));
  CHECK((back - z).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("indefinite hessian is reported with eigenvalues") {
  Eigen::MatrixXd h(2, 2);
  h << 1, 0, 0, -2;
  try {
    standardize({0.0, 0.0}, 0.0, h);
    FAIL("expected an exception");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("-2") != std::string::npos);
  }
}

TEST_CASE("theta mode of the conjugate model matches the closed form") {
  const std::vector<double> y = simulated_y(30, 1.0, 0.5, 11);
  const AssembledModel model = conjugate_model(y, 4.0);
  const ThetaMode m = find_theta_mode(model);
  auto neg = [&](double th) {
    return -(model.log_prior_theta(std::vector<double>{th}) + conjugate_log_lik(y, th, 4.0, 1e5));
  };
  const auto best = boost::math::tools::brent_find_minima(neg, -5.0, 8.0, 50);
  CHECK(m.converged);
  CHECK(std::abs(m.theta[0] - best.first) < 1e-4);
}

TEST_CASE("grid exploration on a standard gaussian surface") {
  const LogDensityFn f = [](std::span<const double> t) { return -0.5 * t[0] * t[0]; };
  const ThetaMode m = find_mode(f, {0.3});
  const ThetaIntegration g = explore_grid(m, f, 1.0, 2.0);
  REQUIRE(g.points.size() == 5);
  std::vector<double> zs;
  for (const auto& p : g.points) zs.push_back(std::round(p.z[0]));
  CHECK(zs == std::vector<double>{-2, -1, 0, 1, 2});

  const ThetaIntegration one = explore_grid(m, f, 1.0, 0.0);
  REQUIRE(one.points.size() == 1);
  CHECK(one.points[0].weight == 1.0);

  const ThetaIntegration fine = explore_grid(m, f, 0.1, 20.0);
  double wsum = 0.0, z2 = 0.0;
  for (const auto& p : fine.points) {
    wsum += p.weight;
    z2 += p.weight * p.z.squaredNorm();
  }
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(z2 - 1.0) < 0.05);
  // Integral of exp(-t^2/2) is sqrt(2 pi).
  CHECK(std::abs(log_marginal_likelihood(fine) - 0.5 * kLog2Pi) < 1e-4);
  CHECK_THROWS_AS(explore_grid(m, f, 0.0, 2.0), std::invalid_argument);
  CHECK_THROWS(explore_grid(m, f, 1e-3, 20.0, 1000));
}

TEST_CASE("grid on a correlated 2-d surface") {
  Eigen::VectorXd t(2);
  t << 1.0, -1.0;
  Eigen::MatrixXd a(2, 2);
  a << 2.0, 0.9, 0.9, 1.0;
  const LogDensityFn f = quadratic_surface(t, a);
  const ThetaMode m = find_mode(f, {0.0, 0.0});
  const ThetaIntegration g = explore_grid(m, f, 0.25, 15.0);
  const double exact = kLog2Pi - 0.5 * std::log(a.determinant());
  CHECK(std::abs(log_marginal_likelihood(g) - exact) < 1e-4);
  // KDE marginal keeps the exact mean and variance.
  const Eigen::MatrixXd cov = a.inverse();
  for (int j = 0; j < 2; ++j) {
    const MarginalDensity mj = theta_marginal(g, j);
    CHECK(mj.mean() == doctest::Approx(t[j]).epsilon(1e-4));
    CHECK(mj.sd() == doctest::Approx(std::sqrt(cov(j, j))).epsilon(2e-3));
  }
}

TEST_CASE("ccd design for k = 3, f = 1.1") {
  const auto d = ccd_design(3, 1.1);
  CHECK(d.size() == 14);
  for (const auto& z : d) CHECK(z.norm() == doctest::Approx(1.1 * std::sqrt(3.0)).epsilon(1e-14));
  const LogDensityFn f = [](std::span<const double> t) { return -0.5 * (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]); };
  const ThetaMode m = find_mode(f, {0.1, 0.2, -0.1});
  const ThetaIntegration c = explore_ccd(m, f, 1.1);
  REQUIRE(c.points.size() == 15);
  CHECK(c.points[0].weight == doctest::Approx(1.0 - 1.0 / 1.21).epsilon(1e-9));
  CHECK(c.points[0].weight == doctest::Approx(0.173554).epsilon(1e-5));
  CHECK(c.points[1].weight == doctest::Approx(1.0 / (14 * 1.21)).epsilon(1e-9));
  CHECK(c.points[1].weight == doctest::Approx(0.059032).epsilon(1e-5));
  // E[theta' theta] under a standard gaussian posterior.
  double e2 = 0.0;
  for (const auto& p : c.points) {
    Eigen::VectorXd th = Eigen::Map<const Eigen::VectorXd>(p.theta.data(), 3);
    e2 += p.weight * th.squaredNorm();
  }
  CHECK(e2 == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(std::abs(log_marginal_likelihood(c) - 1.5 * kLog2Pi) < 1e-8);
  CHECK_THROWS_AS(explore_ccd(m, f, 1.0), std::invalid_argument);
}

TEST_CASE("ccd weight identities for k = 3..10") {
  for (int k = 3; k <= 10; ++k) {
    const double f = 1.1;
    const auto d = ccd_design(k, f);
    const double ns = static_cast<double>(d.size());
    const double w = 1.0 / (ns * f * f);
    const double w0 = 1.0 - 1.0 / (f * f);
    double sw = w0, sz = 0.0;
    for (const auto& z : d) {
      sw += w;
      sz += w * z.squaredNorm();
    }
    CHECK(std::abs(sw - 1.0) < 1e-12);
    CHECK(std::abs(sz - k) < 1e-12);
  }
}

TEST_CASE("fractional factorials have resolution V") {
  for (int k = 1; k <= 12; ++k) {
    const auto runs = factorial_design(k);
    const std::size_t nr = runs.size();
    if (k <= 4) CHECK(nr == (1u << k));
    // Main effects and two-factor interactions are mutually orthogonal.
    std::vector<std::vector<int>> cols;
    for (int a = 0; a < k; ++a) {
      std::vector<int> c(nr);
      for (std::size_t r = 0; r < nr; ++r) c[r] = runs[r][a];
      cols.push_back(c);
    }
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        std::vector<int> c(nr);
        for (std::size_t r = 0; r < nr; ++r) c[r] = runs[r][a] * runs[r][b];
        cols.push_back(c);
      }
    }
    bool orthogonal = true;
    for (std::size_t a = 0; a < cols.size(); ++a) {
      int s = 0;
      for (int v : cols[a]) s += v;
      orthogonal = orthogonal && s == 0;
      for (std::size_t b = a + 1; b < cols.size(); ++b) {
        int dot = 0;
        for (std::size_t r = 0; r < nr; ++r) dot += cols[a][r] * cols[b][r];
        orthogonal = orthogonal && dot == 0;
      }
    }
    CHECK_MESSAGE(orthogonal, "k = " << k);
  }
  CHECK(factorial_design(5).size() == 16);
  CHECK(factorial_design(6).size() == 32);
}

TEST_CASE("strategy selection") {
  CHECK(resolve_strategy(IntStrategy::kAuto, 1) == IntStrategy::kGrid);
  CHECK(resolve_strategy(IntStrategy::kAuto, 2) == IntStrategy::kGrid);
  CHECK(resolve_strategy(IntStrategy::kAuto, 4) == IntStrategy::kCcd);
  CHECK(resolve_strategy(IntStrategy::kEb, 4) == IntStrategy::kEb);
  CHECK(int_strategy_from_name("ccd") == IntStrategy::kCcd);
  CHECK_FALSE(int_strategy_from_name("nested").has_value());
  const LogDensityFn f = [](std::span<const double> t) { return -0.5 * t[0] * t[0] - t[1] * t[1]; };
  const ThetaMode m = find_mode(f, {1.0, 1.0});
  const ThetaIntegration eb = select_strategy(m, f, IntStrategy::kEb);
  CHECK(eb.points.size() == 1);
  CHECK(eb.points[0].weight == 1.0);
  CHECK_THROWS_AS(log_marginal_likelihood(eb), std::invalid_argument);
  CHECK(select_strategy(m, f, IntStrategy::kAuto).strategy == IntStrategy::kGrid);
}

TEST_CASE("two-piece theta marginal is symmetric on a quadratic surface") {
  Eigen::VectorXd t = Eigen::VectorXd::Zero(4);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(4, 4);
  a(0, 1) = a(1, 0) = 0.3;
  const LogDensityFn f = quadratic_surface(t, a);
  const ThetaMode m = standardize({0.0, 0.0, 0.0, 0.0}, 0.0, a);
  const ThetaIntegration c = explore_ccd(m, f, 1.1);
  const Eigen::MatrixXd cov = a.inverse();
  for (int j = 0; j < 4; ++j) {
    const MarginalDensity d = theta_marginal(c, j);
    CHECK(std::abs(d.upper() - m.theta[j] - (m.theta[j] - d.lower())) < 1e-6);
    CHECK(d.sd() == doctest::Approx(std::sqrt(cov(j, j))).epsilon(1e-3));
  }
}

TEST_CASE("k = 1 grid theta marginal interpolates the grid") {
  const std::vector<double> y = simulated_y(20, 1.0, 0.5, 5);
  const AssembledModel model = conjugate_model(y, 4.0);
  const ThetaMode m = find_theta_mode(model);
  const ThetaIntegration g = explore_grid(m, theta_log_posterior_fn(model), 0.2, 8.0);
  const MarginalDensity d = theta_marginal(g, 0);
  CHECK(d.integral() == doctest::Approx(1.0).epsilon(1e-9));
  auto neg = [&](double th) {
    return -(model.log_prior_theta(std::vector<double>{th}) + conjugate_log_lik(y, th, 4.0, 1e5));
  };
  const double best = boost::math::tools::brent_find_minima(neg, -5.0, 8.0, 50).first;
  const double sd = std::sqrt(m.jacobian(0, 0) * m.jacobian(0, 0));
  CHECK(std::abs(d.mode() - best) < 2 * 0.2 * sd);
  // Marginal likelihood against quadrature of the closed form.
  auto integrand = [&](double th) { return std::exp(-neg(th) - (-neg(best))); };
  const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, best - 15 * sd,
                                                                                 best + 15 * sd, 15, 1e-12);
  const double exact = std::log(q) - neg(best);
  const ThetaIntegration g01 = explore_grid(m, theta_log_posterior_fn(model), 0.1, 20.0);
  CHECK(std::abs(log_marginal_likelihood(g01) - exact) < 0.02);
}

TEST_CASE("simplified laplace building blocks") {
  bool capped = true;
  const SkewNormal zero = skew_normal_from_cubic(0.0, 0.0, &capped);
  CHECK_FALSE(capped);
  CHECK(zero.alpha == 0.0);
  CHECK(zero.xi == 0.0);
  CHECK(zero.omega == 1.0);
  const SkewNormal shift = skew_normal_from_cubic(0.1, 0.0);
  CHECK(shift.alpha == 0.0);
  CHECK(shift.xi == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(shift.omega == 1.0);
  // A tiny cubic term stays within rounding of the gaussian shape.
  const SkewNormal tiny = skew_normal_from_cubic(0.1, 1e-9);
  CHECK(tv_distance(tiny.tabulate(), [](double v) { return normal_pdf(v, 0.1, 1.0); }) < 1e-6);
  // The cubic term alone: mean, variance and skewness of the matched
  // skew-normal follow the quadrature of the exp-cubic density.
  const double c = 0.2;
  const SkewNormal sn = skew_normal_from_cubic(0.0, c);
  auto dens = [c](double s) { return std::exp(-0.5 * s * s + c * s * s * s / 6.0); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double z = GK::integrate(dens, -6.0, 6.0, 15, 1e-13);
  const double m1 = GK::integrate([&](double s) { return s * dens(s); }, -6.0, 6.0, 15, 1e-13) / z;
  const double m2 = GK::integrate([&](double s) { return std::pow(s - m1, 2) * dens(s); }, -6.0, 6.0, 15, 1e-13) / z;
  const double m3 = GK::integrate([&](double s) { return std::pow(s - m1, 3) * dens(s); }, -6.0, 6.0, 15, 1e-13) / z;
  CHECK(sn.mean() == doctest::Approx(m1).epsilon(1e-6));
  CHECK(sn.variance() == doctest::Approx(m2).epsilon(1e-6));
  CHECK(sn.skewness() == doctest::Approx(m3 / std::pow(m2, 1.5)).epsilon(1e-5));
  CHECK(skew_normal_from_cubic(0.0, 0.3).alpha > 0.0);
  CHECK(skew_normal_from_cubic(0.0, -0.3).alpha < 0.0);

  // A large cubic term: the window stops at the antimode s = 2/c instead of
  // integrating the part where the cubic grows again.
  const double big = -1.0;
  const SkewNormal left = skew_normal_from_cubic(0.0, big);
  const double zb = GK::integrate([&](double s) { return std::exp(-0.5 * s * s + big * s * s * s / 6.0); }, -2.0, 6.0,
                                  15, 1e-13);
  const double mb = GK::integrate([&](double s) { return s * std::exp(-0.5 * s * s + big * s * s * s / 6.0); }, -2.0,
                                  6.0, 15, 1e-13) / zb;
  CHECK(left.mean() == doctest::Approx(mb).epsilon(1e-6));
  CHECK(left.mean() < 0.0);
  CHECK(left.mean() > -1.0);
  // Mirror image for the opposite sign.
  const SkewNormal right = skew_normal_from_cubic(0.0, -big);
  CHECK(right.mean() == doctest::Approx(-left.mean()).epsilon(1e-10));
  CHECK(right.alpha == doctest::Approx(-left.alpha).epsilon(1e-8));
  // No stationary point at all (1 - 2bc <= 0): the shifted gaussian, flagged.
  capped = false;
  const SkewNormal none = skew_normal_from_cubic(1.0, 0.6, &capped);
  CHECK(capped);
  CHECK(none.alpha == 0.0);
  CHECK(none.xi == 1.0);
}

TEST_CASE("conjugate model: laplace-type marginals reduce to the gaussian one") {
  const std::vector<double> y = simulated_y(8, 1.0, 0.5, 9);
  const AssembledModel model = conjugate_model(y, 4.0);
  const std::vector<double> th{0.3};
  const LatentProblem p = latent_problem(model, th);
  const GaussianApprox ga = gaussian_approximation(p);
  for (int i : {0, 8, 12}) {
    const SimplifiedLaplace sl = simplified_laplace(p, ga, i);
    CHECK(std::abs(sl.b) < 1e-8);
    CHECK(std::abs(sl.c) < 1e-8);
    const MarginalDensity g = latent_marginal_gaussian(ga, i);
    const MarginalDensity fl = latent_marginal_laplace(p, ga, i);
    CHECK(tv_distance(fl, g) < 1e-8);
    const double mu = ga.mode[i];
    const double sd = g.sd();
    const double l0 = latent_marginal_full_laplace(model, th, i, mu);
    const double l1 = latent_marginal_full_laplace(model, th, i, mu + sd);
    CHECK(l0 - l1 == doctest::Approx(0.5).epsilon(1e-6));
  }
}

TEST_CASE("full laplace is exact when one coordinate is left") {
  const LatentProblem p = scalar_poisson(3.0);
  const GaussianApprox ga = gaussian_approximation(p);
  const MarginalDensity fl = latent_marginal_laplace(p, ga, 0);
  auto truth = [](double x) { return std::exp(-0.5 * x * x + 3.0 * x - std::exp(x)); };
  const double z = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(truth, -12.0, 8.0, 15, 1e-13);
  CHECK(tv_distance(fl, [&](double x) { return truth(x) / z; }) < 1e-4);
  CHECK(tv_distance(latent_marginal_gaussian(ga, 0), [&](double x) { return truth(x) / z; }) > 1e-3);
}

TEST_CASE("mixture over theta") {
  std::vector<ThetaPoint> pts(1);
  pts[0].weight = 1.0;
  const std::vector<MarginalDensity> one{gaussian_marginal(0.2, 0.7)};
  const MarginalDensity m = mix_over_theta(pts, one);
  CHECK(m.density() == one[0].density());
  pts.resize(2);
  pts[0].weight = pts[1].weight = 0.5;
  const std::vector<MarginalDensity> two{gaussian_marginal(-1, 1), gaussian_marginal(1, 1)};
  const MarginalDensity mm = mix_over_theta(pts, two);
  CHECK(std::abs(mm.mean()) < 1e-9);
  CHECK(mm.moment(2) == doctest::Approx(2.0).epsilon(1e-4));
  CHECK_THROWS(mix_over_theta(std::span<const ThetaPoint>{}, std::span<const MarginalDensity>{}));
}

TEST_CASE("user-scale hyperparameter summaries") {
  const MarginalDensity th = gaussian_marginal(1.0, 0.2, 401);
  const Summary s = user_scale_summary(th, Transform::kLogPrecision);
  // Log-normal moments.
  CHECK(s.mean == doctest::Approx(std::exp(1.0 + 0.02)).epsilon(1e-6));
  CHECK(s.q50 == doctest::Approx(std::exp(1.0)).epsilon(1e-6));
  const MarginalDensity u = to_user_density(th, Transform::kLogPrecision);
  CHECK(u.mean() == doctest::Approx(s.mean).epsilon(1e-4));
}

TEST_CASE("pipeline on the conjugate model") {
  const std::vector<double> y = simulated_y(10, 1.0, 0.5, 21);
  const AssembledModel model = conjugate_model(y, 4.0);
  for (LatentStrategy st : {LatentStrategy::kGaussian, LatentStrategy::kSimplifiedLaplace, LatentStrategy::kLaplace}) {
    InferenceOptions opt;
    opt.strategy = st;
    const InferenceResult r = run_inference(model, opt);
    CHECK(r.diagnostics.mode_converged);
    CHECK(r.integration.strategy == IntStrategy::kGrid);
    CHECK(r.latent.size() == 10);
    CHECK(r.hyper.size() == 1);
    CHECK(r.log_evidence.has_value());
    for (const auto& lm : r.latent) CHECK(lm.density.integral() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.latent_by_name("idx[3]").index == 12);
  }
  InferenceOptions eb;
  eb.int_strategy = IntStrategy::kEb;
  eb.strategy = LatentStrategy::kGaussian;
  const InferenceResult r = run_inference(model, eb);
  CHECK(r.integration.points.size() == 1);
  CHECK_FALSE(r.log_evidence.has_value());
}

TEST_CASE("threads do not change results") {
  const std::vector<double> y = simulated_y(10, 1.0, 0.5, 2);
  const AssembledModel model = conjugate_model(y, 4.0);
  InferenceOptions a;
  a.threads = 1;
  InferenceOptions b;
  b.threads = 3;
  const InferenceResult ra = run_inference(model, a);
  const InferenceResult rb = run_inference(model, b);
  REQUIRE(ra.latent.size() == rb.latent.size());
  for (std::size_t k = 0; k < ra.latent.size(); ++k) CHECK(ra.latent[k].density.density() == rb.latent[k].density.density());
  CHECK(ra.log_evidence == rb.log_evidence);
}
