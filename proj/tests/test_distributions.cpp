#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "freqfit/binomial.hpp"
#include "freqfit/distributions.hpp"
#include "freqfit/quadrature.hpp"
#include "freqfit/random.hpp"

using namespace freqfit;

namespace {

double gamma_density(double x, const GammaParams& p) {
  return std::exp(gamma_log_density(x, p));
}

// Gamma-weighted expectation over [0, inf) with the u = sqrt(x) substitution,
// which removes the endpoint singularity for shape >= 0.5.
template <typename G>
double gamma_expectation(const GammaParams& p, const G& weight) {
  auto integrand = [&](double u) {
    const double x = u * u;
    if (x == 0.0) return 0.0;
    return gamma_density(x, p) * weight(x) * 2.0 * u;
  };
  return integrate_upper(integrand, 0.0, 1e-11);
}

}  // namespace

TEST_CASE("normal_log_density: peak value, x-derivative, substitution") {
  const NormalParams std_normal{0.0, 1.0};
  CHECK(normal_log_density(0.0, std_normal) ==
        Catch::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-14));

  SECTION("d/dx log f = -(x - mu)/sigma^2") {
    const NormalParams p{1.3, 0.7};
    const double h = 1e-6;
    for (double x : {-2.0, 0.0, 0.9, 3.7}) {
      const double fd =
          (normal_log_density(x + h, p) - normal_log_density(x - h, p)) / (2.0 * h);
      CHECK(fd == Catch::Approx(-(x - p.mu) / (p.sigma * p.sigma)).margin(1e-6));
    }
  }

  CHECK(normal_log_density(0.0, {0.0, 2.0}) ==
        Catch::Approx(-0.5 * std::log(8.0 * M_PI)).epsilon(1e-14));
  CHECK_THROWS_AS(normal_log_density(0.0, NormalParams{0.0, -1.0}), std::domain_error);
}

TEST_CASE("gamma_log_density: values and normalization") {
  CHECK(gamma_log_density(1.0, {1.0, 1.0}) == Catch::Approx(-1.0).epsilon(1e-14));

  SECTION("direct-formula oracle at x=2, shape=3, rate=1.5") {
    const double oracle =
        3.0 * std::log(1.5) - std::lgamma(3.0) + 2.0 * std::log(2.0) - 1.5 * 2.0;
    CHECK(gamma_log_density(2.0, {3.0, 1.5}) == Catch::Approx(oracle).epsilon(1e-14));
  }

  SECTION("density integrates to one") {
    for (double shape : {0.5, 1.0, 2.0, 5.0, 10.0}) {
      const GammaParams p{shape, 1.3};
      const double mass = gamma_expectation(p, [](double) { return 1.0; });
      CHECK(mass == Catch::Approx(1.0).margin(1e-8));
    }
  }

  CHECK_THROWS_AS(gamma_log_density(0.0, GammaParams{1.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(gamma_log_density(-1.0, GammaParams{1.0, 1.0}), std::domain_error);
}

TEST_CASE("gamma gradient and hessian: finite-difference oracles, score zero") {
  const GammaParams p{2.4, 1.7};

  SECTION("gradient vs central differences (h = 1e-6)") {
    const double h = 1e-6;
    for (double x : {0.3, 1.1, 4.0}) {
      const auto g = gamma_log_density_gradient(x, p);
      const double fd_shape = (gamma_log_density(x, {p.shape + h, p.rate}) -
                               gamma_log_density(x, {p.shape - h, p.rate})) /
                              (2.0 * h);
      const double fd_rate = (gamma_log_density(x, {p.shape, p.rate + h}) -
                              gamma_log_density(x, {p.shape, p.rate - h})) /
                             (2.0 * h);
      CHECK(g[0] == Catch::Approx(fd_shape).margin(1e-6));
      CHECK(g[1] == Catch::Approx(fd_rate).margin(1e-6));
    }
  }

  SECTION("hessian vs finite differences of the gradient") {
    const double h = 1e-6;
    for (double x : {0.5, 2.2}) {
      const auto hess = gamma_log_density_hessian(x, p);
      const auto gp_shape = gamma_log_density_gradient(x, {p.shape + h, p.rate});
      const auto gm_shape = gamma_log_density_gradient(x, {p.shape - h, p.rate});
      const auto gp_rate = gamma_log_density_gradient(x, {p.shape, p.rate + h});
      const auto gm_rate = gamma_log_density_gradient(x, {p.shape, p.rate - h});
      CHECK(hess(0, 0) == Catch::Approx((gp_shape[0] - gm_shape[0]) / (2.0 * h)).margin(1e-5));
      CHECK(hess(0, 1) == Catch::Approx((gp_shape[1] - gm_shape[1]) / (2.0 * h)).margin(1e-5));
      CHECK(hess(0, 1) == Catch::Approx((gp_rate[0] - gm_rate[0]) / (2.0 * h)).margin(1e-5));
      CHECK(hess(1, 1) == Catch::Approx((gp_rate[1] - gm_rate[1]) / (2.0 * h)).margin(1e-5));
    }
  }

  SECTION("expected score vanishes at the true parameters") {
    for (double shape : {1.0, 1.5, 2.0, 5.0, 10.0}) {
      const GammaParams q{shape, 0.8};
      const double score_shape = gamma_expectation(
          q, [&](double x) { return gamma_log_density_gradient(x, q)[0]; });
      const double score_rate = gamma_expectation(
          q, [&](double x) { return gamma_log_density_gradient(x, q)[1]; });
      CHECK(std::fabs(score_shape) < 1e-7);
      CHECK(std::fabs(score_rate) < 1e-7);
    }
  }
}

TEST_CASE("gamma_central_moments: quadrature oracle and scale family") {
  SECTION("quadrature oracle at shape=1, rate=1") {
    const GammaParams p{1.0, 1.0};
    const auto m = gamma_central_moments(p, 4);
    const double mean = gamma_expectation(p, [](double x) { return x; });
    CHECK(m[0] == Catch::Approx(mean).margin(1e-6));
    for (int k = 2; k <= 4; ++k) {
      const double mu_k = gamma_expectation(
          p, [&](double x) { return std::pow(x - mean, k); });
      CHECK(m[k - 1] == Catch::Approx(mu_k).margin(1e-6));
    }
    CHECK(m[0] == 1.0);
    CHECK(m[1] == 1.0);
    CHECK(m[2] == 2.0);
    CHECK(m[3] == 9.0);
  }

  SECTION("rate scaling divides mu_k by c^k") {
    const double c = 2.5;
    const auto base = gamma_central_moments({3.0, 1.0}, 4);
    const auto scaled = gamma_central_moments({3.0, c}, 4);
    for (int k = 1; k <= 4; ++k)
      CHECK(scaled[k - 1] == Catch::Approx(base[k - 1] / std::pow(c, k)).epsilon(1e-12));
  }

  SECTION("skewness vanishes in the large-shape limit") {
    double prev = 10.0;
    for (double shape : {1.0, 10.0, 100.0, 1000.0}) {
      const auto m = gamma_central_moments({shape, 1.0}, 3);
      const double skew = m[2] / std::pow(m[1], 1.5);
      CHECK(skew < prev);
      prev = skew;
    }
    CHECK(prev < 0.07);
  }

  CHECK_THROWS_AS(gamma_central_moments({1.0, 1.0}, 0), std::domain_error);
  CHECK_THROWS_AS(gamma_central_moments({1.0, 1.0}, 5), std::domain_error);
}

TEST_CASE("symmetric binomial pmf is exact") {
  CHECK(SymmetricBinomial(2).pmf(1) == Rational(1, 2));
  CHECK(SymmetricBinomial(4).pmf(2) == Rational(6, 16));

  SECTION("completeness at n = 20") {
    const SymmetricBinomial b(20);
    Rational sum = 0;
    for (int k = 0; k <= 20; ++k) sum += b.pmf(k);
    CHECK(sum == 1);
  }

  CHECK_THROWS_AS(SymmetricBinomial(4).pmf(-1), std::domain_error);
  CHECK_THROWS_AS(SymmetricBinomial(4).pmf(5), std::domain_error);
  CHECK_THROWS_AS(SymmetricBinomial(0), std::domain_error);
}

TEST_CASE("binomial difference identity holds exactly") {
  CHECK(binomial_difference_identity_residual(1, 0) == 0);

  SECTION("n = 2, k = 0: both sides equal 2/3") {
    const SymmetricBinomial b(2);
    const Rational p0 = b.pmf(0), p1 = b.pmf(1);
    REQUIRE(p0 == Rational(1, 4));
    REQUIRE(p1 == Rational(1, 2));
    const Rational lhs = 2 * (p1 - p0) / (p1 + p0);
    const Rational rhs = -(Rational(1, 2) - Rational(2, 2)) / Rational(3, 4);
    CHECK(lhs == Rational(2, 3));
    CHECK(rhs == Rational(2, 3));
    CHECK(binomial_difference_identity_residual(2, 0) == 0);
  }

  SECTION("exact sweep up to n = 25") {
    for (int n = 1; n <= 25; ++n)
      for (int k = 0; k < n; ++k)
        CHECK(binomial_difference_identity_residual(n, k) == 0);
  }

  CHECK_THROWS_AS(binomial_difference_identity_residual(3, 3), std::domain_error);
  CHECK_THROWS_AS(binomial_difference_identity_residual(3, -1), std::domain_error);
}

TEST_CASE("RandomStream: reproducibility and substream isolation") {
  SECTION("same (seed, index) reproduces the draws") {
    RandomStream a(42, 7), b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_uniform() == b.next_uniform());
  }

  SECTION("draws do not depend on what other streams consumed") {
    RandomStream lone(9, 3);
    std::vector<double> expected;
    for (int i = 0; i < 10; ++i) expected.push_back(lone.next_normal());

    RandomStream other(9, 2);
    for (int i = 0; i < 57; ++i) other.next_uniform();
    RandomStream again(9, 3);
    for (int i = 0; i < 10; ++i) CHECK(again.next_normal() == expected[i]);
  }

  SECTION("distinct indices decorrelate") {
    RandomStream a(5, 0), b(5, 1);
    int equal = 0;
    for (int i = 0; i < 64; ++i)
      if (a.next_uniform() == b.next_uniform()) ++equal;
    CHECK(equal == 0);
  }
}

TEST_CASE("samplers: CLT oracles and conservation") {
  SECTION("normal sample mean within 4 standard errors") {
    RandomStream stream(2024, 0);
    const auto xs = sample_normal({0.0, 1.0}, 1000000, stream);
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    CHECK(std::fabs(mean) < 4.0 / std::sqrt(1e6));
  }

  SECTION("gamma sample mean and positivity") {
    RandomStream stream(2024, 1);
    const GammaParams p{2.0, 1.0};
    const auto xs = sample_gamma(p, 400000, stream);
    double mean = 0.0;
    for (double x : xs) {
      REQUIRE(x > 0.0);
      mean += x;
    }
    mean /= static_cast<double>(xs.size());
    // mean 2, variance 2: four standard errors
    CHECK(std::fabs(mean - 2.0) < 4.0 * std::sqrt(2.0 / 400000.0));
  }

  SECTION("gamma sampler covers shape < 1") {
    RandomStream stream(77, 0);
    const GammaParams p{0.5, 2.0};
    const auto xs = sample_gamma(p, 200000, stream);
    double mean = 0.0;
    for (double x : xs) {
      REQUIRE(x > 0.0);
      mean += x;
    }
    mean /= static_cast<double>(xs.size());
    // mean 0.25, variance 0.125
    CHECK(std::fabs(mean - 0.25) < 4.0 * std::sqrt(0.125 / 200000.0));
  }

  SECTION("multinomial conservation on every draw") {
    RandomStream stream(11, 4);
    const std::vector<double> probs{0.2, 0.4, 0.4};
    for (int rep = 0; rep < 200; ++rep) {
      const auto counts = sample_multinomial(probs, 137, stream);
      long long total = 0;
      for (long long c : counts) total += c;
      REQUIRE(total == 137);
    }
  }

  SECTION("invalid probability vectors are rejected") {
    RandomStream stream(1, 0);
    CHECK_THROWS_AS(sample_multinomial({0.5, 0.6}, 10, stream), std::domain_error);
    CHECK_THROWS_AS(sample_multinomial({0.5, -0.5, 1.0}, 10, stream), std::domain_error);
  }
}
