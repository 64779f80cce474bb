#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "collapsim/distributions.hpp"
#include "collapsim/estimators.hpp"
#include "collapsim/rng.hpp"

#include "support.hpp"

using namespace collapsim;

namespace {

double normal_pdf_ref(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

void check_kde_integrates_to_one(const KdeModel& model) {
  const auto [mn, mx] =
      std::minmax_element(model.support_points.begin(), model.support_points.end());
  const double lo = *mn - 6.0 * model.bandwidth;
  const double hi = *mx + 6.0 * model.bandwidth;
  const double integral = test_support::trapezoid(
      [&](double x) { return std::exp(kde_log_density(model, x)); }, lo, hi, 100000);
  REQUIRE_THAT(integral, Catch::Matchers::WithinAbs(1.0, 1e-3));
}

}  // namespace

TEST_CASE("fit_kde stores the samples verbatim") {
  const SampleSet samples{{1.0, -2.0, 0.5}, 0};
  const KdeModel model = fit_kde(samples, 0.5);
  REQUIRE(model.support_points == samples.values);
  REQUIRE(model.bandwidth == 0.5);

  REQUIRE_THROWS_AS(fit_kde(SampleSet{}, 0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(fit_kde(samples, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(fit_kde(samples, -1.0), std::invalid_argument);
}

TEST_CASE("single-point KDE is a normal around the point") {
  const KdeModel model = fit_kde(SampleSet{{1.0}, 0}, 0.5);
  for (const double x : {0.0, 1.0, 2.5, -3.0}) {
    REQUIRE_THAT(std::exp(kde_log_density(model, x)),
                 Catch::Matchers::WithinRel(normal_pdf_ref(x, 1.0, 0.5), 1e-12));
  }
}

TEST_CASE("kde_log_density reference values") {
  const KdeModel single = fit_kde(SampleSet{{0.0}, 0}, 1.0);
  // log(1/sqrt(2*pi))
  REQUIRE_THAT(kde_log_density(single, 0.0),
               Catch::Matchers::WithinRel(-0.9189385332046727, 1e-12));

  const KdeModel pair = fit_kde(SampleSet{{-1.0, 1.0}, 0}, 1.0);
  // Mean of two unit normals evaluated at 0 is phi(1).
  REQUIRE_THAT(kde_log_density(pair, 0.0),
               Catch::Matchers::WithinRel(std::log(normal_pdf_ref(1.0, 0.0, 1.0)), 1e-12));
}

TEST_CASE("kde_log_density stays finite deep in the tail") {
  const KdeModel single = fit_kde(SampleSet{{0.0}, 0}, 1.0);
  const double logd = kde_log_density(single, 50.0);
  REQUIRE(std::isfinite(logd));
  REQUIRE_THAT(logd, Catch::Matchers::WithinRel(-1250.9189385332047, 1e-12));

  // Two far kernels, combined with a manually shifted log-sum-exp.
  const KdeModel pair = fit_kde(SampleSet{{0.0, 0.5}, 0}, 1.0);
  const double t1 = -0.5 * 50.0 * 50.0;
  const double t2 = -0.5 * 49.5 * 49.5;
  const double expected = t2 + std::log(0.5 * (1.0 + std::exp(t1 - t2))) -
                          0.5 * std::log(2.0 * std::numbers::pi);
  REQUIRE_THAT(kde_log_density(pair, 50.0), Catch::Matchers::WithinRel(expected, 1e-12));
}

TEST_CASE("fitted KDE densities integrate to one") {
  Rng rng(3);
  const SampleSet preset = sample_mixture(preset_mixture("two-gauss-uniform"), rng);
  check_kde_integrates_to_one(fit_kde(preset, 0.5));

  const SampleSet gauss = sample_mixture(preset_mixture("gauss1d"), rng);
  check_kde_integrates_to_one(fit_kde(gauss, 0.1));
  check_kde_integrates_to_one(fit_kde(SampleSet{{1.0}, 0}, 0.5));
}

TEST_CASE("kde_sample draws cluster around the support") {
  const KdeModel model = fit_kde(SampleSet{{5.0}, 0}, 0.01);
  Rng rng(17);
  const SampleSet draws = kde_sample(model, 10000, rng);
  REQUIRE(draws.values.size() == 10000);
  for (const double x : draws.values) REQUIRE(std::abs(x - 5.0) < 0.1);
  REQUIRE_THAT(std::sqrt(test_support::population_variance(draws.values)),
               Catch::Matchers::WithinRel(0.01, 0.05));

  REQUIRE_THROWS_AS(kde_sample(model, 0, rng), std::invalid_argument);
}

TEST_CASE("kde sampling adds bandwidth^2 to the population variance") {
  Rng rng(29);
  const SampleSet support = sample_mixture(preset_mixture("two-gauss-uniform"), rng);
  const double support_variance = test_support::population_variance(support.values);
  const KdeModel model = fit_kde(support, 0.5);
  const SampleSet draws = kde_sample(model, 100000, rng);
  REQUIRE(draws.values.size() == 100000);
  REQUIRE_THAT(test_support::population_variance(draws.values),
               Catch::Matchers::WithinRel(support_variance + 0.25, 0.03));
}

TEST_CASE("fit_gaussian uses the unbiased divisor") {
  const GaussianModel two = fit_gaussian(SampleSet{{0.0, 2.0}, 0});
  REQUIRE(two.mean == 1.0);
  REQUIRE(two.variance == 2.0);

  const GaussianModel constant = fit_gaussian(SampleSet{{1.0, 1.0, 1.0}, 0});
  REQUIRE(constant.mean == 1.0);
  REQUIRE(constant.variance == 0.0);

  REQUIRE_THROWS_AS(fit_gaussian(SampleSet{{7.0}, 0}), std::invalid_argument);
  REQUIRE_THROWS_AS(fit_gaussian(SampleSet{}), std::invalid_argument);
}

TEST_CASE("gaussian_sample") {
  Rng rng(31);
  const SampleSet constant = gaussian_sample(GaussianModel{3.0, 0.0}, 4, rng);
  REQUIRE(constant.values == std::vector<double>{3.0, 3.0, 3.0, 3.0});

  const SampleSet draws = gaussian_sample(GaussianModel{0.0, 1.0}, 100000, rng);
  REQUIRE_THAT(test_support::mean_of(draws.values), Catch::Matchers::WithinAbs(0.0, 0.02));
  REQUIRE_THAT(test_support::unbiased_variance(draws.values),
               Catch::Matchers::WithinAbs(1.0, 0.02));

  REQUIRE_THROWS_AS(gaussian_sample(GaussianModel{0.0, 1.0}, 0, rng),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(gaussian_sample(GaussianModel{0.0, -1.0}, 5, rng),
                    std::invalid_argument);
}

TEST_CASE("one fit/sample round trip preserves the mean in expectation") {
  const GaussianModel source{3.0, 1.0};
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const SampleSet draws = gaussian_sample(source, 1000, rng);
    sum += fit_gaussian(draws).mean;
  }
  REQUIRE_THAT(sum / 200.0, Catch::Matchers::WithinAbs(3.0, 0.01));
}
