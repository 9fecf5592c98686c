#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cycsurv/covariate.hpp"
#include "cycsurv/schedule.hpp"

using namespace cycsurv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

EffectModel basic_effect(double beta = 0.03, double threshold = 57.0) {
  EffectModel em;
  em.beta = beta;
  em.threshold_days = threshold;
  return em;
}

}  // namespace

TEST_CASE("within-cycle exposure grows linearly then freezes", "[covariate]") {
  const auto em = basic_effect();
  CHECK(z_within_cycle(em, 0.0) == 0.0);
  CHECK(z_within_cycle(em, 10.0) == 10.0);
  CHECK(z_within_cycle(em, 57.0) == 57.0);
  CHECK(z_within_cycle(em, 58.0) == 57.0);
  CHECK(z_within_cycle(em, 1e6) == 57.0);
  CHECK_THROWS_AS(z_within_cycle(em, -1.0), std::domain_error);
}

TEST_CASE("global exposure resets at each infusion", "[covariate]") {
  const auto em = basic_effect();
  InfusionSchedule s;
  s.times = {0.0, 56.0, 133.0};
  s.study_end = 560.0;
  s.validate();

  CHECK(z_global(em, s, 0.0) == 0.0);
  CHECK(z_global(em, s, 10.0) == 10.0);
  CHECK(z_global(em, s, 55.9) == 55.9);
  // Clock restarts at the second infusion.
  CHECK(z_global(em, s, 56.0) == 0.0);
  CHECK(z_global(em, s, 60.0) == 4.0);
  // Third gap runs long enough to hit the freeze point: 133 + 57 = 190.
  CHECK(z_global(em, s, 189.0) == 56.0);
  CHECK(z_global(em, s, 190.0) == 57.0);
  CHECK(z_global(em, s, 559.0) == 57.0);
  CHECK_THROWS_AS(z_global(em, s, -0.5), std::domain_error);
}

TEST_CASE("linear predictor contracts covariates against coefficients",
          "[covariate]") {
  auto em = basic_effect();
  CHECK(linear_predictor(em, SubjectCovariates{}) == 0.0);

  em.eta = Eigen::Vector2d(0.5, -1.25);
  SubjectCovariates sc;
  sc.x = Eigen::Vector2d(2.0, 4.0);
  CHECK_THAT(linear_predictor(em, sc), WithinAbs(1.0 - 5.0, 1e-15));

  sc.x = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(linear_predictor(em, sc), std::invalid_argument);
}

TEST_CASE("baseline calibration pins the end-of-window hazard", "[covariate]") {
  const double placebo_daily = 0.04 / 365.0;
  // Reference values fixed from an independent high-precision evaluation of
  // lambda_p * exp(-beta * t_s).
  CHECK_THAT(calibrate_lambda(placebo_daily, basic_effect(0.03, 57.0)),
             WithinRel(1.982090877996e-05, 1e-11));
  CHECK_THAT(calibrate_lambda(placebo_daily, basic_effect(0.03, 56.0)),
             WithinRel(2.042454531939e-05, 1e-11));

  // Round trip: at the freeze point the treated hazard equals the placebo
  // hazard, and before it the treated hazard stays strictly below.
  const double lam = calibrate_lambda(placebo_daily, basic_effect(0.03, 57.0));
  CHECK_THAT(lam * std::exp(0.03 * 57.0), WithinRel(placebo_daily, 1e-14));
  for (double z = 0.0; z < 57.0; z += 3.0) {
    CHECK(lam * std::exp(0.03 * z) < placebo_daily);
  }

  CHECK_THROWS_AS(calibrate_lambda(0.0, basic_effect()), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_lambda(placebo_daily, basic_effect(0.03, -1.0)),
                  std::invalid_argument);
}

TEST_CASE("dose levels map to protection windows", "[covariate]") {
  const auto low = dose_threshold_days(10.0);
  REQUIRE(low.has_value());
  CHECK(*low == 57.0);
  const auto high = dose_threshold_days(30.0);
  REQUIRE(high.has_value());
  CHECK(*high == 81.0);
  CHECK_FALSE(dose_threshold_days(20.0).has_value());
  CHECK_FALSE(dose_threshold_days(0.0).has_value());
}

TEST_CASE("effect model validation rejects malformed inputs", "[covariate]") {
  auto em = basic_effect();
  CHECK_NOTHROW(em.validate());
  em.threshold_days = 0.0;
  CHECK_THROWS_AS(em.validate(), std::invalid_argument);
  em = basic_effect();
  em.beta = std::nan("");
  CHECK_THROWS_AS(em.validate(), std::invalid_argument);
}
