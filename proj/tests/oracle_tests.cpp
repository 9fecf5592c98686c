#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cycsurv/oracle.hpp"

using namespace cycsurv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kLambda = 1e-4;

EffectModel effect(double beta = 0.03, double threshold = 57.0) {
  EffectModel em;
  em.beta = beta;
  em.threshold_days = threshold;
  return em;
}

InfusionSchedule single_dose_path() {
  InfusionSchedule s;
  s.times = {0.0};
  s.study_end = 1e5;
  return s;
}

InfusionSchedule grid_schedule() {
  InfusionSchedule s;
  for (int k = 0; k < 10; ++k) s.times.push_back(56.0 * k);
  s.study_end = 560.0;
  return s;
}

}  // namespace

TEST_CASE("quadrature reproduces closed cumulative hazards when the exposure "
          "effect is off",
          "[oracle]") {
  // With beta = 0, a single infusion, and a threshold past the end of the
  // study the trajectory hazard is exactly the baseline, so H from quadrature
  // must match the closed-form integral.  (A binding threshold would still
  // freeze the baseline clock even at beta = 0.)
  const BaselineHazard baselines[] = {BaselineHazard::exponential(2e-4),
                                      BaselineHazard::weibull(1e-4, 1.5),
                                      BaselineHazard::weibull(3e-4, 0.8),
                                      BaselineHazard::gompertz(1e-4, 0.004)};
  InfusionSchedule once;
  once.times = {0.0};
  once.study_end = 600.0;
  for (const auto& b : baselines) {
    const HazardPath path(b, effect(0.0, 1e9), {}, once);
    for (double t : {0.5, 11.0, 57.0, 123.4, 500.0}) {
      CHECK_THAT(path.cumulative_hazard(t),
                 WithinRel(cumulative_baseline(b, t), 1e-9));
    }
  }
}

TEST_CASE("trajectory hazard renews at infusions and freezes past the "
          "threshold",
          "[oracle]") {
  const HazardPath path(BaselineHazard::exponential(kLambda), effect(), {},
                        grid_schedule());
  // Renewal: the hazard ten days into cycle two equals ten days into cycle
  // one.
  CHECK_THAT(path.hazard(56.0 + 10.0), WithinRel(path.hazard(10.0), 1e-14));

  InfusionSchedule sparse;
  sparse.times = {0.0, 120.0};
  sparse.study_end = 2000.0;
  const HazardPath long_gap(BaselineHazard::exponential(kLambda), effect(), {},
                            sparse);
  // Freeze: beyond t_s = 57 the hazard holds its threshold value.
  CHECK_THAT(long_gap.hazard(80.0), WithinRel(long_gap.hazard(57.0), 1e-14));
  CHECK_THAT(long_gap.hazard(119.9), WithinRel(long_gap.hazard(57.0), 1e-14));
  CHECK(long_gap.hazard(121.0) < long_gap.hazard(119.0));
}

TEST_CASE("oracle values fixed during development still hold", "[oracle]") {
  // These reference numbers were computed by an external quadrature +
  // root-finding implementation before this class was written; they pin the
  // oracle itself.
  const SubjectCovariates none;
  const HazardPath exp_path(BaselineHazard::exponential(kLambda), effect(),
                            none, single_dose_path());
  CHECK_THAT(exp_path.cumulative_hazard(8.745475482250),
             WithinAbs(0.001, 1e-12));
  CHECK_THAT(exp_path.invert(0.001), WithinAbs(8.745475482250, 1e-7));
  CHECK_THAT(exp_path.invert(0.03), WithinAbs(83.955264205707, 1e-7));

  const HazardPath wei_path(BaselineHazard::weibull(kLambda, 1.5), effect(),
                            none, single_dose_path());
  CHECK_THAT(wei_path.cumulative_hazard(57.0),
             WithinRel(1.318756942653e-01, 1e-10));
  CHECK_THAT(wei_path.invert(0.005), WithinAbs(11.753622751716, 1e-7));

  const HazardPath gom_path(BaselineHazard::gompertz(kLambda, 0.005), effect(),
                            none, single_dose_path());
  CHECK_THAT(gom_path.invert(0.001), WithinAbs(8.574416927153, 1e-7));

  const HazardPath grid_path(BaselineHazard::exponential(kLambda), effect(),
                             none, grid_schedule());
  CHECK_THAT(grid_path.cumulative_hazard(56.0),
             WithinRel(1.455185323707e-02, 1e-10));
  CHECK_THAT(grid_path.invert(0.02), WithinAbs(88.289072166587, 1e-7));

  InfusionSchedule sparse;
  sparse.times = {0.0, 120.0};
  sparse.study_end = 2000.0;
  const HazardPath sparse_path(BaselineHazard::exponential(kLambda), effect(),
                               none, sparse);
  CHECK_THAT(sparse_path.cumulative_hazard(120.0),
             WithinRel(4.992899556778e-02, 1e-10));
  CHECK_THAT(sparse_path.invert(0.06), WithinAbs(166.386852136478, 1e-7));
}

TEST_CASE("inversion is a right inverse of the cumulative hazard", "[oracle]") {
  const HazardPath path(BaselineHazard::weibull(kLambda, 1.5), effect(), {},
                        grid_schedule());
  for (double t : {3.0, 55.9, 56.1, 113.0, 250.0, 392.5, 559.0}) {
    const double h = path.cumulative_hazard(t);
    CHECK_THAT(path.invert(h), WithinAbs(t, 1e-6));
  }
}

TEST_CASE("targets beyond the trajectory hazard report censoring", "[oracle]") {
  const HazardPath path(BaselineHazard::exponential(kLambda), effect(), {},
                        grid_schedule());
  const double total = path.cumulative_hazard(560.0);
  CHECK(path.invert(total * 1.0001) == HazardPath::kCensored);
  const double almost = path.invert(total * 0.9999);
  CHECK(almost < 560.0);
  CHECK(almost > 550.0);
}

TEST_CASE("fixed covariates scale the whole trajectory", "[oracle]") {
  auto em = effect();
  em.eta = Eigen::VectorXd::Constant(1, 0.7);
  SubjectCovariates sc;
  sc.x = Eigen::VectorXd::Constant(1, 1.0);
  const HazardPath scaled(BaselineHazard::exponential(kLambda), em, sc,
                          grid_schedule());
  const HazardPath plain(BaselineHazard::exponential(kLambda), effect(), {},
                         grid_schedule());
  for (double t : {10.0, 100.0, 400.0}) {
    CHECK_THAT(scaled.cumulative_hazard(t),
               WithinRel(std::exp(0.7) * plain.cumulative_hazard(t), 1e-10));
  }
}

TEST_CASE("oracle rejects out-of-domain queries", "[oracle]") {
  const HazardPath path(BaselineHazard::exponential(kLambda), effect(), {},
                        grid_schedule());
  CHECK_THROWS_AS(path.cumulative_hazard(-1.0), std::domain_error);
  CHECK_THROWS_AS(path.invert(-0.5), std::invalid_argument);
  CHECK(path.invert(0.0) == 0.0);
}
