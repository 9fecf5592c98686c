#include "cycsurv/validate.hpp"

#include <cmath>
#include <functional>

#include "cycsurv/multi_dose.hpp"
#include "cycsurv/oracle.hpp"
#include "cycsurv/rng.hpp"
#include "cycsurv/stats.hpp"

namespace cycsurv {

namespace {

EffectModel effect(double beta, double t_s) {
  EffectModel em;
  em.beta = beta;
  em.threshold_days = t_s;
  return em;
}

InfusionSchedule grid_schedule(int infusions, double interval,
                               double study_end) {
  InfusionSchedule s;
  for (int k = 0; k < infusions; ++k) s.times.push_back(k * interval);
  s.study_end = study_end;
  return s;
}

InfusionSchedule make_schedule(std::vector<double> times, double study_end) {
  InfusionSchedule s;
  s.times = std::move(times);
  s.study_end = study_end;
  return s;
}

struct GridConfig {
  BaselineHazard baseline;
  EffectModel em;
  InfusionSchedule schedule;
  bool multi = false;  // invert the whole trajectory instead of one cycle
  double v_max = 0.0;  // sweep v over (0, v_max)
};

std::vector<GridConfig> grid_battery() {
  std::vector<GridConfig> out;

  // Single-dose draws: one infusion, follow-up long enough that every grid
  // point inverts to a finite time.
  const auto single = [](double end) {
    return make_schedule({0.0}, end);
  };
  out.push_back({BaselineHazard::exponential(1.982090877996e-5),
                 effect(0.03, 57.0), single(1.0e5), false, 5.0});
  out.push_back({BaselineHazard::exponential(1.5e-5), effect(0.025, 81.0),
                 single(1.0e5), false, 5.0});
  out.push_back({BaselineHazard::weibull(3.0e-4, 1.5), effect(0.03, 57.0),
                 single(3.0e4), false, 5.0});
  out.push_back({BaselineHazard::weibull(8.0e-4, 0.8), effect(-0.015, 57.0),
                 single(3.0e5), false, 4.0});
  out.push_back({BaselineHazard::gompertz(5.0e-5, 0.005), effect(0.02, 57.0),
                 single(2.0e5), false, 5.0});
  // Slope beta + alpha underflows to the constant-hazard limit.
  out.push_back({BaselineHazard::gompertz(1.0e-4, -0.03), effect(0.03, 70.0),
                 single(1.0e5), false, 5.0});

  // Whole-trajectory inversion, exponential baseline.
  out.push_back({BaselineHazard::exponential(1.982090877996e-5),
                 effect(0.03, 57.0), grid_schedule(10, 56.0, 560.0), true,
                 0.0});
  out.push_back({BaselineHazard::exponential(2.0e-5), effect(0.025, 81.0),
                 make_schedule({0.0, 49.0, 161.0, 217.0, 280.0, 341.0, 392.0,
                                503.0},
                               560.0),
                 true, 0.0});
  out.push_back({BaselineHazard::exponential(1.0e-4), effect(0.02, 57.0),
                 make_schedule({0.0, 120.0, 176.0, 400.0}, 560.0), true, 0.0});
  return out;
}

}  // namespace

OracleCheck oracle_grid_check(int points_per_config) {
  OracleCheck res;
  const SubjectCovariates none;
  for (const auto& gc : grid_battery()) {
    const HazardPath path(gc.baseline, gc.em, none, gc.schedule);
    double v_max = gc.v_max;
    if (gc.multi) {
      // Cover every segment: sweep the full hazard range of the trajectory.
      v_max = path.cumulative_hazard(gc.schedule.study_end) * 0.999;
    }
    for (int i = 0; i < points_per_config; ++i) {
      const double v = (i + 0.5) * v_max / points_per_config;
      const double u = std::exp(-v);

      double closed;
      if (gc.multi) {
        const SubjectOutcome o =
            draw_multi(gc.em, none, gc.baseline.rate, gc.schedule, u);
        if (!o.event) {
          ++res.censor_mismatches;  // v < H(study_end) must be an event
          continue;
        }
        closed = o.time;
      } else {
        SingleDoseDraw d;
        switch (gc.baseline.family) {
          case BaselineHazard::Family::Exponential:
            d = draw_exponential(gc.em, none, gc.baseline.rate, u);
            break;
          case BaselineHazard::Family::Weibull:
            d = draw_weibull(gc.em, none, gc.baseline.rate, gc.baseline.shape,
                             u);
            break;
          case BaselineHazard::Family::Gompertz:
            d = draw_gompertz(gc.em, none, gc.baseline.rate, gc.baseline.shape,
                              u);
            break;
        }
        closed = d.time;
      }

      const double numeric = path.invert(v);
      if (numeric == HazardPath::kCensored) {
        ++res.censor_mismatches;
        continue;
      }
      res.max_abs_err = std::max(res.max_abs_err, std::abs(closed - numeric));
      ++res.points;
    }
  }
  return res;
}

std::vector<PullbackCheck> pullback_checks(std::size_t n, std::uint64_t seed) {
  const SubjectCovariates none;
  struct Case {
    std::string name;
    GridConfig gc;
  };
  std::vector<Case> cases;
  cases.push_back({"exp_single",
                   {BaselineHazard::exponential(1.982090877996e-5),
                    effect(0.03, 57.0), make_schedule({0.0}, 1.0), false}});
  cases.push_back({"weibull_single_gamma_1.5",
                   {BaselineHazard::weibull(1.0e-4, 1.5), effect(0.025, 81.0),
                    make_schedule({0.0}, 1.0), false}});
  cases.push_back({"weibull_single_gamma_0.8",
                   {BaselineHazard::weibull(6.0e-4, 0.8), effect(-0.01, 57.0),
                    make_schedule({0.0}, 1.0), false}});
  cases.push_back({"gompertz_single",
                   {BaselineHazard::gompertz(5.0e-5, 0.004), effect(0.02, 57.0),
                    make_schedule({0.0}, 1.0), false}});
  // Long follow-up keeps every multi-dose draw an event, so the pullback is
  // exactly unit-exponential rather than right-truncated.
  cases.push_back({"multi_grid",
                   {BaselineHazard::exponential(1.982090877996e-5),
                    effect(0.03, 57.0), grid_schedule(10, 56.0, 1.0e6), true}});
  cases.push_back({"multi_long_gaps",
                   {BaselineHazard::exponential(1.0e-4), effect(0.02, 57.0),
                    make_schedule({0.0, 120.0, 176.0, 400.0}, 1.0e6), true}});

  std::vector<PullbackCheck> out;
  std::uint64_t stream = 0;
  for (const auto& c : cases) {
    // The oracle path for a single-dose draw is its (unbounded) first cycle.
    InfusionSchedule osched = c.gc.schedule;
    if (!c.gc.multi) osched.study_end = 1.0e7;
    const HazardPath path(c.gc.baseline, c.gc.em, none, osched);

    auto rng = subject_stream(seed, 0, stream++);
    std::vector<double> pulled;
    pulled.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = uniform_open01(rng);
      double t;
      if (c.gc.multi) {
        const SubjectOutcome o =
            draw_multi(c.gc.em, none, c.gc.baseline.rate, c.gc.schedule, u);
        t = o.time;
      } else {
        switch (c.gc.baseline.family) {
          case BaselineHazard::Family::Exponential:
            t = draw_exponential(c.gc.em, none, c.gc.baseline.rate, u).time;
            break;
          case BaselineHazard::Family::Weibull:
            t = draw_weibull(c.gc.em, none, c.gc.baseline.rate,
                             c.gc.baseline.shape, u)
                    .time;
            break;
          default:
            t = draw_gompertz(c.gc.em, none, c.gc.baseline.rate,
                              c.gc.baseline.shape, u)
                    .time;
            break;
        }
      }
      pulled.push_back(path.cumulative_hazard(t));
    }
    PullbackCheck pc;
    pc.name = c.name;
    pc.n = n;
    pc.d = ks_statistic(std::move(pulled), exp1_cdf);
    pc.critical = ks_critical_one_sample(0.01, n);
    pc.pass = pc.d < pc.critical;
    out.push_back(std::move(pc));
  }
  return out;
}

std::vector<ContinuityCheck> continuity_checks() {
  const SubjectCovariates none;
  std::vector<ContinuityCheck> out;
  const double eps = 1e-13;

  const auto probe = [&](const std::string& name,
                         const std::function<double(double)>& t_of_v,
                         const std::vector<double>& boundaries) {
    ContinuityCheck c{name, 0.0};
    for (double b : boundaries) {
      const double left = t_of_v(b - eps);
      const double right = t_of_v(b + eps);
      c.max_gap = std::max(c.max_gap, std::abs(right - left));
    }
    out.push_back(c);
  };

  {
    const EffectModel em = effect(0.03, 57.0);
    const double lam = 1.982090877996e-5;
    const double boundary = lam * std::expm1(0.03 * 57.0) / 0.03;
    probe("exp_branch",
          [&](double v) {
            return draw_exponential(em, none, lam, std::exp(-v)).time;
          },
          {boundary});
  }
  {
    const EffectModel em = effect(0.025, 81.0);
    const double lam = 3.0e-4, gamma = 1.5;
    const double boundary =
        lam * gamma * growth_integral(gamma, 0.025, 81.0);
    probe("weibull_branch",
          [&](double v) {
            return draw_weibull(em, none, lam, gamma, std::exp(-v)).time;
          },
          {boundary});
  }
  {
    const EffectModel em = effect(0.02, 57.0);
    const double lam = 5.0e-5, alpha = 0.005;
    const double slope = 0.02 + alpha;
    const double boundary = lam * std::expm1(slope * 57.0) / slope;
    probe("gompertz_branch",
          [&](double v) {
            return draw_gompertz(em, none, lam, alpha, std::exp(-v)).time;
          },
          {boundary});
  }
  {
    // Segment boundaries of a long-gap trajectory: every infusion and every
    // intra-gap threshold crossing.
    const EffectModel em = effect(0.02, 57.0);
    const double lam = 1.0e-4;
    const InfusionSchedule s =
        make_schedule({0.0, 120.0, 176.0, 400.0}, 560.0);
    const SegmentBounds b = segment_bounds(em, none, lam, s);
    std::vector<double> boundaries;
    for (std::size_t k = 1; k < b.lower.size(); ++k) {
      boundaries.push_back(b.lower[k]);
    }
    const double scale = lam;  // eta'x = 0
    for (std::size_t k = 0; k < b.lower.size(); ++k) {
      const double gap_end = k + 1 < s.times.size() ? s.times[k + 1] : s.study_end;
      if (gap_end - s.times[k] > em.threshold_days) {
        boundaries.push_back(b.lower[k] + scale *
                                              std::expm1(em.beta * em.threshold_days) /
                                              em.beta);
      }
    }
    probe("multi_segments",
          [&](double v) {
            return draw_multi(em, none, lam, s, std::exp(-v)).time;
          },
          boundaries);
  }
  return out;
}

TwoSampleCheck cross_approach_check(std::size_t n, std::uint64_t seed) {
  // Identical parameters, perfect adherence; only the inversion differs.
  const SubjectCovariates none;
  const EffectModel em = effect(0.03, 57.0);
  const double lambda_p = 0.5 / 365.0;
  const double lam = calibrate_lambda(lambda_p, em);
  const InfusionSchedule s = grid_schedule(10, 56.0, 560.0);

  std::vector<double> agg, direct;
  agg.reserve(n);
  direct.reserve(n);
  auto rng_a = subject_stream(seed, 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    agg.push_back(aggregate_multidose(
                      s, [&](double u) { return draw_exponential(em, none, lam, u); },
                      rng_a)
                      .time);
  }
  auto rng_b = subject_stream(seed, 2, 0);
  for (std::size_t i = 0; i < n; ++i) {
    direct.push_back(draw_multi(em, none, lam, s, uniform_open01(rng_b)).time);
  }

  TwoSampleCheck c;
  c.n = n;
  c.m = n;
  c.d = ks_two_sample(std::move(agg), std::move(direct));
  c.critical = ks_critical_two_sample(0.01, n, n);
  c.pass = c.d < c.critical;
  return c;
}

}  // namespace cycsurv
