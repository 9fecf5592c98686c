#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cycsurv/csv.hpp"
#include "cycsurv/stats.hpp"
#include "cycsurv/trial.hpp"

using namespace cycsurv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

class TempConfig {
 public:
  explicit TempConfig(const std::string& contents) {
    path_ = (std::filesystem::temp_directory_path() /
             ("cycsurv_trial_cfg_" + std::to_string(counter_++) + ".cfg"))
                .string();
    std::ofstream out(path_);
    out << contents;
  }
  ~TempConfig() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::string path_;
};

const char* kFullConfig = R"(# two-arm test configuration
config_version = 1
approach = single_dose
distribution = exponential
lambda_placebo_per_year = 0.04
beta = 0.03
miss_prob = 0.02
window_low_days = -7
window_high_days = 49
study_end_days = 560
max_infusions = 10
trials = 2
run_fits = false

arm.1.label = placebo
arm.1.type = placebo
arm.1.n = 100

arm.2.label = low_dose
arm.2.type = treated
arm.2.n = 120
arm.2.dose_mg_per_kg = 10
)";

TrialConfig tiny_config() {
  TrialConfig cfg;
  cfg.lambda_placebo_per_year = 0.5;
  cfg.beta = 0.03;
  cfg.study_end = 560.0;
  ArmSpec placebo;
  placebo.label = "placebo";
  placebo.n = 50;
  placebo.placebo = true;
  ArmSpec treated;
  treated.label = "treated";
  treated.n = 60;
  treated.threshold_days = 57.0;
  cfg.arms = {placebo, treated};
  return cfg;
}

}  // namespace

TEST_CASE("config files parse with dotted arm tables and overrides",
          "[trial]") {
  TempConfig f(kFullConfig);
  const auto cfg = parse_config(f.path());
  CHECK(cfg.approach == TrialConfig::Approach::SingleDose);
  CHECK(cfg.lambda_placebo_per_year == 0.04);
  CHECK(cfg.beta == 0.03);
  CHECK(cfg.adherence.miss_prob == 0.02);
  CHECK(cfg.adherence.window_low == -7.0);
  CHECK(cfg.adherence.window_high == 49.0);
  CHECK(cfg.trials == 2);
  REQUIRE(cfg.arms.size() == 2);
  CHECK(cfg.arms[0].placebo);
  CHECK(cfg.arms[0].n == 100);
  CHECK(cfg.arms[1].label == "low_dose");
  // 10 mg/kg resolves to the published 57-day protection window.
  CHECK(cfg.arms[1].threshold_days == 57.0);

  const auto tweaked = parse_config(f.path(), {"trials=7", "beta=0.01"});
  CHECK(tweaked.trials == 7);
  CHECK(tweaked.beta == 0.01);
}

TEST_CASE("malformed configs fail with descriptive errors", "[trial]") {
  SECTION("unknown keys are rejected") {
    TempConfig f(std::string(kFullConfig) + "lambda_placebo = 0.04\n");
    CHECK_THROWS_WITH(parse_config(f.path()),
                      Catch::Matchers::ContainsSubstring("lambda_placebo"));
  }
  SECTION("the version marker is mandatory") {
    TempConfig f("trials = 2\narm.1.label = a\narm.1.type = placebo\narm.1.n = 5\n");
    CHECK_THROWS_WITH(parse_config(f.path()),
                      Catch::Matchers::ContainsSubstring("config_version"));
  }
  SECTION("future versions are refused") {
    TempConfig f(std::string(kFullConfig) + "config_version = 2\n");
    CHECK_THROWS_AS(parse_config(f.path()), std::invalid_argument);
  }
  SECTION("unknown doses need an explicit protection window") {
    std::string cfg(kFullConfig);
    const auto pos = cfg.find("arm.2.dose_mg_per_kg = 10");
    cfg.replace(pos, std::string("arm.2.dose_mg_per_kg = 10").size(),
                "arm.2.dose_mg_per_kg = 15");
    TempConfig f(cfg);
    CHECK_THROWS_AS(parse_config(f.path()), std::invalid_argument);
  }
  SECTION("non-numeric values are flagged with their key") {
    TempConfig f(std::string(kFullConfig) + "beta = fast\n");
    CHECK_THROWS_WITH(parse_config(f.path()),
                      Catch::Matchers::ContainsSubstring("beta"));
  }
}

TEST_CASE("configuration invariants are enforced before running", "[trial]") {
  auto cfg = tiny_config();
  CHECK_NOTHROW(cfg.validate());

  cfg.approach = TrialConfig::Approach::MultipleDose;
  cfg.family = BaselineHazard::Family::Weibull;
  cfg.weibull_gamma = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = tiny_config();
  cfg.arms[1].threshold_days = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = tiny_config();
  cfg.arms.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("identical seeds give identical trials", "[trial]") {
  const auto cfg = tiny_config();
  const auto a = run_trial(cfg, 909, 3);
  const auto b = run_trial(cfg, 909, 3);
  REQUIRE(a.subjects.size() == b.subjects.size());
  for (std::size_t i = 0; i < a.subjects.size(); ++i) {
    CHECK(a.subjects[i].id == b.subjects[i].id);
    CHECK(a.subjects[i].outcome.time == b.subjects[i].outcome.time);
    CHECK(a.subjects[i].outcome.event == b.subjects[i].outcome.event);
    CHECK(a.subjects[i].schedule.times == b.subjects[i].schedule.times);
  }
  // A different trial index reseeds every subject.
  const auto c = run_trial(cfg, 909, 4);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.subjects.size(); ++i) {
    if (a.subjects[i].outcome.time != c.subjects[i].outcome.time)
      any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("subject records carry consistent infusion bookkeeping", "[trial]") {
  auto cfg = tiny_config();
  cfg.adherence.miss_prob = 0.1;
  cfg.adherence.window_low = -7.0;
  cfg.adherence.window_high = 49.0;
  const auto data = run_trial(cfg, 17, 0);
  REQUIRE(data.subjects.size() == 110);
  std::int64_t prev_id = -1;
  for (const auto& rec : data.subjects) {
    CHECK(rec.id == prev_id + 1);  // arm-major, contiguous ids
    prev_id = rec.id;
    CHECK(rec.gap_at_outcome >= 0.0);
    CHECK_THAT(rec.last_infusion_time + rec.gap_at_outcome,
               WithinAbs(rec.outcome.time, 1e-12));
    // last_infusion_time really is the latest infusion at or before the
    // outcome.
    for (double t : rec.schedule.times) {
      if (t <= rec.outcome.time) CHECK(t <= rec.last_infusion_time);
    }
    if (rec.outcome.event) {
      CHECK(rec.outcome.time < cfg.study_end);
      CHECK(rec.outcome.interval_index >= 0);
    } else {
      CHECK(rec.outcome.time == cfg.study_end);
    }
  }
}

TEST_CASE("placebo times are exponential with the configured incidence",
          "[trial][slow]") {
  TrialConfig cfg;
  cfg.lambda_placebo_per_year = 0.5;
  cfg.study_end = 1e6;  // effectively no censoring
  ArmSpec arm;
  arm.label = "placebo";
  arm.n = 30000;
  arm.placebo = true;
  cfg.arms = {arm};

  const auto data = run_trial(cfg, 5551, 0);
  std::vector<double> scaled;
  scaled.reserve(data.subjects.size());
  const double rate = cfg.lambda_placebo_per_day();
  for (const auto& rec : data.subjects) {
    REQUIRE(rec.outcome.event);
    scaled.push_back(rate * rec.outcome.time);
  }
  const double d = ks_statistic(scaled, exp1_cdf);
  CHECK(d < ks_critical_one_sample(0.01, scaled.size()));
}

TEST_CASE("a zero slope makes treated arms exponential too", "[trial][slow]") {
  // With beta = 0 the calibrated rate equals the placebo rate and the
  // exposure covariate has no effect, so treated times must be exponential
  // regardless of the schedule or the generator approach.
  for (auto approach : {TrialConfig::Approach::SingleDose,
                        TrialConfig::Approach::MultipleDose}) {
    TrialConfig cfg;
    cfg.approach = approach;
    cfg.lambda_placebo_per_year = 0.5;
    cfg.beta = 0.0;
    cfg.study_end = 1e6;
    cfg.adherence.miss_prob = 0.1;
    cfg.adherence.window_low = -7.0;
    cfg.adherence.window_high = 49.0;
    ArmSpec arm;
    arm.label = "treated";
    arm.n = 30000;
    arm.threshold_days = 57.0;
    cfg.arms = {arm};

    const auto data = run_trial(cfg, 7321, 0);
    std::vector<double> scaled;
    const double rate = cfg.lambda_placebo_per_day();
    for (const auto& rec : data.subjects) {
      REQUIRE(rec.outcome.event);
      scaled.push_back(rate * rec.outcome.time);
    }
    const double d = ks_statistic(scaled, exp1_cdf);
    CHECK(d < ks_critical_one_sample(0.01, scaled.size()));
  }
}

TEST_CASE("summaries aggregate per-cycle counts as hand-computed", "[trial]") {
  TrialConfig cfg;
  cfg.lambda_placebo_per_year = 0.5;
  cfg.study_end = 112.0;  // two nominal 56-day cycles
  cfg.max_infusions = 2;
  ArmSpec placebo;
  placebo.label = "placebo";
  placebo.n = 3;
  placebo.placebo = true;
  ArmSpec treated;
  treated.label = "treated";
  treated.n = 2;
  treated.threshold_days = 57.0;
  cfg.arms = {placebo, treated};

  InfusionSchedule sched;
  sched.times = {0.0, 56.0};
  sched.study_end = 112.0;

  TrialData data;
  data.trial = 0;
  auto add = [&](int arm, double time, bool event, double last_infusion) {
    SubjectRecord rec;
    rec.id = static_cast<std::int64_t>(data.subjects.size());
    rec.arm = arm;
    rec.outcome.time = time;
    rec.outcome.event = event;
    rec.outcome.interval_index = event ? (time <= 56.0 ? 0 : 1) : -1;
    rec.schedule = sched;
    rec.last_infusion_time = last_infusion;
    rec.gap_at_outcome = time - last_infusion;
    data.subjects.push_back(std::move(rec));
  };
  add(0, 10.0, true, 0.0);
  add(0, 70.0, true, 56.0);
  add(0, 112.0, false, 56.0);
  add(1, 100.0, true, 56.0);
  add(1, 112.0, false, 56.0);

  const auto s = summarize(cfg, {data});
  REQUIRE(s.arms.size() == 2);
  CHECK(s.trials == 1);
  CHECK(s.arms[0].n == 3);
  CHECK(s.arms[0].events == 2);
  REQUIRE(s.arms[0].cycle_events.size() == 2);
  CHECK(s.arms[0].cycle_events[0] == 1);
  CHECK(s.arms[0].cycle_events[1] == 1);
  CHECK(s.arms[0].cycle_at_risk[0] == 3);
  CHECK(s.arms[0].cycle_at_risk[1] == 2);
  CHECK_THAT(s.cycle_probability(0, 0), WithinAbs(1.0 / 3.0, 1e-15));
  CHECK_THAT(s.cycle_probability(0, 1), WithinAbs(0.5, 1e-15));
  CHECK_THAT(s.arms[0].event_time.mean(), WithinAbs(40.0, 1e-12));
  CHECK_THAT(s.arms[0].gap_at_event.mean(), WithinAbs(12.0, 1e-12));

  // Gap histogram: events fell 10 and 14 days after an infusion -> bins 1
  // and 2 of the 7-day grid.
  CHECK(s.arms[0].gap_hist[1] == 1);
  CHECK(s.arms[0].gap_hist[2] == 1);
  // Event-time histogram: days 10 and 70 -> bins 0 and 2 of the 28-day grid.
  CHECK(s.arms[0].time_hist[0] == 1);
  CHECK(s.arms[0].time_hist[2] == 1);

  CHECK(s.arms[1].events == 1);
  CHECK(s.arms[1].cycle_at_risk[1] == 2);
}

TEST_CASE("cycles with nobody at risk have undefined probability", "[trial]") {
  TrialConfig cfg;
  cfg.lambda_placebo_per_year = 0.5;
  cfg.study_end = 112.0;
  ArmSpec arm;
  arm.label = "placebo";
  arm.n = 1;
  arm.placebo = true;
  cfg.arms = {arm};

  TrialData data;
  data.trial = 0;
  SubjectRecord rec;
  rec.arm = 0;
  rec.outcome.time = 10.0;
  rec.outcome.event = true;
  rec.outcome.interval_index = 0;
  rec.schedule.times = {0.0};
  rec.schedule.study_end = 112.0;
  data.subjects.push_back(rec);

  const auto s = summarize(cfg, {data});
  CHECK(s.arms[0].cycle_at_risk[1] == 0);
  CHECK(std::isnan(s.cycle_probability(0, 1)));
  CHECK_THAT(s.cycle_probability(0, 0), WithinAbs(1.0, 1e-15));
}

TEST_CASE("multithreaded runs merge into identical output", "[trial][slow]") {
  auto cfg = tiny_config();
  cfg.trials = 5;

  cfg.threads = 1;
  const auto serial = run_trials(cfg, 2468, true);
  cfg.threads = 3;
  const auto parallel = run_trials(cfg, 2468, true);

  REQUIRE(serial.outcome_lines.size() == parallel.outcome_lines.size());
  CHECK(serial.outcome_lines == parallel.outcome_lines);
  REQUIRE(serial.summary.counts.size() == parallel.summary.counts.size());
  for (std::size_t i = 0; i < serial.summary.counts.size(); ++i) {
    CHECK(serial.summary.counts[i].trial == parallel.summary.counts[i].trial);
    CHECK(serial.summary.counts[i].events == parallel.summary.counts[i].events);
  }
  for (std::size_t a = 0; a < serial.summary.arms.size(); ++a) {
    CHECK(serial.summary.arms[a].events == parallel.summary.arms[a].events);
    CHECK(serial.summary.arms[a].cycle_events ==
          parallel.summary.arms[a].cycle_events);
    CHECK(serial.summary.arms[a].gap_hist == parallel.summary.arms[a].gap_hist);
  }
}

TEST_CASE("per-trial fits run per treated arm and flag empty data", "[trial]") {
  SECTION("a well-powered arm produces a converged estimate") {
    auto cfg = tiny_config();
    cfg.arms[1].n = 800;
    cfg.run_fits = true;
    cfg.fit_zspec = ZSpec::Clamped;
    cfg.adherence.miss_prob = 0.1;
    cfg.adherence.window_low = -7.0;
    cfg.adherence.window_high = 49.0;
    const auto data = run_trial(cfg, 31415, 0);
    const auto fits = fit_trial(cfg, data);
    REQUIRE(fits.size() == 1);  // treated arms only
    CHECK(fits[0].arm == 1);
    CHECK(fits[0].estimable);
    CHECK(fits[0].status == FitStatus::Converged);
    CHECK(fits[0].events > 50);
    CHECK(std::abs(fits[0].beta_hat) < 0.2);
  }
  SECTION("an arm with no events is reported as not estimable") {
    auto cfg = tiny_config();
    cfg.lambda_placebo_per_year = 1e-5;
    cfg.arms[1].n = 2;
    cfg.run_fits = true;
    const auto data = run_trial(cfg, 99, 0);
    const auto fits = fit_trial(cfg, data);
    REQUIRE(fits.size() == 1);
    CHECK_FALSE(fits[0].estimable);
    CHECK(std::isnan(fits[0].beta_hat));
    CHECK(fits[0].events == 0);
  }
}

TEST_CASE("emitted files round-trip through the CSV reader", "[trial]") {
  auto cfg = tiny_config();
  cfg.trials = 2;
  cfg.run_fits = true;
  cfg.arms[1].n = 200;
  const auto result = run_trials(cfg, 1357, true);

  const auto dir = (std::filesystem::temp_directory_path() /
                    "cycsurv_emit_test")
                       .string();
  std::filesystem::remove_all(dir);
  emit(cfg, result, dir);

  const auto outcomes = read_csv(dir + "/outcomes.csv");
  REQUIRE(outcomes.size() == 1 + result.outcome_lines.size());
  CHECK(outcomes[0] ==
        std::vector<std::string>{"id", "arm", "dose_ts", "S", "event",
                                 "last_infusion_time",
                                 "time_since_prior_infusion"});
  // Every body row has the header's width and parses numerically.
  long long events = 0;
  for (std::size_t i = 1; i < outcomes.size(); ++i) {
    REQUIRE(outcomes[i].size() == 7);
    const double time = std::stod(outcomes[i][3]);
    CHECK(time > 0.0);
    CHECK(time <= cfg.study_end);
    events += outcomes[i][4] == "1" ? 1 : 0;
  }
  CHECK(events == result.summary.arms[0].events + result.summary.arms[1].events);

  const auto summary = read_csv(dir + "/summary.csv");
  // One row per (trial, arm) plus one pooled row per arm, plus the header.
  REQUIRE(summary.size() == 1 + 2 * 2 + 2);
  CHECK(summary[1][0] == "trial");
  CHECK(summary[5][0] == "pooled");

  const auto cycles = read_csv(dir + "/cycle_risk.csv");
  REQUIRE(cycles.size() == 1 + 2 * 10);  // 10 cycles per arm over 560 days

  const auto gaps = read_csv(dir + "/hist_gap_at_event.csv");
  const auto times = read_csv(dir + "/hist_event_times.csv");
  REQUIRE(gaps.size() == 1 + 2 * 80);   // 7-day bins
  REQUIRE(times.size() == 1 + 2 * 20);  // 28-day bins

  std::filesystem::remove_all(dir);
}
