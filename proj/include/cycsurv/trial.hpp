#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cycsurv/covariate.hpp"
#include "cycsurv/cox.hpp"
#include "cycsurv/hazard.hpp"
#include "cycsurv/schedule.hpp"
#include "cycsurv/single_dose.hpp"
#include "cycsurv/stats.hpp"

namespace cycsurv {

// Multi-arm trial simulation: placebo plus any number of treated arms, many
// independent trials, optional per-trial Cox fits, deterministic output for a
// given (config, master_seed) regardless of thread count.

struct ArmSpec {
  std::string label;
  int n = 0;
  bool placebo = false;
  double threshold_days = 0.0;   // protection duration t_s (treated arms)
  double dose_mg_per_kg = 0.0;   // informational
};

struct TrialConfig {
  enum class Approach { SingleDose, MultipleDose };

  int config_version = 1;
  Approach approach = Approach::SingleDose;
  BaselineHazard::Family family = BaselineHazard::Family::Exponential;
  double weibull_gamma = 1.0;   // used when family == Weibull
  double gompertz_alpha = 0.0;  // used when family == Gompertz

  double lambda_placebo_per_year = 0.04;  // placebo incidence, events/person-year
  double beta = 0.0;                      // log-hazard slope per day of z
  Eigen::VectorXd eta;                    // fixed-covariate coefficients
  Eigen::VectorXd x_sd;                   // per-covariate N(0, sd) draw scales

  // Treated-arm rates are calibrated so the end-of-protection hazard equals
  // the placebo rate.  By default each arm calibrates at its own
  // threshold_days; a value >= 0 here pins the calibration time instead
  // (e.g. to the nominal inter-visit gap).
  double calibration_threshold_days = -1.0;

  AdherenceConfig adherence;
  int max_infusions = 10;
  double study_end = 560.0;  // days

  int trials = 1;
  std::vector<ArmSpec> arms;

  // Per-trial, per-treated-arm Cox fits on counting-process rows.  By default
  // each treated arm is fitted alone; fit_include_placebo pools the placebo
  // arm's rows into every treated-arm fit.
  bool run_fits = false;
  double fit_step = 1.0;
  ZSpec fit_zspec = ZSpec::Unclamped;
  bool fit_include_placebo = false;

  int threads = 1;

  // Throws std::invalid_argument with a descriptive message on any
  // inconsistency (so bad configs fail before simulation starts).
  void validate() const;

  double lambda_placebo_per_day() const {
    return lambda_placebo_per_year / 365.0;
  }
};

// Flat key = value file ('#' comments, blank lines ignored); must carry
// config_version = 1.  `overrides` entries ("key=value") are applied on top.
// Unknown keys are errors.  See README for the key reference.
TrialConfig parse_config(const std::string& path,
                         const std::vector<std::string>& overrides = {});

struct SubjectRecord {
  std::int64_t id = 0;  // unique across trials
  int arm = 0;          // index into TrialConfig::arms
  SubjectOutcome outcome;
  double last_infusion_time = 0.0;  // most recent infusion <= outcome.time
  double gap_at_outcome = 0.0;      // outcome.time - last_infusion_time
  InfusionSchedule schedule;
  SubjectCovariates covs;
};

struct TrialData {
  int trial = 0;
  std::vector<SubjectRecord> subjects;  // arm-major, subject order within arm
};

// Simulates one trial.  Every subject's draws come from its own stream
// derived from (master_seed, trial_index, subject index within trial), in a
// fixed order: schedule first, then fixed covariates, then event draws.
TrialData run_trial(const TrialConfig& cfg, std::uint64_t master_seed,
                    int trial_index);

struct FitRecord {
  int trial = 0;
  int arm = 0;
  double beta_hat = 0.0;
  double se = 0.0;
  FitStatus status = FitStatus::Converged;
  bool estimable = true;  // false: no events / no covariate variation
  int events = 0;         // events in the fitted dataset
};

// Per-trial fits for every treated arm (see TrialConfig fit options).
std::vector<FitRecord> fit_trial(const TrialConfig& cfg, const TrialData& data);

// Pooled description of a run.  Event-time/gap statistics, histograms and
// per-cycle event probabilities pool events across trials; counts are also
// kept per (trial, arm) for the summary CSV.
struct ArmSummary {
  std::string label;
  long long n = 0;
  long long events = 0;
  RunningStat event_time;     // over events
  RunningStat gap_at_event;   // time since prior infusion, over events
  std::vector<double> event_times;        // pooled, for quantiles
  std::vector<long long> cycle_events;    // nominal cycles 1..C
  std::vector<long long> cycle_at_risk;   // at risk at each cycle start
  std::vector<long long> gap_hist;        // 7-day bins of gap_at_event
  std::vector<long long> time_hist;       // 28-day bins of event time
};

struct TrialArmCount {
  int trial = 0;
  int arm = 0;
  long long n = 0;
  long long events = 0;
};

struct TrialSummary {
  int trials = 0;
  std::vector<ArmSummary> arms;
  std::vector<TrialArmCount> counts;  // trial-major
  std::vector<FitRecord> fits;        // trial-major

  // Probability of an event in nominal cycle c given at risk at its start;
  // NaN when nobody is at risk (cycle undefined).
  double cycle_probability(int arm, int cycle_index) const;
};

TrialSummary summarize(const TrialConfig& cfg,
                       const std::vector<TrialData>& trials,
                       const std::vector<FitRecord>& fits = {});

struct RunResult {
  TrialSummary summary;
  // outcomes.csv body lines in trial-major, arm-major, subject order
  // (retained only when requested, headers excluded).
  std::vector<std::string> outcome_lines;
};

// Runs cfg.trials trials on cfg.threads threads (trial i goes to thread
// i % threads) and merges results in trial order, so output is identical for
// any thread count.  keep_outcomes controls whether outcomes.csv lines are
// retained.
RunResult run_trials(const TrialConfig& cfg, std::uint64_t master_seed,
                     bool keep_outcomes = false);

// Writes outcomes.csv (when retained), summary.csv, cycle_risk.csv,
// hist_gap_at_event.csv and hist_event_times.csv into out_dir.  Columns are
// documented in the README; all numbers use 17 significant digits.
void emit(const TrialConfig& cfg, const RunResult& result,
          const std::string& out_dir);

}  // namespace cycsurv
