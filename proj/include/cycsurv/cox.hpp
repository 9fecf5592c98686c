#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cycsurv/covariate.hpp"
#include "cycsurv/schedule.hpp"
#include "cycsurv/single_dose.hpp"

namespace cycsurv {

// One (t_start, t_stop] interval of a subject's follow-up with the covariate
// values in force at t_start.  Per subject the rows partition (0, S] and at
// most the final row has event = true.
struct CountingProcessRow {
  std::int32_t subject_id = 0;
  double t_start = 0.0;
  double t_stop = 0.0;
  bool event = false;
  double z = 0.0;
  Eigen::VectorXd x;  // fixed covariates (may be empty)
};

// How the analysis covariate is computed when expanding follow-up into rows.
// Clamped matches the generating model (z capped at threshold_days);
// Unclamped is plain time-since-last-infusion, the specification an analyst
// uses when the protection threshold is unknown.
enum class ZSpec { Clamped, Unclamped };

// Splits each subject's follow-up at every multiple of `step`, every infusion
// time and the outcome time, evaluating z at each row's start.  outcomes and
// schedules run in parallel (same index = same subject); subject_id is the
// index.  covs, when given, supplies per-subject fixed covariates for the
// rows' x.  step <= 0 throws.
std::vector<CountingProcessRow> expand_counting_process(
    const std::vector<SubjectOutcome>& outcomes,
    const std::vector<InfusionSchedule>& schedules, const EffectModel& em,
    ZSpec zspec, double step = 1.0,
    const std::vector<SubjectCovariates>* covs = nullptr);

enum class FitStatus { Converged, MaxIterations, Separation };

struct FitResult {
  double beta = 0.0;  // coefficient on z
  double se = 0.0;
  Eigen::VectorXd eta;     // coefficients on x (when fitted)
  Eigen::VectorXd eta_se;
  double loglik = 0.0;
  int iterations = 0;
  FitStatus status = FitStatus::Converged;
  bool converged() const { return status == FitStatus::Converged; }
  std::vector<double> loglik_trace;  // log-likelihood after each iteration
};

// Maximum partial likelihood for the coefficient on z (plus the x
// coefficients when include_x), with Breslow's approximation for tied event
// times and risk sets formed from the rows: at event time tau the risk set
// is every row with t_start < tau <= t_stop.  Newton-Raphson with
// step-halving whenever a step would decrease the log-likelihood, so the
// trace is nondecreasing.  Stops when both the gradient norm < 1e-8 and the
// log-likelihood change < 1e-10; gives up with MaxIterations after 100
// iterations and flags Separation when |beta| exceeds 50 (monotone
// likelihood).  Throws std::invalid_argument when there are no events or the
// covariate never varies within the data.
FitResult fit_cox(std::vector<CountingProcessRow> rows, bool include_x = false);

// Counting-process CSV exchange; header is
// id,tstart,tstop,event,z,x1,...,xp (p inferred on read).
void write_rows_csv(const std::string& path,
                    const std::vector<CountingProcessRow>& rows);
std::vector<CountingProcessRow> read_rows_csv(const std::string& path);

}  // namespace cycsurv
