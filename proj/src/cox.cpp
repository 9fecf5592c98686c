#include "cycsurv/cox.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "cycsurv/csv.hpp"

namespace cycsurv {

std::vector<CountingProcessRow> expand_counting_process(
    const std::vector<SubjectOutcome>& outcomes,
    const std::vector<InfusionSchedule>& schedules, const EffectModel& em,
    ZSpec zspec, double step, const std::vector<SubjectCovariates>* covs) {
  if (outcomes.size() != schedules.size()) {
    throw std::invalid_argument("outcomes and schedules differ in length");
  }
  if (covs && covs->size() != outcomes.size()) {
    throw std::invalid_argument("covariates and outcomes differ in length");
  }
  if (!(step > 0.0)) {
    throw std::invalid_argument("step must be positive");
  }

  EffectModel zm = em;
  if (zspec == ZSpec::Unclamped) {
    zm.threshold_days = std::numeric_limits<double>::infinity();
  }

  std::vector<CountingProcessRow> rows;
  std::vector<double> cuts;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const double s_time = outcomes[i].time;
    if (!(s_time > 0.0)) {
      throw std::invalid_argument("outcome time must be positive");
    }
    cuts.clear();
    for (double t = step; t < s_time; t += step) cuts.push_back(t);
    for (double t : schedules[i].times) {
      if (t > 0.0 && t < s_time) cuts.push_back(t);
    }
    cuts.push_back(s_time);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double prev = 0.0;
    for (double cut : cuts) {
      CountingProcessRow r;
      r.subject_id = static_cast<std::int32_t>(i);
      r.t_start = prev;
      r.t_stop = cut;
      r.event = outcomes[i].event && cut == s_time;
      r.z = z_global(zm, schedules[i], prev);
      if (covs) r.x = (*covs)[i].x;
      rows.push_back(std::move(r));
      prev = cut;
    }
  }
  return rows;
}

namespace {

// Risk-set structure gathered once per fit: for each unique event time, the
// covariate vectors of everyone at risk, plus the sums over the tied events
// themselves.  Newton iterations then never touch the rows again.
struct RiskCache {
  int p = 0;                      // covariate dimension (1 + #x when used)
  std::vector<int> ties;          // events at each unique time
  std::vector<std::size_t> offset;  // risk-entry span per unique time
  Eigen::MatrixXd risk;           // p x total risk entries
  Eigen::MatrixXd tie_sum;        // p x unique times

  double loglik(const Eigen::VectorXd& theta) const;
  void derivatives(const Eigen::VectorXd& theta, double& ll,
                   Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const;
};

double RiskCache::loglik(const Eigen::VectorXd& theta) const {
  double ll = 0.0;
  for (std::size_t j = 0; j + 1 < offset.size(); ++j) {
    double s0 = 0.0;
    for (std::size_t k = offset[j]; k < offset[j + 1]; ++k) {
      s0 += std::exp(theta.dot(risk.col(static_cast<Eigen::Index>(k))));
    }
    ll += theta.dot(tie_sum.col(static_cast<Eigen::Index>(j))) -
          ties[j] * std::log(s0);
  }
  return ll;
}

void RiskCache::derivatives(const Eigen::VectorXd& theta, double& ll,
                            Eigen::VectorXd& grad,
                            Eigen::MatrixXd& hess) const {
  ll = 0.0;
  grad = Eigen::VectorXd::Zero(p);
  hess = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd s1(p);
  Eigen::MatrixXd s2(p, p);
  for (std::size_t j = 0; j + 1 < offset.size(); ++j) {
    double s0 = 0.0;
    s1.setZero();
    s2.setZero();
    for (std::size_t k = offset[j]; k < offset[j + 1]; ++k) {
      const auto w = risk.col(static_cast<Eigen::Index>(k));
      const double e = std::exp(theta.dot(w));
      s0 += e;
      s1 += e * w;
      s2 += e * w * w.transpose();
    }
    const double d = ties[j];
    const Eigen::VectorXd mean = s1 / s0;
    ll += theta.dot(tie_sum.col(static_cast<Eigen::Index>(j))) -
          d * std::log(s0);
    grad += tie_sum.col(static_cast<Eigen::Index>(j)) - d * mean;
    hess -= d * (s2 / s0 - mean * mean.transpose());
  }
}

struct SubjectSpan {
  std::size_t begin = 0, end = 0;  // row range
  double s_time = 0.0;             // final t_stop
};

}  // namespace

FitResult fit_cox(std::vector<CountingProcessRow> rows, bool include_x) {
  if (rows.empty()) {
    throw std::invalid_argument("fit_cox: no rows");
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const CountingProcessRow& a, const CountingProcessRow& b) {
                     if (a.subject_id != b.subject_id)
                       return a.subject_id < b.subject_id;
                     return a.t_start < b.t_start;
                   });

  const Eigen::Index px = include_x ? rows.front().x.size() : 0;
  const int p = 1 + static_cast<int>(px);

  // Validate the per-subject partition structure and collect spans.
  std::vector<SubjectSpan> subjects;
  for (std::size_t i = 0; i < rows.size();) {
    SubjectSpan span;
    span.begin = i;
    const auto id = rows[i].subject_id;
    if (rows[i].t_start != 0.0) {
      throw std::invalid_argument("fit_cox: first row must start at 0");
    }
    double prev_stop = 0.0;
    while (i < rows.size() && rows[i].subject_id == id) {
      const auto& r = rows[i];
      if (!(r.t_stop > r.t_start)) {
        throw std::invalid_argument("fit_cox: rows must have t_stop > t_start");
      }
      if (r.t_start != prev_stop) {
        throw std::invalid_argument("fit_cox: rows must tile follow-up without gaps");
      }
      if (include_x && r.x.size() != px) {
        throw std::invalid_argument("fit_cox: inconsistent covariate length");
      }
      prev_stop = r.t_stop;
      ++i;
      if (r.event && i < rows.size() && rows[i].subject_id == id) {
        throw std::invalid_argument("fit_cox: event before final row");
      }
    }
    span.end = i;
    span.s_time = prev_stop;
    subjects.push_back(span);
  }

  // Unique event times, ascending, with tie counts.
  std::vector<double> event_times;
  for (const auto& r : rows) {
    if (r.event) event_times.push_back(r.t_stop);
  }
  if (event_times.empty()) {
    throw std::invalid_argument("fit_cox: no events");
  }
  std::sort(event_times.begin(), event_times.end());

  bool varies = false;
  for (const auto& r : rows) {
    if (r.z != rows.front().z) varies = true;
    if (include_x && px > 0 &&
        (r.x.array() != rows.front().x.array()).any()) {
      varies = true;
    }
  }
  if (!varies) {
    throw std::invalid_argument("fit_cox: no covariate variation");
  }

  // Build the risk cache.  At event time tau everyone with follow-up through
  // tau is at risk via the row covering (t_start, t_stop] containing tau.
  RiskCache cache;
  cache.p = p;
  cache.offset.push_back(0);
  std::vector<double> unique_times;
  std::vector<double> risk_cols;
  std::vector<double> tie_cols;
  for (std::size_t j = 0; j < event_times.size();) {
    const double tau = event_times[j];
    int d = 0;
    while (j < event_times.size() && event_times[j] == tau) {
      ++d;
      ++j;
    }
    unique_times.push_back(tau);
    cache.ties.push_back(d);

    Eigen::VectorXd tie_sum = Eigen::VectorXd::Zero(p);
    for (const auto& span : subjects) {
      if (span.s_time < tau) continue;
      // First row of the subject with t_stop >= tau covers tau.
      auto lo = rows.begin() + static_cast<std::ptrdiff_t>(span.begin);
      auto hi = rows.begin() + static_cast<std::ptrdiff_t>(span.end);
      auto cover = std::lower_bound(
          lo, hi, tau, [](const CountingProcessRow& r, double t) {
            return r.t_stop < t;
          });
      risk_cols.push_back(cover->z);
      for (Eigen::Index c = 0; c < px; ++c) risk_cols.push_back(cover->x[c]);
      if (cover->event && cover->t_stop == tau) {
        tie_sum[0] += cover->z;
        for (Eigen::Index c = 0; c < px; ++c) tie_sum[1 + c] += cover->x[c];
      }
    }
    for (int c = 0; c < p; ++c) tie_cols.push_back(tie_sum[c]);
    cache.offset.push_back(risk_cols.size() / static_cast<std::size_t>(p));
  }
  const Eigen::Index pe = p;
  cache.risk = Eigen::Map<Eigen::MatrixXd>(
      risk_cols.data(), pe, static_cast<Eigen::Index>(risk_cols.size()) / pe);
  cache.tie_sum = Eigen::Map<Eigen::MatrixXd>(
      tie_cols.data(), pe, static_cast<Eigen::Index>(unique_times.size()));

  // Newton-Raphson with step-halving, starting from zero.
  FitResult res;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
  double ll_prev = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd grad(p);
  Eigen::MatrixXd hess(p, p);
  double ll = 0.0;
  for (int iter = 1; iter <= 100; ++iter) {
    cache.derivatives(theta, ll, grad, hess);
    res.iterations = iter;
    res.loglik_trace.push_back(ll);
    const double ll_scale = std::max(1.0, std::abs(ll));
    if (std::abs(theta[0]) > 50.0) {
      res.status = FitStatus::Separation;
      break;
    }
    const auto ldlt = Eigen::MatrixXd(-hess).ldlt();
    if (iter == 1) {
      // A singular information matrix at theta = 0 means some covariate has
      // no within-risk-set variation, so its coefficient is unidentifiable.
      const double max_d = ldlt.vectorD().maxCoeff();
      if (ldlt.info() != Eigen::Success ||
          !(ldlt.vectorD().minCoeff() > 1e-12 * std::max(max_d, 0.0))) {
        throw std::invalid_argument(
            "fit_cox: information matrix is singular; a covariate is "
            "constant within risk sets");
      }
    }
    Eigen::VectorXd dir = ldlt.solve(grad);
    if (!dir.allFinite()) {
      res.status = FitStatus::Separation;
      break;
    }
    // Converged once the loglik is flat and either the score is at its
    // summation-noise floor or the Newton decrement (the predicted gain of
    // the next step) is far below the loglik's own rounding granularity.
    if (std::abs(ll - ll_prev) < 1e-10 * ll_scale &&
        (grad.norm() < 1e-8 * ll_scale ||
         grad.dot(dir) < 1e-11 * ll_scale)) {
      res.status = FitStatus::Converged;
      break;
    }
    double scale = 1.0;
    double ll_cand = cache.loglik(theta + dir);
    int halvings = 0;
    // !(>=) catches NaN from a wild trial point; an infinite candidate is an
    // underflowed risk set and must be rejected, not embraced.
    while ((!(ll_cand >= ll) || !std::isfinite(ll_cand)) && halvings < 40) {
      scale *= 0.5;
      ll_cand = cache.loglik(theta + scale * dir);
      ++halvings;
    }
    if (!(ll_cand >= ll) || !std::isfinite(ll_cand)) {
      // No ascent left along the Newton direction: we are at the optimum up
      // to machine precision (or stuck, which the status records).
      res.status = grad.norm() < 1e-6 * ll_scale ? FitStatus::Converged
                                                 : FitStatus::MaxIterations;
      break;
    }
    theta += scale * dir;
    ll_prev = ll;
    res.status = FitStatus::MaxIterations;  // until proven otherwise
  }
  if (res.status != FitStatus::Separation && std::abs(theta[0]) > 50.0) {
    res.status = FitStatus::Separation;
  }

  res.beta = theta[0];
  res.loglik = cache.loglik(theta);
  cache.derivatives(theta, ll, grad, hess);
  Eigen::MatrixXd info = -hess;
  Eigen::MatrixXd cov = info.ldlt().solve(
      Eigen::MatrixXd::Identity(p, p));
  res.se = std::sqrt(std::max(0.0, cov(0, 0)));
  if (include_x) {
    res.eta = theta.segment(1, px);
    res.eta_se.resize(px);
    for (Eigen::Index c = 0; c < px; ++c) {
      res.eta_se[c] = std::sqrt(std::max(0.0, cov(1 + c, 1 + c)));
    }
  }
  return res;
}

void write_rows_csv(const std::string& path,
                    const std::vector<CountingProcessRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  CsvWriter w(out);
  const Eigen::Index px = rows.empty() ? 0 : rows.front().x.size();
  std::vector<std::string> header = {"id", "tstart", "tstop", "event", "z"};
  for (Eigen::Index c = 0; c < px; ++c) {
    header.push_back("x" + std::to_string(c + 1));
  }
  w.row(header);
  std::vector<std::string> fields;
  for (const auto& r : rows) {
    fields = {std::to_string(r.subject_id), format_double(r.t_start),
              format_double(r.t_stop), r.event ? "1" : "0",
              format_double(r.z)};
    for (Eigen::Index c = 0; c < r.x.size(); ++c) {
      fields.push_back(format_double(r.x[c]));
    }
    w.row(fields);
  }
}

std::vector<CountingProcessRow> read_rows_csv(const std::string& path) {
  const auto cells = read_csv(path);
  if (cells.empty()) {
    throw std::runtime_error(path + ": empty file");
  }
  const auto& header = cells.front();
  if (header.size() < 5 || header[0] != "id" || header[1] != "tstart" ||
      header[2] != "tstop" || header[3] != "event" || header[4] != "z") {
    throw std::runtime_error(path + ": expected header id,tstart,tstop,event,z[,x1...]");
  }
  const std::size_t px = header.size() - 5;
  std::vector<CountingProcessRow> rows;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const auto& line = cells[i];
    if (line.size() != header.size()) {
      throw std::runtime_error(path + ": ragged row");
    }
    CountingProcessRow r;
    r.subject_id = static_cast<std::int32_t>(std::stol(line[0]));
    r.t_start = std::stod(line[1]);
    r.t_stop = std::stod(line[2]);
    r.event = line[3] == "1";
    r.z = std::stod(line[4]);
    r.x.resize(static_cast<Eigen::Index>(px));
    for (std::size_t c = 0; c < px; ++c) {
      r.x[static_cast<Eigen::Index>(c)] = std::stod(line[5 + c]);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace cycsurv
