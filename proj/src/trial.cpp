#include "cycsurv/trial.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "cycsurv/csv.hpp"
#include "cycsurv/multi_dose.hpp"
#include "cycsurv/rng.hpp"

namespace cycsurv {

void TrialConfig::validate() const {
  if (config_version != 1) {
    throw std::invalid_argument("unsupported config_version (expected 1)");
  }
  if (arms.empty()) {
    throw std::invalid_argument("at least one arm is required");
  }
  for (const auto& a : arms) {
    if (a.label.empty()) {
      throw std::invalid_argument("every arm needs a label");
    }
    if (a.n <= 0) {
      throw std::invalid_argument("arm '" + a.label + "': n must be positive");
    }
    if (!a.placebo && !(a.threshold_days > 0.0)) {
      throw std::invalid_argument("arm '" + a.label +
                                  "': treated arms need threshold_days > 0");
    }
  }
  if (!(lambda_placebo_per_year > 0.0)) {
    throw std::invalid_argument("lambda_placebo_per_year must be positive");
  }
  if (!std::isfinite(beta)) {
    throw std::invalid_argument("beta must be finite");
  }
  if (approach == Approach::MultipleDose &&
      family != BaselineHazard::Family::Exponential) {
    throw std::invalid_argument(
        "the multiple-dose generator requires the exponential baseline; "
        "use approach = single_dose for other families");
  }
  if (family == BaselineHazard::Family::Weibull && !(weibull_gamma > 0.0)) {
    throw std::invalid_argument("weibull_gamma must be positive");
  }
  if (!std::isfinite(gompertz_alpha)) {
    throw std::invalid_argument("gompertz_alpha must be finite");
  }
  if (eta.size() != x_sd.size()) {
    throw std::invalid_argument("eta and x_sd must have the same length");
  }
  for (Eigen::Index i = 0; i < x_sd.size(); ++i) {
    if (!(x_sd[i] > 0.0)) {
      throw std::invalid_argument("x_sd entries must be positive");
    }
  }
  adherence.validate();
  if (max_infusions < 1) {
    throw std::invalid_argument("max_infusions must be >= 1");
  }
  if (!(study_end > 0.0)) {
    throw std::invalid_argument("study_end_days must be positive");
  }
  if (trials < 1) {
    throw std::invalid_argument("trials must be >= 1");
  }
  if (threads < 1) {
    throw std::invalid_argument("threads must be >= 1");
  }
  if (!(fit_step > 0.0)) {
    throw std::invalid_argument("fit_step_days must be positive");
  }
}

namespace {

EffectModel arm_effect(const TrialConfig& cfg, const ArmSpec& arm) {
  EffectModel em;
  em.beta = cfg.beta;
  em.eta = cfg.eta;
  em.threshold_days = arm.threshold_days;
  return em;
}

double arm_lambda(const TrialConfig& cfg, const ArmSpec& arm) {
  EffectModel cal = arm_effect(cfg, arm);
  if (cfg.calibration_threshold_days >= 0.0) {
    cal.threshold_days = cfg.calibration_threshold_days;
  }
  return calibrate_lambda(cfg.lambda_placebo_per_day(), cal);
}

SubjectOutcome draw_subject(const TrialConfig& cfg, const ArmSpec& arm,
                            const EffectModel& em, const SubjectCovariates& sc,
                            double lambda, const InfusionSchedule& sched,
                            std::mt19937_64& rng) {
  if (arm.placebo) {
    const double t = -std::log(uniform_open01(rng)) /
                     cfg.lambda_placebo_per_day();
    if (t < cfg.study_end) {
      const auto it = std::upper_bound(sched.times.begin(), sched.times.end(), t);
      return {t, true, static_cast<int>(it - sched.times.begin()) - 1};
    }
    return {cfg.study_end, false, -1};
  }
  if (cfg.approach == TrialConfig::Approach::MultipleDose) {
    return draw_multi(em, sc, lambda, sched, uniform_open01(rng));
  }
  switch (cfg.family) {
    case BaselineHazard::Family::Exponential:
      return aggregate_multidose(
          sched, [&](double u) { return draw_exponential(em, sc, lambda, u); },
          rng);
    case BaselineHazard::Family::Weibull:
      return aggregate_multidose(
          sched,
          [&](double u) {
            return draw_weibull(em, sc, lambda, cfg.weibull_gamma, u);
          },
          rng);
    case BaselineHazard::Family::Gompertz:
      return aggregate_multidose(
          sched,
          [&](double u) {
            return draw_gompertz(em, sc, lambda, cfg.gompertz_alpha, u);
          },
          rng);
  }
  throw std::logic_error("unreachable family");
}

}  // namespace

TrialData run_trial(const TrialConfig& cfg, std::uint64_t master_seed,
                    int trial_index) {
  cfg.validate();
  TrialData data;
  data.trial = trial_index;

  std::int64_t total_n = 0;
  for (const auto& a : cfg.arms) total_n += a.n;
  data.subjects.reserve(static_cast<std::size_t>(total_n));

  std::int64_t within = 0;
  for (std::size_t ai = 0; ai < cfg.arms.size(); ++ai) {
    const ArmSpec& arm = cfg.arms[ai];
    EffectModel em;  // unused for placebo draws
    double lambda = cfg.lambda_placebo_per_day();
    if (!arm.placebo) {
      em = arm_effect(cfg, arm);
      lambda = arm_lambda(cfg, arm);
    }

    for (int si = 0; si < arm.n; ++si, ++within) {
      auto rng = subject_stream(master_seed, static_cast<std::uint64_t>(trial_index),
                                static_cast<std::uint64_t>(within));
      SubjectRecord rec;
      rec.id = static_cast<std::int64_t>(trial_index) * total_n + within;
      rec.arm = static_cast<int>(ai);
      // Fixed per-subject draw order: schedule, fixed covariates, event.
      rec.schedule = generate_schedule(cfg.adherence, cfg.max_infusions,
                                       cfg.study_end, rng);
      rec.covs.x.resize(cfg.eta.size());
      for (Eigen::Index c = 0; c < cfg.eta.size(); ++c) {
        rec.covs.x[c] = cfg.x_sd[c] * standard_normal(rng);
      }
      rec.outcome = draw_subject(cfg, arm, em, rec.covs, lambda, rec.schedule,
                                 rng);
      const auto& times = rec.schedule.times;
      const auto it = std::upper_bound(times.begin(), times.end(),
                                       rec.outcome.time);
      rec.last_infusion_time = *(it - 1);
      rec.gap_at_outcome = rec.outcome.time - rec.last_infusion_time;
      data.subjects.push_back(std::move(rec));
    }
  }
  return data;
}

std::vector<FitRecord> fit_trial(const TrialConfig& cfg,
                                 const TrialData& data) {
  std::vector<FitRecord> out;
  const bool include_x = cfg.eta.size() > 0;
  for (std::size_t ai = 0; ai < cfg.arms.size(); ++ai) {
    const ArmSpec& arm = cfg.arms[ai];
    if (arm.placebo) continue;

    std::vector<SubjectOutcome> outcomes;
    std::vector<InfusionSchedule> schedules;
    std::vector<SubjectCovariates> covs;
    auto add_arm = [&](bool placebo_side) {
      for (const auto& rec : data.subjects) {
        const bool is_placebo = cfg.arms[static_cast<std::size_t>(rec.arm)].placebo;
        if (placebo_side != is_placebo) continue;
        if (!placebo_side && rec.arm != static_cast<int>(ai)) continue;
        outcomes.push_back(rec.outcome);
        schedules.push_back(rec.schedule);
        covs.push_back(rec.covs);
      }
    };
    add_arm(false);
    if (cfg.fit_include_placebo) add_arm(true);

    FitRecord fr;
    fr.trial = data.trial;
    fr.arm = static_cast<int>(ai);
    for (const auto& o : outcomes) fr.events += o.event ? 1 : 0;
    try {
      const auto rows = expand_counting_process(
          outcomes, schedules, arm_effect(cfg, arm), cfg.fit_zspec,
          cfg.fit_step, include_x ? &covs : nullptr);
      const FitResult r = fit_cox(rows, include_x);
      fr.beta_hat = r.beta;
      fr.se = r.se;
      fr.status = r.status;
    } catch (const std::invalid_argument&) {
      // No events or no covariate variation in this trial's arm.
      fr.estimable = false;
      fr.beta_hat = std::numeric_limits<double>::quiet_NaN();
      fr.se = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(std::move(fr));
  }
  return out;
}

namespace {

int cycle_count(const TrialConfig& cfg) {
  return static_cast<int>(
      std::ceil(cfg.study_end / cfg.adherence.target_interval - 1e-9));
}

constexpr double kGapBin = 7.0;
constexpr double kTimeBin = 28.0;

TrialSummary make_summary_shell(const TrialConfig& cfg) {
  TrialSummary s;
  const int cycles = std::max(1, cycle_count(cfg));
  const int gap_bins =
      std::max(1, static_cast<int>(std::ceil(cfg.study_end / kGapBin - 1e-9)));
  const int time_bins =
      std::max(1, static_cast<int>(std::ceil(cfg.study_end / kTimeBin - 1e-9)));
  for (const auto& a : cfg.arms) {
    ArmSummary as;
    as.label = a.label;
    as.cycle_events.assign(static_cast<std::size_t>(cycles), 0);
    as.cycle_at_risk.assign(static_cast<std::size_t>(cycles), 0);
    as.gap_hist.assign(static_cast<std::size_t>(gap_bins), 0);
    as.time_hist.assign(static_cast<std::size_t>(time_bins), 0);
    s.arms.push_back(std::move(as));
  }
  return s;
}

struct TrialPacket {
  int trial = 0;
  // Per arm: counts plus event times and the infusion gap at each event;
  // censoring happens only at study_end, so events fully determine at-risk
  // counts and the histograms.
  std::vector<long long> n;
  std::vector<std::vector<double>> times;
  std::vector<std::vector<double>> gaps;
  std::vector<FitRecord> fits;
  std::vector<std::string> outcome_lines;
};

TrialPacket make_packet(const TrialConfig& cfg, const TrialData& data,
                        std::vector<FitRecord> fits, bool keep_outcomes) {
  TrialPacket p;
  p.trial = data.trial;
  p.n.assign(cfg.arms.size(), 0);
  p.times.resize(cfg.arms.size());
  p.gaps.resize(cfg.arms.size());
  p.fits = std::move(fits);
  for (const auto& rec : data.subjects) {
    const auto ai = static_cast<std::size_t>(rec.arm);
    ++p.n[ai];
    if (rec.outcome.event) {
      p.times[ai].push_back(rec.outcome.time);
      p.gaps[ai].push_back(rec.gap_at_outcome);
    }
    if (keep_outcomes) {
      const ArmSpec& arm = cfg.arms[ai];
      std::string line = std::to_string(rec.id);
      line += ',';
      line += csv_escape(arm.label);
      line += ',';
      line += format_double(arm.placebo ? 0.0 : arm.threshold_days);
      line += ',';
      line += format_double(rec.outcome.time);
      line += ',';
      line += rec.outcome.event ? '1' : '0';
      line += ',';
      line += format_double(rec.last_infusion_time);
      line += ',';
      line += format_double(rec.gap_at_outcome);
      p.outcome_lines.push_back(std::move(line));
    }
  }
  return p;
}

void absorb_packet(const TrialConfig& cfg, TrialPacket&& p, RunResult& out) {
  TrialSummary& s = out.summary;
  ++s.trials;
  for (std::size_t ai = 0; ai < cfg.arms.size(); ++ai) {
    ArmSummary& as = s.arms[ai];
    auto& times = p.times[ai];
    std::sort(times.begin(), times.end());
    as.n += p.n[ai];
    as.events += static_cast<long long>(times.size());
    s.counts.push_back({p.trial, static_cast<int>(ai), p.n[ai],
                        static_cast<long long>(times.size())});
    for (double t : times) {
      as.event_time.push(t);
      as.event_times.push_back(t);
      const auto bin = std::min(as.time_hist.size() - 1,
                                static_cast<std::size_t>(t / kTimeBin));
      ++as.time_hist[bin];
    }
    for (double g : p.gaps[ai]) {
      as.gap_at_event.push(g);
      const auto bin = std::min(as.gap_hist.size() - 1,
                                static_cast<std::size_t>(g / kGapBin));
      ++as.gap_hist[bin];
    }
    for (std::size_t c = 0; c < as.cycle_events.size(); ++c) {
      const double start = static_cast<double>(c) * cfg.adherence.target_interval;
      const double end = std::min(start + cfg.adherence.target_interval,
                                  cfg.study_end);
      const auto lo = std::upper_bound(times.begin(), times.end(), start);
      const auto hi = std::upper_bound(times.begin(), times.end(), end);
      as.cycle_events[c] += hi - lo;
      as.cycle_at_risk[c] += p.n[ai] - (lo - times.begin());
    }
  }
  for (auto& f : p.fits) s.fits.push_back(std::move(f));
  for (auto& line : p.outcome_lines) {
    out.outcome_lines.push_back(std::move(line));
  }
}

}  // namespace

double TrialSummary::cycle_probability(int arm, int cycle_index) const {
  const auto& as = arms.at(static_cast<std::size_t>(arm));
  const auto c = static_cast<std::size_t>(cycle_index);
  if (as.cycle_at_risk.at(c) == 0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return static_cast<double>(as.cycle_events[c]) /
         static_cast<double>(as.cycle_at_risk[c]);
}

TrialSummary summarize(const TrialConfig& cfg,
                       const std::vector<TrialData>& trials,
                       const std::vector<FitRecord>& fits) {
  cfg.validate();
  RunResult out;
  out.summary = make_summary_shell(cfg);
  for (const auto& data : trials) {
    std::vector<FitRecord> trial_fits;
    for (const auto& f : fits) {
      if (f.trial == data.trial) trial_fits.push_back(f);
    }
    absorb_packet(cfg, make_packet(cfg, data, std::move(trial_fits), false),
                  out);
  }
  return std::move(out.summary);
}

RunResult run_trials(const TrialConfig& cfg, std::uint64_t master_seed,
                     bool keep_outcomes) {
  cfg.validate();
  const int nthreads = std::max(1, std::min(cfg.threads, cfg.trials));

  auto run_one = [&](int t) {
    const TrialData data = run_trial(cfg, master_seed, t);
    std::vector<FitRecord> fits;
    if (cfg.run_fits) fits = fit_trial(cfg, data);
    return make_packet(cfg, data, std::move(fits), keep_outcomes);
  };

  std::vector<TrialPacket> packets(static_cast<std::size_t>(cfg.trials));
  if (nthreads == 1) {
    for (int t = 0; t < cfg.trials; ++t) packets[static_cast<std::size_t>(t)] = run_one(t);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nthreads));
    for (int j = 0; j < nthreads; ++j) {
      pool.emplace_back([&, j] {
        try {
          for (int t = j; t < cfg.trials; t += nthreads) {
            packets[static_cast<std::size_t>(t)] = run_one(t);
          }
        } catch (...) {
          errors[static_cast<std::size_t>(j)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // Merge strictly in trial order: output is byte-identical for any
  // thread count.
  RunResult out;
  out.summary = make_summary_shell(cfg);
  for (auto& p : packets) absorb_packet(cfg, std::move(p), out);
  return out;
}

namespace {

std::string status_name(const FitRecord& f) {
  if (!f.estimable) return "not_estimable";
  switch (f.status) {
    case FitStatus::Converged:
      return "converged";
    case FitStatus::MaxIterations:
      return "max_iterations";
    case FitStatus::Separation:
      return "separation";
  }
  return "unknown";
}

}  // namespace

void emit(const TrialConfig& cfg, const RunResult& result,
          const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const TrialSummary& s = result.summary;

  if (!result.outcome_lines.empty()) {
    std::ofstream f(fs::path(out_dir) / "outcomes.csv", std::ios::binary);
    f << "id,arm,dose_ts,S,event,last_infusion_time,time_since_prior_infusion\n";
    for (const auto& line : result.outcome_lines) f << line << '\n';
  }

  {
    std::ofstream f(fs::path(out_dir) / "summary.csv", std::ios::binary);
    CsvWriter w(f);
    w.row({"scope", "trial", "arm", "n", "events", "event_rate", "s_mean",
           "s_q25", "s_q50", "s_q75", "mean_gap_at_event", "beta_hat",
           "beta_se", "fit_status"});
    for (const auto& c : s.counts) {
      const FitRecord* fit = nullptr;
      for (const auto& fr : s.fits) {
        if (fr.trial == c.trial && fr.arm == c.arm) fit = &fr;
      }
      std::vector<std::string> row = {
          "trial",
          std::to_string(c.trial),
          s.arms[static_cast<std::size_t>(c.arm)].label,
          std::to_string(c.n),
          std::to_string(c.events),
          format_double(static_cast<double>(c.events) /
                        static_cast<double>(c.n)),
          "",
          "",
          "",
          "",
          "",
          fit ? format_double(fit->beta_hat) : "",
          fit ? format_double(fit->se) : "",
          fit ? status_name(*fit) : ""};
      w.row(row);
    }
    for (std::size_t ai = 0; ai < s.arms.size(); ++ai) {
      const ArmSummary& as = s.arms[ai];
      RunningStat fit_stat;
      for (const auto& fr : s.fits) {
        if (fr.arm == static_cast<int>(ai) && fr.estimable &&
            fr.status == FitStatus::Converged) {
          fit_stat.push(fr.beta_hat);
        }
      }
      std::vector<std::string> row = {
          "pooled",
          "",
          as.label,
          std::to_string(as.n),
          std::to_string(as.events),
          format_double(static_cast<double>(as.events) /
                        static_cast<double>(as.n)),
          as.events > 0 ? format_double(as.event_time.mean()) : "",
          as.events > 0 ? format_double(quantile(as.event_times, 0.25)) : "",
          as.events > 0 ? format_double(quantile(as.event_times, 0.50)) : "",
          as.events > 0 ? format_double(quantile(as.event_times, 0.75)) : "",
          as.events > 0 ? format_double(as.gap_at_event.mean()) : "",
          fit_stat.count() >= 1 ? format_double(fit_stat.mean()) : "",
          fit_stat.count() >= 2 ? format_double(fit_stat.sd()) : "",
          ""};
      w.row(row);
    }
  }

  {
    std::ofstream f(fs::path(out_dir) / "cycle_risk.csv", std::ios::binary);
    CsvWriter w(f);
    w.row({"arm", "cycle", "events", "at_risk", "probability"});
    for (const auto& as : s.arms) {
      for (std::size_t c = 0; c < as.cycle_events.size(); ++c) {
        w.row({as.label, std::to_string(c + 1),
               std::to_string(as.cycle_events[c]),
               std::to_string(as.cycle_at_risk[c]),
               as.cycle_at_risk[c] > 0
                   ? format_double(static_cast<double>(as.cycle_events[c]) /
                                   static_cast<double>(as.cycle_at_risk[c]))
                   : ""});
      }
    }
  }

  auto write_hist = [&](const std::string& name, double width,
                        const std::vector<long long> ArmSummary::*hist) {
    std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
    CsvWriter w(f);
    w.row({"arm", "bin_low", "bin_high", "count"});
    for (const auto& as : s.arms) {
      const auto& h = as.*hist;
      for (std::size_t b = 0; b < h.size(); ++b) {
        w.row({as.label, format_double(static_cast<double>(b) * width),
               format_double(std::min(static_cast<double>(b + 1) * width,
                                      cfg.study_end)),
               std::to_string(h[b])});
      }
    }
  };
  write_hist("hist_gap_at_event.csv", kGapBin, &ArmSummary::gap_hist);
  write_hist("hist_event_times.csv", kTimeBin, &ArmSummary::time_hist);
}

TrialConfig parse_config(const std::string& path,
                         const std::vector<std::string>& overrides) {
  std::map<std::string, std::string> kv;
  auto add_line = [&](const std::string& raw, const std::string& where) {
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t\r");
      const auto e = v.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    if (trim(line).empty()) return;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(where + ": expected key = value, got '" +
                                  trim(raw) + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument(where + ": empty key");
    }
    kv[key] = value;
  };

  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open config file " + path);
  }
  std::string line;
  while (std::getline(in, line)) add_line(line, path);
  for (const auto& o : overrides) add_line(o, "override");

  auto take = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) return std::optional<std::string>();
    std::optional<std::string> v = it->second;
    kv.erase(it);
    return v;
  };
  auto need = [&](const std::string& key) {
    auto v = take(key);
    if (!v) throw std::invalid_argument("config is missing required key '" + key + "'");
    return *v;
  };
  auto to_double = [](const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return x;
    } catch (...) {
      throw std::invalid_argument("config key '" + key + "': not a number: '" + v + "'");
    }
  };
  auto to_int = [&](const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    const int i = static_cast<int>(x);
    if (static_cast<double>(i) != x) {
      throw std::invalid_argument("config key '" + key + "': not an integer: '" + v + "'");
    }
    return i;
  };
  auto to_bool = [](const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config key '" + key + "': not a boolean: '" + v + "'");
  };
  auto to_vec = [&](const std::string& key, const std::string& v) {
    Eigen::VectorXd out;
    if (v.empty()) return out;
    std::vector<double> vals;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) vals.push_back(to_double(key, item));
    out.resize(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) {
      out[static_cast<Eigen::Index>(i)] = vals[i];
    }
    return out;
  };

  TrialConfig cfg;
  cfg.config_version = to_int("config_version", need("config_version"));

  if (auto v = take("approach")) {
    if (*v == "single_dose") cfg.approach = TrialConfig::Approach::SingleDose;
    else if (*v == "multiple_dose") cfg.approach = TrialConfig::Approach::MultipleDose;
    else throw std::invalid_argument("approach must be single_dose or multiple_dose");
  }
  if (auto v = take("distribution")) {
    if (*v == "exponential") cfg.family = BaselineHazard::Family::Exponential;
    else if (*v == "weibull") cfg.family = BaselineHazard::Family::Weibull;
    else if (*v == "gompertz") cfg.family = BaselineHazard::Family::Gompertz;
    else throw std::invalid_argument("distribution must be exponential, weibull or gompertz");
  }
  if (auto v = take("weibull_gamma")) cfg.weibull_gamma = to_double("weibull_gamma", *v);
  if (auto v = take("gompertz_alpha")) cfg.gompertz_alpha = to_double("gompertz_alpha", *v);
  if (auto v = take("lambda_placebo_per_year")) {
    cfg.lambda_placebo_per_year = to_double("lambda_placebo_per_year", *v);
  }
  if (auto v = take("beta")) cfg.beta = to_double("beta", *v);
  if (auto v = take("eta")) cfg.eta = to_vec("eta", *v);
  if (auto v = take("x_sd")) cfg.x_sd = to_vec("x_sd", *v);
  if (cfg.eta.size() > 0 && cfg.x_sd.size() == 0) {
    cfg.x_sd = Eigen::VectorXd::Ones(cfg.eta.size());
  }
  if (auto v = take("calibration_threshold_days")) {
    cfg.calibration_threshold_days = to_double("calibration_threshold_days", *v);
  }
  if (auto v = take("target_interval_days")) {
    cfg.adherence.target_interval = to_double("target_interval_days", *v);
  }
  if (auto v = take("miss_prob")) cfg.adherence.miss_prob = to_double("miss_prob", *v);
  if (auto v = take("window_low_days")) {
    cfg.adherence.window_low = to_double("window_low_days", *v);
  }
  if (auto v = take("window_high_days")) {
    cfg.adherence.window_high = to_double("window_high_days", *v);
  }
  if (auto v = take("discontinue_prob")) {
    cfg.adherence.discontinue_prob = to_double("discontinue_prob", *v);
  }
  if (auto v = take("max_infusions")) cfg.max_infusions = to_int("max_infusions", *v);
  if (auto v = take("study_end_days")) cfg.study_end = to_double("study_end_days", *v);
  if (auto v = take("trials")) cfg.trials = to_int("trials", *v);
  if (auto v = take("threads")) cfg.threads = to_int("threads", *v);
  if (auto v = take("run_fits")) cfg.run_fits = to_bool("run_fits", *v);
  if (auto v = take("fit_step_days")) cfg.fit_step = to_double("fit_step_days", *v);
  if (auto v = take("fit_zspec")) {
    if (*v == "clamped") cfg.fit_zspec = ZSpec::Clamped;
    else if (*v == "unclamped") cfg.fit_zspec = ZSpec::Unclamped;
    else throw std::invalid_argument("fit_zspec must be clamped or unclamped");
  }
  if (auto v = take("fit_include_placebo")) {
    cfg.fit_include_placebo = to_bool("fit_include_placebo", *v);
  }

  for (int i = 1;; ++i) {
    const std::string prefix = "arm." + std::to_string(i) + ".";
    auto label = take(prefix + "label");
    if (!label) break;
    ArmSpec arm;
    arm.label = *label;
    arm.n = to_int(prefix + "n", need(prefix + "n"));
    if (auto v = take(prefix + "type")) {
      if (*v == "placebo") arm.placebo = true;
      else if (*v == "treated") arm.placebo = false;
      else throw std::invalid_argument(prefix + "type must be placebo or treated");
    }
    if (auto v = take(prefix + "dose_mg_per_kg")) {
      arm.dose_mg_per_kg = to_double(prefix + "dose_mg_per_kg", *v);
    }
    if (auto v = take(prefix + "threshold_days")) {
      arm.threshold_days = to_double(prefix + "threshold_days", *v);
    } else if (!arm.placebo && arm.dose_mg_per_kg > 0.0) {
      if (auto ts = dose_threshold_days(arm.dose_mg_per_kg)) {
        arm.threshold_days = *ts;
      } else {
        throw std::invalid_argument(prefix + "dose_mg_per_kg has no known "
                                    "protection duration; set threshold_days");
      }
    }
    cfg.arms.push_back(std::move(arm));
  }

  if (!kv.empty()) {
    throw std::invalid_argument("unknown config key '" + kv.begin()->first + "'");
  }
  cfg.validate();
  return cfg;
}

}  // namespace cycsurv
