#pragma once

#include <functional>
#include <vector>

namespace cycsurv {

// Kolmogorov-Smirnov statistic of `sample` against a continuous CDF.
// The sample is copied and sorted internally.
double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf);

// Two-sample KS statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Large-sample critical values: reject at level alpha when D exceeds these.
// c(alpha) = sqrt(-ln(alpha/2)/2); c(0.01) ~= 1.628.
double ks_critical_one_sample(double alpha, std::size_t n);
double ks_critical_two_sample(double alpha, std::size_t n, std::size_t m);

// CDF of the unit exponential, 1 - e^(-x).
double exp1_cdf(double x);

// Streaming mean/variance (Welford).
class RunningStat {
 public:
  void push(double x);
  std::size_t count() const { return n_; }
  double mean() const;
  double variance() const;  // sample variance, n-1 denominator
  double sd() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Empirical quantile with linear interpolation; q in [0, 1].
double quantile(std::vector<double> sample, double q);

}  // namespace cycsurv
