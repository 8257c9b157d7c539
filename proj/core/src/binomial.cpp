#include <algorithm>
#include <cmath>

#include "lrfhss/errors.hpp"
#include "lrfhss/model.hpp"

namespace lrfhss {
namespace {

double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

double sum_pmf(int n, int first, int last, double p) {
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double log_n_fact = log_gamma(n + 1.0);
  CompensatedSum acc;
  for (int j = first; j <= last; ++j) {
    const double log_pmf = log_n_fact - log_gamma(j + 1.0) - log_gamma(n - j + 1.0) +
                           j * log_p + (n - j) * log_q;
    acc.add(std::exp(log_pmf));
  }
  return acc.value();
}

}  // namespace

double binomial_upper_tail(int n, int k, double p) {
  if (n < 0) throw DomainError("binomial trial count must be non-negative");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial probability must lie in [0, 1]");
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;

  // Sum the tail on the far side of the mean directly; complement the other.
  double tail;
  if (n * p < k) {
    tail = sum_pmf(n, k, n, p);
  } else {
    tail = 1.0 - sum_pmf(n, 0, k - 1, p);
  }
  return std::clamp(tail, 0.0, 1.0);
}

}  // namespace lrfhss
