#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

namespace symdyn {

// Streaming log-sum-exp. Keeps (shift, scaled sum) so that a sum of
// exp(0) terms stays an exact integer count.
class LogSumExp {
 public:
  void add(double log_term) {
    if (log_term == -std::numeric_limits<double>::infinity()) return;
    if (empty_) {
      shift_ = log_term;
      sum_ = 1.0;
      empty_ = false;
      return;
    }
    if (log_term > shift_) {
      sum_ = sum_ * std::exp(shift_ - log_term) + 1.0;
      shift_ = log_term;
    } else {
      sum_ += std::exp(log_term - shift_);
    }
  }

  void merge(const LogSumExp& other) {
    if (other.empty_) return;
    if (empty_) {
      *this = other;
      return;
    }
    if (other.shift_ > shift_) {
      sum_ = sum_ * std::exp(shift_ - other.shift_) + other.sum_;
      shift_ = other.shift_;
    } else {
      sum_ += other.sum_ * std::exp(other.shift_ - shift_);
    }
  }

  bool empty() const { return empty_; }

  double log_value() const {
    return empty_ ? -std::numeric_limits<double>::infinity() : shift_ + std::log(sum_);
  }

  double value() const { return empty_ ? 0.0 : std::exp(shift_) * sum_; }

 private:
  double shift_ = 0.0;
  double sum_ = 0.0;
  bool empty_ = true;
};

inline double log_sum_exp(const std::vector<double>& terms) {
  LogSumExp acc;
  for (double t : terms) acc.add(t);
  return acc.log_value();
}

// Runs body(i) for i in [0, n). Each index is handled by exactly one worker,
// so writing into a preallocated slot per index keeps results deterministic.
inline void parallel_for(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const unsigned workers = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Least-squares slope of ys against xs.
inline double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 2) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx == 0 ? 0.0 : sxy / sxx;
}

}  // namespace symdyn
