#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace coshare {

/// Empirical quantile of ascending-sorted data, `q` in [0, 1], linear
/// interpolation between closest ranks: h = (n - 1) q, then
/// x[floor h] + (h - floor h) (x[floor h + 1] - x[floor h]).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile: no samples");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  const double a = sorted[lo];
  const double b = sorted[hi];
  if (frac == 0.0 || a == b) return a;
  return a + frac * (b - a);
}

/// Growing sample set kept in sorted order.
class EmpiricalDistribution {
 public:
  void add(double x) { samples_.insert(std::upper_bound(samples_.begin(), samples_.end(), x), x); }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const std::vector<double>& sorted() const { return samples_; }

  double quantile(double q) const { return quantile_sorted(samples_, q); }

  /// Mean of the samples strictly above `threshold`, or nothing if none are.
  std::optional<double> tail_mean(double threshold) const {
    auto it = std::upper_bound(samples_.begin(), samples_.end(), threshold);
    if (it == samples_.end()) return std::nullopt;
    double s = 0.0;
    for (auto p = it; p != samples_.end(); ++p) s += *p;
    return s / static_cast<double>(samples_.end() - it);
  }

  friend bool operator==(const EmpiricalDistribution&, const EmpiricalDistribution&) = default;

 private:
  std::vector<double> samples_;
};

}  // namespace coshare
