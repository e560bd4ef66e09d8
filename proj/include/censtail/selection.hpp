#pragma once

#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "censtail/estimators.hpp"

namespace censtail {

struct SelectionResult {
  std::size_t k_star = 0;
  double nu = 0.3;
  double criterion_at_kstar = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> k_candidates;
  std::vector<double> criterion_values;
};

namespace detail {

// Two-heap running median over weighted values, with per-side weight and
// weighted-value sums so the weighted absolute deviation from the median is
// available in O(1). The lower-median convention keeps the median on the
// max-heap side. Values are only inserted, never removed.
class WeightedMedianDeviation {
 public:
  void insert(double value, double weight) {
    const Item item{value, weight};
    if (low_.empty() || value <= low_.top().value)
      push_low(item);
    else
      push_high(item);
    // target |low| = ceil(count/2)
    const std::size_t count = low_.size() + high_.size();
    const std::size_t target = (count + 1) / 2;
    while (low_.size() > target) move_low_to_high();
    while (low_.size() < target) move_high_to_low();
  }

  double median() const { return low_.top().value; }

  /// sum_i w_i |x_i - median|.
  double weighted_abs_deviation() const {
    const double m = median();
    return (m * w_low_ - s_low_) + (s_high_ - m * w_high_);
  }

 private:
  struct Item {
    double value;
    double weight;
  };
  struct LowCmp {
    bool operator()(const Item& a, const Item& b) const {
      return a.value < b.value; // max-heap
    }
  };
  struct HighCmp {
    bool operator()(const Item& a, const Item& b) const {
      return a.value > b.value; // min-heap
    }
  };

  void push_low(const Item& it) {
    low_.push(it);
    w_low_ += it.weight;
    s_low_ += it.weight * it.value;
  }
  void push_high(const Item& it) {
    high_.push(it);
    w_high_ += it.weight;
    s_high_ += it.weight * it.value;
  }
  void move_low_to_high() {
    const Item it = low_.top();
    low_.pop();
    w_low_ -= it.weight;
    s_low_ -= it.weight * it.value;
    push_high(it);
  }
  void move_high_to_low() {
    const Item it = high_.top();
    high_.pop();
    w_high_ -= it.weight;
    s_high_ -= it.weight * it.value;
    push_low(it);
  }

  std::priority_queue<Item, std::vector<Item>, LowCmp> low_;
  std::priority_queue<Item, std::vector<Item>, HighCmp> high_;
  double w_low_ = 0.0, s_low_ = 0.0;
  double w_high_ = 0.0, s_high_ = 0.0;
};

} // namespace detail

/// Reiss-Thomas threshold choice: the candidate k minimizing
///   (1/k) sum_{i <= k} i^nu | path_i - median{path_1..path_k} |
/// over the path entries inside [k_lo, k_hi]. Undefined entries are skipped
/// in both the median set and the sum; the i^nu weight keeps the original
/// index. Ties resolve to the smallest k.
inline SelectionResult reiss_thomas(const EstimatorPath& path, double nu,
                                    std::size_t k_lo = 0,
                                    std::size_t k_hi = std::numeric_limits<std::size_t>::max()) {
  if (!(nu >= 0.0 && nu <= 0.5))
    throw std::invalid_argument("reiss_thomas: nu must lie in [0, 1/2]");
  if (path.k_values.size() != path.estimates.size())
    throw std::invalid_argument("reiss_thomas: malformed path");
  detail::WeightedMedianDeviation med;
  SelectionResult result;
  result.nu = nu;
  std::size_t last_k = 0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < path.k_values.size(); ++i) {
    const std::size_t k = path.k_values[i];
    if (k < last_k)
      throw std::invalid_argument("reiss_thomas: k grid must be ascending");
    last_k = k;
    if (k < k_lo || k > k_hi || !path.estimates[i].defined()) continue;
    med.insert(path.estimates[i].value,
               std::pow(static_cast<double>(k), nu));
    ++used;
    const double crit = med.weighted_abs_deviation() / static_cast<double>(k);
    result.k_candidates.push_back(k);
    result.criterion_values.push_back(crit);
    if (crit < result.criterion_at_kstar) {
      result.criterion_at_kstar = crit;
      result.k_star = k;
    }
  }
  if (used < 3)
    throw std::invalid_argument("reiss_thomas: fewer than 3 defined entries");
  return result;
}

} // namespace censtail
