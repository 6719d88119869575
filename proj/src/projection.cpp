#include "nmembrane/projection.hpp"

#include <cmath>
#include <limits>

#include "nmembrane/error.hpp"

namespace nmembrane {

void IsotonicProjector::reserve(std::size_t n) {
  block_wsum_.reserve(n);
  block_weight_.reserve(n);
  block_end_.reserve(n);
}

void IsotonicProjector::project(std::span<const double> v, std::span<const double> weights,
                                std::span<double> out) {
  const std::size_t n = v.size();
  block_wsum_.clear();
  block_weight_.clear();
  block_end_.clear();
  for (std::size_t i = 0; i < n; ++i) {
    double ws = weights[i] * v[i];
    double w = weights[i];
    // Descending order: a block may not have a larger mean than the one above it.
    while (!block_weight_.empty() && ws * block_weight_.back() > block_wsum_.back() * w) {
      ws += block_wsum_.back();
      w += block_weight_.back();
      block_wsum_.pop_back();
      block_weight_.pop_back();
      block_end_.pop_back();
    }
    block_wsum_.push_back(ws);
    block_weight_.push_back(w);
    block_end_.push_back(i + 1);
  }
  std::size_t start = 0;
  for (std::size_t b = 0; b < block_end_.size(); ++b) {
    const double mean = block_wsum_[b] / block_weight_[b];
    for (std::size_t i = start; i < block_end_[b]; ++i) out[i] = mean;
    start = block_end_[b];
  }
}

namespace {

void check_weights(std::span<const double> v, std::span<const double> weights) {
  if (v.size() != weights.size())
    throw Error(ErrorKind::InvalidArgument, "value and weight lengths differ");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorKind::InvalidWeight, "weights must be positive");
}

}  // namespace

std::vector<double> isotonic_project(std::span<const double> v, std::span<const double> weights) {
  check_weights(v, weights);
  std::vector<double> out(v.size());
  IsotonicProjector projector(v.size());
  projector.project(v, weights, out);
  return out;
}

std::vector<double> qp_oracle_project(std::span<const double> v, std::span<const double> weights) {
  check_weights(v, weights);
  const std::size_t n = v.size();
  if (n > 12) throw Error(ErrorKind::TooLarge, "exhaustive oracle limited to N <= 12");
  if (n == 0) return {};

  std::vector<double> best(n);
  std::vector<double> candidate(n);
  double best_cost = std::numeric_limits<double>::infinity();
  // Bit i of `cuts` set means a block boundary between entries i and i+1.
  const std::size_t partitions = std::size_t{1} << (n - 1);
  for (std::size_t cuts = 0; cuts < partitions; ++cuts) {
    std::size_t start = 0;
    double previous = std::numeric_limits<double>::infinity();
    bool feasible = true;
    for (std::size_t i = 0; i < n && feasible; ++i) {
      const bool block_ends = (i == n - 1) || ((cuts >> i) & 1U);
      if (!block_ends) continue;
      double ws = 0.0;
      double w = 0.0;
      for (std::size_t j = start; j <= i; ++j) {
        ws += weights[j] * v[j];
        w += weights[j];
      }
      const double mean = ws / w;
      if (mean > previous) feasible = false;
      for (std::size_t j = start; j <= i; ++j) candidate[j] = mean;
      previous = mean;
      start = i + 1;
    }
    if (!feasible) continue;
    double cost = 0.0;
    for (std::size_t j = 0; j < n; ++j) cost += weights[j] * (candidate[j] - v[j]) * (candidate[j] - v[j]);
    if (cost < best_cost) {
      best_cost = cost;
      best = candidate;
    }
  }
  return best;
}

}  // namespace nmembrane
