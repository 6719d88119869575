#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nmembrane {

/// Weighted least-squares projection onto the chain cone u_1 >= ... >= u_N,
/// computed with pool-adjacent-violators. Reusable workspace so that the
/// grid sweeps do not allocate per node.
class IsotonicProjector {
 public:
  IsotonicProjector() = default;
  explicit IsotonicProjector(std::size_t n) { reserve(n); }

  void reserve(std::size_t n);

  /// `out` may alias `v`. Weights must be positive; not checked here.
  void project(std::span<const double> v, std::span<const double> weights,
               std::span<double> out);

 private:
  std::vector<double> block_wsum_;
  std::vector<double> block_weight_;
  std::vector<std::size_t> block_end_;
};

/// Checked convenience wrapper; throws InvalidWeight.
std::vector<double> isotonic_project(std::span<const double> v, std::span<const double> weights);

/// Exhaustive reference: enumerates all contiguous block partitions and
/// returns the feasible minimizer. Throws TooLarge for N > 12.
std::vector<double> qp_oracle_project(std::span<const double> v, std::span<const double> weights);

}  // namespace nmembrane
