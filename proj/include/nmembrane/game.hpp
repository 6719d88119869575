#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "nmembrane/solver.hpp"

namespace nmembrane {

/// Philox4x32-10 counter-based generator.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) noexcept;
};

/// Ticket-exchange game on a lattice with unit weights. `costs` are the
/// force densities f_k; the payment per round for ticket k is f_k h^2 / (2d),
/// which makes one round of the game a step of the 5-point stencil.
struct GameSpec {
  Grid lattice;
  std::vector<double> costs;
  /// Exit payoffs phi, node-major (N per node); read on boundary nodes only.
  std::vector<double> payoffs;

  std::size_t tickets() const noexcept { return costs.size(); }
  double round_cost(std::size_t k) const noexcept;
};

/// Samples exit payoffs from `phi` on the lattice boundary. Throws
/// UnorderedBoundary if phi_1 >= ... >= phi_N fails on the boundary and
/// InvalidArgument for an empty ticket set.
GameSpec make_game(const std::vector<double>& costs, const Grid& lattice, const FieldFunction& phi);

struct ValueTable {
  Grid lattice;
  std::size_t tickets = 0;
  std::vector<double> v;  // node-major
  std::size_t iterations = 0;
  double last_change = 0.0;

  double at(std::size_t node, std::size_t k) const { return v[node * tickets + k]; }
};

/// Value iteration for v_k(x) = k-th largest of {mean_{y~x} v_j(y) - c_j};
/// stops when the sup change of a sweep is below tol. Throws NotConverged.
ValueTable bellman_solve(const GameSpec& game, double tol = 1e-13, std::size_t max_sweeps = 1000000);

/// The value table as a unit-weight N-membrane field (forces = costs).
GridSolution as_solution(const GameSpec& game, const ValueTable& values);

/// Ticket the rank-k player takes at `node` (0-based): continuation values
/// sorted in decreasing order, ties to the lower ticket index.
std::vector<std::size_t> exchange_order(const GameSpec& game, const ValueTable& values, std::size_t node);

struct MonteCarloResult {
  std::size_t node = 0;
  std::size_t ticket = 1;
  double mean = 0.0;
  double se = 0.0;
  std::size_t n_walks = 0;
  std::uint64_t seed = 0;
};

/// Simulates n_walks walks from `node` holding ticket k (1-based) under the
/// greedy sorted exchange; each round: exchange, pay, move. Walk w draws from
/// Philox with key = seed and counter = (w, step block), and payoffs are
/// reduced in walk order, so the result does not depend on `threads`.
MonteCarloResult monte_carlo_eval(const GameSpec& game, const ValueTable& values, std::size_t node, std::size_t ticket,
                                  std::size_t n_walks, std::uint64_t seed, unsigned threads = 1);

}  // namespace nmembrane
