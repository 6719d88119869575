#include "nmembrane/game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "nmembrane/error.hpp"

namespace nmembrane {

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept {
  constexpr std::uint32_t kM0 = 0xD2511F53U;
  constexpr std::uint32_t kM1 = 0xCD9E8D57U;
  constexpr std::uint32_t kW0 = 0x9E3779B9U;
  constexpr std::uint32_t kW1 = 0xBB67AE85U;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

double GameSpec::round_cost(std::size_t k) const noexcept {
  return costs[k] * lattice.h * lattice.h / static_cast<double>(2 * lattice.dimension);
}

GameSpec make_game(const std::vector<double>& costs, const Grid& lattice, const FieldFunction& phi) {
  if (costs.empty()) throw Error(ErrorKind::InvalidArgument, "game needs at least one ticket");
  for (double c : costs)
    if (!std::isfinite(c)) throw Error(ErrorKind::InvalidArgument, "costs must be finite");
  const std::size_t n = costs.size();
  GameSpec game;
  game.lattice = lattice;
  game.costs = costs;
  game.payoffs.assign(lattice.size() * n, 0.0);
  for (std::size_t j = 0; j < lattice.ny; ++j)
    for (std::size_t i = 0; i < lattice.nx; ++i) {
      const std::size_t node = lattice.index(i, j);
      if (lattice.kind[node] != NodeKind::Boundary) continue;
      std::span<double> out(game.payoffs.data() + node * n, n);
      phi(lattice.x(i), lattice.dimension == 1 ? 0.0 : lattice.y(j), out);
      for (std::size_t k = 0; k + 1 < n; ++k)
        if (out[k] < out[k + 1])
          throw Error(ErrorKind::UnorderedBoundary, "exit payoffs not ordered at node " + std::to_string(node));
    }
  return game;
}

namespace {

/// Continuation values c_j = mean_{y~x} v_j(y) - cost_j at an interior node.
void continuation(const GameSpec& game, const std::vector<double>& v, std::size_t node, std::vector<double>& out) {
  const std::size_t n = game.tickets();
  std::size_t nb[4];
  const std::size_t c = game.lattice.neighbours(node, nb);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t a = 0; a < c; ++a) s += v[nb[a] * n + k];
    out[k] = s / static_cast<double>(c) - game.round_cost(k);
  }
}

void sorted_order(const std::vector<double>& values, std::vector<std::size_t>& order) {
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
}

}  // namespace

ValueTable bellman_solve(const GameSpec& game, double tol, std::size_t max_sweeps) {
  const Grid& g = game.lattice;
  const std::size_t n = game.tickets();
  ValueTable table;
  table.lattice = g;
  table.tickets = n;
  table.v.assign(g.size() * n, 0.0);

  // Start from the smallest exit payoff so the iterates increase
  // monotonically towards the fixed point.
  double floor = std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (g.kind[node] != NodeKind::Boundary) continue;
    for (std::size_t k = 0; k < n; ++k) {
      table.v[node * n + k] = game.payoffs[node * n + k];
      floor = std::min(floor, game.payoffs[node * n + k]);
    }
  }
  double max_cost = 0.0;
  for (std::size_t k = 0; k < n; ++k) max_cost = std::max(max_cost, game.round_cost(k));
  const double start = floor - max_cost * static_cast<double>(g.size());
  for (std::size_t node = 0; node < g.size(); ++node)
    if (g.interior(node))
      for (std::size_t k = 0; k < n; ++k) table.v[node * n + k] = start;

  std::vector<std::size_t> colour[2];
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      if (g.interior(g.index(i, j))) colour[(i + j) % 2].push_back(g.index(i, j));

  std::vector<double> cont(n);
  std::vector<std::size_t> order(n);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (const auto& nodes : colour)
      for (std::size_t node : nodes) {
        continuation(game, table.v, node, cont);
        sorted_order(cont, order);
        for (std::size_t k = 0; k < n; ++k) {
          double& v = table.v[node * n + k];
          change = std::max(change, std::abs(cont[order[k]] - v));
          v = cont[order[k]];
        }
      }
    table.iterations = sweep + 1;
    table.last_change = change;
    if (change < tol) return table;
  }
  throw Error(ErrorKind::NotConverged, "value iteration stalled at sup change " + std::to_string(table.last_change));
}

GridSolution as_solution(const GameSpec& game, const ValueTable& values) {
  GridSolution sol;
  sol.grid = game.lattice;
  sol.spec.weights.assign(game.tickets(), 1.0);
  sol.spec.forces = game.costs;
  sol.u = values.v;
  return sol;
}

std::vector<std::size_t> exchange_order(const GameSpec& game, const ValueTable& values, std::size_t node) {
  std::vector<double> cont(game.tickets());
  std::vector<std::size_t> order(game.tickets());
  continuation(game, values.v, node, cont);
  sorted_order(cont, order);
  return order;
}

MonteCarloResult monte_carlo_eval(const GameSpec& game, const ValueTable& values, std::size_t node, std::size_t ticket,
                                  std::size_t n_walks, std::uint64_t seed, unsigned threads) {
  const Grid& g = game.lattice;
  const std::size_t n = game.tickets();
  if (node >= g.size() || !g.active(node)) throw Error(ErrorKind::InvalidArgument, "start node is not on the lattice");
  if (ticket < 1 || ticket > n) throw Error(ErrorKind::InvalidArgument, "ticket out of range");
  if (n_walks < 2) throw Error(ErrorKind::InvalidArgument, "need at least two walks");

  // The exchange policy only depends on the node, so precompute it.
  std::vector<std::size_t> policy(g.size() * n, 0);
  for (std::size_t x = 0; x < g.size(); ++x) {
    if (!g.interior(x)) continue;
    const std::vector<std::size_t> order = exchange_order(game, values, x);
    std::copy(order.begin(), order.end(), policy.begin() + static_cast<std::ptrdiff_t>(x * n));
  }
  std::vector<double> cost(n);
  for (std::size_t k = 0; k < n; ++k) cost[k] = game.round_cost(k);

  const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const unsigned shift = g.dimension == 1 ? 31U : 30U;

  auto walk = [&](std::uint64_t w) {
    std::size_t x = node;
    std::size_t held = ticket - 1;
    double paid = 0.0;
    std::uint64_t step = 0;
    Philox4x32::Counter block{};
    std::size_t nb[4];
    while (g.interior(x)) {
      held = policy[x * n + held];
      paid += cost[held];
      if (step % 4 == 0)
        block = Philox4x32::generate({static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(w >> 32),
                                      static_cast<std::uint32_t>(step / 4), static_cast<std::uint32_t>(step >> 34)},
                                     key);
      g.neighbours(x, nb);
      x = nb[block[step % 4] >> shift];
      ++step;
    }
    return game.payoffs[x * n + held] - paid;
  };

  std::vector<double> payoff(n_walks);
  const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(n_walks)));
  if (workers == 1) {
    for (std::size_t w = 0; w < n_walks; ++w) payoff[w] = walk(w);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_walks + workers - 1) / workers;
    for (unsigned t = 0; t < workers; ++t) {
      const std::size_t b = std::min(n_walks, chunk * t);
      const std::size_t e = std::min(n_walks, b + chunk);
      pool.emplace_back([&, b, e] {
        for (std::size_t w = b; w < e; ++w) payoff[w] = walk(w);
      });
    }
    for (auto& th : pool) th.join();
  }

  double sum = 0.0;
  for (double p : payoff) sum += p;
  const double mean = sum / static_cast<double>(n_walks);
  double ss = 0.0;
  for (double p : payoff) ss += (p - mean) * (p - mean);
  MonteCarloResult r;
  r.node = node;
  r.ticket = ticket;
  r.mean = mean;
  r.se = std::sqrt(ss / static_cast<double>(n_walks - 1) / static_cast<double>(n_walks));
  r.n_walks = n_walks;
  r.seed = seed;
  return r;
}

}  // namespace nmembrane
