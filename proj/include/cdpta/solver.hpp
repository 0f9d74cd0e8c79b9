#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "cdpta/region_graph.hpp"

namespace cdpta {

enum class Objective { Max, Min };

inline const char* objective_name(Objective o) { return o == Objective::Max ? "max" : "min"; }

struct SolveResult {
  double value = 0.0;  // optimal reachability probability at the initial state
  Objective objective = Objective::Max;
  std::int64_t iterations = 0;
  double residual = 0.0;
  std::vector<std::int32_t> strategy;  // chosen action index per state
};

/// Qualitative precomputation, pure graph fixpoints. P0 holds the states
/// whose optimal value is 0; for the max objective P1 holds the states with
/// value 1 (for min, P1 is just the target set).
inline std::pair<std::vector<char>, std::vector<char>> prob0_1(const RegionMdp& mdp,
                                                               Objective objective) {
  const std::size_t n = mdp.num_states();
  std::vector<char> p0(n, 0), p1(n, 0);

  if (objective == Objective::Max) {
    // P0: no path to a target under any action sequence.
    std::vector<std::vector<std::uint32_t>> preds(n);
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t a = 0; a < mdp.num_actions_of(s); ++a) {
        auto act = mdp.action(s, a);
        for (std::size_t t = 0; t < act.size; ++t)
          preds[act.target[t]].push_back(static_cast<std::uint32_t>(s));
      }
    std::vector<char> canReach(n, 0);
    std::deque<std::uint32_t> queue;
    for (std::size_t s = 0; s < n; ++s)
      if (mdp.targetMask[s]) {
        canReach[s] = 1;
        queue.push_back(static_cast<std::uint32_t>(s));
      }
    while (!queue.empty()) {
      auto s = queue.front();
      queue.pop_front();
      for (auto p : preds[s])
        if (!canReach[p]) {
          canReach[p] = 1;
          queue.push_back(p);
        }
    }
    for (std::size_t s = 0; s < n; ++s) p0[s] = canReach[s] ? 0 : 1;

    // P1: greatest fixpoint of the standard two-level reach-with-probability-1
    // characterization.
    std::vector<char> X(n, 1);
    while (true) {
      std::vector<char> Y(n, 0);
      for (std::size_t s = 0; s < n; ++s) Y[s] = mdp.targetMask[s] ? 1 : 0;
      bool changedInner = true;
      while (changedInner) {
        changedInner = false;
        for (std::size_t s = 0; s < n; ++s) {
          if (Y[s]) continue;
          for (std::size_t a = 0; a < mdp.num_actions_of(s); ++a) {
            auto act = mdp.action(s, a);
            bool allInX = true, someInY = false;
            for (std::size_t t = 0; t < act.size; ++t) {
              allInX = allInX && X[act.target[t]];
              someInY = someInY || Y[act.target[t]];
            }
            if (allInX && someInY) {
              Y[s] = 1;
              changedInner = true;
              break;
            }
          }
        }
      }
      if (Y == X) break;
      X = std::move(Y);
    }
    p1 = X;
  } else {
    // P0 for min: greatest set of non-target states closed under some action.
    std::vector<char> X(n, 0);
    for (std::size_t s = 0; s < n; ++s) X[s] = mdp.targetMask[s] ? 0 : 1;
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t s = 0; s < n; ++s) {
        if (!X[s]) continue;
        bool keep = false;
        for (std::size_t a = 0; a < mdp.num_actions_of(s) && !keep; ++a) {
          auto act = mdp.action(s, a);
          bool closed = true;
          for (std::size_t t = 0; t < act.size; ++t) closed = closed && X[act.target[t]];
          keep = closed;
        }
        if (!keep) {
          X[s] = 0;
          changed = true;
        }
      }
    }
    p0 = X;
    for (std::size_t s = 0; s < n; ++s) p1[s] = mdp.targetMask[s] ? 1 : 0;
  }
  return {std::move(p0), std::move(p1)};
}

namespace detail {

struct SolverCsr {
  // Transition probabilities converted to double once; layout mirrors the MDP.
  std::vector<double> prob;
};

inline SolveResult solve(const RegionMdp& mdp, Objective objective, double epsilon,
                         std::int64_t iterationCap) {
  if (epsilon <= 0) throw Error(ErrorKind::Usage, "epsilon must be positive");
  const std::size_t n = mdp.num_states();

  auto [p0, p1] = prob0_1(mdp, objective);

  std::vector<double> prob(mdp.transTarget.size());
  for (std::size_t t = 0; t < prob.size(); ++t)
    prob[t] = static_cast<double>(mdp.transNum[t]) / static_cast<double>(mdp.transDen[t]);

  std::vector<char> frozen(n, 0);
  std::vector<double> value(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    if (p1[s]) {
      value[s] = 1.0;
      frozen[s] = 1;
    } else if (p0[s]) {
      frozen[s] = 1;
    }
  }

  auto action_value = [&](std::size_t s, std::size_t a, const std::vector<double>& v) {
    const std::uint32_t ai = mdp.actBegin[s] + static_cast<std::uint32_t>(a);
    double sum = 0.0;
    for (std::uint32_t t = mdp.transBegin[ai]; t < mdp.transBegin[ai + 1]; ++t)
      sum += prob[t] * v[mdp.transTarget[t]];
    return sum;
  };

  std::vector<double> next(value);
  double residual = 0.0;
  std::int64_t iterations = 0;
  while (true) {
    residual = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      if (frozen[s]) continue;
      const std::size_t numActs = mdp.num_actions_of(s);
      double best = action_value(s, 0, value);
      for (std::size_t a = 1; a < numActs; ++a) {
        double av = action_value(s, a, value);
        if (objective == Objective::Max ? av > best : av < best) best = av;
      }
      next[s] = best;
      residual = std::max(residual, std::abs(best - value[s]));
    }
    std::swap(value, next);
    ++iterations;
    if (residual < epsilon) break;
    if (iterations >= iterationCap)
      throw Error(ErrorKind::NonConvergence,
                  "value iteration did not converge within " + std::to_string(iterationCap) +
                      " sweeps (residual " + std::to_string(residual) + ")");
  }

  SolveResult result;
  result.objective = objective;
  result.iterations = iterations;
  result.residual = residual;
  result.value = value[mdp.initialState];
  result.strategy.assign(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t numActs = mdp.num_actions_of(s);
    std::int32_t bestIdx = 0;
    double best = action_value(s, 0, value);
    for (std::size_t a = 1; a < numActs; ++a) {
      double av = action_value(s, a, value);
      if (objective == Objective::Max ? av > best : av < best) {
        best = av;
        bestIdx = static_cast<std::int32_t>(a);
      }
    }
    result.strategy[s] = bestIdx;
  }
  return result;
}

}  // namespace detail

/// Maximal reachability value of the target states, by value iteration from
/// the zero vector after qualitative precomputation. Stops when the sup-norm
/// change drops below epsilon; ties in the extracted strategy break to the
/// lowest action index.
inline SolveResult reach_max(const RegionMdp& mdp, double epsilon = 1e-9,
                             std::int64_t iterationCap = 1000000) {
  return detail::solve(mdp, Objective::Max, epsilon, iterationCap);
}

inline SolveResult reach_min(const RegionMdp& mdp, double epsilon = 1e-9,
                             std::int64_t iterationCap = 1000000) {
  return detail::solve(mdp, Objective::Min, epsilon, iterationCap);
}

/// Value of a fixed memoryless strategy at the initial state (long value
/// iteration on the induced chain). Used to cross-check extracted strategies.
inline double evaluate_strategy(const RegionMdp& mdp, const std::vector<std::int32_t>& strategy,
                                double epsilon = 1e-12, std::int64_t iterationCap = 2000000) {
  const std::size_t n = mdp.num_states();
  std::vector<double> prob(mdp.transTarget.size());
  for (std::size_t t = 0; t < prob.size(); ++t)
    prob[t] = static_cast<double>(mdp.transNum[t]) / static_cast<double>(mdp.transDen[t]);
  std::vector<double> value(n, 0.0), next(n, 0.0);
  for (std::size_t s = 0; s < n; ++s)
    if (mdp.targetMask[s]) value[s] = next[s] = 1.0;
  for (std::int64_t it = 0; it < iterationCap; ++it) {
    double residual = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      if (mdp.targetMask[s]) continue;
      const std::uint32_t ai = mdp.actBegin[s] + static_cast<std::uint32_t>(strategy[s]);
      double sum = 0.0;
      for (std::uint32_t t = mdp.transBegin[ai]; t < mdp.transBegin[ai + 1]; ++t)
        sum += prob[t] * value[mdp.transTarget[t]];
      next[s] = sum;
      residual = std::max(residual, std::abs(sum - value[s]));
    }
    std::swap(value, next);
    if (residual < epsilon) break;
  }
  return value[mdp.initialState];
}

}  // namespace cdpta
