#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cdpta/model.hpp"

namespace cdpta {

/// Finite deterministic decision tree over the concrete semantics: each node
/// elapses `delay`, fires `edge`, and maps outcome indices to subtrees.
/// An absent child means the run stops there.
struct ScheduleNode {
  Rational delay;
  int edge = -1;
  std::map<int, ScheduleNode> children;
};

struct Schedule {
  std::optional<ScheduleNode> root;
};

namespace detail {

inline Rational eval_schedule_node(const CdPta& model, const ScheduleNode& node, LocationId l,
                                   const ClockValuation& v, const std::set<LocationId>& targets) {
  if (targets.count(l)) return Rational(1);
  const ClockConstraint& inv = model.locations[l].invariant;
  if (node.delay < 0 || !satisfies(v, inv) || !satisfies(elapse(v, node.delay), inv))
    throw Error(ErrorKind::IllegalDelay,
                "delay " + rational_to_string(node.delay) + " leaves the invariant of " +
                    model.locations[l].name);
  ClockValuation atFire = elapse(v, node.delay);
  if (node.edge < 0 || node.edge >= static_cast<int>(model.edges.size()))
    throw Error(ErrorKind::EdgeNotEnabled, "schedule refers to edge #" + std::to_string(node.edge));
  const ProbEdge& edge = model.edges[node.edge];
  if (edge.source != l || !satisfies(atFire, edge.guard))
    throw Error(ErrorKind::EdgeNotEnabled,
                "edge #" + std::to_string(node.edge) + " not enabled at the scheduled point");
  auto probs = eval_template(edge, atFire);
  Rational acc(0);
  for (std::size_t oi = 0; oi < probs.size(); ++oi) {
    if (probs[oi] == 0) continue;
    const Outcome& o = edge.outcomes[oi];
    if (targets.count(o.target)) {
      acc += probs[oi];
      continue;
    }
    auto child = node.children.find(static_cast<int>(oi));
    if (child == node.children.end()) continue;  // stop: contributes nothing
    acc += probs[oi] *
           eval_schedule_node(model, child->second, o.target, reset(atFire, o.resetSet), targets);
  }
  return acc;
}

}  // namespace detail

/// Exact probability that a run following the schedule from the given state
/// hits a target location at or before the tree's leaves.
inline Rational evaluate_schedule_from(const CdPta& model, const Schedule& schedule,
                                       const std::set<LocationId>& targets, LocationId start,
                                       const ClockValuation& v) {
  if (!satisfies(v, model.locations[start].invariant))
    throw Error(ErrorKind::InvariantViolated, "start state violates its location invariant");
  if (targets.count(start)) return Rational(1);
  if (!schedule.root) return Rational(0);
  return detail::eval_schedule_node(model, *schedule.root, start, v, targets);
}

inline Rational evaluate_schedule(const CdPta& model, const Schedule& schedule,
                                  const std::set<LocationId>& targets) {
  return evaluate_schedule_from(model, schedule, targets, model.initial, zero_valuation(model));
}

namespace detail {

struct SearchKey {
  LocationId location;
  int depth;
  ClockValuation valuation;

  bool operator<(const SearchKey& o) const {
    if (location != o.location) return location < o.location;
    if (depth != o.depth) return depth < o.depth;
    return valuation < o.valuation;
  }
};

struct SearchEntry {
  Rational value;
  std::optional<ScheduleNode> plan;
};

struct GridSearch {
  const CdPta& model;
  const std::set<LocationId>& targets;
  int m;
  std::int64_t budget;
  std::int64_t expansions = 0;
  std::map<SearchKey, SearchEntry> memo;

  /// Largest j such that the invariant holds continuously up to a delay of
  /// j/m. Upper-bound atoms decide; lower bounds only improve with time.
  std::int64_t max_steps(const ClockConstraint& inv, const ClockValuation& v) const {
    Rational best(-1);
    bool bestStrict = false, bounded = false;
    for (const auto& a : inv.atoms) {
      if (a.op != ConstraintOp::Le && a.op != ConstraintOp::Lt) continue;
      Rational room = Rational(a.bound) - v[a.clock];
      bool strict = a.op == ConstraintOp::Lt;
      if (!bounded || room < best || (room == best && strict)) {
        best = room;
        bestStrict = strict;
        bounded = true;
      }
    }
    if (!bounded) best = Rational(model.ceiling);  // validated models always bound
    if (best < 0) return -1;
    Rational scaled = best * m;
    BigInt fl = floor_rational(scaled);
    std::int64_t steps = fl.convert_to<std::int64_t>();
    if (bestStrict && Rational(fl) == scaled) --steps;
    return steps;
  }

  const SearchEntry& best(LocationId l, const ClockValuation& v, int depth) {
    SearchKey key{l, depth, v};
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    if (++expansions > budget)
      throw Error(ErrorKind::Explosion,
                  "schedule search exceeded the node budget of " + std::to_string(budget));

    SearchEntry entry{Rational(0), std::nullopt};
    if (targets.count(l)) {
      entry.value = 1;
    } else if (depth > 0 && location_has_edges(model, l)) {
      const std::int64_t steps = max_steps(model.locations[l].invariant, v);
      for (std::int64_t j = 0; j <= steps; ++j) {
        ClockValuation atFire = elapse(v, make_rational(j, m));
        for (int e = 0; e < static_cast<int>(model.edges.size()); ++e) {
          const ProbEdge& edge = model.edges[e];
          if (edge.source != l || !satisfies(atFire, edge.guard)) continue;
          auto probs = eval_template(edge, atFire);
          Rational value(0);
          ScheduleNode node;
          node.delay = make_rational(j, m);
          node.edge = e;
          for (std::size_t oi = 0; oi < probs.size(); ++oi) {
            if (probs[oi] == 0) continue;
            const Outcome& o = edge.outcomes[oi];
            if (targets.count(o.target)) {
              value += probs[oi];
              continue;
            }
            const SearchEntry& sub = best(o.target, reset(atFire, o.resetSet), depth - 1);
            if (sub.value == 0) continue;
            value += probs[oi] * sub.value;
            if (sub.plan) node.children[static_cast<int>(oi)] = *sub.plan;
          }
          if (value > entry.value) {
            entry.value = value;
            entry.plan = std::move(node);
          }
        }
      }
    }
    return memo.emplace(std::move(key), std::move(entry)).first->second;
  }
};

}  // namespace detail

/// Exhaustive search for the best finite schedule with delays restricted to
/// multiples of 1/m, to the given tree depth. The returned value is exact for
/// the returned schedule. Ties resolve to the lexicographically smallest
/// delay sequence (delays and edges are scanned in ascending order and only
/// strict improvements are kept). A node budget guards against explosion.
inline std::pair<Schedule, Rational> grid_search(const CdPta& model,
                                                 const std::set<LocationId>& targets, int m,
                                                 int depth, std::int64_t nodeBudget = 2000000) {
  if (m < 1) throw Error(ErrorKind::Usage, "grid denominator must be >= 1");
  if (depth < 0) throw Error(ErrorKind::Usage, "depth must be >= 0");
  detail::GridSearch search{model, targets, m, nodeBudget};
  const auto& entry = search.best(model.initial, zero_valuation(model), depth);
  Schedule schedule;
  schedule.root = entry.plan;
  return {std::move(schedule), entry.value};
}

}  // namespace cdpta
