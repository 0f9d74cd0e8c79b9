#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "cdpta/region.hpp"
#include "cdpta/validate.hpp"

namespace cdpta {

struct RegionState {
  LocationId location = 0;
  KRegion region;
};

struct MdpStats {
  std::int64_t numStates = 0;
  std::int64_t numActions = 0;
  std::int64_t numTransitions = 0;
};

/// One composite action: let time pass to an invariant-satisfying time
/// successor, then fire a probabilistic edge there, with the distribution
/// evaluated at one corner point of the delay target's region. Synthesized
/// absorbing self-loops carry edge == -1.
struct ActionView {
  std::int32_t delayState = -1;  // state index of the delay target (same location)
  std::int32_t edge = -1;        // index into the model's edge list
  std::int32_t corner = -1;      // corner index within corners(delay region)
  const std::uint32_t* target = nullptr;
  const std::int64_t* num = nullptr;
  const std::int64_t* den = nullptr;
  std::size_t size = 0;  // support size

  Rational probability(std::size_t i) const { return Rational(BigInt(num[i]), BigInt(den[i])); }
};

/// Explicit finite MDP over region states. States are numbered in discovery
/// order (BFS over delay successors, then edge-outcome targets); two builds
/// of the same model and granularity are bit-identical. Action and transition
/// data live in flat arrays indexed by per-state and per-action offsets.
struct RegionMdp {
  int k = 1;
  int initialState = 0;
  std::vector<std::string> clockNames;
  std::vector<std::string> locationNames;
  std::vector<RegionState> states;
  std::vector<char> targetMask;

  std::vector<std::uint32_t> actBegin;  // per state, size states+1
  std::vector<std::int32_t> actDelayState;
  std::vector<std::int32_t> actEdge;
  std::vector<std::int32_t> actCorner;
  std::vector<std::uint32_t> transBegin;  // per action, size actions+1
  std::vector<std::uint32_t> transTarget;
  std::vector<std::int64_t> transNum;
  std::vector<std::int64_t> transDen;

  std::vector<std::string> notes;  // states made absorbing for lack of actions

  std::size_t num_states() const { return states.size(); }
  std::size_t num_actions_of(std::size_t s) const { return actBegin[s + 1] - actBegin[s]; }

  ActionView action(std::size_t s, std::size_t i) const {
    std::uint32_t a = actBegin[s] + static_cast<std::uint32_t>(i);
    ActionView v;
    v.delayState = actDelayState[a];
    v.edge = actEdge[a];
    v.corner = actCorner[a];
    v.target = transTarget.data() + transBegin[a];
    v.num = transNum.data() + transBegin[a];
    v.den = transDen.data() + transBegin[a];
    v.size = transBegin[a + 1] - transBegin[a];
    return v;
  }

  MdpStats stats() const {
    return {static_cast<std::int64_t>(states.size()),
            static_cast<std::int64_t>(actEdge.size()),
            static_cast<std::int64_t>(transTarget.size())};
  }

  std::string state_to_string(std::size_t s) const {
    return locationNames[states[s].location] + " " + region_to_string(states[s].region, clockNames);
  }
};

namespace detail {

struct StateKeyHash {
  std::size_t operator()(const std::vector<std::int64_t>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (auto x : v) {
      h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

inline std::vector<std::int64_t> state_key(LocationId l, const KRegion& r) {
  std::vector<std::int64_t> key;
  key.reserve(1 + 2 * r.num_clocks());
  key.push_back(l);
  for (auto b : r.scaledBase) key.push_back(b);
  for (auto c : r.classOf) key.push_back(c);
  return key;
}

inline void checked_int64(const Rational& q, std::int64_t& num, std::int64_t& den) {
  const BigInt lo = std::numeric_limits<std::int64_t>::min();
  const BigInt hi = std::numeric_limits<std::int64_t>::max();
  if (numerator(q) < lo || numerator(q) > hi || denominator(q) > hi)
    throw Error(ErrorKind::OutOfRange, "transition probability exceeds the 64-bit exact range");
  num = numerator(q).convert_to<std::int64_t>();
  den = denominator(q).convert_to<std::int64_t>();
}

}  // namespace detail

/// Compiles the clock-dependent region graph with granularity k as an
/// explicit MDP. Forward-reachable construction from (initial, R_0): both
/// delay successors and edge-outcome targets are explored. Target states are
/// made absorbing after exploration, so the state set does not depend on the
/// target set. Action order per state: delay targets in chain order, edges in
/// model order, corners in index order.
inline RegionMdp build(const ValidatedModel& vm, int k, const std::set<LocationId>& targets) {
  if (k < 1) throw Error(ErrorKind::Usage, "granularity k must be >= 1");
  const CdPta& model = vm.model();

  RegionMdp mdp;
  mdp.k = k;
  mdp.clockNames = model.clocks;
  for (const auto& loc : model.locations) mdp.locationNames.push_back(loc.name);

  std::vector<std::vector<int>> edgesBySource(model.num_locations());
  for (int i = 0; i < static_cast<int>(model.edges.size()); ++i)
    edgesBySource[model.edges[i].source].push_back(i);

  std::unordered_map<std::vector<std::int64_t>, std::int32_t, detail::StateKeyHash> index;
  auto intern = [&](LocationId l, const KRegion& r) -> std::int32_t {
    auto key = detail::state_key(l, r);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    std::int32_t id = static_cast<std::int32_t>(mdp.states.size());
    index.emplace(std::move(key), id);
    mdp.states.push_back({l, r});
    mdp.targetMask.push_back(targets.count(l) ? 1 : 0);
    return id;
  };

  // Distribution of firing `edge` at corner `ci` of the delay target state:
  // per outcome (X, l'), the weight at the corner accumulates onto
  // (l', R'[X:=0]). Computed once per (delay state, edge) and reused by every
  // predecessor that delays there.
  struct FirePlan {
    // per corner: support as parallel vectors
    std::vector<std::vector<std::uint32_t>> target;
    std::vector<std::vector<std::int64_t>> num, den;
  };
  std::unordered_map<std::int64_t, FirePlan> fireCache;

  const std::int64_t edgeCount = static_cast<std::int64_t>(model.edges.size());
  auto fire_plan = [&](std::int32_t delayState, int edgeIdx) -> const FirePlan& {
    std::int64_t key = static_cast<std::int64_t>(delayState) * edgeCount + edgeIdx;
    auto it = fireCache.find(key);
    if (it != fireCache.end()) return it->second;

    const KRegion region = mdp.states[delayState].region;  // copy: intern may reallocate
    const ProbEdge& edge = model.edges[edgeIdx];
    FirePlan plan;
    std::vector<std::int32_t> outcomeTarget(edge.outcomes.size());
    for (std::size_t oi = 0; oi < edge.outcomes.size(); ++oi)
      outcomeTarget[oi] =
          intern(edge.outcomes[oi].target, reset_region(region, edge.outcomes[oi].resetSet));

    auto cps = corners(region);
    plan.target.resize(cps.size());
    plan.num.resize(cps.size());
    plan.den.resize(cps.size());
    for (std::size_t ci = 0; ci < cps.size(); ++ci) {
      auto probs = eval_template_at_corner(edge, cps[ci]);
      std::vector<std::pair<std::uint32_t, Rational>> dist;
      Rational total(0);
      for (std::size_t oi = 0; oi < probs.size(); ++oi) {
        if (probs[oi] == 0) continue;
        if (probs[oi] < 0 || probs[oi] > 1)
          throw Error(ErrorKind::ValidationRequired,
                      "corner weight outside [0,1] on edge #" + std::to_string(edgeIdx));
        total += probs[oi];
        std::uint32_t tgt = static_cast<std::uint32_t>(outcomeTarget[oi]);
        bool merged = false;
        for (auto& [t, p] : dist)
          if (t == tgt) { p += probs[oi]; merged = true; break; }
        if (!merged) dist.emplace_back(tgt, probs[oi]);
      }
      if (total != 1)
        throw Error(ErrorKind::ValidationRequired,
                    "corner distribution sums to " + rational_to_string(total) + " on edge #" +
                        std::to_string(edgeIdx));
      for (auto& [t, p] : dist) {
        std::int64_t n, d;
        detail::checked_int64(p, n, d);
        plan.target[ci].push_back(t);
        plan.num[ci].push_back(n);
        plan.den[ci].push_back(d);
      }
    }
    return fireCache.emplace(key, std::move(plan)).first->second;
  };

  KRegion r0 = region_of(zero_valuation(model), k, model.ceiling);
  intern(model.initial, r0);
  mdp.actBegin.push_back(0);
  mdp.transBegin.push_back(0);

  auto emit_self_loop = [&](std::int32_t s) {
    mdp.actDelayState.push_back(s);
    mdp.actEdge.push_back(-1);
    mdp.actCorner.push_back(-1);
    mdp.transTarget.push_back(static_cast<std::uint32_t>(s));
    mdp.transNum.push_back(1);
    mdp.transDen.push_back(1);
    mdp.transBegin.push_back(static_cast<std::uint32_t>(mdp.transTarget.size()));
  };

  for (std::size_t s = 0; s < mdp.states.size(); ++s) {
    const LocationId l = mdp.states[s].location;
    const ClockConstraint& inv = model.locations[l].invariant;
    auto chain = time_successors(mdp.states[s].region, inv);

    std::vector<std::int32_t> chainStates;
    chainStates.reserve(chain.size());
    for (const auto& r : chain) chainStates.push_back(intern(l, r));

    const std::size_t actMark = mdp.actEdge.size();
    const std::size_t transMark = mdp.transTarget.size();
    for (std::size_t di = 0; di < chain.size(); ++di) {
      for (int edgeIdx : edgesBySource[l]) {
        if (!region_satisfies(chain[di], model.edges[edgeIdx].guard)) continue;
        const FirePlan& plan = fire_plan(chainStates[di], edgeIdx);
        for (std::size_t ci = 0; ci < plan.target.size(); ++ci) {
          mdp.actDelayState.push_back(chainStates[di]);
          mdp.actEdge.push_back(edgeIdx);
          mdp.actCorner.push_back(static_cast<std::int32_t>(ci));
          mdp.transTarget.insert(mdp.transTarget.end(), plan.target[ci].begin(), plan.target[ci].end());
          mdp.transNum.insert(mdp.transNum.end(), plan.num[ci].begin(), plan.num[ci].end());
          mdp.transDen.insert(mdp.transDen.end(), plan.den[ci].begin(), plan.den[ci].end());
          mdp.transBegin.push_back(static_cast<std::uint32_t>(mdp.transTarget.size()));
        }
      }
    }

    const bool isTarget = mdp.targetMask[s] != 0;
    const bool noAction = mdp.actEdge.size() == actMark;
    if (isTarget || noAction) {
      // Drop whatever was emitted and make the state absorbing. Exploration
      // above still interned every successor, so the state set does not
      // depend on the target set.
      mdp.actDelayState.resize(actMark);
      mdp.actEdge.resize(actMark);
      mdp.actCorner.resize(actMark);
      mdp.transTarget.resize(transMark);
      mdp.transNum.resize(transMark);
      mdp.transDen.resize(transMark);
      mdp.transBegin.resize(actMark + 1);
      emit_self_loop(static_cast<std::int32_t>(s));
      if (!isTarget)
        mdp.notes.push_back("state " + std::to_string(s) + " (" + mdp.state_to_string(s) +
                            ") has no enabled edge now or later; made absorbing");
    }
    mdp.actBegin.push_back(static_cast<std::uint32_t>(mdp.actEdge.size()));
  }

  return mdp;
}

inline MdpStats stats(const RegionMdp& mdp) { return mdp.stats(); }

}  // namespace cdpta
