#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cdpta/cdpta.hpp"

namespace cdpta::test {

inline Rational rat(std::int64_t num, std::int64_t den = 1) { return make_rational(num, den); }

inline ClockValuation val(std::initializer_list<Rational> values) { return ClockValuation(values); }

/// Enumerates every k-region over `numClocks` clocks with ceiling M:
/// all base assignments times all ordered partitions with nonempty classes
/// 1..n and ceiling clocks forced punctual.
inline std::vector<KRegion> enumerate_regions(int numClocks, int k, std::int64_t ceiling) {
  std::vector<KRegion> out;
  std::vector<std::int64_t> base(numClocks, 0);

  // Ordered partitions encoded as class index per clock with dense class use.
  std::vector<std::vector<int>> assignments;
  std::vector<int> classOf(numClocks, 0);
  auto rec = [&](auto&& self, int x) -> void {
    if (x == numClocks) {
      int maxClass = 0;
      for (int c : classOf) maxClass = std::max(maxClass, c);
      std::vector<int> used(maxClass + 1, 0);
      for (int c : classOf) used[c] = 1;
      for (int c = 1; c <= maxClass; ++c)
        if (!used[c]) return;
      assignments.push_back(classOf);
      return;
    }
    for (int c = 0; c <= numClocks; ++c) {
      classOf[x] = c;
      self(self, x + 1);
    }
  };
  rec(rec, 0);

  auto recBase = [&](auto&& self, int x) -> void {
    if (x == numClocks) {
      for (const auto& assign : assignments) {
        bool ok = true;
        int maxClass = 0;
        for (int x2 = 0; x2 < numClocks; ++x2) {
          if (base[x2] == ceiling * k && assign[x2] != 0) ok = false;
          maxClass = std::max(maxClass, assign[x2]);
        }
        if (!ok) continue;
        KRegion r;
        r.k = k;
        r.ceiling = ceiling;
        r.scaledBase = base;
        r.classOf = assign;
        r.numClasses = maxClass + 1;
        out.push_back(std::move(r));
      }
      return;
    }
    for (std::int64_t b = 0; b <= ceiling * k; ++b) {
      base[x] = b;
      self(self, x + 1);
    }
  };
  recBase(recBase, 0);
  return out;
}

/// Random valuation inside R: class fractions drawn as distinct multiples of
/// 1/(denScale*k) strictly between the neighbors.
inline ClockValuation random_point_in(const KRegion& r, std::mt19937& rng, int denScale = 4) {
  const int n = r.num_fractional_classes();
  const int slots = std::max(denScale, n + 1);  // fractions j/(slots*k), j in 1..slots-1
  std::vector<int> picks;
  std::uniform_int_distribution<int> dist(1, slots - 1);
  std::set<int> chosen;
  while (static_cast<int>(chosen.size()) < n) chosen.insert(dist(rng));
  picks.assign(chosen.begin(), chosen.end());
  ClockValuation v(r.num_clocks());
  for (ClockId x = 0; x < r.num_clocks(); ++x) {
    Rational value(BigInt(r.scaledBase[x]), BigInt(r.k));
    if (!r.punctual(x))
      value += Rational(BigInt(picks[r.classOf[x] - 1]), BigInt(std::int64_t(slots) * r.k));
    v[x] = value;
  }
  return v;
}

/// Random cdPTA with `numClocks` <= 2 clocks, a handful of locations, M <= 2,
/// valid by construction: invariants bound every clock by M, every location
/// has one always-enabled edge, and edge templates split 1 between two
/// outcomes via complementary piecewise-linear functions.
inline CdPta random_model(std::uint32_t seed) {
  std::mt19937 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  CdPta model;
  const int numClocks = pick(1, 2);
  const std::int64_t M = pick(1, 2);
  for (int x = 0; x < numClocks; ++x) model.clocks.push_back(std::string(1, char('x' + x)));
  const int numLocations = pick(2, 4);
  for (int l = 0; l < numLocations; ++l) {
    ClockConstraint inv;
    for (int x = 0; x < numClocks; ++x) inv.atoms.push_back({x, ConstraintOp::Le, M});
    model.locations.push_back({"L" + std::to_string(l), std::move(inv)});
  }
  model.initial = 0;

  // A piecewise-linear function on [0, hi] with values in [0, cap] at integer
  // breakpoints (cap splits the unit so per-outcome sums stay in [0,1]).
  auto randomFn = [&](const Rational& cap, std::int64_t hi) {
    PiecewiseLinearFn fn;
    std::vector<Rational> at(hi + 1);
    for (std::int64_t b = 0; b <= hi; ++b) at[b] = cap * rat(pick(0, 8), 8);
    for (std::int64_t b = 0; b < hi; ++b) {
      Rational d = at[b + 1] - at[b];
      Rational c = at[b] - d * b;
      fn.pieces.push_back({b, b + 1, c, d});
    }
    if (hi == 0) fn.pieces.push_back({0, 0, at[0], Rational(0)});
    return fn;
  };

  for (int l = 0; l < numLocations; ++l) {
    const int numEdges = pick(1, 2);
    for (int e = 0; e < numEdges; ++e) {
      ProbEdge edge;
      edge.source = l;
      // First edge of each location keeps guard true, so some edge is always
      // enabled and the liveness walk stays clean.
      if (e > 0 && pick(0, 1)) {
        int x = pick(0, numClocks - 1);
        edge.guard.atoms.push_back(
            {x, pick(0, 1) ? ConstraintOp::Le : ConstraintOp::Lt, pick(1, static_cast<int>(M))});
      }
      Outcome o1, o2;
      o1.target = pick(0, numLocations - 1);
      o2.target = pick(0, numLocations - 1);
      for (int x = 0; x < numClocks; ++x) {
        if (pick(0, 1)) o1.resetSet.push_back(x);
        if (pick(0, 1)) o2.resetSet.push_back(x);
      }
      Rational cap = rat(1, numClocks);
      ClockConstraint normalized = conjoin(edge.guard, model.locations[l].invariant, numClocks);
      std::vector<PiecewiseLinearFn> f1(numClocks), f2(numClocks);
      for (int x = 0; x < numClocks; ++x) {
        std::int64_t hi = constraint_interval(normalized, x).hi;
        f1[x] = randomFn(cap, hi);
        // Complement: per clock, cap - f1 so the two outcomes sum to 1.
        PiecewiseLinearFn comp;
        for (const auto& p : f1[x].pieces) comp.pieces.push_back({p.lo, p.hi, cap - p.c, -p.d});
        f2[x] = std::move(comp);
      }
      edge.outcomes = {std::move(o1), std::move(o2)};
      edge.weights = {std::move(f1), std::move(f2)};
      model.edges.push_back(std::move(edge));
    }
  }
  normalize(model);
  return model;
}

}  // namespace cdpta::test
