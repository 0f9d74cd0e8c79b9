#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cdpta/rational.hpp"

namespace cdpta {

/// Clocks are identified by dense indices 0..numClocks-1; names are only for
/// I/O and diagnostics.
using ClockId = int;
using LocationId = int;

enum class ConstraintOp { Lt, Le, Ge, Gt };

inline const char* op_name(ConstraintOp op) {
  switch (op) {
    case ConstraintOp::Lt: return "<";
    case ConstraintOp::Le: return "<=";
    case ConstraintOp::Ge: return ">=";
    case ConstraintOp::Gt: return ">";
  }
  return "?";
}

struct ConstraintAtom {
  ClockId clock = 0;
  ConstraintOp op = ConstraintOp::Le;
  std::int64_t bound = 0;  // natural number

  bool operator==(const ConstraintAtom&) const = default;
};

/// Conjunction of atoms; the empty list is `true`.
struct ClockConstraint {
  std::vector<ConstraintAtom> atoms;

  bool operator==(const ClockConstraint&) const = default;
};

/// One affine piece of a continuous piecewise-linear function:
/// gamma -> c + d*gamma on [lo, hi). A piece with lo == hi denotes the single
/// point {lo} (used when the guard pins a clock to one value).
struct LinearPiece {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  Rational c;
  Rational d;

  bool operator==(const LinearPiece&) const = default;
};

struct PiecewiseLinearFn {
  std::vector<LinearPiece> pieces;

  bool operator==(const PiecewiseLinearFn&) const = default;

  bool is_zero() const {
    for (const auto& p : pieces)
      if (p.c != 0 || p.d != 0) return false;
    return true;
  }

  /// Evaluates at a point of the closed domain [lo_0, hi_last]. Interior
  /// piece boundaries agree by continuity; the supremum is evaluated by
  /// continuous extension of the last piece.
  Rational eval(const Rational& gamma) const {
    if (pieces.empty()) return Rational(0);
    if (gamma < pieces.front().lo || gamma > pieces.back().hi)
      throw Error(ErrorKind::OutsideClosure,
                  "point " + rational_to_string(gamma) + " outside [" +
                      std::to_string(pieces.front().lo) + "," + std::to_string(pieces.back().hi) + "]");
    for (const auto& p : pieces) {
      if (gamma < p.hi || (gamma == p.hi && &p == &pieces.back()))
        return p.c + p.d * gamma;
    }
    return pieces.back().c + pieces.back().d * gamma;
  }
};

/// Probabilistic outcome of an edge: reset these clocks, go to this location.
struct Outcome {
  std::vector<ClockId> resetSet;  // sorted, unique
  LocationId target = 0;

  bool operator==(const Outcome&) const = default;
};

/// One probabilistic edge (l, g, p): the distribution over outcomes at
/// valuation v assigns outcome e the weight sum_x f_e^x(v(x)).
struct ProbEdge {
  LocationId source = 0;
  ClockConstraint guard;
  std::vector<Outcome> outcomes;
  // weights[i][x] is the per-clock addend function of outcome i; every clock
  // has an entry (zero functions are materialized over the guard interval).
  std::vector<std::vector<PiecewiseLinearFn>> weights;

  bool operator==(const ProbEdge&) const = default;
};

struct Location {
  std::string name;
  ClockConstraint invariant;

  bool operator==(const Location&) const = default;
};

struct CdPta {
  std::vector<std::string> clocks;
  std::vector<Location> locations;
  LocationId initial = 0;
  std::vector<ProbEdge> edges;
  std::int64_t ceiling = 0;  // M: max constant over constraints and piece endpoints

  int num_clocks() const { return static_cast<int>(clocks.size()); }
  int num_locations() const { return static_cast<int>(locations.size()); }

  LocationId location_index(const std::string& name) const {
    for (int i = 0; i < num_locations(); ++i)
      if (locations[i].name == name) return i;
    throw Error(ErrorKind::SchemaError, "unknown location \"" + name + "\"");
  }

  ClockId clock_index(const std::string& name) const {
    for (int i = 0; i < num_clocks(); ++i)
      if (clocks[i] == name) return i;
    throw Error(ErrorKind::SchemaError, "unknown clock \"" + name + "\"");
  }

  bool operator==(const CdPta&) const = default;
};

/// Clock valuation as a dense vector indexed by clock id.
using ClockValuation = std::vector<Rational>;

inline ClockValuation zero_valuation(const CdPta& model) {
  return ClockValuation(model.clocks.size(), Rational(0));
}

inline ClockValuation elapse(const ClockValuation& v, const Rational& t) {
  ClockValuation out = v;
  for (auto& x : out) x += t;
  return out;
}

inline ClockValuation reset(const ClockValuation& v, const std::vector<ClockId>& resetSet) {
  ClockValuation out = v;
  for (ClockId x : resetSet) out[x] = 0;
  return out;
}

inline bool atom_holds(const ConstraintAtom& a, const Rational& value) {
  switch (a.op) {
    case ConstraintOp::Lt: return value < a.bound;
    case ConstraintOp::Le: return value <= a.bound;
    case ConstraintOp::Ge: return value >= a.bound;
    case ConstraintOp::Gt: return value > a.bound;
  }
  return false;
}

/// v |= psi under exact rational comparison.
inline bool satisfies(const ClockValuation& v, const ClockConstraint& psi) {
  for (const auto& a : psi.atoms)
    if (!atom_holds(a, v[a.clock])) return false;
  return true;
}

/// Per-clock interval of a (canonicalized) constraint's box, as closed natural
/// bounds plus openness flags. `hi < 0` means no upper atom exists.
struct ClockInterval {
  std::int64_t lo = 0;
  bool loStrict = false;
  std::int64_t hi = -1;
  bool hiStrict = false;

  bool has_upper() const { return hi >= 0; }
  bool empty() const {
    if (!has_upper()) return false;
    if (lo > hi) return true;
    return lo == hi && (loStrict || hiStrict);
  }
  bool contains(const Rational& x) const {
    if (x < lo || (loStrict && x == lo)) return false;
    if (has_upper() && (x > hi || (hiStrict && x == hi))) return false;
    return true;
  }
};

inline ClockInterval constraint_interval(const ClockConstraint& psi, ClockId x) {
  ClockInterval iv;
  for (const auto& a : psi.atoms) {
    if (a.clock != x) continue;
    switch (a.op) {
      case ConstraintOp::Ge:
        if (a.bound > iv.lo || (a.bound == iv.lo && !iv.loStrict)) { iv.lo = a.bound; }
        break;
      case ConstraintOp::Gt:
        if (a.bound > iv.lo || (a.bound == iv.lo)) { iv.lo = a.bound; iv.loStrict = true; }
        break;
      case ConstraintOp::Le:
        if (!iv.has_upper() || a.bound < iv.hi) { iv.hi = a.bound; iv.hiStrict = false; }
        break;
      case ConstraintOp::Lt:
        if (!iv.has_upper() || a.bound < iv.hi || (a.bound == iv.hi && !iv.hiStrict)) {
          iv.hi = a.bound;
          iv.hiStrict = true;
        }
        break;
    }
  }
  return iv;
}

/// Rewrites a constraint as at most one lower and one upper atom per clock,
/// dropping the vacuous x >= 0. Atom order: by clock id, lower before upper.
inline ClockConstraint canonicalize(const ClockConstraint& psi, int numClocks) {
  ClockConstraint out;
  for (ClockId x = 0; x < numClocks; ++x) {
    ClockInterval iv = constraint_interval(psi, x);
    if (iv.lo > 0 || iv.loStrict)
      out.atoms.push_back({x, iv.loStrict ? ConstraintOp::Gt : ConstraintOp::Ge, iv.lo});
    if (iv.has_upper())
      out.atoms.push_back({x, iv.hiStrict ? ConstraintOp::Lt : ConstraintOp::Le, iv.hi});
  }
  return out;
}

inline ClockConstraint conjoin(const ClockConstraint& a, const ClockConstraint& b, int numClocks) {
  ClockConstraint both;
  both.atoms = a.atoms;
  both.atoms.insert(both.atoms.end(), b.atoms.begin(), b.atoms.end());
  return canonicalize(both, numClocks);
}

/// Guard normalization g := g /\ inv(l), applied at load time. Also
/// canonicalizes invariants, materializes missing per-clock weight functions
/// as zero over the guard's clock interval, and recomputes the ceiling M.
inline void normalize(CdPta& model) {
  const int n = model.num_clocks();
  for (auto& loc : model.locations) loc.invariant = canonicalize(loc.invariant, n);
  for (auto& e : model.edges)
    e.guard = conjoin(e.guard, model.locations[e.source].invariant, n);
  for (auto& e : model.edges) {
    for (auto& fns : e.weights) {
      fns.resize(n);
      for (ClockId x = 0; x < n; ++x) {
        if (!fns[x].pieces.empty()) continue;
        ClockInterval iv = constraint_interval(e.guard, x);
        std::int64_t hi = iv.has_upper() ? iv.hi : iv.lo;
        fns[x].pieces.push_back({iv.lo, hi, Rational(0), Rational(0)});
      }
    }
  }
  std::int64_t m = 0;
  for (const auto& loc : model.locations)
    for (const auto& a : loc.invariant.atoms) m = std::max(m, a.bound);
  for (const auto& e : model.edges) {
    for (const auto& a : e.guard.atoms) m = std::max(m, a.bound);
    for (const auto& fns : e.weights)
      for (const auto& fn : fns)
        for (const auto& p : fn.pieces) m = std::max({m, p.lo, p.hi});
  }
  model.ceiling = m;
}

/// p[v]: the distribution over the edge's outcomes at valuation v.
/// Requires v |= guard.
inline std::vector<Rational> eval_template(const ProbEdge& edge, const ClockValuation& v) {
  if (!satisfies(v, edge.guard))
    throw Error(ErrorKind::GuardUnsatisfied, "valuation does not satisfy the guard");
  std::vector<Rational> probs;
  probs.reserve(edge.outcomes.size());
  for (const auto& fns : edge.weights) {
    Rational sum(0);
    for (ClockId x = 0; x < static_cast<ClockId>(fns.size()); ++x)
      if (!fns[x].pieces.empty()) sum += fns[x].eval(v[x]);
    probs.push_back(std::move(sum));
  }
  return probs;
}

/// Edges with source l enabled at v. Requires v |= inv(l).
inline std::vector<int> enabled_edges(const CdPta& model, LocationId l, const ClockValuation& v) {
  if (!satisfies(v, model.locations[l].invariant))
    throw Error(ErrorKind::InvariantViolated,
                "valuation does not satisfy the invariant of " + model.locations[l].name);
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(model.edges.size()); ++i)
    if (model.edges[i].source == l && satisfies(v, model.edges[i].guard)) out.push_back(i);
  return out;
}

inline bool location_has_edges(const CdPta& model, LocationId l) {
  for (const auto& e : model.edges)
    if (e.source == l) return true;
  return false;
}

}  // namespace cdpta
