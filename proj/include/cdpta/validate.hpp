#pragma once

#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cdpta/model.hpp"
#include "cdpta/region.hpp"

namespace cdpta {

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;     // e.g. "sum-to-one", "target-invariant"
  std::string message;  // names the condition, the edge/location and a witness
};

namespace detail {

inline std::string valuation_to_string(const CdPta& model, const ClockValuation& v) {
  std::string s = "(";
  for (ClockId x = 0; x < model.num_clocks(); ++x) {
    if (x) s += ",";
    s += model.clocks[x] + "=" + rational_to_string(v[x]);
  }
  return s + ")";
}

inline std::string edge_label(const CdPta& model, int edgeIdx) {
  return "edge #" + std::to_string(edgeIdx) + " from " + model.locations[model.edges[edgeIdx].source].name;
}

/// Grid of evaluation points per clock: interval endpoints plus every piece
/// endpoint of every outcome. Affine cells of the template grid have their
/// extremes at these points.
inline std::vector<std::vector<Rational>> guard_grid(const CdPta& model, const ProbEdge& e) {
  std::vector<std::vector<Rational>> grid(model.num_clocks());
  for (ClockId x = 0; x < model.num_clocks(); ++x) {
    ClockInterval iv = constraint_interval(e.guard, x);
    std::set<std::int64_t> points;
    points.insert(iv.lo);
    if (iv.has_upper()) points.insert(iv.hi);
    for (const auto& fns : e.weights) {
      if (x >= static_cast<ClockId>(fns.size())) continue;
      for (const auto& p : fns[x].pieces) {
        if (p.lo >= iv.lo && (!iv.has_upper() || p.lo <= iv.hi)) points.insert(p.lo);
        if (p.hi >= iv.lo && (!iv.has_upper() || p.hi <= iv.hi)) points.insert(p.hi);
      }
    }
    for (auto pt : points) grid[x].push_back(Rational(pt));
  }
  return grid;
}

template <typename Fn>
inline void for_each_grid_corner(const std::vector<std::vector<Rational>>& grid, Fn&& fn) {
  const int n = static_cast<int>(grid.size());
  std::vector<std::size_t> idx(n, 0);
  if (n == 0) {
    fn(ClockValuation{});
    return;
  }
  while (true) {
    ClockValuation v(n);
    for (int x = 0; x < n; ++x) v[x] = grid[x][idx[x]];
    fn(v);
    int x = 0;
    while (x < n) {
      if (++idx[x] < grid[x].size()) break;
      idx[x] = 0;
      ++x;
    }
    if (x == n) break;
  }
}

/// inner interval contained in outer, honoring open endpoints.
inline bool interval_subset(const ClockInterval& inner, const ClockInterval& outer) {
  if (inner.lo < outer.lo) return false;
  if (inner.lo == outer.lo && outer.loStrict && !inner.loStrict) return false;
  if (outer.has_upper()) {
    if (!inner.has_upper()) return false;
    if (inner.hi > outer.hi) return false;
    if (inner.hi == outer.hi && outer.hiStrict && !inner.hiStrict) return false;
  }
  return true;
}

}  // namespace detail

/// Checks the model's well-formedness assumptions. Returns an empty list iff
/// the model is admissible: structural sanity, per-clock invariant bounds,
/// piece contiguity/continuity, the distribution conditions checked at cell
/// corners, symbolic target-invariant satisfaction, and (warning-level) that
/// every reachable region of a location with edges can eventually fire one.
/// Expects a normalized model (guards conjoined with source invariants).
inline std::vector<Diagnostic> validate(const CdPta& model) {
  std::vector<Diagnostic> diags;
  auto error = [&](std::string code, std::string msg) {
    diags.push_back({Severity::Error, std::move(code), std::move(msg)});
  };

  // Structure: unique names, index ranges, sane atoms.
  {
    std::set<std::string> names(model.clocks.begin(), model.clocks.end());
    if (names.size() != model.clocks.size()) error("structure", "duplicate clock names");
    std::set<std::string> locNames;
    for (const auto& l : model.locations) locNames.insert(l.name);
    if (locNames.size() != model.locations.size()) error("structure", "duplicate location names");
    if (model.locations.empty()) error("structure", "model has no locations");
    if (model.initial < 0 || model.initial >= model.num_locations())
      error("structure", "initial location out of range");
  }
  if (!diags.empty()) return diags;

  auto check_atoms = [&](const ClockConstraint& cc, const std::string& where) {
    for (const auto& a : cc.atoms) {
      if (a.clock < 0 || a.clock >= model.num_clocks())
        error("structure", where + ": atom references unknown clock");
      if (a.bound < 0) error("structure", where + ": negative bound");
      if (a.bound > model.ceiling)
        error("structure", where + ": bound exceeds the clock ceiling M=" + std::to_string(model.ceiling));
    }
  };
  for (int l = 0; l < model.num_locations(); ++l)
    check_atoms(model.locations[l].invariant, "invariant of " + model.locations[l].name);
  for (int i = 0; i < static_cast<int>(model.edges.size()); ++i) {
    const auto& e = model.edges[i];
    if (e.source < 0 || e.source >= model.num_locations()) {
      error("structure", "edge #" + std::to_string(i) + ": source out of range");
      continue;
    }
    check_atoms(e.guard, detail::edge_label(model, i) + " guard");
    if (e.outcomes.size() != e.weights.size())
      error("structure", detail::edge_label(model, i) + ": outcome/weight count mismatch");
    for (const auto& o : e.outcomes) {
      if (o.target < 0 || o.target >= model.num_locations())
        error("structure", detail::edge_label(model, i) + ": outcome target out of range");
      for (ClockId x : o.resetSet)
        if (x < 0 || x >= model.num_clocks())
          error("structure", detail::edge_label(model, i) + ": reset of unknown clock");
    }
  }
  if (!diags.empty()) return diags;

  // Every location invariant must bound every clock from above.
  for (const auto& loc : model.locations) {
    for (ClockId x = 0; x < model.num_clocks(); ++x) {
      ClockInterval iv = constraint_interval(loc.invariant, x);
      if (!iv.has_upper())
        error("invariant-bound",
              "invariant of " + loc.name + " does not bound clock " + model.clocks[x]);
    }
    ClockConstraint canon = canonicalize(loc.invariant, model.num_clocks());
    for (ClockId x = 0; x < model.num_clocks(); ++x)
      if (constraint_interval(canon, x).empty())
        error("unsatisfiable", "invariant of " + loc.name + " is unsatisfiable for clock " + model.clocks[x]);
  }

  // Initial state validity.
  if (!satisfies(zero_valuation(model), model.locations[model.initial].invariant))
    error("initial-state", "the zero valuation violates the initial location's invariant");

  // Guards: satisfiable boxes that imply the source invariant (i.e. the
  // normalization has been applied).
  for (int i = 0; i < static_cast<int>(model.edges.size()); ++i) {
    const auto& e = model.edges[i];
    bool sat = true;
    for (ClockId x = 0; x < model.num_clocks(); ++x) {
      ClockInterval g = constraint_interval(e.guard, x);
      if (g.empty()) sat = false;
      if (!detail::interval_subset(g, constraint_interval(model.locations[e.source].invariant, x)))
        error("guard-normalization",
              detail::edge_label(model, i) + ": guard does not imply the source invariant on clock " +
                  model.clocks[x]);
    }
    if (!sat) {
      error("unsatisfiable", detail::edge_label(model, i) + ": guard box is empty");
      continue;
    }

    // Pieces: every outcome, every clock: contiguous, continuous, natural
    // endpoints matching the guard's clock interval.
    for (std::size_t oi = 0; oi < e.weights.size(); ++oi) {
      for (ClockId x = 0; x < model.num_clocks(); ++x) {
        const auto& fn = e.weights[oi][x];
        const std::string where = detail::edge_label(model, i) + " outcome #" + std::to_string(oi) +
                                  " weight on " + model.clocks[x];
        if (fn.pieces.empty()) {
          error("pieces", where + ": no pieces");
          continue;
        }
        ClockInterval iv = constraint_interval(e.guard, x);
        if (fn.pieces.front().lo != iv.lo)
          error("pieces", where + ": first piece starts at " + std::to_string(fn.pieces.front().lo) +
                              ", guard interval starts at " + std::to_string(iv.lo));
        if (iv.has_upper() && fn.pieces.back().hi != iv.hi)
          error("pieces", where + ": last piece ends at " + std::to_string(fn.pieces.back().hi) +
                              ", guard interval ends at " + std::to_string(iv.hi));
        for (std::size_t p = 0; p < fn.pieces.size(); ++p) {
          if (fn.pieces[p].lo < 0) error("pieces", where + ": negative endpoint");
          if (fn.pieces[p].lo > fn.pieces[p].hi) error("pieces", where + ": inverted piece");
          if (p + 1 < fn.pieces.size()) {
            if (fn.pieces[p].hi != fn.pieces[p + 1].lo) {
              error("pieces", where + ": pieces not contiguous at " + std::to_string(fn.pieces[p].hi));
            } else {
              Rational b(fn.pieces[p].hi);
              Rational left = fn.pieces[p].c + fn.pieces[p].d * b;
              Rational right = fn.pieces[p + 1].c + fn.pieces[p + 1].d * b;
              if (left != right)
                error("continuity", where + ": discontinuity at " + std::to_string(fn.pieces[p].hi) +
                                        " (" + rational_to_string(left) + " vs " + rational_to_string(right) + ")");
            }
          }
        }
      }
    }
  }
  if (!diags.empty()) return diags;

  // Distribution conditions at cell corners: per outcome the weight sum lies
  // in [0,1], and across outcomes the sums total exactly 1.
  for (int i = 0; i < static_cast<int>(model.edges.size()); ++i) {
    const auto& e = model.edges[i];
    auto grid = detail::guard_grid(model, e);
    detail::for_each_grid_corner(grid, [&](const ClockValuation& corner) {
      Rational total(0);
      for (std::size_t oi = 0; oi < e.weights.size(); ++oi) {
        Rational s(0);
        for (ClockId x = 0; x < model.num_clocks(); ++x) s += e.weights[oi][x].eval(corner[x]);
        if (s < 0 || s > 1)
          error("outcome-weight-range",
                detail::edge_label(model, i) + " outcome #" + std::to_string(oi) + ": weight " +
                    rational_to_string(s) + " outside [0,1] at corner " +
                    detail::valuation_to_string(model, corner));
        total += s;
      }
      if (total != 1)
        error("sum-to-one", detail::edge_label(model, i) + ": outcome weights sum to " +
                               rational_to_string(total) + " at corner " +
                               detail::valuation_to_string(model, corner));
    });
  }

  // Possible target states satisfy their invariants, checked symbolically on
  // the guard box with resets applied.
  for (int i = 0; i < static_cast<int>(model.edges.size()); ++i) {
    const auto& e = model.edges[i];
    auto grid = detail::guard_grid(model, e);
    for (std::size_t oi = 0; oi < e.outcomes.size(); ++oi) {
      Rational maxWeight(0);
      detail::for_each_grid_corner(grid, [&](const ClockValuation& corner) {
        Rational s(0);
        for (ClockId x = 0; x < model.num_clocks(); ++x) s += e.weights[oi][x].eval(corner[x]);
        if (s > maxWeight) maxWeight = s;
      });
      if (maxWeight == 0) continue;  // outcome never has positive probability
      const auto& o = e.outcomes[oi];
      const auto& inv = model.locations[o.target].invariant;
      for (ClockId x = 0; x < model.num_clocks(); ++x) {
        bool isReset = std::find(o.resetSet.begin(), o.resetSet.end(), x) != o.resetSet.end();
        ClockInterval after = isReset ? ClockInterval{0, false, 0, false}
                                      : constraint_interval(e.guard, x);
        if (!detail::interval_subset(after, constraint_interval(inv, x)))
          error("target-invariant",
                detail::edge_label(model, i) + " outcome #" + std::to_string(oi) + " into " +
                    model.locations[o.target].name + ": clock " + model.clocks[x] +
                    " may violate the target invariant");
      }
    }
  }
  if (!diags.empty()) return diags;

  // Liveness walk at k=1 over edge-reachable region states: wherever the
  // location has outgoing edges, some edge must be enabled now or after time
  // elapse. Violations are warnings; the graph builder makes such states
  // absorbing.
  {
    const int k = 1;
    std::map<std::pair<LocationId, std::vector<std::int64_t>>, bool> seen;
    auto key = [](LocationId l, const KRegion& r) {
      std::vector<std::int64_t> enc = r.scaledBase;
      for (int c : r.classOf) enc.push_back(c);
      return std::make_pair(l, std::move(enc));
    };
    std::deque<std::pair<LocationId, KRegion>> queue;
    KRegion r0 = region_of(zero_valuation(model), k, model.ceiling);
    queue.emplace_back(model.initial, r0);
    seen[key(model.initial, r0)] = true;
    while (!queue.empty()) {
      auto [l, r] = queue.front();
      queue.pop_front();
      auto chain = time_successors(r, model.locations[l].invariant);
      bool anyEnabled = false;
      for (const auto& rr : chain) {
        for (int i = 0; i < static_cast<int>(model.edges.size()); ++i) {
          const auto& e = model.edges[i];
          if (e.source != l || !region_satisfies(rr, e.guard)) continue;
          anyEnabled = true;
          auto cps = corners(rr);
          for (std::size_t oi = 0; oi < e.outcomes.size(); ++oi) {
            bool possible = false;
            for (const auto& alpha : cps) {
              Rational s(0);
              for (ClockId x = 0; x < model.num_clocks(); ++x)
                s += e.weights[oi][x].eval(alpha[x]);
              if (s > 0) { possible = true; break; }
            }
            if (!possible) continue;
            KRegion target = reset_region(rr, e.outcomes[oi].resetSet);
            auto tk = key(e.outcomes[oi].target, target);
            if (!seen[tk]) {
              seen[tk] = true;
              queue.emplace_back(e.outcomes[oi].target, target);
            }
          }
        }
      }
      if (!anyEnabled && location_has_edges(model, l))
        diags.push_back({Severity::Warning, "liveness",
                         "no probabilistic edge is ever enabled from " + model.locations[l].name +
                             " region " + region_to_string(r, model.clocks)});
    }
  }

  return diags;
}

/// A model that passed validation; the region-graph builder only accepts
/// these. Construction normalizes, validates, and throws on any error-level
/// diagnostic. Warnings are retained.
class ValidatedModel {
 public:
  static ValidatedModel create(CdPta model) {
    normalize(model);
    auto diags = validate(model);
    std::vector<Diagnostic> warnings;
    std::string errors;
    for (auto& d : diags) {
      if (d.severity == Severity::Error)
        errors += (errors.empty() ? "" : "; ") + d.message;
      else
        warnings.push_back(std::move(d));
    }
    if (!errors.empty()) throw Error(ErrorKind::ValidationRequired, errors);
    return ValidatedModel(std::move(model), std::move(warnings));
  }

  const CdPta& model() const { return model_; }
  const std::vector<Diagnostic>& warnings() const { return warnings_; }

 private:
  ValidatedModel(CdPta m, std::vector<Diagnostic> w)
      : model_(std::move(m)), warnings_(std::move(w)) {}
  CdPta model_;
  std::vector<Diagnostic> warnings_;
};

}  // namespace cdpta
