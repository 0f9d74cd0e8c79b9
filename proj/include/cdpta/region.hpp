#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cdpta/model.hpp"
#include "cdpta/rational.hpp"

namespace cdpta {

/// Equivalence class of clock valuations at granularity 1/k over [0, M]:
/// an integer-part function h (stored scaled by k) plus an ordered partition
/// of the clocks by fractional part. Class 0 holds the clocks whose value is
/// exactly a multiple of 1/k; classes 1..n order the strictly fractional
/// clocks by increasing fractional part and are nonempty.
struct KRegion {
  int k = 1;
  std::int64_t ceiling = 0;               // M
  std::vector<std::int64_t> scaledBase;   // h(x) * k, in [0, M*k]
  std::vector<int> classOf;               // clock -> class index, 0..numClasses-1
  int numClasses = 1;

  int num_clocks() const { return static_cast<int>(scaledBase.size()); }
  int num_fractional_classes() const { return numClasses - 1; }  // n
  bool punctual(ClockId x) const { return classOf[x] == 0; }

  bool operator==(const KRegion& o) const {
    return k == o.k && scaledBase == o.scaledBase && classOf == o.classOf &&
           numClasses == o.numClasses;
  }

  std::vector<ClockId> clocks_in_class(int cls) const {
    std::vector<ClockId> out;
    for (ClockId x = 0; x < num_clocks(); ++x)
      if (classOf[x] == cls) out.push_back(x);
    return out;
  }
};

/// Extremal valuation of a region's closure on the 1/k grid.
using CornerPoint = ClockValuation;

/// The unique k-region containing v. Values must lie in [0, M].
inline KRegion region_of(const ClockValuation& v, int k, std::int64_t ceiling) {
  KRegion r;
  r.k = k;
  r.ceiling = ceiling;
  const int n = static_cast<int>(v.size());
  r.scaledBase.resize(n);
  r.classOf.assign(n, 0);
  std::vector<Rational> fracs(n);
  for (ClockId x = 0; x < n; ++x) {
    if (v[x] < 0 || v[x] > ceiling)
      throw Error(ErrorKind::OutOfRange,
                  "clock value " + rational_to_string(v[x]) + " outside [0," +
                      std::to_string(ceiling) + "]");
    Rational scaled = v[x] * k;
    BigInt fl = floor_rational(scaled);
    r.scaledBase[x] = fl.convert_to<std::int64_t>();
    fracs[x] = scaled - Rational(fl);
  }
  std::vector<Rational> distinct;
  for (ClockId x = 0; x < n; ++x)
    if (fracs[x] != 0) distinct.push_back(fracs[x]);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  for (ClockId x = 0; x < n; ++x) {
    if (fracs[x] == 0) continue;
    auto it = std::lower_bound(distinct.begin(), distinct.end(), fracs[x]);
    r.classOf[x] = 1 + static_cast<int>(it - distinct.begin());
  }
  r.numClasses = 1 + static_cast<int>(distinct.size());
  return r;
}

/// True iff v lies in R, checked against the three membership conditions
/// independently of how region_of computes the partition.
inline bool region_contains(const KRegion& r, const ClockValuation& v) {
  const int n = r.num_clocks();
  std::vector<Rational> fracs(n);
  for (ClockId x = 0; x < n; ++x) {
    if (v[x] < 0 || v[x] > r.ceiling) return false;
    Rational scaled = v[x] * r.k;
    if (floor_rational(scaled) != r.scaledBase[x]) return false;
    fracs[x] = scaled - Rational(BigInt(r.scaledBase[x]));
    // Class 0 holds exactly the zero-fraction clocks; anything else would
    // put v in two regions at once.
    if (r.punctual(x) != (fracs[x] == 0)) return false;
  }
  for (ClockId x = 0; x < n; ++x)
    for (ClockId y = 0; y < n; ++y) {
      bool ordered = fracs[x] <= fracs[y];
      bool classes = r.classOf[x] <= r.classOf[y];
      if (ordered != classes) return false;
    }
  return true;
}

/// The n+1 corner points of R: corner i keeps classes <= i at their base
/// value and rounds classes > i up to the next multiple of 1/k.
inline std::vector<CornerPoint> corners(const KRegion& r) {
  std::vector<CornerPoint> out;
  out.reserve(r.numClasses);
  for (int i = 0; i < r.numClasses; ++i) {
    CornerPoint alpha(r.num_clocks());
    for (ClockId x = 0; x < r.num_clocks(); ++x) {
      std::int64_t scaled = r.scaledBase[x] + (r.classOf[x] > i ? 1 : 0);
      alpha[x] = Rational(BigInt(scaled), BigInt(r.k));
    }
    out.push_back(std::move(alpha));
  }
  return out;
}

/// Next region in the time-elapse chain, or nullopt when no time can pass
/// inside [0, M]. A clock pinned at M admits no positive delay within the
/// modelled box, so such regions are chain-terminal.
inline std::optional<KRegion> immediate_successor(const KRegion& r) {
  const int n = r.num_clocks();
  if (n == 0) return std::nullopt;
  for (ClockId x = 0; x < n; ++x)
    if (r.scaledBase[x] == r.ceiling * r.k) return std::nullopt;

  KRegion s = r;
  bool anyPunctual = false;
  for (ClockId x = 0; x < n; ++x) anyPunctual = anyPunctual || r.punctual(x);
  if (anyPunctual) {
    // Punctual clocks become the new smallest fractional class.
    for (ClockId x = 0; x < n; ++x) s.classOf[x] = r.punctual(x) ? 1 : r.classOf[x] + 1;
    s.numClasses = r.numClasses + 1;
  } else {
    // The largest-fraction class reaches the next 1/k boundary.
    const int last = r.numClasses - 1;
    for (ClockId x = 0; x < n; ++x) {
      if (r.classOf[x] == last) {
        s.scaledBase[x] += 1;
        s.classOf[x] = 0;
      }
    }
    s.numClasses = r.numClasses - 1;
  }
  return s;
}

/// True iff every valuation of R satisfies psi. Box atoms are uniform on
/// regions, so this is exact.
inline bool region_satisfies(const KRegion& r, const ClockConstraint& psi) {
  for (const auto& a : psi.atoms) {
    const std::int64_t base = r.scaledBase[a.clock];
    const std::int64_t boundScaled = a.bound * r.k;
    const bool punct = r.punctual(a.clock);
    bool ok = false;
    switch (a.op) {
      case ConstraintOp::Lt: ok = punct ? base < boundScaled : base + 1 <= boundScaled; break;
      case ConstraintOp::Le: ok = punct ? base <= boundScaled : base + 1 <= boundScaled; break;
      case ConstraintOp::Ge: ok = base >= boundScaled; break;
      case ConstraintOp::Gt: ok = punct ? base > boundScaled : base >= boundScaled; break;
    }
    if (!ok) return false;
  }
  return true;
}

/// All regions reachable from R along the immediate-successor chain while
/// every region on the chain (R and the endpoint included) satisfies psi.
inline std::vector<KRegion> time_successors(const KRegion& r, const ClockConstraint& psi) {
  std::vector<KRegion> out;
  if (!region_satisfies(r, psi)) return out;
  out.push_back(r);
  KRegion cur = r;
  while (true) {
    auto next = immediate_successor(cur);
    if (!next || !region_satisfies(*next, psi)) break;
    out.push_back(*next);
    cur = *next;
  }
  return out;
}

/// R[X:=0]: reset clocks move to class 0 at base 0; emptied classes are
/// dropped, the rest keep their order.
inline KRegion reset_region(const KRegion& r, const std::vector<ClockId>& resetSet) {
  KRegion s = r;
  for (ClockId x : resetSet) {
    s.scaledBase[x] = 0;
    s.classOf[x] = 0;
  }
  std::vector<int> occupied(r.numClasses, 0);
  occupied[0] = 1;
  for (ClockId x = 0; x < s.num_clocks(); ++x) occupied[s.classOf[x]] = 1;
  std::vector<int> renumber(r.numClasses, 0);
  int next = 0;
  for (int c = 0; c < r.numClasses; ++c)
    if (occupied[c]) renumber[c] = next++;
  for (ClockId x = 0; x < s.num_clocks(); ++x) s.classOf[x] = renumber[s.classOf[x]];
  s.numClasses = next;
  return s;
}

/// A valuation strictly inside R (class j gets fractional part j/numClasses).
inline ClockValuation representative(const KRegion& r) {
  ClockValuation v(r.num_clocks());
  for (ClockId x = 0; x < r.num_clocks(); ++x) {
    Rational val(BigInt(r.scaledBase[x]), BigInt(r.k));
    if (!r.punctual(x))
      val += Rational(BigInt(r.classOf[x]), BigInt(std::int64_t(r.numClasses) * r.k));
    v[x] = val;
  }
  return v;
}

/// The unique coarser region at granularity targetK (targetK | r.k)
/// containing all of R.
inline KRegion parent_region(const KRegion& r, int targetK) {
  if (targetK < 1 || r.k % targetK != 0)
    throw Error(ErrorKind::OutOfRange,
                "granularity " + std::to_string(targetK) + " does not divide " + std::to_string(r.k));
  return region_of(representative(r), targetK, r.ceiling);
}

/// Weights over corners(R) reconstructing a point of R's closure exactly:
/// theta_i = phi_{i+1} - phi_i over the ordered class fractions. Throws
/// NotInRegion when the point does not lie in the closure simplex.
inline std::vector<Rational> closure_corner_weights(const KRegion& r, const ClockValuation& v) {
  const int n = r.num_fractional_classes();
  std::vector<Rational> phi(n + 1);  // phi[0] = 0, phi[m] for class m
  phi[0] = Rational(0);
  std::vector<bool> seen(n + 1, false);
  seen[0] = true;
  for (ClockId x = 0; x < r.num_clocks(); ++x) {
    Rational f = v[x] * r.k - Rational(BigInt(r.scaledBase[x]));
    int cls = r.classOf[x];
    if (f < 0 || f > 1) throw Error(ErrorKind::NotInRegion, "point outside the region cell");
    if (cls == 0) {
      if (f != 0) throw Error(ErrorKind::NotInRegion, "class-0 clock off its base value");
    } else if (!seen[cls]) {
      phi[cls] = f;
      seen[cls] = true;
    } else if (phi[cls] != f) {
      throw Error(ErrorKind::NotInRegion, "clocks of one class with unequal fractions");
    }
  }
  for (int m = 1; m <= n; ++m)
    if (phi[m] < phi[m - 1]) throw Error(ErrorKind::NotInRegion, "class fractions out of order");
  std::vector<Rational> theta(n + 1);
  for (int i = 0; i < n; ++i) theta[i] = phi[i + 1] - phi[i];
  theta[n] = Rational(1) - phi[n];
  return theta;
}

/// Barycentric weights of v in R: nonnegative, sum 1, and
/// sum_i theta_i * corner_i == v componentwise, all exact. Requires v in R.
inline std::vector<Rational> barycentric_weights(const ClockValuation& v, const KRegion& r) {
  if (!region_contains(r, v)) throw Error(ErrorKind::NotInRegion, "valuation not in region");
  return closure_corner_weights(r, v);
}

/// Evaluates the edge's distribution template at a corner point, using the
/// piece whose closure contains each coordinate (continuity makes the choice
/// at boundaries immaterial).
inline std::vector<Rational> eval_template_at_corner(const ProbEdge& edge, const CornerPoint& alpha) {
  std::vector<Rational> probs;
  probs.reserve(edge.outcomes.size());
  for (const auto& fns : edge.weights) {
    Rational sum(0);
    for (ClockId x = 0; x < static_cast<ClockId>(fns.size()); ++x)
      if (!fns[x].pieces.empty()) sum += fns[x].eval(alpha[x]);
    probs.push_back(std::move(sum));
  }
  return probs;
}

/// Canonical text form, e.g. "k=2;h=x:0,y:1/2;classes=[{x}|{y}]".
/// Clock order inside h and inside each class follows clock ids.
inline std::string region_to_string(const KRegion& r, const std::vector<std::string>& clockNames) {
  std::string s = "k=" + std::to_string(r.k) + ";h=";
  for (ClockId x = 0; x < r.num_clocks(); ++x) {
    if (x) s += ',';
    s += clockNames[x];
    s += ':';
    s += rational_to_string(Rational(BigInt(r.scaledBase[x]), BigInt(r.k)));
  }
  s += ";classes=[";
  for (int c = 0; c < r.numClasses; ++c) {
    if (c) s += '|';
    s += '{';
    bool first = true;
    for (ClockId x = 0; x < r.num_clocks(); ++x) {
      if (r.classOf[x] != c) continue;
      if (!first) s += ',';
      s += clockNames[x];
      first = false;
    }
    s += '}';
  }
  s += ']';
  return s;
}

}  // namespace cdpta
