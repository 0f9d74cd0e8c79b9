#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace cdpta;
using cdpta::test::rat;
using cdpta::test::val;

namespace {

KRegion make_region(int k, std::int64_t ceiling, std::vector<std::int64_t> scaledBase,
                    std::vector<int> classOf) {
  KRegion r;
  r.k = k;
  r.ceiling = ceiling;
  r.scaledBase = std::move(scaledBase);
  r.classOf = std::move(classOf);
  r.numClasses = 1;
  for (int c : r.classOf) r.numClasses = std::max(r.numClasses, c + 1);
  return r;
}

}  // namespace

TEST_CASE("region_of places valuations by base, punctuality and fraction order") {
  SECTION("x=0.3, y=0 at k=2: y punctual, x fractional") {
    KRegion r = region_of(val({rat(3, 10), rat(0)}), 2, 2);
    CHECK(r.scaledBase == std::vector<std::int64_t>{0, 0});
    CHECK(r.classOf == std::vector<int>{1, 0});
    CHECK(r.numClasses == 2);
  }
  SECTION("the zero valuation gives the punctual origin region") {
    KRegion r = region_of(val({rat(0), rat(0)}), 2, 2);
    CHECK(r.classOf == std::vector<int>{0, 0});
    CHECK(r.numClasses == 1);
  }
  SECTION("equal fractional parts share a class") {
    KRegion r = region_of(val({rat(3, 10), rat(3, 10)}), 1, 1);
    CHECK(r.classOf == std::vector<int>{1, 1});
    CHECK(r.numClasses == 2);
  }
  SECTION("values above the ceiling raise OutOfRange") {
    CHECK_THROWS_MATCHES(region_of(val({rat(3)}), 1, 2), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.kind == ErrorKind::OutOfRange; }));
  }
}

TEST_CASE("corners of one-clock regions") {
  SECTION("k=1, 0<x<1 has corners 0 and 1") {
    auto cps = corners(make_region(1, 1, {0}, {1}));
    REQUIRE(cps.size() == 2);
    CHECK(cps[0][0] == 1);  // corner 0 rounds the fractional class up
    CHECK(cps[1][0] == 0);
  }
  SECTION("k=2, 0<x<1/2 has corners 0 and 1/2") {
    auto cps = corners(make_region(2, 1, {0}, {1}));
    REQUIRE(cps.size() == 2);
    CHECK(cps[0][0] == rat(1, 2));
    CHECK(cps[1][0] == 0);
  }
  SECTION("a punctual region has its base as the only corner") {
    auto cps = corners(make_region(2, 2, {3, 1}, {0, 0}));
    REQUIRE(cps.size() == 1);
    CHECK(cps[0] == val({rat(3, 2), rat(1, 2)}));
  }
}

TEST_CASE("immediate_successor walks the canonical chain") {
  SECTION("k=1, M=1: x=0 -> 0<x<1 -> x=1 -> none") {
    KRegion r = region_of(val({rat(0)}), 1, 1);
    auto s1 = immediate_successor(r);
    REQUIRE(s1);
    CHECK(region_contains(*s1, val({rat(1, 2)})));
    auto s2 = immediate_successor(*s1);
    REQUIRE(s2);
    CHECK(region_contains(*s2, val({rat(1)})));
    CHECK_FALSE(immediate_successor(*s2));
  }
  SECTION("a region with every clock at the ceiling has no successor") {
    CHECK_FALSE(immediate_successor(make_region(2, 2, {4, 4}, {0, 0})));
  }
  SECTION("a single ceiling-pinned clock already blocks time") {
    // x at M exactly, y fractional: no positive delay stays within [0, M].
    CHECK_FALSE(immediate_successor(make_region(1, 1, {1, 0}, {0, 1})));
  }
  SECTION("punctual x=0, y=1/2 at k=2 moves both into one fresh class") {
    KRegion r = region_of(val({rat(0), rat(1, 2)}), 2, 2);
    auto s = immediate_successor(r);
    REQUIRE(s);
    // A small shared advance lands in the successor.
    CHECK(region_contains(*s, val({rat(1, 8), rat(5, 8)})));
    CHECK(*s == region_of(val({rat(1, 8), rat(5, 8)}), 2, 2));
  }
  SECTION("successor chains match region_of on sampled advances") {
    std::mt19937 rng(3);
    for (auto regions = test::enumerate_regions(2, 2, 2); const auto& r : regions) {
      auto s = immediate_successor(r);
      if (!s) continue;
      // Advance a sample of r by increasing deltas; the first region change
      // must land exactly in s.
      ClockValuation v = test::random_point_in(r, rng, 8);
      for (std::int64_t j = 1; j <= 64; ++j) {
        ClockValuation w = elapse(v, rat(j, 64 * 2));
        bool inR = region_contains(r, w);
        if (inR) continue;
        CHECK(region_contains(*s, w));
        break;
      }
    }
  }
}

TEST_CASE("time_successors honors the constraint along the whole chain") {
  CdPta model = gen_oneclock();
  KRegion r0 = region_of(val({rat(0)}), 1, 1);

  SECTION("unconstrained chain sweeps up to the ceiling") {
    auto chain = time_successors(r0, ClockConstraint{});
    REQUIRE(chain.size() == 3);
    CHECK(chain[0] == r0);
    CHECK(region_contains(chain[1], val({rat(1, 2)})));
    CHECK(region_contains(chain[2], val({rat(1)})));
  }
  SECTION("x<=0 stops the chain immediately") {
    auto chain = time_successors(r0, ClockConstraint{{{0, ConstraintOp::Le, 0}}});
    REQUIRE(chain.size() == 1);
    CHECK(chain[0] == r0);
  }
  SECTION("chain truncation matches a fine-grained valuation sweep") {
    CdPta robot = gen_robot(6);
    const auto& inv = robot.locations[robot.location_index("TL")].invariant;
    for (int k : {1, 2}) {
      KRegion r = region_of(val({rat(0), rat(0)}), k, robot.ceiling);
      auto chain = time_successors(r, inv);
      // Sweep 0 + j/(4k) and collect the regions whose every prefix point
      // satisfies the invariant.
      std::vector<KRegion> expected;
      for (std::int64_t j = 0;; ++j) {
        ClockValuation w = elapse(zero_valuation(robot), rat(j, 4 * k));
        if (!satisfies(w, inv)) break;
        if (w[0] > robot.ceiling || w[1] > robot.ceiling) break;
        KRegion rw = region_of(w, k, robot.ceiling);
        if (expected.empty() || !(expected.back() == rw)) expected.push_back(rw);
      }
      REQUIRE(chain.size() == expected.size());
      for (std::size_t i = 0; i < chain.size(); ++i) CHECK(chain[i] == expected[i]);
    }
  }
}

TEST_CASE("region_satisfies decides box atoms exactly") {
  KRegion frac = make_region(1, 1, {0}, {1});  // 0 < x < 1
  CHECK(region_satisfies(frac, {{{0, ConstraintOp::Lt, 1}}}));
  CHECK_FALSE(region_satisfies(frac, {{{0, ConstraintOp::Ge, 1}}}));

  KRegion upper = make_region(2, 1, {1}, {1});  // 1/2 < x < 1
  CHECK_FALSE(region_satisfies(upper, {{{0, ConstraintOp::Ge, 1}}}));
  CHECK(region_satisfies(upper, {{{0, ConstraintOp::Lt, 1}}}));
  CHECK(region_satisfies(upper, {{{0, ConstraintOp::Gt, 0}}}));
}

TEST_CASE("reset_region") {
  SECTION("empty reset is the identity") {
    KRegion r = make_region(2, 2, {1, 3}, {1, 2});
    CHECK(reset_region(r, {}) == r);
  }
  SECTION("resetting the origin region changes nothing") {
    KRegion r0 = region_of(val({rat(0), rat(0)}), 1, 2);
    CHECK(reset_region(r0, {0, 1}) == r0);
  }
  SECTION("k=1: resetting the only fractional clock gives x=0") {
    KRegion r = make_region(1, 1, {0}, {1});
    KRegion after = reset_region(r, {0});
    CHECK(after == region_of(val({rat(0)}), 1, 1));
  }
  SECTION("matches region_of over all subsets on sampled points (three clocks)") {
    std::mt19937 rng(17);
    for (auto regions = test::enumerate_regions(3, 2, 1); const auto& r : regions) {
      ClockValuation v = test::random_point_in(r, rng, 8);
      REQUIRE(region_contains(r, v));
      for (int mask = 0; mask < 8; ++mask) {
        std::vector<ClockId> resetSet;
        for (int x = 0; x < 3; ++x)
          if (mask & (1 << x)) resetSet.push_back(x);
        CHECK(reset_region(r, resetSet) == region_of(reset(v, resetSet), r.k, r.ceiling));
      }
    }
  }
}

TEST_CASE("parent_region maps 2k-regions onto their k-parents") {
  SECTION("x=1/2 at 2k sits inside 0<x<1 at k") {
    KRegion half = region_of(val({rat(1, 2)}), 2, 1);
    CHECK(parent_region(half, 1) == region_of(val({rat(1, 2)}), 1, 1));
    CHECK(parent_region(half, 1) == make_region(1, 1, {0}, {1}));
  }
  SECTION("shared boundary x=1 stays punctual") {
    KRegion one = region_of(val({rat(1)}), 2, 1);
    CHECK(parent_region(one, 1) == region_of(val({rat(1)}), 1, 1));
  }
  SECTION("0<x<1/2 maps into 0<x<1") {
    KRegion r = make_region(2, 1, {0}, {1});
    CHECK(parent_region(r, 1) == region_of(val({rat(1, 4)}), 1, 1));
  }
  SECTION("containment holds on sampled points for every 2k-region") {
    std::mt19937 rng(23);
    for (auto regions = test::enumerate_regions(2, 4, 1); const auto& r : regions) {
      KRegion parent = parent_region(r, 2);
      for (int trial = 0; trial < 5; ++trial)
        CHECK(region_contains(parent, test::random_point_in(r, rng, 8)));
    }
  }
  SECTION("parent_region commutes with reset") {
    for (auto regions = test::enumerate_regions(2, 2, 1); const auto& r : regions) {
      for (int mask = 0; mask < 4; ++mask) {
        std::vector<ClockId> resetSet;
        for (int x = 0; x < 2; ++x)
          if (mask & (1 << x)) resetSet.push_back(x);
        CHECK(parent_region(reset_region(r, resetSet), 1) ==
              reset_region(parent_region(r, 1), resetSet));
      }
    }
  }
}

TEST_CASE("barycentric weights reconstruct the valuation exactly") {
  SECTION("a punctual region puts weight 1 on its single corner") {
    KRegion r = region_of(val({rat(1, 2), rat(1)}), 2, 2);
    auto theta = barycentric_weights(val({rat(1, 2), rat(1)}), r);
    REQUIRE(theta.size() == 1);
    CHECK(theta[0] == 1);
  }
  SECTION("k=1, 0<x<1, v=0.3: weight 7/10 on x=0 and 3/10 on x=1") {
    KRegion r = make_region(1, 1, {0}, {1});
    auto theta = barycentric_weights(val({rat(3, 10)}), r);
    auto cps = corners(r);
    REQUIRE(theta.size() == 2);
    for (std::size_t i = 0; i < cps.size(); ++i) {
      if (cps[i][0] == 0) CHECK(theta[i] == rat(7, 10));
      if (cps[i][0] == 1) CHECK(theta[i] == rat(3, 10));
    }
  }
  SECTION("two clocks, v=(0.2,0.7): weights 0.3/0.5/0.2 keyed by corner") {
    KRegion r = region_of(val({rat(1, 5), rat(7, 10)}), 1, 1);
    auto theta = barycentric_weights(val({rat(1, 5), rat(7, 10)}), r);
    auto cps = corners(r);
    REQUIRE(theta.size() == 3);
    for (std::size_t i = 0; i < cps.size(); ++i) {
      if (cps[i] == val({rat(0), rat(0)})) CHECK(theta[i] == rat(3, 10));
      if (cps[i] == val({rat(0), rat(1)})) CHECK(theta[i] == rat(1, 2));
      if (cps[i] == val({rat(1), rat(1)})) CHECK(theta[i] == rat(1, 5));
    }
  }
  SECTION("NotInRegion for valuations outside") {
    KRegion r = make_region(1, 1, {0}, {1});
    CHECK_THROWS_MATCHES(barycentric_weights(val({rat(0)}), r), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.kind == ErrorKind::NotInRegion; }));
  }
  SECTION("exact reconstruction on enumerated regions") {
    std::mt19937 rng(29);
    for (auto regions = test::enumerate_regions(3, 2, 1); const auto& r : regions) {
      ClockValuation v = test::random_point_in(r, rng, 8);
      auto theta = barycentric_weights(v, r);
      auto cps = corners(r);
      Rational sum(0);
      ClockValuation rebuilt(3, Rational(0));
      for (std::size_t i = 0; i < theta.size(); ++i) {
        CHECK(theta[i] >= 0);
        sum += theta[i];
        for (int x = 0; x < 3; ++x) rebuilt[x] += theta[i] * cps[i][x];
      }
      CHECK(sum == 1);
      CHECK(rebuilt == v);
    }
  }
}

TEST_CASE("membership round trip over random valuations") {
  std::mt19937 rng(31);
  const int k = 2;
  const std::int64_t M = 2;
  for (int trial = 0; trial < 10000; ++trial) {
    ClockValuation v(2);
    for (int x = 0; x < 2; ++x) {
      std::int64_t den = 1 + (rng() % (4 * k));
      std::int64_t num = rng() % (M * den + 1);
      v[x] = rat(num, den);
    }
    KRegion r = region_of(v, k, M);
    REQUIRE(region_contains(r, v));
  }
}

TEST_CASE("corners lie in the closure: inward perturbation is a member") {
  std::mt19937 rng(37);
  for (int k : {1, 2}) {
    for (auto regions = test::enumerate_regions(2, k, 1); const auto& r : regions) {
      ClockValuation mid = representative(r);
      auto cps = corners(r);
      Rational t = rat(1, 8 * k);
      for (const auto& alpha : cps) {
        ClockValuation p(2);
        for (int x = 0; x < 2; ++x) p[x] = alpha[x] + (mid[x] - alpha[x]) * t;
        CHECK(region_contains(r, p));
      }
    }
  }
}

TEST_CASE("template convexity: corner mixture reproduces eval_template exactly") {
  std::mt19937 rng(41);
  int checked = 0;
  for (std::uint32_t seed = 0; seed < 20; ++seed) {
    CdPta model = test::random_model(seed);
    REQUIRE(validate(model).empty());
    const int k = 2;
    auto regions = test::enumerate_regions(model.num_clocks(), k, model.ceiling);
    for (const auto& edge : model.edges) {
      for (const auto& r : regions) {
        if (!region_satisfies(r, edge.guard)) continue;
        auto cps = corners(r);
        std::vector<std::vector<Rational>> cornerProbs;
        for (const auto& alpha : cps) cornerProbs.push_back(eval_template_at_corner(edge, alpha));
        for (int trial = 0; trial < 5; ++trial) {
          ClockValuation v = test::random_point_in(r, rng, 8);
          auto direct = eval_template(edge, v);
          auto theta = barycentric_weights(v, r);
          for (std::size_t oi = 0; oi < direct.size(); ++oi) {
            Rational mixed(0);
            for (std::size_t i = 0; i < theta.size(); ++i) mixed += theta[i] * cornerProbs[i][oi];
            REQUIRE(mixed == direct[oi]);
          }
          ++checked;
        }
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("corner refinement: 2k corners are convex combinations of k corners") {
  for (auto regions = test::enumerate_regions(2, 2, 1); const auto& r : regions) {
    KRegion parent = parent_region(r, 1);
    auto parentCorners = corners(parent);
    for (const auto& alpha : corners(r)) {
      auto theta = closure_corner_weights(parent, alpha);
      Rational sum(0);
      ClockValuation rebuilt(2, Rational(0));
      for (std::size_t i = 0; i < theta.size(); ++i) {
        CHECK(theta[i] >= 0);
        sum += theta[i];
        for (int x = 0; x < 2; ++x) rebuilt[x] += theta[i] * parentCorners[i][x];
      }
      CHECK(sum == 1);
      CHECK(rebuilt == alpha);
    }
  }
}

TEST_CASE("eval_template_at_corner uses continuous extension at the closure") {
  CdPta model = gen_oneclock();

  SECTION("C edge at x=1 (outside the open guard, inside the closure)") {
    auto probs = eval_template_at_corner(model.edges[2], val({rat(1)}));
    CHECK(probs[0] == rat(1, 2));
    CHECK(probs[1] == rat(1, 2));
  }
  SECTION("A edge at x=0") {
    auto probs = eval_template_at_corner(model.edges[0], val({rat(0)}));
    CHECK(probs[0] == 0);  // to B
    CHECK(probs[1] == 1);  // to E
  }
  SECTION("outside the closure raises OutsideClosure") {
    CHECK_THROWS_MATCHES(eval_template_at_corner(model.edges[0], val({rat(2)})), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.kind == ErrorKind::OutsideClosure; }));
  }
  SECTION("robot BR task edge at the deadline corner") {
    CdPta robot = gen_robot(8);
    const ProbEdge& task = robot.edges[4];
    auto probs = eval_template_at_corner(task, val({rat(0), rat(8)}));
    CHECK(probs[0] == 0);  // OK
    CHECK(probs[1] == 1);  // FAIL
  }
}

TEST_CASE("successor chains terminate within 2|X|Mk+1 steps") {
  for (int k : {1, 2, 4}) {
    for (auto regions = test::enumerate_regions(2, k, 2); const auto& r : regions) {
      int steps = 0;
      KRegion cur = r;
      while (auto next = immediate_successor(cur)) {
        cur = *next;
        ++steps;
        REQUIRE(steps <= 2 * 2 * 2 * k + 1);
      }
    }
  }
}

TEST_CASE("canonical region strings") {
  std::vector<std::string> names{"x"};
  CHECK(region_to_string(region_of(val({rat(0)}), 1, 1), names) == "k=1;h=x:0;classes=[{x}]");
  CHECK(region_to_string(make_region(1, 1, {0}, {1}), names) == "k=1;h=x:0;classes=[{}|{x}]");
  std::vector<std::string> names2{"x", "y"};
  CHECK(region_to_string(region_of(val({rat(1, 2), rat(5, 4)}), 4, 2), names2) ==
        "k=4;h=x:1/2,y:5/4;classes=[{x,y}]");
}
