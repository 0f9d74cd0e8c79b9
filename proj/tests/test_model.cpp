#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace cdpta;
using cdpta::test::rat;
using cdpta::test::val;

TEST_CASE("satisfies checks atoms under exact rational comparison") {
  CHECK(satisfies(val({rat(1, 2)}), {{{0, ConstraintOp::Lt, 1}}}));
  CHECK_FALSE(satisfies(val({rat(1)}), {{{0, ConstraintOp::Lt, 1}}}));

  ClockConstraint guard{{{0, ConstraintOp::Ge, 3}, {0, ConstraintOp::Lt, 5}, {1, ConstraintOp::Le, 8}}};
  CHECK(satisfies(val({rat(3), rat(8)}), guard));
  CHECK_FALSE(satisfies(val({rat(5), rat(8)}), guard));
  CHECK(satisfies(val({rat(1)}), ClockConstraint{}));  // empty conjunction is true
}

TEST_CASE("eval_template on the one-clock chain model") {
  CdPta model = gen_oneclock();
  const int cEdge = 2;  // edges are emitted in A, B, C order

  SECTION("coefficients of the C edge are 1,-1/2 / 0,1/2") {
    const auto& weights = model.edges[cEdge].weights;
    REQUIRE(weights[0][0].pieces.size() == 1);
    CHECK(weights[0][0].pieces[0].c == 1);
    CHECK(weights[0][0].pieces[0].d == rat(-1, 2));
    CHECK(weights[1][0].pieces[0].c == 0);
    CHECK(weights[1][0].pieces[0].d == rat(1, 2));
  }

  SECTION("evaluation at x=0 and x=1/2") {
    auto probsAtZero = eval_template(model.edges[cEdge], val({rat(0)}));
    CHECK(probsAtZero[0] == 1);
    CHECK(probsAtZero[1] == 0);

    auto probsAtHalf = eval_template(model.edges[cEdge], val({rat(1, 2)}));
    CHECK(probsAtHalf[0] == rat(3, 4));
    CHECK(probsAtHalf[1] == rat(1, 4));
  }

  SECTION("guard violation raises GuardUnsatisfied") {
    CHECK_THROWS_MATCHES(eval_template(model.edges[cEdge], val({rat(1)})), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind == ErrorKind::GuardUnsatisfied;
                         }));
  }
}

TEST_CASE("eval_template of a constant split is clock-independent") {
  CdPta model;
  model.clocks = {"x"};
  model.locations = {{"A", {{{0, ConstraintOp::Le, 2}}}}, {"B", {{{0, ConstraintOp::Le, 2}}}}};
  model.initial = 0;
  ProbEdge e;
  e.source = 0;
  e.outcomes = {{{}, 1}, {{}, 0}};
  PiecewiseLinearFn half;
  half.pieces.push_back({0, 2, rat(1, 2), rat(0)});
  e.weights = {{half}, {half}};
  model.edges.push_back(e);
  normalize(model);
  REQUIRE(validate(model).empty());

  for (auto x : {rat(0), rat(7, 5), rat(2)}) {
    auto probs = eval_template(model.edges[0], val({x}));
    CHECK(probs[0] == rat(1, 2));
    CHECK(probs[1] == rat(1, 2));
  }
}

TEST_CASE("enabled_edges") {
  CdPta model = gen_oneclock();

  SECTION("the A edge is enabled strictly below 1") {
    auto edges = enabled_edges(model, 0, val({rat(1, 2)}));
    REQUIRE(edges.size() == 1);
    CHECK(edges[0] == 0);
    CHECK(enabled_edges(model, 0, val({rat(1)})).empty());
  }

  SECTION("invariant violation raises InvariantViolated") {
    CHECK_THROWS_MATCHES(enabled_edges(model, 0, val({rat(3, 2)})), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind == ErrorKind::InvariantViolated;
                         }));
  }

  SECTION("robot BR: task edge needs x=0, escape needs y=cmax") {
    CdPta robot = gen_robot(10);
    LocationId br = robot.location_index("BR");
    auto atEntry = enabled_edges(robot, br, val({rat(0), rat(5)}));
    REQUIRE(atEntry.size() == 1);
    CHECK(robot.edges[atEntry[0]].outcomes[0].target == robot.location_index("OK"));
    auto atDeadline = enabled_edges(robot, br, val({rat(0), rat(10)}));
    CHECK(atDeadline.size() == 2);  // task edge and the escape edge
  }
}

TEST_CASE("validate accepts the bundled one-clock model") {
  CHECK(validate(gen_oneclock()).empty());
}

TEST_CASE("validate flags a sum-to-one violation with a witness corner") {
  CdPta model = gen_oneclock();
  // Make both outcomes of the A edge use weight x: the sum 2x is 1 only at
  // x = 1/2, so condition (3) fails at a grid corner.
  model.edges[0].weights[1] = model.edges[0].weights[0];
  auto diags = validate(model);
  REQUIRE_FALSE(diags.empty());
  bool found = false;
  for (const auto& d : diags) found = found || d.code == "sum-to-one";
  CHECK(found);
  CHECK(diags[0].message.find("corner") != std::string::npos);
}

TEST_CASE("validate flags missing invariant bounds") {
  CdPta model = gen_oneclock();
  model.locations[4].invariant.atoms.clear();  // E loses its upper bound on x
  normalize(model);
  bool found = false;
  for (const auto& d : validate(model)) found = found || d.code == "invariant-bound";
  CHECK(found);
}

TEST_CASE("validate flags discontinuous pieces") {
  CdPta model;
  model.clocks = {"x"};
  model.locations = {{"A", {{{0, ConstraintOp::Le, 2}}}}, {"B", {{{0, ConstraintOp::Le, 2}}}}};
  model.initial = 0;
  ProbEdge e;
  e.source = 0;
  e.outcomes = {{{}, 1}, {{}, 0}};
  PiecewiseLinearFn jumpy;  // 0 on [0,1), 1/2 on [1,2): discontinuous at 1
  jumpy.pieces.push_back({0, 1, rat(0), rat(0)});
  jumpy.pieces.push_back({1, 2, rat(1, 2), rat(0)});
  PiecewiseLinearFn rest;
  rest.pieces.push_back({0, 1, rat(1), rat(0)});
  rest.pieces.push_back({1, 2, rat(1, 2), rat(0)});
  e.weights = {{jumpy}, {rest}};
  model.edges.push_back(e);
  normalize(model);
  bool found = false;
  for (const auto& d : validate(model)) found = found || d.code == "continuity";
  CHECK(found);
}

TEST_CASE("validate flags reachable target-invariant violations") {
  CdPta model;
  model.clocks = {"x"};
  model.locations = {{"A", {{{0, ConstraintOp::Le, 2}}}}, {"B", {{{0, ConstraintOp::Le, 1}}}}};
  model.initial = 0;
  ProbEdge e;  // no reset, guard allows x up to 2, but B only admits x <= 1
  e.source = 0;
  e.outcomes = {{{}, 1}};
  PiecewiseLinearFn one;
  one.pieces.push_back({0, 2, rat(1), rat(0)});
  e.weights = {{one}};
  model.edges.push_back(e);
  normalize(model);
  bool found = false;
  for (const auto& d : validate(model)) found = found || d.code == "target-invariant";
  CHECK(found);
}

TEST_CASE("eval_template returns an exact distribution on random validated models") {
  std::mt19937 rng(7);
  for (std::uint32_t seed = 0; seed < 25; ++seed) {
    CdPta model = test::random_model(seed);
    REQUIRE(validate(model).empty());
    for (const auto& edge : model.edges) {
      for (int trial = 0; trial < 20; ++trial) {
        ClockValuation v(model.clocks.size());
        bool ok = true;
        for (ClockId x = 0; x < model.num_clocks(); ++x) {
          ClockInterval iv = constraint_interval(edge.guard, x);
          std::int64_t den = 8;
          std::int64_t span = (iv.hi - iv.lo) * den;
          if (span == 0 && (iv.loStrict || iv.hiStrict)) { ok = false; break; }
          std::int64_t lo = iv.lo * den + (iv.loStrict ? 1 : 0);
          std::int64_t hi = iv.hi * den - (iv.hiStrict ? 1 : 0);
          if (lo > hi) { ok = false; break; }
          v[x] = rat(std::uniform_int_distribution<std::int64_t>(lo, hi)(rng), den);
        }
        if (!ok) continue;
        auto probs = eval_template(edge, v);
        Rational total(0);
        for (const auto& p : probs) {
          CHECK(p >= 0);
          CHECK(p <= 1);
          total += p;
        }
        CHECK(total == 1);
      }
    }
  }
}

TEST_CASE("piecewise functions are continuous from the left at breakpoints") {
  std::mt19937 rng(11);
  for (std::uint32_t seed = 0; seed < 10; ++seed) {
    CdPta model = test::random_model(seed);
    for (const auto& edge : model.edges)
      for (const auto& fns : edge.weights)
        for (const auto& fn : fns)
          for (std::size_t p = 0; p + 1 < fn.pieces.size(); ++p) {
            Rational b(fn.pieces[p].hi);
            Rational h = rat(1, 16);
            CHECK(abs(fn.eval(b - h) - fn.eval(b)) == abs(fn.pieces[p].d) * h);
          }
  }
}

TEST_CASE("guard normalization never changes enabled_edges on invariant states") {
  std::mt19937 rng(13);
  for (std::uint32_t seed = 30; seed < 45; ++seed) {
    CdPta raw = test::random_model(seed);
    // Strip invariant atoms back out of the guards to fabricate the
    // un-normalized variant, then compare edge enablement.
    CdPta stripped = raw;
    for (auto& e : stripped.edges) {
      ClockConstraint slim;
      for (const auto& a : e.guard.atoms) {
        bool fromInv = false;
        for (const auto& ia : stripped.locations[e.source].invariant.atoms)
          fromInv = fromInv || ia == a;
        if (!fromInv) slim.atoms.push_back(a);
      }
      e.guard = slim;
    }
    for (int trial = 0; trial < 40; ++trial) {
      LocationId l = std::uniform_int_distribution<int>(0, raw.num_locations() - 1)(rng);
      ClockValuation v(raw.clocks.size());
      for (ClockId x = 0; x < raw.num_clocks(); ++x)
        v[x] = rat(std::uniform_int_distribution<int>(0, 8 * static_cast<int>(raw.ceiling))(rng), 8);
      if (!satisfies(v, raw.locations[l].invariant)) continue;
      CHECK(enabled_edges(raw, l, v) == enabled_edges(stripped, l, v));
    }
  }
}
