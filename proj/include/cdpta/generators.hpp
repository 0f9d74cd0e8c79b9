#pragma once

#include <cctype>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cdpta/model.hpp"

namespace cdpta {

namespace detail {

inline ConstraintAtom atom(ClockId x, ConstraintOp op, std::int64_t bound) { return {x, op, bound}; }

inline PiecewiseLinearFn affine(std::int64_t lo, std::int64_t hi, Rational c, Rational d) {
  PiecewiseLinearFn fn;
  fn.pieces.push_back({lo, hi, std::move(c), std::move(d)});
  return fn;
}

}  // namespace detail

/// One-clock chain A -> B -> C -> D with bail-out location E. Every edge has
/// guard x < 1; the branch weights are x / 1-x (A), 1-x / x (B) and
/// 1-x/2 / x/2 (C). The best delay is spent in A only.
inline CdPta gen_oneclock() {
  CdPta model;
  model.clocks = {"x"};
  const ClockId x = 0;
  ClockConstraint bound{{detail::atom(x, ConstraintOp::Le, 1)}};
  for (const char* name : {"A", "B", "C", "D", "E"}) model.locations.push_back({name, bound});
  model.initial = 0;
  const LocationId A = 0, B = 1, C = 2, D = 3, E = 4;

  auto edge = [&](LocationId src, LocationId t1, Rational c1, Rational d1, LocationId t2,
                  Rational c2, Rational d2) {
    ProbEdge e;
    e.source = src;
    e.guard.atoms = {detail::atom(x, ConstraintOp::Lt, 1)};
    e.outcomes = {{{}, t1}, {{}, t2}};
    e.weights = {{detail::affine(0, 1, c1, d1)}, {detail::affine(0, 1, c2, d2)}};
    model.edges.push_back(std::move(e));
  };
  edge(A, B, Rational(0), Rational(1), E, Rational(1), Rational(-1));      // x, 1-x
  edge(B, C, Rational(1), Rational(-1), E, Rational(0), Rational(1));      // 1-x, x
  edge(C, D, Rational(1), make_rational(-1, 2), E, Rational(0), make_rational(1, 2));
  normalize(model);
  return model;
}

/// The 2x2-grid robot: locations TL, TR, BL, BR plus OK / FAIL. Clock x
/// times each cell-leaving attempt, clock y the whole mission; when y hits
/// cmax an escape edge forces failure.
inline CdPta gen_robot(std::int64_t cmax) {
  if (cmax < 4) throw Error(ErrorKind::Usage, "gen_robot requires cmax >= 4");
  CdPta model;
  model.clocks = {"x", "y"};
  const ClockId x = 0, y = 1;

  auto inv = [&](std::int64_t xb, std::int64_t yb) {
    return ClockConstraint{{detail::atom(x, ConstraintOp::Le, xb), detail::atom(y, ConstraintOp::Le, yb)}};
  };
  model.locations = {{"TL", inv(2, cmax)}, {"TR", inv(2, cmax)}, {"BL", inv(3, cmax)},
                     {"BR", inv(0, cmax)}, {"OK", inv(cmax, cmax)}, {"FAIL", inv(cmax, cmax)}};
  model.initial = 0;
  const LocationId TL = 0, TR = 1, BL = 2, BR = 3, OK = 4, FAIL = 5;

  // Cell-leaving attempt: succeed with weight (x-lo)/scale, else retry with
  // x reset. Piece domain [lo, hi] is the guard's x interval.
  auto move = [&](LocationId src, LocationId dst, std::int64_t lo, std::int64_t hi,
                  std::int64_t scale) {
    ProbEdge e;
    e.source = src;
    e.guard.atoms = {detail::atom(x, ConstraintOp::Ge, lo)};
    e.outcomes = {{{x}, dst}, {{x}, src}};
    Rational d = make_rational(1, scale);
    Rational c = Rational(-lo) * d;
    e.weights = {{detail::affine(lo, hi, c, d), {}},
                 {detail::affine(lo, hi, Rational(1) - c, -d), {}}};
    model.edges.push_back(std::move(e));
  };
  move(TL, TR, 1, 2, 1);
  move(TL, BL, 1, 2, 1);
  move(TR, BR, 1, 2, 2);
  move(BL, BR, 2, 3, 1);

  {  // final task: succeeds with weight 1 - y/cmax
    ProbEdge e;
    e.source = BR;
    e.guard.atoms = {detail::atom(x, ConstraintOp::Le, 0)};
    e.outcomes = {{{}, OK}, {{}, FAIL}};
    e.weights = {{{}, detail::affine(0, cmax, Rational(1), make_rational(-1, cmax))},
                 {{}, detail::affine(0, cmax, Rational(0), make_rational(1, cmax))}};
    model.edges.push_back(std::move(e));
  }

  for (LocationId src : {TL, TR, BL, BR}) {  // mission timeout
    ProbEdge e;
    e.source = src;
    e.guard.atoms = {detail::atom(y, ConstraintOp::Ge, cmax)};
    e.outcomes = {{{}, FAIL}};
    std::int64_t xb = src == BR ? 0 : (src == BL ? 3 : 2);
    e.weights = {{detail::affine(0, xb, Rational(1), Rational(0)), {}}};
    model.edges.push_back(std::move(e));
  }
  normalize(model);
  return model;
}

// ---------------------------------------------------------------------------
// Two-counter machines
// ---------------------------------------------------------------------------

struct TwoCounterInstruction {
  enum class Kind { Inc, Dec, Jz, Halt };
  Kind kind = Kind::Halt;
  int counter = 1;  // 1 or 2
  int next = -1;    // inc/dec: successor label (1-based)
  int ifZero = -1;  // jz
  int ifPos = -1;   // jz
};

struct TwoCounterProgram {
  std::vector<TwoCounterInstruction> instructions;  // labels L1..Ln in order
};

/// Line-oriented text form, case-insensitive, '#' comments:
///   L1: INC C1 GOTO L2
///   L2: DEC C2 GOTO L3
///   L3: JZ C1 L4 L5
///   Ln: HALT
inline TwoCounterProgram parse_2cm(const std::string& text) {
  auto fail = [](int line, const std::string& msg) {
    throw Error(ErrorKind::MalformedProgram, "line " + std::to_string(line) + ": " + msg);
  };
  auto upper = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
  };
  auto parse_label = [&](const std::string& tok, int line) {
    std::string t = upper(tok);
    if (t.size() < 2 || t[0] != 'L') fail(line, "expected label, got \"" + tok + "\"");
    for (std::size_t i = 1; i < t.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(t[i]))) fail(line, "bad label \"" + tok + "\"");
    return std::stoi(t.substr(1));
  };
  auto parse_counter = [&](const std::string& tok, int line) {
    std::string t = upper(tok);
    if (t != "C1" && t != "C2") fail(line, "expected C1 or C2, got \"" + tok + "\"");
    return t == "C1" ? 1 : 2;
  };

  TwoCounterProgram program;
  std::istringstream in(text);
  std::string raw;
  int lineNo = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    std::istringstream ls(raw);
    std::vector<std::string> toks;
    std::string tok;
    while (ls >> tok) toks.push_back(tok);
    if (toks.empty()) continue;

    if (toks[0].empty() || toks[0].back() != ':') fail(lineNo, "expected \"L<i>:\"");
    int label = parse_label(toks[0].substr(0, toks[0].size() - 1), lineNo);
    if (label != static_cast<int>(program.instructions.size()) + 1)
      fail(lineNo, "labels must be dense and in order; expected L" +
                       std::to_string(program.instructions.size() + 1));

    TwoCounterInstruction ins;
    std::string op = toks.size() > 1 ? upper(toks[1]) : "";
    if (op == "INC" || op == "DEC") {
      if (toks.size() != 5 || upper(toks[3]) != "GOTO")
        fail(lineNo, "expected \"" + op + " C<l> GOTO L<j>\"");
      ins.kind = op == "INC" ? TwoCounterInstruction::Kind::Inc : TwoCounterInstruction::Kind::Dec;
      ins.counter = parse_counter(toks[2], lineNo);
      ins.next = parse_label(toks[4], lineNo);
    } else if (op == "JZ") {
      if (toks.size() != 5) fail(lineNo, "expected \"JZ C<l> L<ifzero> L<ifpos>\"");
      ins.kind = TwoCounterInstruction::Kind::Jz;
      ins.counter = parse_counter(toks[2], lineNo);
      ins.ifZero = parse_label(toks[3], lineNo);
      ins.ifPos = parse_label(toks[4], lineNo);
    } else if (op == "HALT") {
      if (toks.size() != 2) fail(lineNo, "expected \"HALT\"");
      ins.kind = TwoCounterInstruction::Kind::Halt;
    } else {
      fail(lineNo, "unknown instruction \"" + (toks.size() > 1 ? toks[1] : "") + "\"");
    }
    program.instructions.push_back(ins);
  }

  const int n = static_cast<int>(program.instructions.size());
  if (n == 0) throw Error(ErrorKind::MalformedProgram, "empty program");
  int halts = 0;
  for (int i = 0; i < n; ++i) {
    const auto& ins = program.instructions[i];
    if (ins.kind == TwoCounterInstruction::Kind::Halt) {
      ++halts;
      if (i != n - 1) throw Error(ErrorKind::MalformedProgram, "HALT must be the last instruction");
    }
    for (int ref : {ins.next, ins.ifZero, ins.ifPos})
      if (ref != -1 && (ref < 1 || ref > n))
        throw Error(ErrorKind::MalformedProgram,
                    "L" + std::to_string(i + 1) + " refers to undefined label L" + std::to_string(ref));
  }
  if (halts != 1) throw Error(ErrorKind::MalformedProgram, "program needs exactly one HALT, at the end");
  return program;
}

namespace detail {

/// Builder state for the two-counter translation. Counter value c is encoded
/// as clock value 1/2^c on the counter's clock; x3 times module-local
/// progress. Counter-2 modules are the counter-1 modules under the clock
/// renaming x1 <-> x2.
struct TwoCounterCompiler {
  CdPta model;
  std::map<std::string, LocationId> byName;

  static constexpr ClockId X1 = 0, X2 = 1, X3 = 2;

  LocationId add_location(const std::string& name, ClockConstraint inv) {
    byName[name] = static_cast<LocationId>(model.locations.size());
    model.locations.push_back({name, std::move(inv)});
    return byName[name];
  }

  LocationId loc(const std::string& name) const { return byName.at(name); }

  static ClockConstraint all_le_one() {
    return {{ {X1, ConstraintOp::Le, 1}, {X2, ConstraintOp::Le, 1}, {X3, ConstraintOp::Le, 1} }};
  }

  /// Conjoins the target's invariant atoms over non-reset clocks, so that
  /// every probabilistic outcome lands inside its invariant.
  void strengthen(ProbEdge& e) const {
    for (std::size_t oi = 0; oi < e.outcomes.size(); ++oi) {
      const auto& o = e.outcomes[oi];
      for (const auto& a : model.locations[o.target].invariant.atoms) {
        bool isReset = std::find(o.resetSet.begin(), o.resetSet.end(), a.clock) != o.resetSet.end();
        if (!isReset) e.guard.atoms.push_back(a);
      }
    }
  }

  void add_edge(LocationId src, ClockConstraint guard,
                std::vector<std::pair<Outcome, std::vector<PiecewiseLinearFn>>> outs) {
    ProbEdge e;
    e.source = src;
    e.guard = std::move(guard);
    for (auto& [o, fns] : outs) {
      e.outcomes.push_back(std::move(o));
      e.weights.push_back(std::move(fns));
    }
    strengthen(e);
    model.edges.push_back(std::move(e));
  }

  /// Weight-1 edge guarded by `clock == 1`, resetting `clock`.
  void add_tick_edge(LocationId src, ClockId clock, LocationId dst) {
    std::vector<PiecewiseLinearFn> fns(3);
    fns[clock] = affine(1, 1, Rational(1), Rational(0));
    add_edge(src, {{ {clock, ConstraintOp::Ge, 1} }}, {{{{clock}, dst}, std::move(fns)}});
  }

  /// Half/half check split at value/2 of the two given clocks:
  /// first outcome gets (a+b)/2, second gets 1-(a+b)/2.
  void add_half_sum_edge(LocationId src, ClockConstraint guard, ClockId a, ClockId b,
                         LocationId onSum, LocationId onComplement) {
    std::vector<PiecewiseLinearFn> sumFns(3), compFns(3);
    sumFns[a] = affine(0, 1, Rational(0), make_rational(1, 2));
    sumFns[b] = affine(0, 1, Rational(0), make_rational(1, 2));
    compFns[a] = affine(0, 1, make_rational(1, 2), make_rational(-1, 2));
    compFns[b] = affine(0, 1, make_rational(1, 2), make_rational(-1, 2));
    add_edge(src, std::move(guard),
             {{{{}, onSum}, std::move(sumFns)}, {{{}, onComplement}, std::move(compFns)}});
  }

  void compile_increment(int i, int counter, int next) {
    const ClockId a = counter == 1 ? X1 : X2;  // active counter clock
    const ClockId b = counter == 1 ? X2 : X1;  // idle counter clock, wraps mod 1
    const std::string p = "L" + std::to_string(i);

    add_location(p + "_B", {{ {a, ConstraintOp::Lt, 1}, {b, ConstraintOp::Le, 1}, {X3, ConstraintOp::Lt, 1} }});
    add_location(p + "_C", {{ {a, ConstraintOp::Lt, 1}, {b, ConstraintOp::Le, 1}, {X3, ConstraintOp::Le, 1} }});
    add_location(p + "_D", {{ {a, ConstraintOp::Le, 1}, {b, ConstraintOp::Le, 0}, {X3, ConstraintOp::Le, 1} }});
    add_location(p + "_E", {{ {a, ConstraintOp::Le, 1}, {b, ConstraintOp::Le, 0}, {X3, ConstraintOp::Le, 1} }});
    add_location(p + "_F", all_le_one());
    add_location(p + "_G", all_le_one());  // check-success target
    add_location(p + "_H", all_le_one());

    add_tick_edge(loc(p), a, loc(p + "_B"));
    add_tick_edge(loc(p), b, loc(p));
    add_tick_edge(loc(p + "_B"), b, loc(p + "_B"));
    add_tick_edge(loc(p + "_C"), b, loc(p + "_C"));

    {  // B: after a dwell of 0 < a,x3 < 1, continue (reset a) or check (reset b)
      std::vector<PiecewiseLinearFn> toC(3), toD(3);
      toC[a] = affine(0, 1, make_rational(1, 2), Rational(0));
      toD[a] = affine(0, 1, make_rational(1, 2), Rational(0));
      add_edge(loc(p + "_B"),
               {{ {a, ConstraintOp::Gt, 0}, {a, ConstraintOp::Lt, 1},
                  {X3, ConstraintOp::Gt, 0}, {X3, ConstraintOp::Lt, 1} }},
               {{{{a}, loc(p + "_C")}, std::move(toC)}, {{{b}, loc(p + "_D")}, std::move(toD)}});
    }
    add_tick_edge(loc(p + "_C"), X3, loc("L" + std::to_string(next)));
    add_half_sum_edge(loc(p + "_D"), {{ {b, ConstraintOp::Le, 0} }}, a, X3, loc(p + "_E"), loc(p + "_F"));
    add_half_sum_edge(loc(p + "_E"), {{ {b, ConstraintOp::Le, 0} }}, a, X3, loc(p + "_H"), loc(p + "_G"));
  }

  void compile_decrement(int i, int counter, int next) {
    const ClockId a = counter == 1 ? X1 : X2;
    const ClockId b = counter == 1 ? X2 : X1;
    const std::string p = "L" + std::to_string(i);

    add_location(p + "_B", all_le_one());
    add_location(p + "_C", all_le_one());
    add_location(p + "_D", {{ {a, ConstraintOp::Le, 0}, {b, ConstraintOp::Le, 1}, {X3, ConstraintOp::Le, 1} }});
    add_location(p + "_E", {{ {a, ConstraintOp::Le, 0}, {b, ConstraintOp::Le, 1}, {X3, ConstraintOp::Le, 1} }});
    add_location(p + "_F", all_le_one());  // check-success target
    add_location(p + "_G", all_le_one());
    add_location(p + "_H", all_le_one());

    add_tick_edge(loc(p), b, loc(p));

    {  // nondeterministic dwell in the entry location, then branch half/half
      std::vector<PiecewiseLinearFn> toB(3), toC(3);
      toB[a] = affine(0, 1, make_rational(1, 2), Rational(0));
      toC[a] = affine(0, 1, make_rational(1, 2), Rational(0));
      add_edge(loc(p),
               {{ {a, ConstraintOp::Lt, 1}, {X3, ConstraintOp::Lt, 1} }},
               {{{{a}, loc(p + "_B")}, std::move(toB)}, {{{b}, loc(p + "_C")}, std::move(toC)}});
    }
    add_tick_edge(loc(p + "_B"), b, loc(p + "_B"));
    add_tick_edge(loc(p + "_B"), X3, loc("L" + std::to_string(next)));
    add_tick_edge(loc(p + "_C"), a, loc(p + "_D"));
    add_half_sum_edge(loc(p + "_D"), {{ {a, ConstraintOp::Le, 0} }}, b, X3, loc(p + "_E"), loc(p + "_G"));
    add_half_sum_edge(loc(p + "_E"), {{ {a, ConstraintOp::Le, 0} }}, b, X3, loc(p + "_H"), loc(p + "_F"));
  }

  void compile_zero_test(int i, int counter, int ifZero, int ifPos) {
    const ClockId a = counter == 1 ? X1 : X2;
    const std::string p = "L" + std::to_string(i);
    add_location(p + "_TZ", all_le_one());  // check target on the zero branch
    add_location(p + "_TP", all_le_one());  // check target on the positive branch

    auto branch = [&](ConstraintOp op, LocationId checkTarget, LocationId cont) {
      std::vector<PiecewiseLinearFn> toCheck(3), toCont(3);
      std::int64_t lo = op == ConstraintOp::Ge ? 1 : 0;
      toCheck[a] = affine(lo, 1, make_rational(1, 4), Rational(0));
      toCont[a] = affine(lo, 1, make_rational(3, 4), Rational(0));
      add_edge(loc(p), {{ {a, op, 1} }},
               {{{{}, checkTarget}, std::move(toCheck)}, {{{}, cont}, std::move(toCont)}});
    };
    branch(ConstraintOp::Ge, loc(p + "_TZ"), loc("L" + std::to_string(ifZero)));  // a == 1
    branch(ConstraintOp::Lt, loc(p + "_TP"), loc("L" + std::to_string(ifPos)));   // a < 1
  }
};

}  // namespace detail

/// Translates a two-counter machine into a three-clock cdPTA made of the
/// increment / decrement / zero-test check modules, wired instruction to
/// instruction. Counter c is encoded as clock value 1/2^c; an INIT location
/// primes both counter clocks to 1 (counters start at zero).
inline CdPta compile_2cm(const TwoCounterProgram& program) {
  const int n = static_cast<int>(program.instructions.size());
  if (n == 0) throw Error(ErrorKind::MalformedProgram, "empty program");

  detail::TwoCounterCompiler builder;
  builder.model.clocks = {"x1", "x2", "x3"};

  builder.add_location("INIT", detail::TwoCounterCompiler::all_le_one());
  for (int i = 1; i <= n; ++i) {
    const auto& ins = program.instructions[i - 1];
    ClockConstraint inv;
    switch (ins.kind) {
      case TwoCounterInstruction::Kind::Inc: {
        const ClockId a = ins.counter == 1 ? 0 : 1;
        const ClockId b = ins.counter == 1 ? 1 : 0;
        inv = {{ {a, ConstraintOp::Le, 1}, {b, ConstraintOp::Le, 1}, {2, ConstraintOp::Lt, 1} }};
        break;
      }
      case TwoCounterInstruction::Kind::Dec: {
        const ClockId a = ins.counter == 1 ? 0 : 1;
        const ClockId b = ins.counter == 1 ? 1 : 0;
        inv = {{ {a, ConstraintOp::Lt, 1}, {b, ConstraintOp::Le, 1}, {2, ConstraintOp::Lt, 1} }};
        break;
      }
      case TwoCounterInstruction::Kind::Jz:
        inv = {{ {0, ConstraintOp::Le, 1}, {1, ConstraintOp::Le, 1}, {2, ConstraintOp::Le, 0} }};
        break;
      case TwoCounterInstruction::Kind::Halt:
        inv = detail::TwoCounterCompiler::all_le_one();
        break;
    }
    builder.add_location("L" + std::to_string(i), std::move(inv));
  }

  builder.model.initial = builder.loc("INIT");
  builder.add_tick_edge(builder.loc("INIT"), detail::TwoCounterCompiler::X3, builder.loc("L1"));

  for (int i = 1; i <= n; ++i) {
    const auto& ins = program.instructions[i - 1];
    switch (ins.kind) {
      case TwoCounterInstruction::Kind::Inc:
        builder.compile_increment(i, ins.counter, ins.next);
        break;
      case TwoCounterInstruction::Kind::Dec:
        builder.compile_decrement(i, ins.counter, ins.next);
        break;
      case TwoCounterInstruction::Kind::Jz:
        builder.compile_zero_test(i, ins.counter, ins.ifZero, ins.ifPos);
        break;
      case TwoCounterInstruction::Kind::Halt:
        break;
    }
  }
  normalize(builder.model);
  return builder.model;
}

/// Names of the check-success locations: reaching any of them with the right
/// probability certifies one faithfully simulated machine step.
inline std::vector<std::string> two_counter_targets(const TwoCounterProgram& program) {
  std::vector<std::string> out;
  for (int i = 1; i <= static_cast<int>(program.instructions.size()); ++i) {
    const std::string p = "L" + std::to_string(i);
    switch (program.instructions[i - 1].kind) {
      case TwoCounterInstruction::Kind::Inc: out.push_back(p + "_G"); break;
      case TwoCounterInstruction::Kind::Dec: out.push_back(p + "_F"); break;
      case TwoCounterInstruction::Kind::Jz:
        out.push_back(p + "_TZ");
        out.push_back(p + "_TP");
        break;
      case TwoCounterInstruction::Kind::Halt: break;
    }
  }
  return out;
}

}  // namespace cdpta
