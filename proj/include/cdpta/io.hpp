#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdpta/model.hpp"
#include "cdpta/region_graph.hpp"
#include "cdpta/schedule.hpp"
#include "cdpta/solver.hpp"

namespace cdpta {

namespace detail {

using Json = nlohmann::json;

[[noreturn]] inline void schema_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::SchemaError, path + ": " + msg);
}

inline void reject_unknown_keys(const Json& obj, const std::set<std::string>& known,
                                const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key())) schema_error(path + "/" + it.key(), "unknown key");
}

inline Rational json_rational(const Json& j, const std::string& path) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  schema_error(path, "expected an integer or a \"num/den\" string");
}

inline std::int64_t json_natural(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0)
    schema_error(path, "expected a natural number");
  return j.get<std::int64_t>();
}

inline ConstraintOp json_op(const Json& j, const std::string& path) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "<") return ConstraintOp::Lt;
    if (s == "<=") return ConstraintOp::Le;
    if (s == ">=") return ConstraintOp::Ge;
    if (s == ">") return ConstraintOp::Gt;
  }
  schema_error(path, "expected one of \"<\", \"<=\", \">=\", \">\"");
}

inline ClockConstraint json_constraint(const Json& j, const CdPta& model, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected a list of atoms");
  ClockConstraint cc;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string apath = path + "/" + std::to_string(i);
    const Json& a = j[i];
    if (!a.is_object()) schema_error(apath, "expected an atom object");
    reject_unknown_keys(a, {"clock", "op", "bound"}, apath);
    if (!a.contains("clock") || !a.contains("op") || !a.contains("bound"))
      schema_error(apath, "atom needs clock, op and bound");
    ConstraintAtom atom;
    atom.clock = model.clock_index(a["clock"].get<std::string>());
    atom.op = json_op(a["op"], apath + "/op");
    atom.bound = json_natural(a["bound"], apath + "/bound");
    cc.atoms.push_back(atom);
  }
  return cc;
}

inline Json rational_json(const Rational& q) {
  if (is_integer(q) && numerator(q) >= std::numeric_limits<std::int64_t>::min() &&
      numerator(q) <= std::numeric_limits<std::int64_t>::max())
    return Json(numerator(q).convert_to<std::int64_t>());
  return Json(rational_to_fraction_string(q));
}

inline Json constraint_json(const ClockConstraint& cc, const CdPta& model) {
  Json arr = Json::array();
  for (const auto& a : cc.atoms) {
    Json atom;
    atom["clock"] = model.clocks[a.clock];
    atom["op"] = op_name(a.op);
    atom["bound"] = a.bound;
    arr.push_back(std::move(atom));
  }
  return arr;
}

}  // namespace detail

/// Parses the JSON model schema. Unknown keys are rejected with the JSON
/// path of the offender. The returned model is normalized but not validated.
inline CdPta parse_model(const std::string& text) {
  detail::Json j;
  try {
    j = detail::Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) detail::schema_error("", "expected a JSON object");
  detail::reject_unknown_keys(j, {"clocks", "locations", "initial", "edges"}, "");
  for (const char* key : {"clocks", "locations", "initial", "edges"})
    if (!j.contains(key)) detail::schema_error("", std::string("missing key \"") + key + "\"");

  CdPta model;
  if (!j["clocks"].is_array()) detail::schema_error("/clocks", "expected a list of names");
  for (const auto& c : j["clocks"]) model.clocks.push_back(c.get<std::string>());

  if (!j["locations"].is_array()) detail::schema_error("/locations", "expected a list");
  for (std::size_t i = 0; i < j["locations"].size(); ++i) {
    const std::string path = "/locations/" + std::to_string(i);
    const auto& lj = j["locations"][i];
    if (!lj.is_object()) detail::schema_error(path, "expected an object");
    detail::reject_unknown_keys(lj, {"name", "invariant"}, path);
    if (!lj.contains("name")) detail::schema_error(path, "missing name");
    Location loc;
    loc.name = lj["name"].get<std::string>();
    if (lj.contains("invariant"))
      loc.invariant = detail::json_constraint(lj["invariant"], model, path + "/invariant");
    model.locations.push_back(std::move(loc));
  }

  model.initial = model.location_index(j["initial"].get<std::string>());

  if (!j["edges"].is_array()) detail::schema_error("/edges", "expected a list");
  for (std::size_t i = 0; i < j["edges"].size(); ++i) {
    const std::string path = "/edges/" + std::to_string(i);
    const auto& ej = j["edges"][i];
    if (!ej.is_object()) detail::schema_error(path, "expected an object");
    detail::reject_unknown_keys(ej, {"source", "guard", "outcomes"}, path);
    if (!ej.contains("source") || !ej.contains("outcomes"))
      detail::schema_error(path, "edge needs source and outcomes");
    ProbEdge edge;
    edge.source = model.location_index(ej["source"].get<std::string>());
    if (ej.contains("guard"))
      edge.guard = detail::json_constraint(ej["guard"], model, path + "/guard");
    if (!ej["outcomes"].is_array()) detail::schema_error(path + "/outcomes", "expected a list");
    for (std::size_t oi = 0; oi < ej["outcomes"].size(); ++oi) {
      const std::string opath = path + "/outcomes/" + std::to_string(oi);
      const auto& oj = ej["outcomes"][oi];
      if (!oj.is_object()) detail::schema_error(opath, "expected an object");
      detail::reject_unknown_keys(oj, {"reset", "target", "weights"}, opath);
      if (!oj.contains("target")) detail::schema_error(opath, "missing target");
      Outcome o;
      o.target = model.location_index(oj["target"].get<std::string>());
      if (oj.contains("reset"))
        for (const auto& r : oj["reset"]) o.resetSet.push_back(model.clock_index(r.get<std::string>()));
      std::sort(o.resetSet.begin(), o.resetSet.end());
      o.resetSet.erase(std::unique(o.resetSet.begin(), o.resetSet.end()), o.resetSet.end());
      std::vector<PiecewiseLinearFn> fns(model.clocks.size());
      if (oj.contains("weights")) {
        if (!oj["weights"].is_array()) detail::schema_error(opath + "/weights", "expected a list");
        for (std::size_t wi = 0; wi < oj["weights"].size(); ++wi) {
          const std::string wpath = opath + "/weights/" + std::to_string(wi);
          const auto& wj = oj["weights"][wi];
          if (!wj.is_object()) detail::schema_error(wpath, "expected an object");
          detail::reject_unknown_keys(wj, {"clock", "pieces"}, wpath);
          if (!wj.contains("clock") || !wj.contains("pieces"))
            detail::schema_error(wpath, "weight needs clock and pieces");
          ClockId x = model.clock_index(wj["clock"].get<std::string>());
          PiecewiseLinearFn fn;
          for (std::size_t pi = 0; pi < wj["pieces"].size(); ++pi) {
            const std::string ppath = wpath + "/pieces/" + std::to_string(pi);
            const auto& pj = wj["pieces"][pi];
            if (!pj.is_object()) detail::schema_error(ppath, "expected an object");
            detail::reject_unknown_keys(pj, {"lo", "hi", "c", "d"}, ppath);
            for (const char* key : {"lo", "hi", "c", "d"})
              if (!pj.contains(key)) detail::schema_error(ppath, std::string("missing ") + key);
            LinearPiece piece;
            piece.lo = detail::json_natural(pj["lo"], ppath + "/lo");
            piece.hi = detail::json_natural(pj["hi"], ppath + "/hi");
            piece.c = detail::json_rational(pj["c"], ppath + "/c");
            piece.d = detail::json_rational(pj["d"], ppath + "/d");
            fn.pieces.push_back(std::move(piece));
          }
          fns[x] = std::move(fn);
        }
      }
      edge.outcomes.push_back(std::move(o));
      edge.weights.push_back(std::move(fns));
    }
    model.edges.push_back(std::move(edge));
  }
  normalize(model);
  return model;
}

/// Canonical JSON: alphabetically sorted keys, rationals as integers or
/// "num/den" strings, zero weight functions omitted. parse . serialize is the
/// identity on normalized models.
inline std::string serialize_model(const CdPta& model) {
  detail::Json j;
  j["clocks"] = model.clocks;
  j["initial"] = model.locations[model.initial].name;
  j["locations"] = detail::Json::array();
  for (const auto& loc : model.locations) {
    detail::Json lj;
    lj["name"] = loc.name;
    lj["invariant"] = detail::constraint_json(loc.invariant, model);
    j["locations"].push_back(std::move(lj));
  }
  j["edges"] = detail::Json::array();
  for (const auto& e : model.edges) {
    detail::Json ej;
    ej["source"] = model.locations[e.source].name;
    ej["guard"] = detail::constraint_json(e.guard, model);
    ej["outcomes"] = detail::Json::array();
    for (std::size_t oi = 0; oi < e.outcomes.size(); ++oi) {
      detail::Json oj;
      oj["target"] = model.locations[e.outcomes[oi].target].name;
      oj["reset"] = detail::Json::array();
      for (ClockId x : e.outcomes[oi].resetSet) oj["reset"].push_back(model.clocks[x]);
      oj["weights"] = detail::Json::array();
      for (ClockId x = 0; x < model.num_clocks(); ++x) {
        const auto& fn = e.weights[oi][x];
        if (fn.is_zero()) continue;
        detail::Json wj;
        wj["clock"] = model.clocks[x];
        wj["pieces"] = detail::Json::array();
        for (const auto& p : fn.pieces) {
          detail::Json pj;
          pj["lo"] = p.lo;
          pj["hi"] = p.hi;
          pj["c"] = detail::rational_json(p.c);
          pj["d"] = detail::rational_json(p.d);
          wj["pieces"].push_back(std::move(pj));
        }
        oj["weights"].push_back(std::move(wj));
      }
      ej["outcomes"].push_back(std::move(oj));
    }
    j["edges"].push_back(std::move(ej));
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Schedules
// ---------------------------------------------------------------------------

namespace detail {

inline ScheduleNode json_schedule_node(const Json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected a schedule node object");
  reject_unknown_keys(j, {"delay", "edge", "children"}, path);
  if (!j.contains("delay") || !j.contains("edge")) schema_error(path, "node needs delay and edge");
  ScheduleNode node;
  node.delay = json_rational(j["delay"], path + "/delay");
  if (!j["edge"].is_number_integer()) schema_error(path + "/edge", "expected an edge index");
  node.edge = j["edge"].get<int>();
  if (j.contains("children")) {
    if (!j["children"].is_object()) schema_error(path + "/children", "expected an object");
    for (auto it = j["children"].begin(); it != j["children"].end(); ++it) {
      int oi;
      try {
        oi = std::stoi(it.key());
      } catch (const std::exception&) {
        schema_error(path + "/children/" + it.key(), "expected an outcome index");
      }
      node.children[oi] = json_schedule_node(it.value(), path + "/children/" + it.key());
    }
  }
  return node;
}

inline Json schedule_node_json(const ScheduleNode& node) {
  Json j;
  j["delay"] = rational_to_fraction_string(node.delay);
  j["edge"] = node.edge;
  if (!node.children.empty()) {
    Json kids;
    for (const auto& [oi, child] : node.children) kids[std::to_string(oi)] = schedule_node_json(child);
    j["children"] = std::move(kids);
  }
  return j;
}

}  // namespace detail

inline Schedule parse_schedule(const std::string& text) {
  detail::Json j;
  try {
    j = detail::Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("invalid JSON: ") + e.what());
  }
  Schedule s;
  if (!j.is_null()) s.root = detail::json_schedule_node(j, "");
  return s;
}

inline std::string serialize_schedule(const Schedule& s) {
  if (!s.root) return "null\n";
  return detail::schedule_node_json(*s.root).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Explicit-state export, strategy dump, sweep CSV, solve-result JSON
// ---------------------------------------------------------------------------

struct ExportPaths {
  std::filesystem::path sta, tra, lab;
};

/// Three text files: `.sta` one line per state, `.tra` one line per
/// transition (probabilities as num/den), `.lab` init/target labels. Line
/// order follows state and action indices, so exports are deterministic.
inline ExportPaths export_explicit(const RegionMdp& mdp, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  ExportPaths paths{dir / "mdp.sta", dir / "mdp.tra", dir / "mdp.lab"};

  std::ofstream sta(paths.sta);
  if (!sta) throw Error(ErrorKind::Io, "cannot write " + paths.sta.string());
  for (std::size_t s = 0; s < mdp.num_states(); ++s)
    sta << s << ' ' << mdp.state_to_string(s) << '\n';

  std::ofstream tra(paths.tra);
  if (!tra) throw Error(ErrorKind::Io, "cannot write " + paths.tra.string());
  for (std::size_t s = 0; s < mdp.num_states(); ++s)
    for (std::size_t a = 0; a < mdp.num_actions_of(s); ++a) {
      auto act = mdp.action(s, a);
      for (std::size_t t = 0; t < act.size; ++t)
        tra << s << ' ' << a << ' ' << act.target[t] << ' ' << act.num[t] << '/' << act.den[t]
            << '\n';
    }

  std::ofstream lab(paths.lab);
  if (!lab) throw Error(ErrorKind::Io, "cannot write " + paths.lab.string());
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    const bool isInit = static_cast<int>(s) == mdp.initialState;
    const bool isTarget = mdp.targetMask[s] != 0;
    if (!isInit && !isTarget) continue;
    lab << s;
    if (isInit) lab << " init";
    if (isTarget) lab << " target";
    lab << '\n';
  }
  return paths;
}

/// `.str` text: one `<stateId> <actionIdx>` line per non-target state whose
/// chosen action is a real composite action.
inline std::string write_strategy(const RegionMdp& mdp, const SolveResult& result) {
  std::string out;
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    if (mdp.targetMask[s]) continue;
    auto act = mdp.action(s, result.strategy[s]);
    if (act.edge < 0) continue;
    out += std::to_string(s) + " " + std::to_string(result.strategy[s]) + "\n";
  }
  return out;
}

struct SweepRow {
  std::string model;
  int k = 1;
  Objective objective = Objective::Max;
  double value = 0.0;
  std::int64_t states = 0;
  std::int64_t actions = 0;
  std::int64_t buildMs = 0;
  std::int64_t solveMs = 0;
};

inline std::string write_sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "model,k,objective,value,states,actions,build_ms,solve_ms\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.9f", r.value);
    out += r.model + "," + std::to_string(r.k) + "," + objective_name(r.objective) + "," + buf +
           "," + std::to_string(r.states) + "," + std::to_string(r.actions) + "," +
           std::to_string(r.buildMs) + "," + std::to_string(r.solveMs) + "\n";
  }
  return out;
}

inline std::string solve_result_json(const SolveResult& result, int k, const MdpStats& stats) {
  detail::Json j;
  j["value"] = result.value;
  j["objective"] = objective_name(result.objective);
  j["k"] = k;
  j["iterations"] = result.iterations;
  j["residual"] = result.residual;
  j["states"] = stats.numStates;
  j["actions"] = stats.numActions;
  return j.dump(2) + "\n";
}

}  // namespace cdpta
