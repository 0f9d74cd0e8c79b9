#pragma once

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdpta/cdpta.hpp"

namespace cdpta::cli {

namespace detail {

inline std::string read_stream(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string read_model_text(const std::string& path, std::istream& stdinStream) {
  if (path == "-") return read_stream(stdinStream);
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::Io, "cannot read " + path);
  return read_stream(f);
}

inline std::set<LocationId> parse_targets(const CdPta& model, const std::string& names) {
  std::set<LocationId> out;
  std::stringstream ss(names);
  std::string name;
  while (std::getline(ss, name, ','))
    if (!name.empty()) out.insert(model.location_index(name));
  return out;
}

inline std::vector<int> parse_k_list(const std::string& text) {
  std::vector<int> ks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int k = std::stoi(item);
    if (k < 1) throw Error(ErrorKind::Usage, "granularity k must be >= 1");
    ks.push_back(k);
  }
  if (ks.empty()) throw Error(ErrorKind::Usage, "empty k list");
  return ks;
}

inline std::int64_t node_budget() {
  if (const char* env = std::getenv("CDPTA_NODE_BUDGET")) {
    std::int64_t v = std::atoll(env);
    if (v > 0) return v;
  }
  return 2000000;
}

inline std::int64_t elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                               since)
      .count();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + path);
  f << content;
}

}  // namespace detail

/// Command-line entry point. Machine output (values, JSON, CSV) goes to
/// `out`; diagnostics and progress go to `err`. Returns the process exit
/// code: 0 success, 1 validation/runtime errors, 2 usage errors.
inline int run(std::vector<std::string> args, std::istream& in, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"clock-dependent probabilistic timed automata: region-graph bounds on "
               "reachability probabilities"};
  app.require_subcommand(1);

  std::string modelPath, targetNames, objectiveName = "max", jsonOut, strategyOut, csvOut = "-";
  std::string outPath, exportDir, schedulePath, kList = "1";
  int k = 1, gridM = 100, depth = 3;
  double epsilon = 1e-9;

  auto* cmdValidate = app.add_subcommand("validate", "check a model's well-formedness");
  cmdValidate->add_option("model", modelPath, "model JSON path, or - for stdin")->required();

  auto* cmdSolve = app.add_subcommand("solve", "reachability bound on the region graph");
  cmdSolve->add_option("model", modelPath)->required();
  cmdSolve->add_option("--k", k, "granularity")->required();
  cmdSolve->add_option("--target", targetNames, "comma-separated location names")->required();
  cmdSolve->add_option("--objective", objectiveName, "max or min")
      ->check(CLI::IsMember({"max", "min"}));
  cmdSolve->add_option("--epsilon", epsilon, "value-iteration stopping threshold");
  cmdSolve->add_option("--json", jsonOut, "write the result JSON to this file");
  cmdSolve->add_option("--strategy", strategyOut, "write the optimal strategy (.str) to this file");

  auto* cmdSweep = app.add_subcommand("sweep", "solve across several granularities");
  cmdSweep->add_option("model", modelPath)->required();
  cmdSweep->add_option("--k", kList, "comma-separated granularities")->required();
  cmdSweep->add_option("--target", targetNames)->required();
  cmdSweep->add_option("--objective", objectiveName)->check(CLI::IsMember({"max", "min"}));
  cmdSweep->add_option("--epsilon", epsilon);
  cmdSweep->add_option("--csv", csvOut, "CSV output path, or - for stdout");

  auto* cmdExport = app.add_subcommand("export", "explicit-state export (.sta/.tra/.lab)");
  cmdExport->add_option("model", modelPath)->required();
  cmdExport->add_option("--k", k)->required();
  cmdExport->add_option("--target", targetNames)->required();
  cmdExport->add_option("--out", exportDir, "output directory")->required();

  auto* cmdEval = app.add_subcommand("eval", "exact probability of a schedule");
  cmdEval->add_option("model", modelPath)->required();
  cmdEval->add_option("--schedule", schedulePath, "schedule JSON path")->required();
  cmdEval->add_option("--target", targetNames)->required();

  auto* cmdSearch = app.add_subcommand("search", "best schedule on a delay grid");
  cmdSearch->add_option("model", modelPath)->required();
  cmdSearch->add_option("--grid", gridM, "delay grid denominator")->required();
  cmdSearch->add_option("--depth", depth, "schedule tree depth")->required();
  cmdSearch->add_option("--target", targetNames)->required();

  auto* cmdGen = app.add_subcommand("gen", "generate a bundled model");
  std::string genKind, genFile;
  std::int64_t cmax = 10;
  cmdGen->add_option("kind", genKind, "oneclock, robot or 2cm")->required();
  cmdGen->add_option("file", genFile, "2cm program file");
  cmdGen->add_option("--cmax", cmax, "mission time bound for the robot model");
  cmdGen->add_option("--out", outPath, "output file (default stdout)");

  try {
    std::vector<const char*> argv;
    argv.push_back("cdpta");
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*cmdValidate) {
      CdPta model = parse_model(detail::read_model_text(modelPath, in));
      auto diags = validate(model);
      bool anyError = false;
      for (const auto& d : diags) {
        anyError = anyError || d.severity == Severity::Error;
        out << (d.severity == Severity::Error ? "error" : "warning") << " [" << d.code << "]: "
            << d.message << "\n";
      }
      if (diags.empty()) out << "ok\n";
      return anyError ? 1 : 0;
    }

    if (*cmdSolve) {
      if (k < 1) throw Error(ErrorKind::Usage, "granularity k must be >= 1");
      if (epsilon <= 0) throw Error(ErrorKind::Usage, "epsilon must be positive");
      auto vm = ValidatedModel::create(parse_model(detail::read_model_text(modelPath, in)));
      auto targets = detail::parse_targets(vm.model(), targetNames);
      RegionMdp mdp = build(vm, k, targets);
      auto st = mdp.stats();
      err << "built " << st.numStates << " states, " << st.numActions << " actions, "
          << st.numTransitions << " transitions\n";
      SolveResult result = objectiveName == "max" ? reach_max(mdp, epsilon) : reach_min(mdp, epsilon);
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.9f", result.value);
      out << buf << "\n";
      if (!jsonOut.empty()) detail::write_file(jsonOut, solve_result_json(result, k, st));
      if (!strategyOut.empty()) detail::write_file(strategyOut, write_strategy(mdp, result));
      return 0;
    }

    if (*cmdSweep) {
      if (epsilon <= 0) throw Error(ErrorKind::Usage, "epsilon must be positive");
      auto ks = detail::parse_k_list(kList);
      auto vm = ValidatedModel::create(parse_model(detail::read_model_text(modelPath, in)));
      auto targets = detail::parse_targets(vm.model(), targetNames);
      Objective objective = objectiveName == "max" ? Objective::Max : Objective::Min;
      std::vector<SweepRow> rows;
      for (int kk : ks) {
        SweepRow row;
        row.model = modelPath;
        row.k = kk;
        row.objective = objective;
        auto t0 = std::chrono::steady_clock::now();
        RegionMdp mdp = build(vm, kk, targets);
        row.buildMs = detail::elapsed_ms(t0);
        auto st = mdp.stats();
        row.states = st.numStates;
        row.actions = st.numActions;
        auto t1 = std::chrono::steady_clock::now();
        SolveResult result =
            objective == Objective::Max ? reach_max(mdp, epsilon) : reach_min(mdp, epsilon);
        row.solveMs = detail::elapsed_ms(t1);
        row.value = result.value;
        rows.push_back(std::move(row));
        err << "k=" << kk << " value=" << result.value << " states=" << st.numStates << "\n";
      }
      std::string csv = write_sweep_csv(rows);
      if (csvOut == "-")
        out << csv;
      else
        detail::write_file(csvOut, csv);
      return 0;
    }

    if (*cmdExport) {
      if (k < 1) throw Error(ErrorKind::Usage, "granularity k must be >= 1");
      auto vm = ValidatedModel::create(parse_model(detail::read_model_text(modelPath, in)));
      auto targets = detail::parse_targets(vm.model(), targetNames);
      RegionMdp mdp = build(vm, k, targets);
      auto paths = export_explicit(mdp, exportDir);
      err << "wrote " << paths.sta.string() << ", " << paths.tra.string() << ", "
          << paths.lab.string() << "\n";
      return 0;
    }

    if (*cmdEval) {
      CdPta model = parse_model(detail::read_model_text(modelPath, in));
      ValidatedModel::create(model);  // reject invalid models up front
      std::ifstream sf(schedulePath);
      if (!sf) throw Error(ErrorKind::Io, "cannot read " + schedulePath);
      Schedule schedule = parse_schedule(detail::read_stream(sf));
      auto targets = detail::parse_targets(model, targetNames);
      out << rational_to_string(evaluate_schedule(model, schedule, targets)) << "\n";
      return 0;
    }

    if (*cmdSearch) {
      CdPta model = parse_model(detail::read_model_text(modelPath, in));
      ValidatedModel::create(model);
      auto targets = detail::parse_targets(model, targetNames);
      auto [schedule, value] = grid_search(model, targets, gridM, depth, detail::node_budget());
      nlohmann::json j;
      j["value"] = rational_to_fraction_string(value);
      j["schedule"] =
          schedule.root ? nlohmann::json::parse(serialize_schedule(schedule)) : nlohmann::json();
      out << j.dump(2) << "\n";
      return 0;
    }

    if (*cmdGen) {
      CdPta model;
      if (genKind == "oneclock") {
        model = gen_oneclock();
      } else if (genKind == "robot") {
        model = gen_robot(cmax);
      } else if (genKind == "2cm") {
        if (genFile.empty()) throw Error(ErrorKind::Usage, "gen 2cm needs a program file");
        std::ifstream pf(genFile);
        if (!pf) throw Error(ErrorKind::Io, "cannot read " + genFile);
        model = compile_2cm(parse_2cm(detail::read_stream(pf)));
      } else {
        throw Error(ErrorKind::Usage, "unknown generator \"" + genKind + "\"");
      }
      std::string text = serialize_model(model);
      if (outPath.empty())
        out << text;
      else
        detail::write_file(outPath, text);
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind == ErrorKind::Usage ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace cdpta::cli
