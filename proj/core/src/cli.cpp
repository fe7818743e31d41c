#include "ranumopt/cli.hpp"

#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ranumopt/crosslayer.hpp"
#include "ranumopt/errors.hpp"
#include "ranumopt/experiments.hpp"
#include "ranumopt/io.hpp"
#include "ranumopt/mac_solver.hpp"
#include "ranumopt/net_model.hpp"

namespace ranumopt {

namespace {

SessionSet require_sessions(const NetworkDoc& doc) {
  if (doc.sessions.empty())
    throw ValidationError("network has no sessions; this command needs at least one");
  return SessionSet(doc.topo, doc.sessions);
}

void print_kv(const char* key, const std::string& value) {
  std::cout << key << ": " << value << "\n";
}

void print_kv(const char* key, double value) { print_kv(key, format_double(value)); }

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"utility/energy trade-off optimization for slotted random-access networks"};
  app.require_subcommand(1);
  std::function<void()> action;

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "generate a random network file");
  GenConfig gen;
  int gen_sessions = 0;
  std::string gen_out;
  bool separate_band = false;
  gen_cmd->add_option("--nodes", gen.node_count, "number of nodes")->required();
  gen_cmd->add_option("--seed", gen.seed, "generator seed");
  gen_cmd->add_option("--sessions", gen_sessions, "number of routed sessions");
  gen_cmd->add_option("--cf-low", gen.cf_low, "connectivity radius lower bound");
  gen_cmd->add_option("--cf-high", gen.cf_high, "connectivity radius upper bound");
  gen_cmd->add_flag("--separate-band", separate_band,
                    "interference range is wider than communication range");
  gen_cmd->add_option("--scale", gen.interference_scale,
                      "interference/communication radius ratio (with --separate-band)");
  gen_cmd->add_option("-o,--output", gen_out, "output network file")->required();
  gen_cmd->callback([&] {
    action = [&] {
      gen.interference_equals_communication = !separate_band;
      const Topology topo = generate_topology(gen);
      std::vector<Session> sessions;
      if (gen_sessions > 0)
        sessions = generate_sessions(topo, gen_sessions, gen.seed).sessions();
      write_network(gen_out, NetworkDoc{topo, sessions, std::nullopt, std::nullopt});
      print_kv("nodes", std::to_string(topo.node_count()));
      print_kv("links", std::to_string(topo.link_count()));
      print_kv("sessions", std::to_string(sessions.size()));
      print_kv("file", gen_out);
    };
  });

  // solve-mac
  auto* mac_cmd = app.add_subcommand("solve-mac", "optimal persistence probabilities");
  std::string mac_in, mac_out;
  TradeoffWeights mac_w;
  mac_cmd->add_option("-i,--input", mac_in, "network file")->required();
  mac_cmd->add_option("--lambda1", mac_w.lambda1, "energy weight");
  mac_cmd->add_option("--lambda2", mac_w.lambda2, "utility weight");
  mac_cmd->add_option("-o,--output", mac_out, "solution CSV (kind,id,value)");
  mac_cmd->callback([&] {
    action = [&] {
      const NetworkDoc doc = read_network(mac_in);
      const ProbAssignment pa = solve_mac(doc.topo, mac_w);
      if (!mac_out.empty()) write_text_file(mac_out, mac_solution_csv(doc.topo, pa));
      print_kv("energy", total_energy(doc.topo, pa));
      const std::vector<double> x = link_throughput(doc.topo, pa);
      const bool positive = std::all_of(x.begin(), x.end(), [](double v) { return v > 0.0; });
      print_kv("utility", positive ? mac_utility(x)
                                   : -std::numeric_limits<double>::infinity());
      print_kv("objective", composed_mac_objective(doc.topo, mac_w, pa));
    };
  });

  // solve-crosslayer
  auto* dist_cmd =
      app.add_subcommand("solve-crosslayer", "distributed joint rate/probability solve");
  std::string dist_in, dist_out, dist_trace;
  TradeoffWeights dist_w;
  SolverConfig dist_cfg;
  bool dist_no_dual = false;
  dist_cmd->add_option("-i,--input", dist_in, "network file (with sessions)")->required();
  dist_cmd->add_option("--lambda1", dist_w.lambda1, "energy weight");
  dist_cmd->add_option("--lambda2", dist_w.lambda2, "utility weight");
  dist_cmd->add_option("--alpha", dist_cfg.alpha, "probability step size");
  dist_cmd->add_option("--gamma", dist_cfg.gamma, "price step size");
  dist_cmd->add_option("--max-iters", dist_cfg.max_iters, "iteration budget");
  dist_cmd->add_option("--tol-change", dist_cfg.tol_change, "per-variable change tolerance");
  dist_cmd->add_option("--tol-feasibility", dist_cfg.tol_feasibility,
                       "relative capacity violation tolerance");
  dist_cmd->add_option("--trace", dist_trace, "write per-iteration trace CSV");
  dist_cmd->add_flag("--no-dual", dist_no_dual, "skip dual values in the trace");
  dist_cmd->add_option("-o,--output", dist_out, "write network file with solution");
  dist_cmd->callback([&] {
    action = [&] {
      const NetworkDoc doc = read_network(dist_in);
      const SessionSet sessions = require_sessions(doc);
      dist_cfg.record_dual = !dist_trace.empty() && !dist_no_dual;
      const DistributedResult r = distributed_solve(doc.topo, sessions, dist_w, dist_cfg);
      if (!dist_trace.empty()) write_text_file(dist_trace, trace_csv(r.trace));
      if (!dist_out.empty())
        write_network(dist_out, NetworkDoc{doc.topo, doc.sessions,
                                           r.assignment.link_probs(), r.rates.y});
      print_kv("converged", r.converged ? "yes" : "no");
      print_kv("iterations", std::to_string(r.iterations));
      print_kv("objective", r.objective);
      print_kv("best_feasible_objective", r.best_feasible_objective);
      print_kv("max_violation", r.max_violation);
      if (!r.converged)
        throw ConvergenceError("no convergence within " +
                               std::to_string(dist_cfg.max_iters) + " rounds");
    };
  });

  // solve-centralized
  auto* cent_cmd =
      app.add_subcommand("solve-centralized", "interior-point joint solve (reference)");
  std::string cent_in, cent_out;
  TradeoffWeights cent_w;
  cent_cmd->add_option("-i,--input", cent_in, "network file (with sessions)")->required();
  cent_cmd->add_option("--lambda1", cent_w.lambda1, "energy weight");
  cent_cmd->add_option("--lambda2", cent_w.lambda2, "utility weight");
  cent_cmd->add_option("-o,--output", cent_out, "write network file with solution");
  cent_cmd->callback([&] {
    action = [&] {
      const NetworkDoc doc = read_network(cent_in);
      const SessionSet sessions = require_sessions(doc);
      const CentralizedResult r = centralized_solve(doc.topo, sessions, cent_w);
      if (!cent_out.empty())
        write_network(cent_out, NetworkDoc{doc.topo, doc.sessions,
                                           r.assignment.link_probs(), r.rates.y});
      print_kv("objective", r.objective);
      print_kv("energy", total_energy(doc.topo, r.assignment));
      print_kv("utility", transport_utility(r.rates));
      print_kv("stationarity", r.stationarity_residual);
      print_kv("violation", r.feasibility_violation);
      if (!r.converged) throw ConvergenceError("interior-point solve did not converge");
    };
  });

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "run an experiment spec");
  std::string sweep_spec;
  sweep_cmd->add_option("--spec", sweep_spec, "experiment spec JSON")->required();
  sweep_cmd->callback([&] {
    action = [&] {
      const ExperimentSpec spec = read_experiment_spec(sweep_spec);
      for (const std::string& f : run_experiment(spec)) print_kv("wrote", f);
    };
  });

  // compare
  auto* cmp_cmd =
      app.add_subcommand("compare", "matched-utility comparison against uniform schemes");
  std::string cmp_in, cmp_out;
  TradeoffWeights cmp_w;
  unsigned long long cmp_seed = 0;
  cmp_cmd->add_option("-i,--input", cmp_in, "network file")->required();
  cmp_cmd->add_option("--lambda1", cmp_w.lambda1, "energy weight");
  cmp_cmd->add_option("--lambda2", cmp_w.lambda2, "utility weight");
  cmp_cmd->add_option("--seed", cmp_seed, "label for the CSV row");
  cmp_cmd->add_option("-o,--output", cmp_out, "comparison CSV");
  cmp_cmd->callback([&] {
    action = [&] {
      const NetworkDoc doc = read_network(cmp_in);
      const ComparisonRow row = compare_against_baselines(doc.topo, cmp_seed, cmp_w);
      if (!cmp_out.empty()) write_text_file(cmp_out, baseline_csv({row}));
      print_kv("target_utility", row.target_utility);
      print_kv("energy_optimal", row.energy_optimal);
      print_kv("energy_uniform_node", row.energy_node);
      print_kv("energy_uniform_link", row.energy_link);
      print_kv("matched", row.node_matched && row.link_matched ? "yes" : "no");
    };
  });

  // trace-report
  auto* trace_cmd = app.add_subcommand("trace-report", "summarize a trace CSV");
  std::string trace_in;
  trace_cmd->add_option("-i,--input", trace_in, "trace CSV")->required();
  trace_cmd->callback([&] {
    action = [&] {
      const TraceSummary s = summarize_trace(read_text_file(trace_in));
      print_kv("rounds", std::to_string(s.rounds));
      print_kv("final_max_change", s.final_max_change);
      print_kv("final_violation", s.final_violation);
      print_kv("feasible_rounds", std::to_string(s.feasible_rounds));
      print_kv("best_feasible_objective", s.best_feasible);
      print_kv("final_dual", s.final_dual);
      print_kv("weak_duality", s.weak_duality_ok ? "ok" : "violated");
    };
  });

  // validate
  auto* val_cmd = app.add_subcommand("validate", "check a network file");
  std::string val_in;
  val_cmd->add_option("-i,--input", val_in, "network file")->required();
  val_cmd->callback([&] {
    action = [&] {
      const NetworkDoc doc = read_network(val_in);
      print_kv("valid", "yes");
      print_kv("nodes", std::to_string(doc.topo.node_count()));
      print_kv("links", std::to_string(doc.topo.link_count()));
      print_kv("sessions", std::to_string(doc.sessions.size()));
      if (doc.solution_p) {
        const ProbAssignment pa(doc.topo, *doc.solution_p);
        print_kv("solution_node_prob_excess", pa.max_node_prob_excess());
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    action();
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const GenerationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnboundedDualError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ranumopt
