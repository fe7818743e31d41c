#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ranumopt/crosslayer.hpp"
#include "ranumopt/mac_solver.hpp"
#include "ranumopt/net_model.hpp"
#include "ranumopt/pareto.hpp"

namespace ranumopt {

// One-parameter reference schemes. Node-uniform gives every node the same
// total probability (split equally over its out-links); link-uniform gives
// every link the same probability. In both cases the MAC utility is concave
// in the parameter, so the peak and the energy-minimal (left-branch) match
// of a target utility are well defined.
struct BaselineResult {
  double prob = 0.0;  // chosen parameter value
  double energy = 0.0;
  double utility = -std::numeric_limits<double>::infinity();
  bool matched = false;  // hit the target; false means capped at the peak
  double peak_prob = 0.0;
  double peak_utility = -std::numeric_limits<double>::infinity();
};

BaselineResult uniform_node_baseline(const Topology& topo, double target_utility);
BaselineResult uniform_link_baseline(const Topology& topo, double target_utility);

// Smallest lambda1 whose MAC optimum attains the target utility, found by
// bisection (utility is nonincreasing in lambda1). Targets above the
// lambda1 = 0 utility cap there.
struct MatchedPoint {
  double lambda1 = 0.0;
  double energy = 0.0;
  double utility = 0.0;
  bool matched = false;
};

MatchedPoint match_mac_utility(const Topology& topo, double lambda2,
                               double target_utility);

// Per-instance matched-utility comparison of the solver against both
// uniform baselines. The common target is the optimum's utility, lowered to
// whatever the weakest baseline can still achieve.
struct ComparisonRow {
  unsigned long long seed = 0;
  double target_utility = 0.0;
  double energy_optimal = 0.0;
  double energy_node = 0.0;
  double energy_link = 0.0;
  bool node_matched = false;
  bool link_matched = false;
};

ComparisonRow compare_against_baselines(const Topology& topo, unsigned long long seed,
                                        const TradeoffWeights& w);

std::vector<ComparisonRow> baseline_comparison(const GenConfig& base,
                                               const std::vector<unsigned long long>& seeds,
                                               const TradeoffWeights& w);

// MAC layer solved on its own, then rates adapted to the frozen link
// probabilities (a dual-decomposition run with step size zero on p).
// `objective` is evaluated at rates scaled into the capacity region, so it
// is a true feasible value comparable with the joint design.
struct LayeredResult {
  ProbAssignment assignment;
  RateVector rates;
  double objective = 0.0;
  bool converged = false;
};

LayeredResult layer_by_layer_solve(const Topology& topo, const SessionSet& sessions,
                                   const TradeoffWeights& w, const SolverConfig& cfg = {});

// Joint (cross-layer) frontier point plus the staged value at the same
// weights.
struct CrosslayerPoint {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double energy = 0.0;
  double utility = 0.0;  // sum of log session rates
  double joint_objective = 0.0;
  double staged_objective = 0.0;
};

std::vector<CrosslayerPoint> crosslayer_frontier(const Topology& topo,
                                                 const SessionSet& sessions,
                                                 const std::vector<double>& lambda1_values,
                                                 double lambda2,
                                                 const CentralizedConfig& ccfg = {},
                                                 const SolverConfig& scfg = {});

struct ExperimentSpec {
  std::string experiment;  // mac_frontier | crosslayer_frontier | convergence |
                           // baseline_comparison
  std::optional<std::string> topology_file;
  std::optional<GenConfig> generator;
  std::vector<double> lambda1_values{1.0};
  double lambda2 = 1.0;
  SolverConfig solver;
  CentralizedConfig centralized;
  std::vector<unsigned long long> seeds;
  std::string output_dir = ".";
};

// Runs one experiment and returns the paths of the files written.
std::vector<std::string> run_experiment(const ExperimentSpec& spec);

}  // namespace ranumopt
