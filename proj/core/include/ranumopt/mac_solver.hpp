#pragma once

#include <cstdint>
#include <vector>

#include "ranumopt/net_model.hpp"
#include "ranumopt/pareto.hpp"

namespace ranumopt {

// Scalarization weights for min lambda1 * energy - lambda2 * utility.
// Both must be finite and >= 0 and not both zero.
struct TradeoffWeights {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  void validate() const;
};

// Per-node coefficients of the separated objective. With equal splitting
// across the out-links, the node term is
//   f_i(P) = A_i*P - B_i*log(P) + C_i*log(1/(1-P)) + const,
//   A_i = lambda1 * e_i
//   B_i = lambda2 * |out(i)|
//   C_i = lambda2 * (sum_{k in hear_out(i)} |in(k)| + |in(i)| - |out(i)|)
// C_i >= 0 always: every out-link of i is counted once inside the sum.
struct MacCoefficients {
  std::vector<double> a, b, c;
  std::vector<std::uint8_t> c_is_zero;  // flags nodes whose silence benefits nobody
};

MacCoefficients mac_coefficients(const Topology& topo, const TradeoffWeights& w);

// Minimizer over [0, 1] of the node objective above.
//   b = 0            -> 0
//   c = 0            -> min(1, b/a), with a = 0 giving 1
//   a = 0            -> b / (b + c)
//   otherwise        -> unique interior root of a - b/P + c/(1-P), found by
//                       bisection on [1e-12, 1-1e-12] to interval width 1e-12.
// The derivative is strictly increasing (the objective is strictly convex),
// negative near 0 and positive near 1, so the bracket always holds in the
// interior case. Throws std::invalid_argument if all three are zero.
double solve_node_probability(double a, double b, double c);

// Optimal per-node totals, distributed equally across each node's out-links
// (equal split is optimal for the link log-sum at fixed node total).
// Requires out_degree >= 1 for every node.
ProbAssignment solve_mac(const Topology& topo, const TradeoffWeights& w);

// Scalarized objective evaluated in separated per-node form. Agrees with
// lambda1*total_energy - lambda2*mac_utility(link_throughput) to rounding.
// When lambda2 == 0 the utility term is dropped entirely.
// Throws std::domain_error when a needed log argument is <= 0.
double mac_objective(const Topology& topo, const TradeoffWeights& w,
                     const ProbAssignment& pa);

// d/dP_i of the separated objective at the given node totals (equal split
// implied): A_i - B_i/P_i + C_i/(1-P_i). Requires 0 < P_i < 1.
std::vector<double> mac_gradient(const Topology& topo, const TradeoffWeights& w,
                                 const std::vector<double>& node_prob);

// Solves each weight pair and returns points sorted by lambda1/lambda2
// (lambda2 = 0 sorts last). Energy and utility are nonincreasing in the
// ratio along the result.
std::vector<ParetoPoint> pareto_sweep_mac(const Topology& topo,
                                          const std::vector<TradeoffWeights>& weights);

// Independent reference: per-node sweep of P over {step, 2*step, ...} < 1,
// evaluating the *composed* objective (throughput -> logs) rather than the
// separated form, with the other nodes parked at 0.5. Valid because the
// composed objective separates across nodes exactly. Instances are capped
// at 5 nodes; intended for oracle-style verification only.
ProbAssignment brute_force_mac(const Topology& topo, const TradeoffWeights& w,
                               double grid_step);

// lambda1*E - lambda2*U via explicit composition (no separated form); the
// counterpart used for consistency checks and by brute_force_mac.
double composed_mac_objective(const Topology& topo, const TradeoffWeights& w,
                              const ProbAssignment& pa);

}  // namespace ranumopt
