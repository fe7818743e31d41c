#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ranumopt/mac_solver.hpp"
#include "ranumopt/net_model.hpp"

namespace ranumopt {

// Per-link congestion prices mu >= 0 plus the derived per-session prices
// mu^s = sum of mu over the session's route.
class DualState {
 public:
  DualState(const Topology& topo, const SessionSet& sessions, double initial_mu);
  DualState(const SessionSet& sessions, std::vector<double> link_prices);

  double link_price(int link) const { return mu_[link]; }
  const std::vector<double>& link_prices() const { return mu_; }
  double session_price(int s) const { return session_price_[s]; }
  const std::vector<double>& session_prices() const { return session_price_; }

  bool operator==(const DualState&) const = default;

 private:
  std::vector<double> mu_;
  std::vector<double> session_price_;
};

struct SolverConfig {
  double alpha = 1e-4;       // probability gradient step
  double gamma = 2.0;        // price step
  int max_iters = 2000;
  double tol_change = 1e-5;  // per-variable change threshold ...
  int tol_change_window = 10;  // ... held for this many consecutive rounds
  double tol_feasibility = 1e-4;  // (load - x)+ <= tol * max(1, x) per link
  double mu_floor = 1e-8;    // prices clamped up to this after each update
  double initial_node_prob = 0.5;  // start: P_i = this, split equally
  double initial_mu = 1.0;
  bool record_dual = true;   // evaluate D(mu) every round for the trace
  // inner minimization used by dual_value
  double inner_tol = 1e-8;
  int inner_max_iters = 50000;
  double node_prob_cap = 1.0 - 1e-6;  // strict P_i cap inside the dual subproblem
};

struct IterationRecord {
  int iter = 0;
  std::vector<double> p;
  std::vector<double> y;
  std::vector<double> mu;
  double dual_value = std::numeric_limits<double>::quiet_NaN();
  // objective of this iterate; NaN unless the iterate is exactly feasible
  double primal_objective = std::numeric_limits<double>::quiet_NaN();
  // best objective of any feasible point seen so far (scaled-rate candidates
  // included); +inf until one exists
  double best_feasible_objective = std::numeric_limits<double>::infinity();
  double max_violation = 0.0;  // max over links of (load - x)+
  double max_change = 0.0;     // max |delta| over p, y and mu
};

struct IterationTrace {
  std::vector<IterationRecord> records;
};

struct DistributedResult {
  ProbAssignment assignment;
  RateVector rates;
  DualState duals;
  IterationTrace trace;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;  // lambda1*E - lambda2*sum log y at the final iterate
  double best_feasible_objective = std::numeric_limits<double>::infinity();
  double max_violation = 0.0;
  // rounds where the two-step projection left some node total above 1
  int projection_excess_rounds = 0;
  double projection_excess_max = 0.0;
};

// y_s = lambda2 / mu^s. Requires lambda2 > 0; throws UnboundedDualError when
// some session price is zero.
RateVector update_rates(const DualState& duals, const SessionSet& sessions,
                        const TradeoffWeights& w);

// Derivatives of every link's throughput with respect to p on `link` = (i,j):
//   d x_ij / d p_ij = x_ij / p_ij
//   d x_st / d p_ij = -x_st / (1 - P_i)   if i is the receiver t or is heard
//                                         by t, and i != s
//   0 otherwise.
// Requires an interior assignment (all p > 0, all P < 1).
std::vector<double> throughput_partials(const Topology& topo, const ProbAssignment& pa,
                                        int link);

// The two-step feasibility heuristic applied to one node's outgoing block:
// step I subtracts (sum - 1)/k from every entry if sum > 1; step II clamps
// each entry to [0, 1]. Can leave the block sum above 1 when step I drives
// entries negative; callers detect that via the assignment's excess.
void project_probabilities(std::span<double> p);

// One price ascent round: mu <- max(mu_floor, mu + gamma * (load - x)) per
// link, where load is the summed rate of the sessions on the link.
DualState update_duals(const SessionSet& sessions, const DualState& duals,
                       const RateVector& rates, const std::vector<double>& throughput,
                       double gamma, double mu_floor);

// One synchronous projected-gradient round on all link probabilities, using
// the given prices and the *current* assignment's derivatives:
//   p_ij <- Project(p_ij - alpha * (lambda1 e_i - sum_st mu_st dx_st/dp_ij))
ProbAssignment mac_gradient_step(const Topology& topo, const ProbAssignment& pa,
                                 const DualState& duals, const TradeoffWeights& w,
                                 double alpha);

// Full dual-decomposition loop: price update, rate update, probability
// gradient step, throughput refresh — repeated until every variable moves
// less than tol_change for tol_change_window consecutive rounds while the
// per-link capacity violation stays within tol_feasibility, or until
// max_iters. Requires lambda2 > 0 and at least one session.
DistributedResult distributed_solve(const Topology& topo, const SessionSet& sessions,
                                    const TradeoffWeights& w, const SolverConfig& cfg,
                                    const ProbAssignment* initial = nullptr);

struct DualEvaluation {
  double total = 0.0;
  double mac_part = 0.0;       // min_p lambda1*sum e_i P_i - sum mu_e x_e
  double transport_part = 0.0; // sum_s lambda2 (1 + log(mu^s / lambda2))
  std::vector<double> minimizer_p;
};

// Evaluates the dual function at the given prices. The transport part is
// closed-form; the MAC part is minimized by projected gradient with
// backtracking, exact per-node projection onto {p >= 0, sum <= cap}, run
// until the unit-step projected-gradient residual drops below inner_tol.
// The subproblem is multilinear, so the solver hedges with several
// deterministic starts (warm start first when provided).
DualEvaluation dual_value(const Topology& topo, const SessionSet& sessions,
                          const TradeoffWeights& w, const DualState& duals,
                          const SolverConfig& cfg = {},
                          const std::vector<double>* warm_start = nullptr);

struct CentralizedConfig {
  double gradient_tol = 1e-8;    // barrier Newton gradient norm target
  double gap_tol = 1e-8;         // constraint count / t
  int max_newton_iters = 500;    // per barrier stage
};

struct CentralizedResult {
  ProbAssignment assignment;
  RateVector rates;
  double objective = 0.0;
  double stationarity_residual = 0.0;
  double feasibility_violation = 0.0;  // max over links of (load - x)+
  std::vector<double> link_prices;     // KKT multipliers of the capacity constraints
  int newton_iterations = 0;
  bool converged = false;
};

// Reference solver for the joint problem
//   min lambda1 * sum e_i P_i - lambda2 * sum_s log y_s
//   s.t. sum_{s on (i,j)} y_s <= x_ij(p),  0 <= p,  P_i <= 1
// in the convex variables (p, z = log y): log x is concave in p and
// log-sum-exp is convex in z, so a log-barrier Newton method converges to
// the global optimum. Links carrying no session are fixed at p = 0.
// Requires lambda2 > 0 and at least one session.
CentralizedResult centralized_solve(const Topology& topo, const SessionSet& sessions,
                                    const TradeoffWeights& w,
                                    const CentralizedConfig& cfg = {});

}  // namespace ranumopt
