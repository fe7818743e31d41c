#include "ranumopt/mac_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ranumopt/parallel.hpp"

namespace ranumopt {

void TradeoffWeights::validate() const {
  if (!std::isfinite(lambda1) || !std::isfinite(lambda2) || lambda1 < 0.0 || lambda2 < 0.0)
    throw std::invalid_argument("weights: lambda1, lambda2 must be finite and >= 0");
  if (lambda1 == 0.0 && lambda2 == 0.0)
    throw std::invalid_argument("weights: lambda1 and lambda2 cannot both be zero");
}

MacCoefficients mac_coefficients(const Topology& topo, const TradeoffWeights& w) {
  w.validate();
  const int n = topo.node_count();
  MacCoefficients mc;
  mc.a.resize(n);
  mc.b.resize(n);
  mc.c.resize(n);
  mc.c_is_zero.resize(n);
  for (int i = 0; i < n; ++i) {
    long count = topo.in_degree(i) - topo.out_degree(i);
    for (int k : topo.hear_out(i)) count += topo.in_degree(k);
    // every out-link of i is one of the in-links counted above
    if (count < 0) throw std::logic_error("mac_coefficients: negative silence count");
    mc.a[i] = w.lambda1 * topo.energy(i);
    mc.b[i] = w.lambda2 * topo.out_degree(i);
    mc.c[i] = w.lambda2 * static_cast<double>(count);
    mc.c_is_zero[i] = count == 0 ? 1 : 0;
  }
  return mc;
}

double solve_node_probability(double a, double b, double c) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || a < 0.0 || b < 0.0 ||
      c < 0.0)
    throw std::invalid_argument("solve_node_probability: coefficients must be finite, >= 0");
  if (a == 0.0 && b == 0.0 && c == 0.0)
    throw std::invalid_argument("solve_node_probability: all coefficients zero");
  if (b == 0.0) return 0.0;                    // objective increasing on (0,1)
  if (c == 0.0) return a == 0.0 ? 1.0 : std::min(1.0, b / a);
  if (a == 0.0) return b / (b + c);

  auto dfdp = [&](double p) { return a - b / p + c / (1.0 - p); };
  double lo = 1e-12, hi = 1.0 - 1e-12;
  if (dfdp(lo) >= 0.0) return 0.0;  // b so small the objective already rises at 1e-12
  if (dfdp(hi) <= 0.0) return 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (dfdp(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ProbAssignment solve_mac(const Topology& topo, const TradeoffWeights& w) {
  const int n = topo.node_count();
  for (int i = 0; i < n; ++i)
    if (topo.out_degree(i) == 0)
      throw std::invalid_argument("solve_mac: node " + std::to_string(i) +
                                  " has no outgoing links");
  const MacCoefficients mc = mac_coefficients(topo, w);
  std::vector<double> P(n);
  if (n >= 128) {
    parallel_for(n, [&](int i) { P[i] = solve_node_probability(mc.a[i], mc.b[i], mc.c[i]); });
  } else {
    for (int i = 0; i < n; ++i) P[i] = solve_node_probability(mc.a[i], mc.b[i], mc.c[i]);
  }
  return ProbAssignment::equal_split(topo, P);
}

double mac_objective(const Topology& topo, const TradeoffWeights& w,
                     const ProbAssignment& pa) {
  w.validate();
  double f = 0.0;
  for (int i = 0; i < topo.node_count(); ++i)
    f += w.lambda1 * topo.energy(i) * pa.node_prob(i);
  if (w.lambda2 == 0.0) return f;

  const MacCoefficients mc = mac_coefficients(topo, w);
  double logsum = 0.0;
  for (int i = 0; i < topo.node_count(); ++i) {
    for (int e : topo.out_links(i)) {
      const double v = topo.link(e).capacity * pa.link_prob(e);
      if (!(v > 0.0))
        throw std::domain_error("mac_objective: zero probability on link " +
                                std::to_string(e));
      logsum += std::log(v);
    }
    if (!mc.c_is_zero[i]) {
      const double idle = 1.0 - pa.node_prob(i);
      if (!(idle > 0.0))
        throw std::domain_error("mac_objective: node " + std::to_string(i) +
                                " always transmits but its silence is needed");
      logsum += (mc.c[i] / w.lambda2) * std::log(idle);
    }
  }
  return f - w.lambda2 * logsum;
}

std::vector<double> mac_gradient(const Topology& topo, const TradeoffWeights& w,
                                 const std::vector<double>& node_prob) {
  if (static_cast<int>(node_prob.size()) != topo.node_count())
    throw std::invalid_argument("mac_gradient: one probability per node required");
  const MacCoefficients mc = mac_coefficients(topo, w);
  std::vector<double> g(node_prob.size());
  for (size_t i = 0; i < node_prob.size(); ++i) {
    const double p = node_prob[i];
    if (!(p > 0.0) || !(p < 1.0))
      throw std::invalid_argument("mac_gradient: node probability must be interior");
    g[i] = mc.a[i] - mc.b[i] / p + mc.c[i] / (1.0 - p);
  }
  return g;
}

double composed_mac_objective(const Topology& topo, const TradeoffWeights& w,
                              const ProbAssignment& pa) {
  w.validate();
  const double e = total_energy(topo, pa);
  if (w.lambda2 == 0.0) return w.lambda1 * e;
  return w.lambda1 * e - w.lambda2 * mac_utility(link_throughput(topo, pa));
}

std::vector<ParetoPoint> pareto_sweep_mac(const Topology& topo,
                                          const std::vector<TradeoffWeights>& weights) {
  for (const TradeoffWeights& w : weights) w.validate();
  std::vector<std::optional<ParetoPoint>> pts(weights.size());
  parallel_for(static_cast<int>(weights.size()), [&](int k) {
    const TradeoffWeights& w = weights[k];
    ProbAssignment pa = solve_mac(topo, w);
    double utility = -std::numeric_limits<double>::infinity();
    const std::vector<double> x = link_throughput(topo, pa);
    if (std::all_of(x.begin(), x.end(), [](double v) { return v > 0.0; }))
      utility = mac_utility(x);
    pts[k] = ParetoPoint{w.lambda1, w.lambda2, total_energy(topo, pa), utility,
                         std::move(pa), std::nullopt};
  });

  std::vector<ParetoPoint> out;
  out.reserve(pts.size());
  for (auto& p : pts) out.push_back(std::move(*p));
  std::stable_sort(out.begin(), out.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    const double ra = a.lambda2 == 0.0 ? std::numeric_limits<double>::infinity()
                                       : a.lambda1 / a.lambda2;
    const double rb = b.lambda2 == 0.0 ? std::numeric_limits<double>::infinity()
                                       : b.lambda1 / b.lambda2;
    return ra < rb;
  });
  return out;
}

ProbAssignment brute_force_mac(const Topology& topo, const TradeoffWeights& w,
                               double grid_step) {
  w.validate();
  if (topo.node_count() > 5)
    throw std::invalid_argument("brute_force_mac: capped at 5 nodes");
  if (!(grid_step > 0.0) || !(grid_step < 1.0))
    throw std::invalid_argument("brute_force_mac: grid step must be in (0,1)");
  for (int i = 0; i < topo.node_count(); ++i)
    if (topo.out_degree(i) == 0)
      throw std::invalid_argument("brute_force_mac: node without outgoing links");

  const int n = topo.node_count();
  const int steps = static_cast<int>(std::floor((1.0 - 1e-9) / grid_step));
  std::vector<double> best(n, grid_step);
  // The composed objective is an exact sum of per-node terms, so sweeping one
  // node with the rest parked anywhere interior finds that node's grid optimum.
  for (int i = 0; i < n; ++i) {
    std::vector<double> P(n, 0.5);
    double best_val = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= steps; ++k) {
      P[i] = k * grid_step;
      const double val =
          composed_mac_objective(topo, w, ProbAssignment::equal_split(topo, P));
      if (val < best_val) {
        best_val = val;
        best[i] = P[i];
      }
    }
  }
  return ProbAssignment::equal_split(topo, best);
}

}  // namespace ranumopt
