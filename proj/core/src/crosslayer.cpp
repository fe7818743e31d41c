#include "ranumopt/crosslayer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ranumopt/errors.hpp"

namespace ranumopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_prices(const std::vector<double>& mu) {
  for (double m : mu)
    if (!std::isfinite(m) || m < 0.0)
      throw std::invalid_argument("dual state: prices must be finite and >= 0");
}

// Links whose throughput depends on a node's total probability through an
// idle factor: for link e = (s,t), every node in {t} + hear_in(t) except the
// transmitter s. Keyed by node.
std::vector<std::vector<int>> build_idle_coupling(const Topology& topo) {
  std::vector<std::vector<int>> affected(topo.node_count());
  for (int e = 0; e < topo.link_count(); ++e) {
    const LinkSpec& l = topo.link(e);
    if (l.to != l.from) affected[l.to].push_back(e);
    for (int m : topo.hear_in(l.to))
      if (m != l.from && m != l.to) affected[m].push_back(e);
  }
  return affected;
}

// x_e with the idle factor of `skip_node` divided out, computed by excluding
// the factor rather than dividing, so it stays finite when P_skip -> 1.
double throughput_excluding(const Topology& topo, const std::vector<double>& p,
                            const std::vector<double>& P, int e, int skip_node) {
  const LinkSpec& l = topo.link(e);
  double v = l.capacity * p[e];
  if (l.to != skip_node) v *= 1.0 - P[l.to];
  for (int k : topo.hear_in(l.to))
    if (k != l.from && k != skip_node) v *= 1.0 - P[k];
  return v;
}

// Reception product of link e: x_e / p_e in product form (finite at p_e = 0).
double reception_product(const Topology& topo, const std::vector<double>& P, int e) {
  const LinkSpec& l = topo.link(e);
  double v = l.capacity * (1.0 - P[l.to]);
  for (int k : topo.hear_in(l.to))
    if (k != l.from) v *= 1.0 - P[k];
  return v;
}

void node_totals(const Topology& topo, const std::vector<double>& p,
                 std::vector<double>& P) {
  P.assign(topo.node_count(), 0.0);
  for (int i = 0; i < topo.node_count(); ++i) {
    double s = 0.0;
    for (int e : topo.out_links(i)) s += p[e];
    P[i] = s;
  }
}

// lambda1 * sum_i e_i P_i - sum_e mu_e x_e(p)
double priced_mac_objective(const Topology& topo, const std::vector<double>& p,
                            const std::vector<double>& P, const std::vector<double>& mu,
                            double lambda1) {
  double v = 0.0;
  for (int i = 0; i < topo.node_count(); ++i) v += lambda1 * topo.energy(i) * P[i];
  for (int e = 0; e < topo.link_count(); ++e)
    v -= mu[e] * p[e] * reception_product(topo, P, e);
  return v;
}

// Gradient of the priced MAC objective w.r.t. every link probability:
//   d/dp_ij = lambda1 e_i - mu_ij (x_ij/p_ij) + sum_{e affected by i} mu_e x_e/(1-P_i)
// with both ratios computed in product form (no divisions).
void priced_mac_gradient(const Topology& topo,
                         const std::vector<std::vector<int>>& idle_coupling,
                         const std::vector<double>& p, const std::vector<double>& P,
                         const std::vector<double>& mu, double lambda1,
                         std::vector<double>& grad) {
  grad.assign(topo.link_count(), 0.0);
  for (int i = 0; i < topo.node_count(); ++i) {
    if (topo.out_degree(i) == 0) continue;
    double idle_pressure = 0.0;
    for (int e : idle_coupling[i])
      idle_pressure += mu[e] * throughput_excluding(topo, p, P, e, i);
    const double base = lambda1 * topo.energy(i) + idle_pressure;
    for (int e : topo.out_links(i))
      grad[e] = base - mu[e] * reception_product(topo, P, e);
  }
}

// Euclidean projection of one node's block onto {q >= 0, sum q <= cap}.
void project_block_cap(std::span<double> v, double cap, std::vector<double>& scratch) {
  double pos_sum = 0.0;
  for (double q : v) pos_sum += std::max(q, 0.0);
  if (pos_sum <= cap) {
    for (double& q : v) q = std::max(q, 0.0);
    return;
  }
  scratch.assign(v.begin(), v.end());
  std::sort(scratch.begin(), scratch.end(), std::greater<double>());
  double prefix = 0.0, tau = 0.0;
  for (size_t k = 0; k < scratch.size(); ++k) {
    prefix += scratch[k];
    const double cand = (prefix - cap) / static_cast<double>(k + 1);
    if (k + 1 == scratch.size() || cand >= scratch[k + 1]) {
      tau = cand;
      break;
    }
  }
  for (double& q : v) q = std::max(q - tau, 0.0);
}

struct InnerResult {
  double value = kInf;
  std::vector<double> p;
};

// Projected gradient with Armijo backtracking on the priced MAC objective
// over the per-node blocks {p >= 0, sum <= cap}. Stops when the unit-step
// projected-gradient residual falls below tol.
InnerResult minimize_priced_mac(const Topology& topo,
                                const std::vector<std::vector<int>>& idle_coupling,
                                const std::vector<double>& mu, double lambda1,
                                std::vector<double> start, const SolverConfig& cfg) {
  const int L = topo.link_count();
  std::vector<double> scratch, P, grad, cand(L), cand_P;
  auto project_all = [&](std::vector<double>& v) {
    for (int i = 0; i < topo.node_count(); ++i) {
      if (topo.out_degree(i) == 0) continue;
      const int first = topo.out_links(i).front();
      project_block_cap(std::span<double>(v.data() + first, topo.out_links(i).size()),
                        cfg.node_prob_cap, scratch);
    }
  };

  project_all(start);
  node_totals(topo, start, P);
  double value = priced_mac_objective(topo, start, P, mu, lambda1);
  priced_mac_gradient(topo, idle_coupling, start, P, mu, lambda1, grad);

  double eta = 1.0;
  for (int iter = 0; iter < cfg.inner_max_iters; ++iter) {
    // stationarity residual at unit step
    for (int e = 0; e < L; ++e) cand[e] = start[e] - grad[e];
    project_all(cand);
    double residual = 0.0;
    for (int e = 0; e < L; ++e) residual = std::max(residual, std::abs(cand[e] - start[e]));
    if (residual < cfg.inner_tol) break;

    bool accepted = false;
    for (int ls = 0; ls < 60 && !accepted; ++ls) {
      if (eta != 1.0) {
        for (int e = 0; e < L; ++e) cand[e] = start[e] - eta * grad[e];
        project_all(cand);
      }
      double descent = 0.0;
      for (int e = 0; e < L; ++e) descent += grad[e] * (cand[e] - start[e]);
      node_totals(topo, cand, cand_P);
      const double cand_value = priced_mac_objective(topo, cand, cand_P, mu, lambda1);
      if (cand_value <= value + 1e-4 * descent) {
        start.swap(cand);
        P.swap(cand_P);
        value = cand_value;
        accepted = true;
      } else {
        eta *= 0.5;
      }
    }
    if (!accepted) break;
    priced_mac_gradient(topo, idle_coupling, start, P, mu, lambda1, grad);
    eta = std::min(eta * 1.3, 1e6);
  }
  return {value, std::move(start)};
}

std::vector<double> link_loads(const SessionSet& sessions, const RateVector& rates,
                               int link_count) {
  std::vector<double> load(link_count, 0.0);
  for (int e = 0; e < link_count; ++e)
    for (int s : sessions.sessions_on_link(e)) load[e] += rates.y[s];
  return load;
}

}  // namespace

DualState::DualState(const Topology& topo, const SessionSet& sessions, double initial_mu)
    : DualState(sessions, std::vector<double>(topo.link_count(), initial_mu)) {}

DualState::DualState(const SessionSet& sessions, std::vector<double> link_prices)
    : mu_(std::move(link_prices)) {
  check_prices(mu_);
  session_price_.assign(sessions.session_count(), 0.0);
  for (int s = 0; s < sessions.session_count(); ++s) {
    double sum = 0.0;
    for (int e : sessions.session(s).route) {
      if (e < 0 || e >= static_cast<int>(mu_.size()))
        throw std::invalid_argument("dual state: route link id out of range");
      sum += mu_[e];
    }
    session_price_[s] = sum;
  }
}

RateVector update_rates(const DualState& duals, const SessionSet& sessions,
                        const TradeoffWeights& w) {
  w.validate();
  if (!(w.lambda2 > 0.0))
    throw std::invalid_argument("update_rates: lambda2 must be positive");
  RateVector r;
  r.y.resize(sessions.session_count());
  for (int s = 0; s < sessions.session_count(); ++s) {
    const double price = duals.session_price(s);
    if (!(price > 0.0))
      throw UnboundedDualError("update_rates: session " + std::to_string(s) +
                               " has zero price");
    r.y[s] = w.lambda2 / price;
  }
  return r;
}

std::vector<double> throughput_partials(const Topology& topo, const ProbAssignment& pa,
                                        int link) {
  if (link < 0 || link >= topo.link_count())
    throw std::invalid_argument("throughput_partials: link id out of range");
  for (int e = 0; e < topo.link_count(); ++e)
    if (!(pa.link_prob(e) > 0.0))
      throw std::domain_error("throughput_partials: assignment not interior (p = 0)");
  for (int i = 0; i < topo.node_count(); ++i)
    if (!(pa.node_prob(i) < 1.0))
      throw std::domain_error("throughput_partials: assignment not interior (P = 1)");

  const std::vector<double> x = link_throughput(topo, pa);
  const int i = topo.link(link).from;
  std::vector<double> d(topo.link_count(), 0.0);
  d[link] = x[link] / pa.link_prob(link);
  for (int e = 0; e < topo.link_count(); ++e) {
    if (e == link) continue;
    const LinkSpec& l = topo.link(e);
    if (l.from == i) continue;
    const bool hears = l.to == i || std::binary_search(topo.hear_in(l.to).begin(),
                                                       topo.hear_in(l.to).end(), i);
    if (hears) d[e] = -x[e] / (1.0 - pa.node_prob(i));
  }
  return d;
}

void project_probabilities(std::span<double> p) {
  double sum = 0.0;
  for (double v : p) sum += v;
  if (sum > 1.0) {
    const double shift = (sum - 1.0) / static_cast<double>(p.size());
    for (double& v : p) v -= shift;
  }
  for (double& v : p) v = std::clamp(v, 0.0, 1.0);
}

DualState update_duals(const SessionSet& sessions, const DualState& duals,
                       const RateVector& rates, const std::vector<double>& throughput,
                       double gamma, double mu_floor) {
  if (!(gamma > 0.0)) throw std::invalid_argument("update_duals: gamma must be positive");
  if (mu_floor < 0.0) throw std::invalid_argument("update_duals: negative price floor");
  const int L = static_cast<int>(throughput.size());
  if (static_cast<int>(duals.link_prices().size()) != L)
    throw std::invalid_argument("update_duals: price/throughput size mismatch");
  const std::vector<double> load = link_loads(sessions, rates, L);
  std::vector<double> mu(L);
  for (int e = 0; e < L; ++e)
    mu[e] = std::max(mu_floor,
                     std::max(0.0, duals.link_price(e) + gamma * (load[e] - throughput[e])));
  return DualState(sessions, std::move(mu));
}

ProbAssignment mac_gradient_step(const Topology& topo, const ProbAssignment& pa,
                                 const DualState& duals, const TradeoffWeights& w,
                                 double alpha) {
  w.validate();
  if (!(alpha >= 0.0)) throw std::invalid_argument("mac_gradient_step: negative step");
  const std::vector<std::vector<int>> coupling = build_idle_coupling(topo);
  std::vector<double> grad;
  priced_mac_gradient(topo, coupling, pa.link_probs(), pa.node_probs(),
                      duals.link_prices(), w.lambda1, grad);
  std::vector<double> p = pa.link_probs();
  for (int e = 0; e < topo.link_count(); ++e) p[e] -= alpha * grad[e];
  for (int i = 0; i < topo.node_count(); ++i) {
    if (topo.out_degree(i) == 0) continue;
    const int first = topo.out_links(i).front();
    project_probabilities(std::span<double>(p.data() + first, topo.out_links(i).size()));
  }
  return ProbAssignment(topo, std::move(p));
}

DualEvaluation dual_value(const Topology& topo, const SessionSet& sessions,
                          const TradeoffWeights& w, const DualState& duals,
                          const SolverConfig& cfg, const std::vector<double>* warm_start) {
  w.validate();
  if (!(w.lambda2 > 0.0))
    throw std::invalid_argument("dual_value: lambda2 must be positive");
  check_prices(duals.link_prices());

  DualEvaluation out;
  for (int s = 0; s < sessions.session_count(); ++s) {
    const double price = duals.session_price(s);
    if (!(price > 0.0))
      throw UnboundedDualError("dual_value: session " + std::to_string(s) +
                               " has zero price, transport part unbounded below");
    out.transport_part += w.lambda2 * (1.0 + std::log(price) - std::log(w.lambda2));
  }

  const std::vector<std::vector<int>> coupling = build_idle_coupling(topo);
  auto split_start = [&](double node_p) {
    std::vector<double> p(topo.link_count(), 0.0);
    for (int i = 0; i < topo.node_count(); ++i)
      for (int e : topo.out_links(i)) p[e] = node_p / topo.out_degree(i);
    return p;
  };

  // The subproblem is multilinear (possibly multi-modal); hedge with
  // deterministic extra starts. With a warm start the extra starts are only
  // pursued when their initial value already beats the warm optimum.
  InnerResult best;
  if (warm_start != nullptr)
    best = minimize_priced_mac(topo, coupling, duals.link_prices(), w.lambda1,
                               *warm_start, cfg);
  for (double node_p : {0.5, 0.05}) {
    std::vector<double> start = split_start(node_p);
    if (warm_start != nullptr && best.value < kInf) {
      std::vector<double> P;
      node_totals(topo, start, P);
      if (priced_mac_objective(topo, start, P, duals.link_prices(), w.lambda1) >=
          best.value)
        continue;
    }
    InnerResult r = minimize_priced_mac(topo, coupling, duals.link_prices(), w.lambda1,
                                        std::move(start), cfg);
    if (r.value < best.value) best = std::move(r);
  }

  out.mac_part = best.value;
  out.minimizer_p = std::move(best.p);
  out.total = out.mac_part + out.transport_part;
  return out;
}

DistributedResult distributed_solve(const Topology& topo, const SessionSet& sessions,
                                    const TradeoffWeights& w, const SolverConfig& cfg,
                                    const ProbAssignment* initial) {
  w.validate();
  if (!(w.lambda2 > 0.0))
    throw std::invalid_argument("distributed_solve: lambda2 must be positive");
  if (sessions.session_count() == 0)
    throw std::invalid_argument("distributed_solve: no sessions");
  if (cfg.max_iters < 1 || !(cfg.alpha >= 0.0) || !(cfg.gamma > 0.0) ||
      !(cfg.tol_change > 0.0) || cfg.tol_change_window < 1 ||
      !(cfg.tol_feasibility > 0.0) || !(cfg.mu_floor >= 0.0) ||
      !(cfg.initial_node_prob > 0.0) || !(cfg.initial_node_prob <= 1.0) ||
      !(cfg.initial_mu > 0.0))
    throw std::invalid_argument("distributed_solve: bad solver configuration");

  const int L = topo.link_count();
  const std::vector<std::vector<int>> coupling = build_idle_coupling(topo);

  ProbAssignment pa = [&] {
    if (initial != nullptr) return *initial;
    std::vector<double> P(topo.node_count(), 0.0);
    for (int i = 0; i < topo.node_count(); ++i)
      if (topo.out_degree(i) > 0) P[i] = cfg.initial_node_prob;
    return ProbAssignment::equal_split(topo, P);
  }();
  DualState duals(topo, sessions, cfg.initial_mu);
  std::vector<double> x = link_throughput(topo, pa);
  RateVector rates = update_rates(duals, sessions, w);
  std::vector<double> inner_warm = pa.link_probs();

  DistributedResult res{pa, rates, duals, {}, false, 0, 0.0, kInf, 0.0, 0, 0.0};
  res.trace.records.reserve(cfg.max_iters);

  std::vector<double> grad, p_next(L);
  int streak = 0;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    DualState duals_next = update_duals(sessions, duals, rates, x, cfg.gamma, cfg.mu_floor);
    RateVector rates_next = update_rates(duals_next, sessions, w);

    priced_mac_gradient(topo, coupling, pa.link_probs(), pa.node_probs(),
                        duals_next.link_prices(), w.lambda1, grad);
    for (int e = 0; e < L; ++e) p_next[e] = pa.link_prob(e) - cfg.alpha * grad[e];
    for (int i = 0; i < topo.node_count(); ++i) {
      if (topo.out_degree(i) == 0) continue;
      const int first = topo.out_links(i).front();
      project_probabilities(
          std::span<double>(p_next.data() + first, topo.out_links(i).size()));
    }
    ProbAssignment pa_next(topo, p_next);
    std::vector<double> x_next = link_throughput(topo, pa_next);

    const double excess = pa_next.max_node_prob_excess();
    if (excess > 1e-12) {
      ++res.projection_excess_rounds;
      res.projection_excess_max = std::max(res.projection_excess_max, excess);
    }

    double max_change = 0.0;
    for (int e = 0; e < L; ++e) {
      max_change = std::max(max_change, std::abs(p_next[e] - pa.link_prob(e)));
      max_change =
          std::max(max_change, std::abs(duals_next.link_price(e) - duals.link_price(e)));
    }
    for (int s = 0; s < sessions.session_count(); ++s)
      max_change = std::max(max_change, std::abs(rates_next.y[s] - rates.y[s]));

    const std::vector<double> load = link_loads(sessions, rates_next, L);
    double max_violation = 0.0;
    bool feasible_within_tol = true;
    for (int e = 0; e < L; ++e) {
      const double v = load[e] - x_next[e];
      max_violation = std::max(max_violation, v);
      if (v > cfg.tol_feasibility * std::max(1.0, x_next[e])) feasible_within_tol = false;
    }
    max_violation = std::max(max_violation, 0.0);

    IterationRecord rec;
    rec.iter = iter;
    rec.p = pa_next.link_probs();
    rec.y = rates_next.y;
    rec.mu = duals_next.link_prices();
    rec.max_violation = max_violation;
    rec.max_change = max_change;

    const double energy = total_energy(topo, pa_next);
    if (max_violation <= 0.0 && pa_next.node_feasible(0.0)) {
      rec.primal_objective = w.lambda1 * energy - w.lambda2 * transport_utility(rates_next);
      res.best_feasible_objective =
          std::min(res.best_feasible_objective, rec.primal_objective);
    }
    // scaled-rate candidate: shrink all rates by the worst load/capacity
    // ratio to get a guaranteed-feasible point for the duality bookkeeping
    if (pa_next.node_feasible(0.0)) {
      double scale = 1.0;
      bool usable = true;
      for (int e = 0; e < L && usable; ++e) {
        if (sessions.sessions_on_link(e).empty()) continue;
        if (!(x_next[e] > 0.0))
          usable = false;
        else if (load[e] > 0.0)
          scale = std::min(scale, x_next[e] / load[e]);
      }
      if (usable && scale > 0.0) {
        double util = 0.0;
        for (double ys : rates_next.y) util += std::log(ys * scale);
        res.best_feasible_objective =
            std::min(res.best_feasible_objective, w.lambda1 * energy - w.lambda2 * util);
      }
    }
    rec.best_feasible_objective = res.best_feasible_objective;

    if (cfg.record_dual) {
      DualEvaluation ev = dual_value(topo, sessions, w, duals_next, cfg, &inner_warm);
      rec.dual_value = ev.total;
      inner_warm = std::move(ev.minimizer_p);
    }

    res.trace.records.push_back(std::move(rec));

    pa = std::move(pa_next);
    rates = std::move(rates_next);
    duals = std::move(duals_next);
    x = std::move(x_next);
    res.iterations = iter;
    res.max_violation = max_violation;

    streak = max_change < cfg.tol_change ? streak + 1 : 0;
    if (streak >= cfg.tol_change_window && feasible_within_tol) {
      res.converged = true;
      break;
    }
  }

  res.assignment = pa;
  res.rates = rates;
  res.duals = duals;
  res.objective =
      w.lambda1 * total_energy(topo, pa) - w.lambda2 * transport_utility(rates);
  return res;
}

}  // namespace ranumopt
