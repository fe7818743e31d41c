#include "ranumopt/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <stdexcept>

#include "ranumopt/errors.hpp"
#include "ranumopt/io.hpp"
#include "ranumopt/parallel.hpp"

namespace ranumopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_utility(const Topology& topo, const ProbAssignment& pa) {
  const std::vector<double> x = link_throughput(topo, pa);
  double u = 0.0;
  for (double v : x) {
    if (!(v > 0.0)) return -kInf;
    u += std::log(v);
  }
  return u;
}

struct UniformFamily {
  const Topology* topo;
  bool per_link;  // false: parameter is the per-node total
  double hi;      // open upper end of the parameter range

  ProbAssignment at(double q) const {
    if (per_link)
      return ProbAssignment(*topo,
                            std::vector<double>(topo->link_count(), q));
    return ProbAssignment::equal_split(
        *topo, std::vector<double>(topo->node_count(), q));
  }
  double utility(double q) const { return safe_utility(*topo, at(q)); }
};

// The utility of either uniform family is a sum of logs of affine functions
// of the parameter, hence strictly concave; golden-section search finds the
// peak.
double peak_parameter(const UniformFamily& fam) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 1e-9, hi = fam.hi;
  double a = hi - inv_phi * (hi - lo), b = lo + inv_phi * (hi - lo);
  double fa = fam.utility(a), fb = fam.utility(b);
  for (int it = 0; it < 140; ++it) {
    if (fa < fb) {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = fam.utility(b);
    } else {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = fam.utility(a);
    }
  }
  return 0.5 * (lo + hi);
}

BaselineResult run_baseline(const UniformFamily& fam, double target_utility) {
  BaselineResult res;
  res.peak_prob = peak_parameter(fam);
  res.peak_utility = fam.utility(res.peak_prob);
  if (!(target_utility <= res.peak_utility)) {
    res.prob = res.peak_prob;
    res.utility = res.peak_utility;
    res.energy = total_energy(*fam.topo, fam.at(res.prob));
    res.matched = false;
    return res;
  }
  // energy-minimal match: bisect on the increasing branch, where utility
  // rises from -inf to the peak
  double lo = 1e-12, hi = res.peak_prob;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (fam.utility(mid) < target_utility)
      lo = mid;
    else
      hi = mid;
  }
  res.prob = hi;
  res.utility = fam.utility(hi);
  res.energy = total_energy(*fam.topo, fam.at(hi));
  res.matched = std::abs(res.utility - target_utility) <= 1e-6;
  return res;
}

}  // namespace

BaselineResult uniform_node_baseline(const Topology& topo, double target_utility) {
  for (int i = 0; i < topo.node_count(); ++i)
    if (topo.out_degree(i) == 0)
      throw std::invalid_argument("uniform_node_baseline: node without out-links");
  return run_baseline(UniformFamily{&topo, false, 1.0 - 1e-9}, target_utility);
}

BaselineResult uniform_link_baseline(const Topology& topo, double target_utility) {
  int max_deg = 0;
  for (int i = 0; i < topo.node_count(); ++i) max_deg = std::max(max_deg, topo.out_degree(i));
  if (max_deg == 0) throw std::invalid_argument("uniform_link_baseline: no links");
  return run_baseline(UniformFamily{&topo, true, (1.0 - 1e-9) / max_deg},
                      target_utility);
}

MatchedPoint match_mac_utility(const Topology& topo, double lambda2,
                               double target_utility) {
  if (!(lambda2 > 0.0))
    throw std::invalid_argument("match_mac_utility: lambda2 must be positive");
  auto solve_at = [&](double l1) {
    const ProbAssignment pa = solve_mac(topo, TradeoffWeights{l1, lambda2});
    return std::pair<double, double>(total_energy(topo, pa), safe_utility(topo, pa));
  };
  MatchedPoint out;
  auto [e0, u0] = solve_at(0.0);
  if (u0 <= target_utility) {
    // the cap; also handles targets above what any assignment achieves
    out = {0.0, e0, u0, std::abs(u0 - target_utility) <= 1e-6};
    return out;
  }
  double lo = 0.0, hi = 1.0;
  double u_hi = solve_at(hi).second;
  int guard = 0;
  while (u_hi > target_utility && ++guard < 200) {
    lo = hi;
    hi *= 2.0;
    u_hi = solve_at(hi).second;
  }
  if (u_hi > target_utility)
    throw std::logic_error("match_mac_utility: could not bracket the target");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (solve_at(mid).second > target_utility)
      lo = mid;
    else
      hi = mid;
  }
  // lo side keeps utility >= target; report that (energy-conservative) end
  auto [e, u] = solve_at(lo);
  out = {lo, e, u, std::abs(u - target_utility) <= 1e-6};
  return out;
}

ComparisonRow compare_against_baselines(const Topology& topo, unsigned long long seed,
                                        const TradeoffWeights& w) {
  w.validate();
  if (!(w.lambda2 > 0.0))
    throw std::invalid_argument("compare_against_baselines: lambda2 must be positive");
  const ProbAssignment pa = solve_mac(topo, w);
  const double u_opt = safe_utility(topo, pa);
  const double e_opt = total_energy(topo, pa);

  const BaselineResult node_peak = uniform_node_baseline(topo, kInf);
  const BaselineResult link_peak = uniform_link_baseline(topo, kInf);
  const double target = std::min({u_opt, node_peak.peak_utility - 1e-6,
                                  link_peak.peak_utility - 1e-6});

  const BaselineResult node_res = uniform_node_baseline(topo, target);
  const BaselineResult link_res = uniform_link_baseline(topo, target);

  double e_at_target = e_opt;
  if (target < u_opt) {
    const MatchedPoint mp = match_mac_utility(topo, w.lambda2, target);
    e_at_target = mp.energy;
  }

  return ComparisonRow{seed,          target,           e_at_target,
                       node_res.energy, link_res.energy, node_res.matched,
                       link_res.matched};
}

std::vector<ComparisonRow> baseline_comparison(const GenConfig& base,
                                               const std::vector<unsigned long long>& seeds,
                                               const TradeoffWeights& w) {
  if (seeds.empty())
    throw std::invalid_argument("baseline_comparison: no seeds given");
  std::vector<ComparisonRow> rows(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t k) {
    GenConfig cfg = base;
    cfg.seed = seeds[k];
    const Topology topo = generate_topology(cfg);
    rows[k] = compare_against_baselines(topo, seeds[k], w);
  });
  return rows;
}

LayeredResult layer_by_layer_solve(const Topology& topo, const SessionSet& sessions,
                                   const TradeoffWeights& w, const SolverConfig& cfg) {
  const ProbAssignment pa = solve_mac(topo, w);
  SolverConfig rate_cfg = cfg;
  rate_cfg.alpha = 0.0;  // MAC layer frozen; only rates and prices adapt
  rate_cfg.record_dual = false;
  const DistributedResult dr = distributed_solve(topo, sessions, w, rate_cfg, &pa);

  const std::vector<double> x = link_throughput(topo, dr.assignment);
  double scale = 1.0;
  for (int e = 0; e < topo.link_count(); ++e) {
    const auto& on = sessions.sessions_on_link(e);
    if (on.empty()) continue;
    double load = 0.0;
    for (int s : on) load += dr.rates.y[s];
    if (!(x[e] > 0.0)) {
      scale = 0.0;
      break;
    }
    if (load > 0.0) scale = std::min(scale, x[e] / load);
  }

  LayeredResult out{dr.assignment, dr.rates, kInf, dr.converged};
  if (scale > 0.0) {
    for (double& ys : out.rates.y) ys *= scale;
    out.objective = w.lambda1 * total_energy(topo, dr.assignment) -
                    w.lambda2 * transport_utility(out.rates);
  }
  return out;
}

std::vector<CrosslayerPoint> crosslayer_frontier(const Topology& topo,
                                                 const SessionSet& sessions,
                                                 const std::vector<double>& lambda1_values,
                                                 double lambda2,
                                                 const CentralizedConfig& ccfg,
                                                 const SolverConfig& scfg) {
  std::vector<CrosslayerPoint> pts(lambda1_values.size());
  parallel_for(lambda1_values.size(), [&](std::size_t k) {
    const TradeoffWeights w{lambda1_values[k], lambda2};
    const CentralizedResult c = centralized_solve(topo, sessions, w, ccfg);
    const LayeredResult staged = layer_by_layer_solve(topo, sessions, w, scfg);
    pts[k] = CrosslayerPoint{w.lambda1,
                             w.lambda2,
                             total_energy(topo, c.assignment),
                             transport_utility(c.rates),
                             c.objective,
                             staged.objective};
  });
  return pts;
}

std::vector<std::string> run_experiment(const ExperimentSpec& spec) {
  namespace fs = std::filesystem;

  std::optional<NetworkDoc> doc;
  std::optional<Topology> topo;
  std::optional<SessionSet> sessions;
  if (spec.topology_file) {
    doc = read_network(*spec.topology_file);
    topo = doc->topo;
    if (!doc->sessions.empty()) sessions.emplace(*topo, doc->sessions);
  } else if (spec.generator) {
    topo = generate_topology(*spec.generator);
    if (spec.generator->session_count > 0)
      sessions = generate_sessions(*topo, spec.generator->session_count,
                                   spec.generator->seed);
  } else if (spec.experiment != "baseline_comparison") {
    throw ValidationError("experiment spec: no topology given");
  }

  if (spec.lambda1_values.empty())
    throw ValidationError("experiment spec: empty lambda1 grid");

  fs::create_directories(spec.output_dir);
  auto out_path = [&](const char* name) {
    return (fs::path(spec.output_dir) / name).string();
  };
  std::vector<std::string> written;

  if (spec.experiment == "mac_frontier") {
    if (!topo) throw ValidationError("mac_frontier: topology required");
    std::vector<TradeoffWeights> weights;
    weights.reserve(spec.lambda1_values.size());
    for (double l1 : spec.lambda1_values) weights.push_back({l1, spec.lambda2});
    const std::vector<ParetoPoint> pts = pareto_sweep_mac(*topo, weights);
    written.push_back(out_path("frontier.csv"));
    write_text_file(written.back(), frontier_csv(pts));
  } else if (spec.experiment == "crosslayer_frontier") {
    if (!topo || !sessions)
      throw ValidationError("crosslayer_frontier: topology with sessions required");
    const std::vector<CrosslayerPoint> pts =
        crosslayer_frontier(*topo, *sessions, spec.lambda1_values, spec.lambda2,
                            spec.centralized, spec.solver);
    written.push_back(out_path("frontier.csv"));
    write_text_file(written.back(), crosslayer_frontier_csv(pts));
    written.push_back(out_path("staged.csv"));
    write_text_file(written.back(), staged_comparison_csv(pts));
  } else if (spec.experiment == "convergence") {
    if (!topo || !sessions)
      throw ValidationError("convergence: topology with sessions required");
    const TradeoffWeights w{spec.lambda1_values.front(), spec.lambda2};
    const DistributedResult dr = distributed_solve(*topo, *sessions, w, spec.solver);
    written.push_back(out_path("trace.csv"));
    write_text_file(written.back(), trace_csv(dr.trace));
    if (!dr.converged)
      throw ConvergenceError("distributed solve did not converge within " +
                             std::to_string(spec.solver.max_iters) + " rounds");
  } else if (spec.experiment == "baseline_comparison") {
    if (!spec.generator)
      throw ValidationError("baseline_comparison: generator config required");
    std::vector<unsigned long long> seeds = spec.seeds;
    if (seeds.empty())
      for (unsigned long long s = 1; s <= 10; ++s) seeds.push_back(s);
    const TradeoffWeights w{spec.lambda1_values.front(), spec.lambda2};
    const std::vector<ComparisonRow> rows = baseline_comparison(*spec.generator, seeds, w);
    written.push_back(out_path("baselines.csv"));
    write_text_file(written.back(), baseline_csv(rows));
  } else {
    throw ValidationError("unknown experiment kind: " + spec.experiment);
  }
  return written;
}

}  // namespace ranumopt
