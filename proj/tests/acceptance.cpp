// Acceptance gate: one line per criterion, [PASS]/[FAIL], exit code equal to
// the number of failures. Each criterion is self-contained and uses only
// public library entry points plus independent oracles (grids, finite
// differences, closed forms).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "instances.hpp"
#include "ranumopt/crosslayer.hpp"
#include "ranumopt/experiments.hpp"
#include "ranumopt/io.hpp"
#include "ranumopt/mac_solver.hpp"
#include "ranumopt/rng.hpp"

using namespace ranumopt;
using namespace ranumopt::testing;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// 1. The separated per-node solver matches a dense composed-objective grid.

void criterion_grid_oracle(Check& c) {
  const auto start = std::chrono::steady_clock::now();
  const double step = 1e-3;
  for (const Topology& topo : {duplex_pair(), contention_triangle(), quiet_head_chain()}) {
    for (const TradeoffWeights w :
         {TradeoffWeights{1.0, 1.0}, TradeoffWeights{3.0, 0.5}, TradeoffWeights{0.2, 2.0}}) {
      const ProbAssignment exact = solve_mac(topo, w);
      const ProbAssignment grid = brute_force_mac(topo, w, step);
      const double fe = composed_mac_objective(topo, w, exact);
      const double fg = composed_mac_objective(topo, w, grid);
      c.require(fe <= fg + 5e-3, "solver objective above the grid optimum");
      c.require(fg - fe <= 5e-3, "grid and solver objectives differ by more than 5e-3");
      for (int i = 0; i < topo.node_count(); ++i)
        c.require(std::abs(exact.node_prob(i) - grid.node_prob(i)) <= 2e-3,
                  "per-node probability off the grid optimum by more than 2e-3");
    }
  }
  c.require(seconds_since(start) < 10.0, "grid comparison exceeded 10 s");
}

// ---------------------------------------------------------------------------
// 2. Closed forms: the duplex analytic optimum and the exact utility-only
//    degree-ratio identity on generated instances.

void criterion_closed_forms(Check& c) {
  const Topology dup = duplex_pair();
  const ProbAssignment pa = solve_mac(dup, TradeoffWeights{1.0, 1.0});
  const double root = (3.0 - std::sqrt(5.0)) / 2.0;
  c.require(std::abs(pa.node_prob(0) - root) <= 1e-9 &&
                std::abs(pa.node_prob(1) - root) <= 1e-9,
            "duplex optimum missed the analytic root");

  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    GenConfig cfg;
    cfg.node_count = 8;
    cfg.cf_low = 0.35;  // sparse instances this small need a generous radius
    cfg.cf_high = 0.55;
    cfg.seed = seed;
    const Topology topo = generate_topology(cfg);
    const ProbAssignment upa = solve_mac(topo, TradeoffWeights{0.0, 1.0});
    for (int i = 0; i < topo.node_count(); ++i) {
      long count = topo.in_degree(i) - topo.out_degree(i);
      for (int k : topo.hear_out(i)) count += topo.in_degree(k);
      const double out = static_cast<double>(topo.out_degree(i));
      const double expected = out / (out + static_cast<double>(count));
      for (int e : topo.out_links(i))
        c.require(upa.link_prob(e) == expected / out,
                  "utility-only optimum is not the exact degree ratio");
      c.require(std::abs(upa.node_prob(i) - expected) <= 1e-15,
                "node total drifted from the degree ratio");
    }
  }
}

// ---------------------------------------------------------------------------
// 3. Finite differences confirm both derivative forms.

void criterion_finite_differences(Check& c) {
  const Topology topo = reference_instance();
  const int n = topo.node_count();
  Rng rng(7);
  const TradeoffWeights w{1.3, 0.7};

  for (int t = 0; t < 10; ++t) {
    std::vector<double> P(n);
    for (double& v : P) v = rng.uniform(0.05, 0.9);
    const std::vector<double> g = mac_gradient(topo, w, P);
    const double h = 1e-6;
    for (int i = 0; i < n; ++i) {
      std::vector<double> up = P, dn = P;
      up[i] += h;
      dn[i] -= h;
      const double fd = (mac_objective(topo, w, ProbAssignment::equal_split(topo, up)) -
                         mac_objective(topo, w, ProbAssignment::equal_split(topo, dn))) /
                        (2.0 * h);
      c.require(std::abs(g[i] - fd) <= 1e-6 * std::max(1.0, std::abs(g[i])),
                "per-node gradient disagrees with central differences");
    }
  }

  std::vector<double> lp(topo.link_count());
  for (double& v : lp) v = rng.uniform(0.02, 0.6);
  for (int i = 0; i < n; ++i) {
    double total = 0.0;
    for (int e : topo.out_links(i)) total += lp[e];
    if (total > 0.9)
      for (int e : topo.out_links(i)) lp[e] *= 0.9 / total;
  }
  const ProbAssignment pa(topo, lp);
  const double h = 1e-7;
  for (int e = 0; e < topo.link_count(); ++e) {
    const std::vector<double> d = throughput_partials(topo, pa, e);
    std::vector<double> up = lp, dn = lp;
    up[e] += h;
    dn[e] -= h;
    const std::vector<double> xu = link_throughput(topo, ProbAssignment(topo, up));
    const std::vector<double> xd = link_throughput(topo, ProbAssignment(topo, dn));
    for (int f = 0; f < topo.link_count(); ++f) {
      const double fd = (xu[f] - xd[f]) / (2.0 * h);
      c.require(std::abs(d[f] - fd) <= 1e-5 * std::max(1e-3, std::abs(d[f])),
                "throughput partials disagree with central differences");
    }
  }
}

// ---------------------------------------------------------------------------
// 4. Strict convexity of the per-node objective on (0, 1).

void criterion_convexity(Check& c) {
  const Topology topo = reference_instance();
  const int n = topo.node_count();
  const TradeoffWeights w{2.0, 1.5};
  Rng rng(23);

  for (int t = 0; t < 100; ++t) {
    const double p = rng.uniform(1e-3, 1.0 - 2e-3);
    const std::vector<double> lo = mac_gradient(topo, w, std::vector<double>(n, p));
    const std::vector<double> hi = mac_gradient(topo, w, std::vector<double>(n, p + 1e-3));
    for (int i = 0; i < n; ++i)
      c.require(hi[i] > lo[i], "derivative not strictly increasing");
  }

  const MacCoefficients mc = mac_coefficients(topo, w);
  const std::vector<double> near0 = mac_gradient(topo, w, std::vector<double>(n, 1e-6));
  const std::vector<double> near1 =
      mac_gradient(topo, w, std::vector<double>(n, 1.0 - 1e-6));
  for (int i = 0; i < n; ++i) {
    if (mc.b[i] > 0.0) c.require(near0[i] < 0.0, "derivative not negative near zero");
    if (mc.c[i] > 0.0) c.require(near1[i] > 0.0, "derivative not positive near one");
  }
}

// ---------------------------------------------------------------------------
// 5. Distributed and centralized solutions agree on the reference instance.

void criterion_solver_agreement(Check& c) {
  const auto start = std::chrono::steady_clock::now();
  const Topology topo = reference_instance();
  const SessionSet sessions = reference_sessions(topo);
  const TradeoffWeights w{5.0, 1.0};

  SolverConfig cfg;
  cfg.record_dual = false;
  const DistributedResult dist = distributed_solve(topo, sessions, w, cfg);
  const CentralizedResult cent = centralized_solve(topo, sessions, w);

  c.require(dist.converged, "distributed solve did not converge");
  c.require(cent.converged, "centralized solve did not converge");
  c.require(std::abs(dist.objective - cent.objective) <= 0.01 * std::abs(cent.objective),
            "objectives differ by more than 1%");

  const std::vector<double> x = link_throughput(topo, dist.assignment);
  std::vector<double> load(topo.link_count(), 0.0);
  for (int s = 0; s < sessions.session_count(); ++s)
    for (int e : sessions.session(s).route) load[e] += dist.rates.y[s];
  for (int e = 0; e < topo.link_count(); ++e)
    c.require(load[e] - x[e] <= 1e-4 * std::max(1.0, x[e]) + 1e-12,
              "distributed iterate violates a link capacity");

  const std::vector<double> cx = link_throughput(topo, cent.assignment);
  std::vector<double> cload(topo.link_count(), 0.0);
  for (int s = 0; s < sessions.session_count(); ++s)
    for (int e : sessions.session(s).route) cload[e] += cent.rates.y[s];
  for (int e = 0; e < topo.link_count(); ++e) {
    c.require(cent.link_prices[e] >= 0.0, "negative capacity price");
    if (sessions.sessions_on_link(e).empty()) continue;
    c.require(cload[e] <= cx[e], "centralized iterate violates a link capacity");
    const double slack = std::log(cx[e]) - std::log(cload[e]);
    c.require(cent.link_prices[e] * slack <= 1e-3, "complementary slackness violated");
  }
  c.require(seconds_since(start) < 60.0, "solver comparison exceeded 60 s");
}

// ---------------------------------------------------------------------------
// 6. The distributed loop converges within the iteration budget and its
//    per-round movement dies down monotonically over late windows.

void criterion_convergence_profile(Check& c) {
  const Topology topo = reference_instance();
  const SessionSet sessions = reference_sessions(topo);
  SolverConfig cfg;
  cfg.record_dual = false;
  const DistributedResult res =
      distributed_solve(topo, sessions, TradeoffWeights{5.0, 1.0}, cfg);

  c.require(res.converged, "did not converge");
  c.require(res.iterations <= 2000, "needed more than 2000 rounds");

  const std::vector<IterationRecord>& recs = res.trace.records;
  const size_t half = recs.size() / 2;
  std::vector<double> window_max;
  for (size_t at = half; at + 100 <= recs.size(); at += 100) {
    double m = 0.0;
    for (size_t k = at; k < at + 100; ++k) m = std::max(m, recs[k].max_change);
    window_max.push_back(m);
  }
  c.require(window_max.size() >= 2, "run too short to measure the decay profile");
  for (size_t k = 1; k < window_max.size(); ++k)
    c.require(window_max[k] <= 1.1 * window_max[k - 1],
              "late-round movement is not shrinking");
}

// ---------------------------------------------------------------------------
// 7. Energy and utility are monotone along both tradeoff frontiers.

void criterion_frontier_monotone(Check& c) {
  const Topology topo = reference_instance();

  std::vector<TradeoffWeights> weights;
  for (double l1 : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0})
    weights.push_back({l1, 1.0});
  const std::vector<ParetoPoint> mac = pareto_sweep_mac(topo, weights);
  for (size_t k = 1; k < mac.size(); ++k) {
    c.require(mac[k].energy <= mac[k - 1].energy + 1e-9, "MAC energy not nonincreasing");
    c.require(mac[k].utility <= mac[k - 1].utility + 1e-7,
              "MAC utility not nonincreasing");
  }

  const SessionSet sessions = reference_sessions(topo);
  const std::vector<double> grid = {0.0, 1.0, 5.0, 15.0, 30.0};
  const std::vector<CrosslayerPoint> joint = crosslayer_frontier(topo, sessions, grid, 1.0);
  for (size_t k = 1; k < joint.size(); ++k) {
    c.require(joint[k].energy <= joint[k - 1].energy + 1e-5,
              "joint energy not nonincreasing");
    c.require(joint[k].utility <= joint[k - 1].utility + 1e-5,
              "joint utility not nonincreasing");
  }
}

// ---------------------------------------------------------------------------
// 8. The optimized design dominates both uniform baselines at matched
//    utility, and the joint design never loses to the staged one.

void criterion_dominance(Check& c) {
  std::vector<unsigned long long> seeds;
  for (unsigned long long s = 1; s <= 20; ++s) seeds.push_back(s);
  const std::vector<ComparisonRow> rows =
      baseline_comparison(reference_config(), seeds, TradeoffWeights{1.0, 1.0});

  double node_savings = 0.0, link_savings = 0.0;
  for (const ComparisonRow& r : rows) {
    c.require(r.node_matched && r.link_matched, "a baseline failed to match the target");
    c.require(r.energy_optimal <= r.energy_node + 1e-9,
              "node-uniform baseline beat the optimum");
    c.require(r.energy_node <= r.energy_link + 1e-9,
              "link-uniform baseline beat node-uniform");
    node_savings += (r.energy_node - r.energy_optimal) / r.energy_node;
    link_savings += (r.energy_link - r.energy_optimal) / r.energy_link;
  }
  node_savings /= static_cast<double>(rows.size());
  link_savings /= static_cast<double>(rows.size());
  c.require(node_savings > 1e-3, "no mean energy saving over node-uniform");
  c.require(link_savings > 1e-3, "no mean energy saving over link-uniform");

  const Topology topo = reference_instance();
  const SessionSet sessions = reference_sessions(topo);
  const std::vector<CrosslayerPoint> pts =
      crosslayer_frontier(topo, sessions, {0.0, 1.0, 5.0, 15.0, 30.0}, 1.0);
  for (const CrosslayerPoint& p : pts)
    c.require(p.staged_objective >=
                  p.joint_objective - 1e-5 * std::max(1.0, std::abs(p.joint_objective)),
              "staged design beat the joint design");
}

// ---------------------------------------------------------------------------
// 9. Every recorded dual value lower-bounds every feasible objective.

void criterion_weak_duality(Check& c) {
  const Topology topo = reference_instance();
  const SessionSet sessions = reference_sessions(topo);
  SolverConfig cfg;  // dual recording on
  const DistributedResult res =
      distributed_solve(topo, sessions, TradeoffWeights{5.0, 1.0}, cfg);

  c.require(std::isfinite(res.best_feasible_objective), "no feasible incumbent found");
  const double slack = 1e-9 * std::max(1.0, std::abs(res.best_feasible_objective));
  int recorded = 0;
  for (const IterationRecord& rec : res.trace.records) {
    if (std::isnan(rec.dual_value)) continue;
    ++recorded;
    c.require(rec.dual_value <= res.best_feasible_objective + slack,
              "a dual value exceeded a feasible objective");
  }
  c.require(recorded == res.iterations, "dual values missing from the trace");
}

// ---------------------------------------------------------------------------
// 10. Artifacts are bitwise reproducible.

void criterion_reproducibility(Check& c) {
  const fs::path base = fs::temp_directory_path() / "ranumopt_acceptance";
  fs::remove_all(base);

  ExperimentSpec spec;
  spec.experiment = "mac_frontier";
  spec.generator = reference_config();
  spec.lambda1_values = {0.0, 1.0, 5.0, 15.0, 30.0};
  spec.output_dir = (base / "a").string();
  const std::vector<std::string> first = run_experiment(spec);
  spec.output_dir = (base / "b").string();
  const std::vector<std::string> second = run_experiment(spec);
  c.require(first.size() == second.size() && !first.empty(), "artifact lists differ");
  for (size_t k = 0; k < first.size() && k < second.size(); ++k)
    c.require(read_text_file(first[k]) == read_text_file(second[k]),
              "rerun produced different bytes");

  const Topology topo = reference_instance();
  const SessionSet sessions = reference_sessions(topo);
  const NetworkDoc doc{topo, sessions.sessions(), std::nullopt, std::nullopt};
  const std::string text = serialize_network(doc);
  c.require(serialize_network(parse_network(text)) == text,
            "network round trip changed bytes");

  SolverConfig cfg;
  cfg.max_iters = 300;
  cfg.record_dual = false;
  const TradeoffWeights w{5.0, 1.0};
  const DistributedResult a = distributed_solve(topo, sessions, w, cfg);
  const DistributedResult b = distributed_solve(topo, sessions, w, cfg);
  c.require(a.assignment == b.assignment && a.rates == b.rates && a.duals == b.duals,
            "distributed solve is not deterministic");

  fs::remove_all(base);
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Check&)> fn;
  };
  const std::vector<Criterion> criteria = {
      {"separated solver matches a dense composed-objective grid", criterion_grid_oracle},
      {"closed forms: duplex root and exact utility-only degree ratio",
       criterion_closed_forms},
      {"finite differences confirm both derivative forms", criterion_finite_differences},
      {"per-node objective is strictly convex on (0,1)", criterion_convexity},
      {"distributed and centralized solutions agree within 1%", criterion_solver_agreement},
      {"distributed loop converges within 2000 rounds and settles",
       criterion_convergence_profile},
      {"energy and utility are monotone along both frontiers",
       criterion_frontier_monotone},
      {"optimized design dominates uniform baselines and staging",
       criterion_dominance},
      {"weak duality holds for every recorded round", criterion_weak_duality},
      {"artifacts are bitwise reproducible", criterion_reproducibility},
  };

  int failures = 0;
  for (size_t k = 0; k < criteria.size(); ++k) {
    Check c;
    try {
      criteria[k].fn(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    if (c.ok) {
      std::printf("[PASS] %zu. %s\n", k + 1, criteria[k].name);
    } else {
      ++failures;
      std::printf("[FAIL] %zu. %s — %s\n", k + 1, criteria[k].name, c.detail.c_str());
    }
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures;
}
