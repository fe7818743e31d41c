#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "instances.hpp"
#include "ranumopt/errors.hpp"
#include "ranumopt/experiments.hpp"
#include "ranumopt/io.hpp"

using namespace ranumopt;
using namespace ranumopt::testing;
namespace fs = std::filesystem;

namespace {

// Node-uniform on the duplex pair has U(P) = 2 log(P(1-P)); the target
// below pins the energy-minimal match at exactly P = 0.2.
constexpr double kNodeTarget = -3.6651629274966204;   // 2 log 0.16
constexpr double kNodePeakUtility = -2.772588722239781;  // 2 log 0.25
constexpr double kDuplexUtility = -2.8872709503576197;   // optimum at weights 1,1
constexpr double kDuplexEnergy = 0.7639320225002102;

fs::path fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / leaf;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("node-uniform baseline matches the duplex closed form") {
  const Topology topo = duplex_pair();
  const BaselineResult r = uniform_node_baseline(topo, kNodeTarget);
  CHECK(r.matched);
  CHECK(std::abs(r.prob - 0.2) <= 1e-6);
  CHECK(std::abs(r.energy - 0.4) <= 1e-6);
  CHECK(std::abs(r.utility - kNodeTarget) <= 1e-6);
  CHECK(std::abs(r.peak_prob - 0.5) <= 1e-6);
  CHECK(std::abs(r.peak_utility - kNodePeakUtility) <= 1e-9);

  // With one out-link per node the link-uniform family is the same curve.
  const BaselineResult l = uniform_link_baseline(topo, kNodeTarget);
  CHECK(l.matched);
  CHECK(std::abs(l.prob - 0.2) <= 1e-6);
  CHECK(std::abs(l.energy - 0.4) <= 1e-6);
}

TEST_CASE("baseline caps at the peak when the target is out of reach") {
  const Topology topo = duplex_pair();
  const BaselineResult r = uniform_node_baseline(topo, -2.0);
  CHECK_FALSE(r.matched);
  CHECK_EQ(r.prob, r.peak_prob);
  CHECK_EQ(r.utility, r.peak_utility);
  CHECK(r.utility < -2.0);
}

TEST_CASE("baseline match stays on the energy-minimal branch") {
  const Topology topo = reference_instance();
  for (const BaselineResult r : {uniform_node_baseline(topo, 0.0),
                                 uniform_link_baseline(topo, 0.0)}) {
    // Probe concavity around the located peak.
    CHECK(r.peak_utility > -std::numeric_limits<double>::infinity());
  }

  const BaselineResult peak_only = uniform_node_baseline(topo, 1e9);
  const double target = peak_only.peak_utility - 0.5;
  const BaselineResult r = uniform_node_baseline(topo, target);
  CHECK(r.matched);
  CHECK(std::abs(r.utility - target) <= 1e-6);
  CHECK(r.prob < r.peak_prob);
  CHECK(r.energy < peak_only.energy);
}

TEST_CASE("weight bisection recovers the duplex matched point") {
  const MatchedPoint m = match_mac_utility(duplex_pair(), 1.0, kDuplexUtility);
  CHECK(m.matched);
  CHECK(std::abs(m.utility - kDuplexUtility) <= 1e-6);
  CHECK(m.utility >= kDuplexUtility - 1e-12);  // conservative side of the target
  CHECK(std::abs(m.energy - kDuplexEnergy) <= 1e-5);
  CHECK(std::abs(m.lambda1 - 1.0) <= 1e-3);
}

TEST_CASE("weight bisection caps at the utility-only optimum") {
  const MatchedPoint m = match_mac_utility(duplex_pair(), 1.0, 10.0);
  CHECK_FALSE(m.matched);
  CHECK_EQ(m.lambda1, 0.0);
  CHECK(m.utility < 10.0);
}

TEST_CASE("optimized persistence dominates both uniform baselines") {
  const TradeoffWeights w{1.0, 1.0};
  for (unsigned long long seed = 1; seed <= 5; ++seed) {
    GenConfig cfg = reference_config();
    cfg.seed = seed;
    const Topology topo = generate_topology(cfg);
    const ComparisonRow row = compare_against_baselines(topo, seed, w);
    CHECK_EQ(row.seed, seed);
    CHECK(row.node_matched);
    CHECK(row.link_matched);
    CHECK(row.energy_optimal <= row.energy_node + 1e-9);
    CHECK(row.energy_node <= row.energy_link + 1e-9);
    CHECK(std::isfinite(row.target_utility));
  }
}

TEST_CASE("batched comparison equals the per-instance calls") {
  const TradeoffWeights w{1.0, 1.0};
  const std::vector<unsigned long long> seeds = {1, 2, 3};
  const std::vector<ComparisonRow> rows =
      baseline_comparison(reference_config(), seeds, w);
  REQUIRE_EQ(rows.size(), seeds.size());
  for (size_t k = 0; k < seeds.size(); ++k) {
    GenConfig cfg = reference_config();
    cfg.seed = seeds[k];
    const ComparisonRow solo =
        compare_against_baselines(generate_topology(cfg), seeds[k], w);
    CHECK_EQ(rows[k].seed, solo.seed);
    CHECK_EQ(rows[k].target_utility, solo.target_utility);
    CHECK_EQ(rows[k].energy_optimal, solo.energy_optimal);
    CHECK_EQ(rows[k].energy_node, solo.energy_node);
    CHECK_EQ(rows[k].energy_link, solo.energy_link);
    CHECK_EQ(rows[k].node_matched, solo.node_matched);
    CHECK_EQ(rows[k].link_matched, solo.link_matched);
  }
}

TEST_CASE("staged design never beats the joint design") {
  const Topology topo = reference_instance();
  const SessionSet sessions = reference_sessions(topo);
  const std::vector<double> grid = {0.0, 1.0, 5.0, 15.0, 30.0};
  const std::vector<CrosslayerPoint> pts = crosslayer_frontier(topo, sessions, grid, 1.0);
  REQUIRE_EQ(pts.size(), grid.size());

  for (size_t k = 0; k < pts.size(); ++k) {
    CHECK_EQ(pts[k].lambda1, grid[k]);
    CHECK_EQ(pts[k].lambda2, 1.0);
    CHECK(pts[k].staged_objective >=
          pts[k].joint_objective - 1e-5 * std::max(1.0, std::abs(pts[k].joint_objective)));
    if (k > 0) {
      CHECK(pts[k].energy <= pts[k - 1].energy + 1e-7);
      CHECK(pts[k].utility <= pts[k - 1].utility + 1e-7);
      CHECK(pts[k].joint_objective >= pts[k - 1].joint_objective - 1e-9);
    }
  }
}

TEST_CASE("staged equals joint when the layers do not interact") {
  // One single-hop session per duplex link: the transport utility then IS
  // the MAC utility, so solving the MAC layer first loses nothing and both
  // stages land on the same closed-form point.
  const Topology topo = duplex_pair();
  const SessionSet sessions(topo, {Session{0, 1, {0}}, Session{1, 0, {1}}});
  const TradeoffWeights w{1.0, 1.0};

  const LayeredResult layered = layer_by_layer_solve(topo, sessions, w);
  CHECK(std::abs(layered.assignment.node_prob(0) - 0.3819660112501051) <= 1e-9);
  CHECK(std::abs(layered.objective - 3.65120297285783) <= 1e-3);

  const std::vector<CrosslayerPoint> pts =
      crosslayer_frontier(topo, sessions, {1.0}, 1.0);
  REQUIRE_EQ(pts.size(), 1);
  CHECK(std::abs(pts[0].staged_objective - pts[0].joint_objective) <=
        1e-3 * std::max(1.0, std::abs(pts[0].joint_objective)));
}

TEST_CASE("frontier evaluation is deterministic under parallelism") {
  const Topology topo = reference_instance();
  const SessionSet sessions = reference_sessions(topo);
  const std::vector<double> grid = {0.0, 2.0, 8.0};
  const std::vector<CrosslayerPoint> a = crosslayer_frontier(topo, sessions, grid, 1.0);
  const std::vector<CrosslayerPoint> b = crosslayer_frontier(topo, sessions, grid, 1.0);
  REQUIRE_EQ(a.size(), b.size());
  for (size_t k = 0; k < a.size(); ++k) {
    CHECK_EQ(a[k].energy, b[k].energy);
    CHECK_EQ(a[k].utility, b[k].utility);
    CHECK_EQ(a[k].joint_objective, b[k].joint_objective);
    CHECK_EQ(a[k].staged_objective, b[k].staged_objective);
  }
}

TEST_CASE("experiment runner writes the declared artifacts deterministically") {
  ExperimentSpec spec;
  spec.experiment = "crosslayer_frontier";
  spec.generator = reference_config();
  spec.lambda1_values = {0.0, 5.0};
  spec.lambda2 = 1.0;

  const fs::path dir_a = fresh_dir("ranumopt_exp_a");
  const fs::path dir_b = fresh_dir("ranumopt_exp_b");
  spec.output_dir = dir_a.string();
  const std::vector<std::string> first = run_experiment(spec);
  spec.output_dir = dir_b.string();
  const std::vector<std::string> second = run_experiment(spec);

  REQUIRE_EQ(first.size(), 2);
  REQUIRE_EQ(second.size(), 2);
  for (size_t k = 0; k < first.size(); ++k) {
    CAPTURE(first[k]);
    REQUIRE(fs::exists(first[k]));
    CHECK_EQ(read_text_file(first[k]), read_text_file(second[k]));
  }
  CHECK_EQ(fs::path(first[0]).filename().string(), "frontier.csv");
  CHECK_EQ(fs::path(first[1]).filename().string(), "staged.csv");

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("experiment runner covers every experiment kind") {
  const fs::path dir = fresh_dir("ranumopt_exp_kinds");

  ExperimentSpec mac;
  mac.experiment = "mac_frontier";
  mac.generator = reference_config();
  mac.lambda1_values = {0.0, 1.0, 5.0};
  mac.output_dir = (dir / "mac").string();
  const std::vector<std::string> mac_files = run_experiment(mac);
  REQUIRE_EQ(mac_files.size(), 1);
  CHECK(read_text_file(mac_files[0]).starts_with("lambda1,lambda2,energy,utility\n"));

  ExperimentSpec conv;
  conv.experiment = "convergence";
  conv.generator = reference_config();
  conv.lambda1_values = {5.0};
  conv.output_dir = (dir / "conv").string();
  const std::vector<std::string> conv_files = run_experiment(conv);
  REQUIRE_EQ(conv_files.size(), 1);
  CHECK(read_text_file(conv_files[0]).starts_with("iter,quantity,id,value\n"));

  ExperimentSpec base;
  base.experiment = "baseline_comparison";
  base.generator = reference_config();
  base.seeds = {1, 2};
  base.output_dir = (dir / "base").string();
  const std::vector<std::string> base_files = run_experiment(base);
  REQUIRE_EQ(base_files.size(), 1);
  CHECK(read_text_file(base_files[0])
            .starts_with("seed,target_utility,energy_optimal"));

  ExperimentSpec bogus;
  bogus.experiment = "does_not_exist";
  bogus.generator = reference_config();
  bogus.output_dir = (dir / "bogus").string();
  CHECK_THROWS_AS(run_experiment(bogus), ValidationError);

  fs::remove_all(dir);
}
