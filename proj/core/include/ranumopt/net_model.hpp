#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace ranumopt {

struct LinkSpec {
  int from = -1;
  int to = -1;
  double capacity = 1.0;
  bool operator==(const LinkSpec&) const = default;
};

struct Position {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Position&) const = default;
};

// Static description of a slotted random-access network.
//
// Nodes are 0..n-1. Each node i has a per-packet transmit energy e_i and a
// hearing set hear_out(i): the nodes whose reception node i's transmissions
// collide with. Directed links (i,j) carry traffic; a link requires
// j in hear_out(i). A transmission on (i,j) succeeds only if j itself is
// silent and every other node that j can hear is silent.
//
// Links are stored sorted by (from, to), so each node's outgoing links
// occupy a contiguous id range.
class Topology {
 public:
  Topology(std::vector<double> energy_per_packet,
           std::vector<LinkSpec> links,
           std::vector<std::vector<int>> hearing_out,
           std::vector<Position> positions = {});

  int node_count() const { return static_cast<int>(energy_.size()); }
  int link_count() const { return static_cast<int>(links_.size()); }

  double energy(int node) const { return energy_[node]; }
  const std::vector<double>& energies() const { return energy_; }

  const LinkSpec& link(int id) const { return links_[id]; }
  const std::vector<LinkSpec>& links() const { return links_; }

  // Outgoing/incoming link ids of a node; outgoing ids are contiguous.
  const std::vector<int>& out_links(int node) const { return out_links_[node]; }
  const std::vector<int>& in_links(int node) const { return in_links_[node]; }
  int out_degree(int node) const { return static_cast<int>(out_links_[node].size()); }
  int in_degree(int node) const { return static_cast<int>(in_links_[node].size()); }

  // Hearing sets, sorted node ids. hear_in(j) is the set of nodes whose
  // transmissions node j hears (i.e. j in hear_out(i)).
  const std::vector<int>& hear_out(int node) const { return hear_out_[node]; }
  const std::vector<int>& hear_in(int node) const { return hear_in_[node]; }

  // Link id for (from, to), or -1.
  int link_between(int from, int to) const;

  bool has_positions() const { return !positions_.empty(); }
  const std::vector<Position>& positions() const { return positions_; }

  bool operator==(const Topology&) const = default;

 private:
  std::vector<double> energy_;
  std::vector<LinkSpec> links_;
  std::vector<std::vector<int>> hear_out_;
  std::vector<std::vector<int>> hear_in_;
  std::vector<std::vector<int>> out_links_;
  std::vector<std::vector<int>> in_links_;
  std::vector<Position> positions_;
};

// Per-link transmission probabilities p_ij plus the derived per-node totals
// P_i = sum_j p_ij. Each p_ij must lie in [0, 1]. P_i <= 1 is required of a
// feasible assignment but is not enforced here: the distributed update's
// projection step can transiently overshoot node sums, which callers detect
// via max_node_prob_excess() and log rather than silently repair.
class ProbAssignment {
 public:
  ProbAssignment(const Topology& topo, std::vector<double> link_prob);

  // p_ij = node_prob[i] / out_degree(i) on every link; requires
  // node_prob in [0,1] and out_degree >= 1 everywhere.
  static ProbAssignment equal_split(const Topology& topo,
                                    const std::vector<double>& node_prob);

  double link_prob(int link) const { return link_prob_[link]; }
  const std::vector<double>& link_probs() const { return link_prob_; }
  double node_prob(int node) const { return node_prob_[node]; }
  const std::vector<double>& node_probs() const { return node_prob_; }

  // max(0, max_i P_i - 1)
  double max_node_prob_excess() const;
  bool node_feasible(double tol = 1e-9) const { return max_node_prob_excess() <= tol; }

  bool operator==(const ProbAssignment&) const = default;

 private:
  std::vector<double> link_prob_;
  std::vector<double> node_prob_;
};

// End-to-end session rates y_s > 0 (one per session).
struct RateVector {
  std::vector<double> y;
  bool operator==(const RateVector&) const = default;
};

struct Session {
  int source = -1;
  int sink = -1;
  std::vector<int> route;  // consecutive link ids, source -> sink
  bool operator==(const Session&) const = default;
};

// Validated session collection with the link -> sessions reverse index.
class SessionSet {
 public:
  SessionSet(const Topology& topo, std::vector<Session> sessions);

  int session_count() const { return static_cast<int>(sessions_.size()); }
  const Session& session(int s) const { return sessions_[s]; }
  const std::vector<Session>& sessions() const { return sessions_; }

  // Ascending ids of sessions whose route uses the link.
  const std::vector<int>& sessions_on_link(int link) const { return on_link_[link]; }

  bool operator==(const SessionSet&) const = default;

 private:
  std::vector<Session> sessions_;
  std::vector<std::vector<int>> on_link_;
};

// Random geometric instance generator configuration. Nodes are placed
// uniformly in the unit square; node i reaches every node within its
// connectivity radius r_i ~ U[cf_low, cf_high]. When
// interference_equals_communication is false the hearing radius is
// r_i * interference_scale instead, so links remain a (possibly strict)
// subset of the hearing relation.
struct GenConfig {
  int node_count = 0;
  double cf_low = 0.15;
  double cf_high = 0.25;
  bool interference_equals_communication = true;
  double interference_scale = 1.5;
  int session_count = 0;
  std::uint64_t seed = 0;
  int max_attempts = 64;
};

// Draws instances until no node is isolated (out-degree 0), advancing the
// seed by one per attempt. Throws GenerationError after max_attempts.
Topology generate_topology(const GenConfig& cfg);

// Picks `count` distinct (source, sink) pairs at random and routes each on
// the hop-count-shortest path, ties broken toward the lexicographically
// smallest node sequence. Pairs without a directed path are redrawn within
// a bounded budget; throws GenerationError when the budget is exhausted.
SessionSet generate_sessions(const Topology& topo, int count, std::uint64_t seed);

// Per-link success throughput:
//   x_ij = c_ij * p_ij * (1 - P_j) * prod_{l in hear_in(j) \ {i}} (1 - P_l)
std::vector<double> link_throughput(const Topology& topo, const ProbAssignment& pa);

// sum_i e_i * P_i
double total_energy(const Topology& topo, const ProbAssignment& pa);

// sum over links of log x. Throws std::domain_error if any x <= 0.
double mac_utility(const std::vector<double>& throughput);

// sum over sessions of log y. Throws std::domain_error if any y <= 0.
double transport_utility(const RateVector& rates);

}  // namespace ranumopt
